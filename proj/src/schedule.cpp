#include "mgmac/schedule.hpp"

#include <algorithm>

namespace mgmac {

Schedule::Schedule(std::vector<LinkId> active) : active_(std::move(active)) {
    std::sort(active_.begin(), active_.end());
    active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
}

bool Schedule::contains(LinkId l) const {
    return std::binary_search(active_.begin(), active_.end(), l);
}

void Schedule::add(LinkId l) {
    auto it = std::lower_bound(active_.begin(), active_.end(), l);
    if (it == active_.end() || *it != l) active_.insert(it, l);
}

void Schedule::remove(LinkId l) {
    auto it = std::lower_bound(active_.begin(), active_.end(), l);
    if (it != active_.end() && *it == l) active_.erase(it);
}

std::map<BandIndex, std::vector<LinkId>> Schedule::by_band(const LinkSet& links) const {
    std::map<BandIndex, std::vector<LinkId>> out;
    for (LinkId l : active_) out[links[l].band].push_back(l);
    return out;
}

std::vector<int> Schedule::radios_used(const LinkSet& links) const {
    std::vector<int> used(links.num_nodes(), 0);
    for (LinkId l : active_) {
        ++used[links[l].tail];
        ++used[links[l].head];
    }
    return used;
}

std::optional<Violation> validate_schedule(const Schedule& s, const LinkSet& links) {
    const auto& a = s.active();
    for (LinkId l : a)
        if (l < 0 || l >= links.size())
            return Violation{ViolationKind::Interference, l, kNoLink, kNoNode,
                             "unknown link " + std::to_string(l)};
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (links.interferes(a[i], a[j]))
                return Violation{ViolationKind::Interference, a[i], a[j], kNoNode,
                                 "SI: links " + std::to_string(a[i]) + " and " +
                                     std::to_string(a[j]) + " interfere"};
    const std::vector<int> used = s.radios_used(links);
    for (int v = 0; v < links.num_nodes(); ++v)
        if (used[v] > links.radios(v))
            return Violation{ViolationKind::MaxRadio, kNoLink, kNoLink, v,
                             "MR: node " + std::to_string(v) + " has " +
                                 std::to_string(used[v]) + " active links for " +
                                 std::to_string(links.radios(v)) + " radios"};
    std::vector<std::vector<LinkId>> at(links.num_nodes());
    for (LinkId l : a) {
        at[links[l].tail].push_back(l);
        at[links[l].head].push_back(l);
    }
    for (int v = 0; v < links.num_nodes(); ++v)
        for (std::size_t i = 0; i < at[v].size(); ++i)
            for (std::size_t j = i + 1; j < at[v].size(); ++j)
                if (links[at[v][i]].band == links[at[v][j]].band)
                    return Violation{ViolationKind::SharedBand, at[v][i], at[v][j], v,
                                     "MR: node " + std::to_string(v) + " has links " +
                                         std::to_string(at[v][i]) + " and " +
                                         std::to_string(at[v][j]) + " on one band"};
    return std::nullopt;
}

void require_feasible(const Schedule& s, const LinkSet& links, const char* who) {
    if (auto v = validate_schedule(s, links))
        throw ContractViolation(std::string(who) + " emitted an infeasible schedule: " + v->what);
}

bool can_add(const std::vector<LinkId>& active, LinkId l, const LinkSet& links) {
    const GeneralizedLink& g = links[l];
    int at_tail = 0;
    int at_head = 0;
    for (LinkId o : active) {
        if (o == l || links.interferes(o, l)) return false;
        const GeneralizedLink& h = links[o];
        const bool touches_tail = h.tail == g.tail || h.head == g.tail;
        const bool touches_head = h.tail == g.head || h.head == g.head;
        if ((touches_tail || touches_head) && h.band == g.band) return false;
        at_tail += touches_tail;
        at_head += touches_head;
    }
    return at_tail < links.radios(g.tail) && at_head < links.radios(g.head);
}

Weight schedule_weight(const std::vector<LinkId>& active, const std::vector<std::int64_t>& q,
                       const LinkSet& links) {
    Weight w = 0;
    for (LinkId l : active) w += link_weight(l, q, links);
    return w;
}

}  // namespace mgmac
