#include "mgmac/sched_sync.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgmac {

LossReport compute_loss(NodeId v, BandIndex band, const Schedule& prev,
                        const std::vector<std::int64_t>& q, const LinkSet& links, GainForm form) {
    LossReport out;
    std::vector<LinkId> at_v;
    for (LinkId l : prev.active()) {
        const GeneralizedLink& g = links[l];
        if (g.tail == v || g.head == v) at_v.push_back(l);
    }
    for (LinkId l : at_v)
        if (links[l].band == band) {
            out.displaced.push_back(l);
            out.loss += link_value(l, q, links, form);
        }
    if (!out.displaced.empty()) return out;
    if (static_cast<int>(at_v.size()) >= links.radios(v) && !at_v.empty()) {
        LinkId pick = at_v.front();
        for (LinkId l : at_v)
            if (link_value(l, q, links, form) < link_value(pick, q, links, form)) pick = l;
        out.displaced.push_back(pick);
        out.loss = link_value(pick, q, links, form);
    }
    return out;
}

GainReport compute_gain(NodeId v, BandIndex band, const std::vector<std::int64_t>& q,
                        const LinkSet& links, const LossReport& loss, GainForm form) {
    GainReport r;
    r.node = v;
    r.band = band;
    Weight best = -1;
    for (LinkId l : links.outgoing(v)) {
        if (links[l].band != band) continue;
        const Weight val = link_value(l, q, links, form);
        if (val > best) {
            best = val;
            r.best_link = l;
        }
    }
    if (r.best_link != kNoLink) {
        r.gain = std::max<Weight>(0, best - loss.loss);
        r.displaced = loss.displaced;
    }
    return r;
}

double local_max_c1() { return 1.0 / std::log(9.0 / 8.0); }
double local_max_c2() { return local_max_c1() / std::log(1.5); }

int local_max_period(int n) {
    const double ln = std::log(static_cast<double>(std::max(1, n)));
    return std::max(1, static_cast<int>(std::ceil(local_max_c1() * (1.0 + ln))));
}

int local_max_budget(int n) {
    const double ln = std::log(static_cast<double>(std::max(1, n)));
    return static_cast<int>(std::ceil(local_max_c2() * ln * (1.0 + ln)));
}

LocalMaxResult local_max(const std::vector<NodeId>& members, const std::vector<Weight>& gains,
                         RngStream& rng, LocalMaxMode mode) {
    LocalMaxResult res;
    const int n = static_cast<int>(members.size());
    Weight true_max = 0;
    for (int i = 0; i < n; ++i) true_max = std::max(true_max, gains[i]);

    if (mode == LocalMaxMode::Oracle || true_max == 0) {
        for (int i = 0; i < n; ++i)
            if (gains[i] > 0 && (res.winner == kNoNode || gains[i] > res.gain ||
                                 (gains[i] == res.gain && members[i] < res.winner))) {
                res.winner = members[i];
                res.gain = gains[i];
            }
        res.success = res.gain == true_max;
        return res;
    }

    std::vector<int> cand;
    for (int i = 0; i < n; ++i)
        if (gains[i] > 0) cand.push_back(i);
    if (n == 1) {   // a lone member has nobody to contend with
        res.winner = members[0];
        res.gain = gains[0];
        res.success = true;
        return res;
    }

    const int budget = local_max_budget(n);
    const int period = local_max_period(n);
    double p = 1.0 / (2.0 * n);
    std::vector<int> sending;
    for (int slot = 0; slot < budget && !cand.empty(); ++slot) {
        if (slot > 0 && slot % period == 0) p = std::min(1.0, p * 1.5);
        res.minislots = slot + 1;
        sending.clear();
        for (int i : cand)
            if (rng.bernoulli(p)) sending.push_back(i);
        if (sending.size() != 1) continue;
        const int who = sending.front();
        const Weight g = gains[who];
        ++res.announcements;
        res.winner = members[who];
        res.gain = g;
        std::erase_if(cand, [&](int i) { return gains[i] <= g; });
    }
    res.success = res.winner != kNoNode && res.gain == true_max;
    return res;
}

std::vector<LinkId> contention_resolve(const std::vector<LinkId>& winners, const LinkSet& links,
                                       RngStream& rng) {
    std::vector<LinkId> pool = winners;
    std::vector<LinkId> accepted;
    while (!pool.empty()) {
        const auto k = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
        const LinkId l = pool[k];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
        if (can_add(accepted, l, links)) accepted.push_back(l);
    }
    return accepted;
}

MaximalGainScheduler::MaximalGainScheduler(const LinkSet& links, const Grouping& grouping,
                                           MaxGainConfig cfg, std::uint64_t seed)
    : links_(links),
      grouping_(grouping),
      cfg_(cfg),
      contention_rng_(seed, StreamFamily::Contention, 0) {
    if (cfg_.repeats < 1) throw ConfigError("scheduler.repeats must be ≥ 1");
    int largest = 1;
    for (int g = 0; g < grouping_.size(); ++g) {
        band_rng_.emplace_back(seed, StreamFamily::GroupBand, grouping_.seed_of_group[g]);
        lmax_rng_.emplace_back(seed, StreamFamily::LocalMax, static_cast<std::uint64_t>(g));
        largest = std::max(largest, static_cast<int>(grouping_.groups[g].members.size()));
    }
    minislots_per_slot_ = static_cast<std::int64_t>(std::max(1, grouping_.chi)) *
                          local_max_budget(largest) * cfg_.repeats;
}

StepReport MaximalGainScheduler::step(const Schedule& prev, const std::vector<std::int64_t>& q) {
    StepReport rep;
    rep.minislots = minislots_per_slot_;
    const int m = links_.num_bands();

    std::vector<LinkId> winners;
    std::vector<std::vector<LinkId>> displaced_of(links_.size());
    std::vector<Weight> gains;
    std::vector<GainReport> reports;
    for (int g = 0; g < grouping_.size(); ++g) {
        const Group& grp = grouping_.groups[g];
        const BandIndex band = static_cast<BandIndex>(band_rng_[g].uniform_int(0, m - 1));
        gains.clear();
        reports.clear();
        for (NodeId v : grp.members) {
            const LossReport loss = compute_loss(v, band, prev, q, links_, cfg_.form);
            reports.push_back(compute_gain(v, band, q, links_, loss, cfg_.form));
            gains.push_back(reports.back().gain);
        }
        LocalMaxResult best;
        for (int r = 0; r < cfg_.repeats; ++r) {
            LocalMaxResult res = local_max(grp.members, gains, lmax_rng_[g], cfg_.mode);
            if (res.winner != kNoNode && (best.winner == kNoNode || res.gain > best.gain))
                best = res;
        }
        const Weight true_max = *std::max_element(gains.begin(), gains.end());
        if (best.gain != true_max) ++rep.local_max_misses;
        if (best.winner == kNoNode) continue;
        const auto idx = std::find(grp.members.begin(), grp.members.end(), best.winner) -
                         grp.members.begin();
        const GainReport& gr = reports[idx];
        winners.push_back(gr.best_link);
        displaced_of[gr.best_link] = gr.displaced;
        ++rep.groups_with_winner;
    }

    rep.hp_links = contention_resolve(winners, links_, contention_rng_);

    std::vector<char> drop(links_.size(), 0);
    for (LinkId h : rep.hp_links) {
        for (LinkId d : displaced_of[h]) drop[d] = 1;
        for (LinkId i : links_[h].interferers) drop[i] = 1;
    }
    std::vector<LinkId> survivors;
    for (LinkId l : prev.active())
        if (!drop[l]) survivors.push_back(l);

    // Radio repair: an HP link may land on a node (typically its head) whose
    // radios are all held by surviving links; the least valuable one yields.
    for (int v = 0; v < links_.num_nodes(); ++v) {
        auto touches = [&](LinkId l) { return links_[l].tail == v || links_[l].head == v; };
        int count = 0;
        for (LinkId h : rep.hp_links) count += touches(h);
        std::vector<LinkId> here;
        for (LinkId s : survivors)
            if (touches(s)) here.push_back(s);
        while (count + static_cast<int>(here.size()) > links_.radios(v) && !here.empty()) {
            auto it = std::min_element(here.begin(), here.end(), [&](LinkId a, LinkId b) {
                const Weight va = link_value(a, q, links_, cfg_.form);
                const Weight vb = link_value(b, q, links_, cfg_.form);
                return va < vb || (va == vb && a < b);
            });
            const LinkId victim = *it;
            here.erase(it);
            std::erase(survivors, victim);
        }
    }

    std::vector<LinkId> all = survivors;
    all.insert(all.end(), rep.hp_links.begin(), rep.hp_links.end());
    rep.schedule = Schedule(std::move(all));
    require_feasible(rep.schedule, links_, "maximal_gain_step");

    rep.w_prev = schedule_weight(prev.active(), q, links_);
    rep.w_new = schedule_weight(rep.schedule.active(), q, links_);
    for (LinkId l : rep.schedule.active())
        if (!prev.contains(l)) rep.w_plus += link_weight(l, q, links_);
    for (LinkId l : prev.active())
        if (!rep.schedule.contains(l)) {
            rep.w_minus += link_weight(l, q, links_);
            rep.displaced.push_back(l);
        }
    return rep;
}

MwResult mw_oracle(const LinkSet& links, const std::vector<std::int64_t>& q, int cap) {
    if (links.size() > cap)
        throw SizeLimitError("mw_oracle: " + std::to_string(links.size()) +
                             " links exceed the exact cap " + std::to_string(cap));
    std::vector<LinkId> cand;
    for (const GeneralizedLink& l : links.links())
        if (link_weight(l.id, q, links) > 0) cand.push_back(l.id);
    const int n = static_cast<int>(cand.size());
    std::vector<Weight> suffix(n + 1, 0);
    for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + link_weight(cand[i], q, links);

    MwResult best;
    std::vector<LinkId> cur;
    auto dfs = [&](auto&& self, int i, Weight w) -> void {
        if (w + suffix[i] <= best.weight) return;
        if (i == n) {
            best.weight = w;
            best.schedule = Schedule(cur);
            return;
        }
        const LinkId l = cand[i];
        if (can_add(cur, l, links)) {
            cur.push_back(l);
            self(self, i + 1, w + link_weight(l, q, links));
            cur.pop_back();
        }
        self(self, i + 1, w);
    };
    dfs(dfs, 0, 0);
    return best;
}

Schedule gms_schedule(const LinkSet& links, const std::vector<std::int64_t>& q) {
    std::vector<LinkId> order;
    for (const GeneralizedLink& l : links.links())
        if (link_weight(l.id, q, links) > 0) order.push_back(l.id);
    std::stable_sort(order.begin(), order.end(), [&](LinkId a, LinkId b) {
        return link_weight(a, q, links) > link_weight(b, q, links);
    });
    std::vector<LinkId> active;
    for (LinkId l : order)
        if (can_add(active, l, links)) active.push_back(l);
    return Schedule(std::move(active));
}

double qcsma_access_prob(Weight wr) {
    if (wr <= 0) return 0.0;
    const double x = static_cast<double>(wr);
    return (1.0 + x) / (2.0 + x);
}

Schedule qcsma_step(const Schedule& prev, const std::vector<std::int64_t>& q,
                    const LinkSet& links, RngStream& rng) {
    std::vector<LinkId> contenders;
    for (const GeneralizedLink& l : links.links()) {
        bool blocked = false;
        for (LinkId o : prev.active())
            if (links.interferes(o, l.id)) {
                blocked = true;
                break;
            }
        if (blocked) continue;
        if (rng.bernoulli(qcsma_access_prob(link_weight(l.id, q, links))))
            contenders.push_back(l.id);
    }
    std::shuffle(contenders.begin(), contenders.end(), rng.engine());
    std::vector<LinkId> active;
    for (LinkId l : contenders)
        if (can_add(active, l, links)) active.push_back(l);
    return Schedule(std::move(active));
}

}  // namespace mgmac
