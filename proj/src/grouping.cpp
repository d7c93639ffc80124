#include "mgmac/grouping.hpp"

#include "mgmac/rng.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace mgmac {

std::vector<NodeId> compute_independent_dominating_set(const BandGraph& g, std::uint64_t seed) {
    const int n = static_cast<int>(g.adj.size());
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(seed, StreamFamily::Grouping, 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::vector<char> in(n, 0);
    std::vector<char> blocked(n, 0);
    for (NodeId v : order) {
        if (blocked[v]) continue;
        in[v] = 1;
        blocked[v] = 1;
        for (NodeId u : g.adj[v]) blocked[u] = 1;
    }
    std::vector<NodeId> out;
    for (int v = 0; v < n; ++v)
        if (in[v]) out.push_back(v);
    return out;
}

Grouping form_groups(const BandGraph& g, const std::vector<NodeId>& leaders,
                     std::uint64_t master_seed) {
    const int n = static_cast<int>(g.adj.size());
    std::vector<NodeId> ls = leaders;
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    std::vector<int> leader_group(n, -1);
    for (std::size_t i = 0; i < ls.size(); ++i) {
        if (ls[i] < 0 || ls[i] >= n) throw InvalidInput("form_groups: leader id out of range");
        leader_group[ls[i]] = static_cast<int>(i);
    }
    for (NodeId a : ls)
        for (NodeId b : g.adj[a])
            if (leader_group[b] >= 0)
                throw InvalidInput("form_groups: leaders " + std::to_string(a) + " and " +
                                   std::to_string(b) + " are adjacent");

    Grouping out;
    out.groups.resize(ls.size());
    out.group_of.assign(n, -1);
    for (std::size_t i = 0; i < ls.size(); ++i) {
        out.groups[i].leader = ls[i];
        out.group_of[ls[i]] = static_cast<int>(i);
    }
    for (int v = 0; v < n; ++v) {
        if (leader_group[v] >= 0) continue;
        int best = -1;
        for (NodeId u : g.adj[v])   // adj sorted, so the first leader is the lowest id
            if (leader_group[u] >= 0) {
                best = leader_group[u];
                break;
            }
        if (best < 0)
            throw InvalidInput("form_groups: node " + std::to_string(v) +
                               " is not dominated by any leader");
        out.group_of[v] = best;
        out.groups[best].followers.push_back(v);
    }
    for (std::size_t i = 0; i < out.groups.size(); ++i) {
        Group& gr = out.groups[i];
        gr.members = gr.followers;
        gr.members.push_back(gr.leader);
        std::sort(gr.members.begin(), gr.members.end());
        out.seed_of_group.push_back(RngStream(master_seed, StreamFamily::Grouping, i + 1).engine()());
    }
    for (int v = 0; v < n; ++v)
        if (g.adj[v].empty()) out.isolated.push_back(v);
    return out;
}

int color_groups(Grouping& grouping, const LinkSet& links) {
    const int ng = grouping.size();
    std::vector<std::set<int>> conf(ng);
    for (const GeneralizedLink& l : links.links()) {
        const int ga = grouping.group_of[l.tail];
        for (LinkId o : l.interferers) {
            const int gb = grouping.group_of[links[o].tail];
            if (ga != gb) {
                conf[ga].insert(gb);
                conf[gb].insert(ga);
            }
        }
    }
    grouping.conflicts.assign(ng, {});
    for (int i = 0; i < ng; ++i) grouping.conflicts[i].assign(conf[i].begin(), conf[i].end());

    std::vector<int> order(ng);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return grouping.conflicts[a].size() > grouping.conflicts[b].size();
    });
    grouping.color.assign(ng, -1);
    int chi = 0;
    for (int g : order) {
        std::vector<char> used(ng + 1, 0);
        for (int o : grouping.conflicts[g])
            if (grouping.color[o] >= 0) used[grouping.color[o]] = 1;
        int c = 0;
        while (used[c]) ++c;
        grouping.color[g] = c;
        chi = std::max(chi, c + 1);
    }
    grouping.chi = chi;
    return chi;
}

int compute_sigma(const Grouping& grouping, const LinkSet& links) {
    int sigma = 0;
    for (const GeneralizedLink& l : links.links()) {
        const int own = grouping.group_of[l.tail];
        std::set<int> foreign;
        for (LinkId o : l.interferers) {
            const int g = grouping.group_of[links[o].tail];
            if (g != own) foreign.insert(g);
        }
        sigma = std::max(sigma, static_cast<int>(foreign.size()));
    }
    return sigma;
}

Grouping build_grouping(const BandGraph& lowest_band, const LinkSet& links, std::uint64_t seed) {
    Grouping g = form_groups(lowest_band, compute_independent_dominating_set(lowest_band, seed),
                             seed);
    color_groups(g, links);
    g.sigma = compute_sigma(g, links);
    return g;
}

}  // namespace mgmac
