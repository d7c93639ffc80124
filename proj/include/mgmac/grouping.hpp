#pragma once

#include "mgmac/common.hpp"
#include "mgmac/topology.hpp"

#include <cstdint>
#include <vector>

namespace mgmac {

struct Group {
    NodeId leader = 0;
    std::vector<NodeId> followers;   // sorted, excludes the leader
    std::vector<NodeId> members;     // sorted, includes the leader
};

// Star partition of the nodes on the lowest-band graph.
//   leaders are independent and dominating in that graph;
//   each follower is adjacent to its leader;
//   conflicting groups never share a color.
struct Grouping {
    std::vector<Group> groups;
    std::vector<int> group_of;          // node -> group index
    std::vector<int> color;             // group -> color
    int chi = 0;
    int sigma = 0;
    std::vector<std::uint64_t> seed_of_group;
    std::vector<NodeId> isolated;       // nodes with no lowest-band neighbor
    std::vector<std::vector<int>> conflicts;   // group conflict adjacency, sorted

    int size() const { return static_cast<int>(groups.size()); }
};

std::vector<NodeId> compute_independent_dominating_set(const BandGraph& g, std::uint64_t seed);

// Followers join the adjacent leader with the lowest id. Throws InvalidInput
// if `leaders` does not dominate the graph or is not independent.
Grouping form_groups(const BandGraph& g, const std::vector<NodeId>& leaders,
                     std::uint64_t master_seed = 0);

// Fills conflicts/color/chi. Returns chi.
int color_groups(Grouping& grouping, const LinkSet& links);

int compute_sigma(const Grouping& grouping, const LinkSet& links);

// IDS, groups, coloring and sigma in one call.
Grouping build_grouping(const BandGraph& lowest_band, const LinkSet& links, std::uint64_t seed);

}  // namespace mgmac
