#pragma once

#include "mgmac/grouping.hpp"
#include "mgmac/topology.hpp"

#include <cstdint>
#include <vector>

namespace mgmac {

// Everything a run needs about the radio side, built once per scenario.
struct Network {
    Deployment deployment;
    PhyConfig phy;
    LinkSet links;
    std::vector<BandGraph> band_graphs;     // connectivity per band
    BandGraph control_graph;                // audibility on the control band
    Grouping grouping;
};

// Control band sits at the lowest frequency, so its audibility graph is the
// lowest band's decode graph.
Network build_network(Deployment d, const PhyConfig& phy, std::uint64_t grouping_seed);

// For hand-built link sets: `lowest_band` groups the nodes, `control` gives
// audibility. When `control` is empty, nodes hear each other iff some link or
// conflict joins them.
Network network_from_links(LinkSet links, const BandGraph& lowest_band,
                           std::uint64_t grouping_seed, const BandGraph* control = nullptr);

}  // namespace mgmac
