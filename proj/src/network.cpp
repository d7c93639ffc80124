#include "mgmac/network.hpp"

namespace mgmac {

Network build_network(Deployment d, const PhyConfig& phy, std::uint64_t grouping_seed) {
    Network net;
    net.phy = phy;
    net.links = enumerate_generalized_links(d, phy);
    for (int j = 0; j < d.num_bands(); ++j) net.band_graphs.push_back(build_band_graph(d, j, phy));
    net.control_graph = build_decode_graph(d, 0, phy);
    net.grouping = build_grouping(net.band_graphs.front(), net.links, grouping_seed);
    net.deployment = std::move(d);
    return net;
}

Network network_from_links(LinkSet links, const BandGraph& lowest_band,
                           std::uint64_t grouping_seed, const BandGraph* control) {
    Network net;
    if (control) {
        net.control_graph = *control;
    } else {
        std::vector<std::pair<NodeId, NodeId>> e;
        for (const GeneralizedLink& l : links.links()) {
            e.emplace_back(l.tail, l.head);
            for (LinkId o : l.interferers) {
                const GeneralizedLink& m = links[o];
                e.emplace_back(l.tail, m.tail);
                e.emplace_back(l.tail, m.head);
                e.emplace_back(l.head, m.tail);
                e.emplace_back(l.head, m.head);
            }
        }
        net.control_graph = graph_from_edges(links.num_nodes(), lowest_band.band, e);
    }
    net.band_graphs.push_back(lowest_band);
    net.grouping = build_grouping(lowest_band, links, grouping_seed);
    net.links = std::move(links);
    return net;
}

}  // namespace mgmac
