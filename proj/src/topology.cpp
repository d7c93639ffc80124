#include "mgmac/topology.hpp"

#include "mgmac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace mgmac {

double Deployment::distance(NodeId a, NodeId b) const {
    return std::hypot(nodes[a].x - nodes[b].x, nodes[a].y - nodes[b].y);
}

void validate_deployment(const Deployment& d) {
    for (int i = 0; i < d.num_nodes(); ++i) {
        if (d.nodes[i].id != i)
            throw InvalidInput("node ids must be 0..n-1 in order; found id " +
                               std::to_string(d.nodes[i].id) + " at position " +
                               std::to_string(i));
        if (d.nodes[i].radios < 1)
            throw InvalidInput("node " + std::to_string(i) + " has fewer than one radio");
    }
    if (d.bands.empty()) throw InvalidInput("bands: at least one band is required");
    for (int j = 0; j < d.num_bands(); ++j) {
        const Band& b = d.bands[j];
        if (b.index != j) throw InvalidInput("bands: indices must be contiguous from 0");
        if (!(b.width_mhz > 0.0) || b.width_mhz > d.b_max_mhz)
            throw InvalidInput("bands: width must be in (0, B_max]");
        if (!(b.center_mhz > 0.0)) throw InvalidInput("bands: center frequency must be positive");
        if (j > 0 && !(d.bands[j - 1].center_mhz < b.center_mhz))
            throw InvalidInput("bands: must be strictly ordered by center frequency");
    }
    for (const HopPair& h : d.hops) {
        if (h.tail < 0 || h.tail >= d.num_nodes() || h.head < 0 || h.head >= d.num_nodes())
            throw InvalidInput("hop endpoint out of range");
        if (h.tail == h.head) throw InvalidInput("hop endpoints must differ");
    }
}

double path_loss_db(double distance_m, double freq_mhz, PathLossModel model,
                    const ItuParams& itu) {
    if (!(distance_m > 0.0)) throw InvalidInput("path_loss_db: distance must be positive");
    if (!(freq_mhz > 0.0)) throw InvalidInput("path_loss_db: frequency must be positive");
    switch (model) {
        case PathLossModel::FreeSpace:
            return 20.0 * std::log10(distance_m / 1000.0) + 20.0 * std::log10(freq_mhz) + 32.45;
        case PathLossModel::ItuIndoor:
            return 20.0 * std::log10(freq_mhz) + itu.distance_coeff * std::log10(distance_m) +
                   itu.floor_loss_db - 28.0;
    }
    throw InvalidInput("path_loss_db: unknown model");
}

RateTable::RateTable(std::vector<RateStep> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw ConfigError("rate table is empty");
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        if (steps_[i].rate <= 0) throw ConfigError("rate table: rates must be positive");
        if (i > 0 && !(steps_[i - 1].min_margin_db < steps_[i].min_margin_db))
            throw ConfigError("rate table: thresholds must be strictly ascending");
    }
}

int RateTable::lookup(double margin_db) const {
    if (steps_.empty()) throw ConfigError("rate table is empty");
    int rate = 0;
    for (const RateStep& s : steps_) {
        if (margin_db >= s.min_margin_db) rate = s.rate;
        else break;
    }
    return rate;
}

double RateTable::connect_threshold_db() const {
    if (steps_.empty()) throw ConfigError("rate table is empty");
    return steps_.front().min_margin_db;
}

int RateTable::max_rate() const {
    int m = 0;
    for (const RateStep& s : steps_) m = std::max(m, s.rate);
    return m;
}

double link_margin_db(const Deployment& d, NodeId a, NodeId b, const Band& band,
                      const PhyConfig& phy) {
    const double rx = phy.tx_power_dbm -
                      path_loss_db(d.distance(a, b), band.center_mhz, phy.model, phy.itu);
    return rx - phy.sensitivity_dbm;
}

bool BandGraph::has_edge(NodeId u, NodeId v) const {
    if (u < 0 || v < 0 || u >= static_cast<int>(adj.size()) || v >= static_cast<int>(adj.size()))
        return false;
    return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

BandGraph graph_from_edges(int num_nodes, const Band& band,
                           const std::vector<std::pair<NodeId, NodeId>>& edges) {
    BandGraph g;
    g.band = band;
    g.adj.assign(num_nodes, {});
    std::set<std::pair<NodeId, NodeId>> uniq;
    for (auto [u, v] : edges) {
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        uniq.insert({u, v});
    }
    g.edges.assign(uniq.begin(), uniq.end());
    for (auto [u, v] : g.edges) {
        g.adj[u].push_back(v);
        g.adj[v].push_back(u);
    }
    for (auto& a : g.adj) {
        std::sort(a.begin(), a.end());
        g.max_degree = std::max(g.max_degree, static_cast<int>(a.size()));
    }
    return g;
}

namespace {

BandGraph threshold_graph(const Deployment& d, BandIndex band, const PhyConfig& phy,
                          double threshold_db) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    const Band& b = d.bands.at(band);
    for (int u = 0; u < d.num_nodes(); ++u)
        for (int v = u + 1; v < d.num_nodes(); ++v)
            if (d.distance(u, v) > 0.0 && link_margin_db(d, u, v, b, phy) >= threshold_db)
                edges.emplace_back(u, v);
    return graph_from_edges(d.num_nodes(), b, edges);
}

}  // namespace

BandGraph build_band_graph(const Deployment& d, BandIndex band, const PhyConfig& phy) {
    return threshold_graph(d, band, phy, phy.rates.connect_threshold_db());
}

BandGraph build_decode_graph(const Deployment& d, BandIndex band, const PhyConfig& phy) {
    return threshold_graph(d, band, phy,
                           phy.rates.connect_threshold_db() - phy.interference_margin_db);
}

LinkSet::LinkSet(std::vector<GeneralizedLink> links, int num_nodes, int num_bands, int num_hops,
                 std::vector<int> radios)
    : links_(std::move(links)),
      num_nodes_(num_nodes),
      num_bands_(num_bands),
      num_hops_(num_hops),
      radios_(std::move(radios)) {
    const int n = size();
    if (static_cast<int>(radios_.size()) != num_nodes_)
        throw InvalidInput("LinkSet: radios vector must cover every node");
    conflict_.assign(static_cast<std::size_t>(n) * n, 0);
    incident_.assign(num_nodes_, {});
    outgoing_.assign(num_nodes_, {});
    of_hop_.assign(num_hops_, {});
    on_band_.assign(num_bands_, {});
    for (int l = 0; l < n; ++l) {
        GeneralizedLink& g = links_[l];
        if (g.id != l) throw InvalidInput("LinkSet: link ids must equal their index");
        if (g.rate <= 0) throw InvalidInput("LinkSet: link rates must be positive");
        std::sort(g.interferers.begin(), g.interferers.end());
        for (LinkId o : g.interferers) {
            if (o == l || o < 0 || o >= n) throw InvalidInput("LinkSet: bad interferer id");
            conflict_[static_cast<std::size_t>(l) * n + o] = 1;
        }
        incident_[g.tail].push_back(l);
        incident_[g.head].push_back(l);
        outgoing_[g.tail].push_back(l);
        of_hop_[g.hop].push_back(l);
        on_band_[g.band].push_back(l);
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (conflict_[static_cast<std::size_t>(a) * n + b] !=
                conflict_[static_cast<std::size_t>(b) * n + a])
                throw InvalidInput("LinkSet: interference must be symmetric");
}

namespace {

bool share_endpoint(const GeneralizedLink& a, const GeneralizedLink& b) {
    return a.tail == b.tail || a.tail == b.head || a.head == b.tail || a.head == b.head;
}

}  // namespace

LinkSet enumerate_generalized_links(const Deployment& d, const PhyConfig& phy) {
    validate_deployment(d);
    std::vector<BandGraph> decode;
    decode.reserve(d.num_bands());
    for (int j = 0; j < d.num_bands(); ++j) decode.push_back(build_decode_graph(d, j, phy));

    std::vector<GeneralizedLink> links;
    for (int h = 0; h < d.num_hops(); ++h) {
        const HopPair& hp = d.hops[h];
        bool any = false;
        for (int j = 0; j < d.num_bands(); ++j) {
            const int r = phy.rates.lookup(link_margin_db(d, hp.tail, hp.head, d.bands[j], phy));
            if (r <= 0) continue;
            any = true;
            GeneralizedLink g;
            g.id = static_cast<LinkId>(links.size());
            g.tail = hp.tail;
            g.head = hp.head;
            g.band = j;
            g.rate = r;
            g.hop = h;
            links.push_back(g);
        }
        if (!any)
            throw InvalidDeployment("hop " + std::to_string(h) + " (" + std::to_string(hp.tail) +
                                    "->" + std::to_string(hp.head) +
                                    ") has zero rate on every band");
    }

    const int n = static_cast<int>(links.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const GeneralizedLink& la = links[a];
            const GeneralizedLink& lb = links[b];
            bool conflict = false;
            if (la.band == lb.band) {
                const BandGraph& g = decode[la.band];
                conflict = share_endpoint(la, lb) || g.has_edge(la.tail, lb.tail) ||
                           g.has_edge(la.tail, lb.head) || g.has_edge(la.head, lb.tail) ||
                           g.has_edge(la.head, lb.head);
            } else if (phy.aci_enabled) {
                const double gap =
                    std::abs(d.bands[la.band].center_mhz - d.bands[lb.band].center_mhz);
                conflict = gap <= phy.aci_window_mhz + 1e-9 && share_endpoint(la, lb);
            }
            if (conflict) {
                links[a].interferers.push_back(b);
                links[b].interferers.push_back(a);
            }
        }
    }
    std::vector<int> radios(d.num_nodes());
    for (int v = 0; v < d.num_nodes(); ++v) radios[v] = d.nodes[v].radios;
    return LinkSet(std::move(links), d.num_nodes(), d.num_bands(), d.num_hops(), std::move(radios));
}

LinkSet make_link_set(const std::vector<LinkSpec>& specs, int num_nodes, int num_bands,
                      int num_hops, std::vector<int> radios,
                      const std::vector<std::pair<LinkId, LinkId>>& extra_conflicts) {
    const int n = static_cast<int>(specs.size());
    std::vector<GeneralizedLink> links(n);
    std::vector<std::set<LinkId>> conf(n);
    for (int i = 0; i < n; ++i) {
        links[i].id = i;
        links[i].tail = specs[i].tail;
        links[i].head = specs[i].head;
        links[i].band = specs[i].band;
        links[i].rate = specs[i].rate;
        links[i].hop = specs[i].hop;
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (links[a].band == links[b].band && share_endpoint(links[a], links[b])) {
                conf[a].insert(b);
                conf[b].insert(a);
            }
    for (auto [a, b] : extra_conflicts) {
        if (a == b) continue;
        conf.at(a).insert(b);
        conf.at(b).insert(a);
    }
    for (int i = 0; i < n; ++i) links[i].interferers.assign(conf[i].begin(), conf[i].end());
    return LinkSet(std::move(links), num_nodes, num_bands, num_hops, std::move(radios));
}

GraphParams compute_graph_params(const LinkSet& links, const std::vector<BandGraph>& graphs,
                                 ParamMode mode, int cap) {
    GraphParams p;
    p.exact = mode == ParamMode::Exact;
    auto link_adj = [&](int a, int b) { return links.interferes(a, b); };

    p.beta_max = 1;
    for (const GeneralizedLink& l : links.links()) {
        std::vector<int> nb;
        nb.push_back(l.id);
        for (LinkId o : l.interferers)
            if (links[o].band == l.band) nb.push_back(o);
        std::sort(nb.begin(), nb.end());
        int b = 0;
        if (mode == ParamMode::Exact) {
            if (static_cast<int>(nb.size()) > cap || nb.size() > 64)
                throw SizeLimitError("interference neighborhood of link " + std::to_string(l.id) +
                                     " has " + std::to_string(nb.size()) +
                                     " links, above the exact cap " + std::to_string(cap));
            b = max_independent_set(nb, link_adj);
        } else {
            b = mis_matching_bound(nb, link_adj);
        }
        p.beta_max = std::max(p.beta_max, b);
    }

    p.kappa.assign(graphs.size(), 0);
    for (std::size_t j = 0; j < graphs.size(); ++j) {
        const BandGraph& g = graphs[j];
        p.delta = std::max(p.delta, g.max_degree);
        auto node_adj = [&](int a, int b) { return g.has_edge(a, b); };
        int kj = 0;
        const int nn = static_cast<int>(g.adj.size());
        for (int v = 0; v < nn; ++v) {
            std::set<int> ball{v};
            for (int u : g.adj[v]) {
                ball.insert(u);
                for (int w : g.adj[u]) ball.insert(w);
            }
            std::vector<int> verts(ball.begin(), ball.end());
            int k = 0;
            if (mode == ParamMode::Exact) {
                if (static_cast<int>(verts.size()) > cap || verts.size() > 64)
                    throw SizeLimitError("2-hop neighborhood of node " + std::to_string(v) +
                                         " has " + std::to_string(verts.size()) +
                                         " nodes, above the exact cap " + std::to_string(cap));
                k = max_independent_set(verts, node_adj);
            } else {
                k = mis_matching_bound(verts, node_adj);
            }
            kj = std::max(kj, k);
        }
        p.kappa[j] = kj;
    }
    p.kappa_1 = p.kappa.empty() ? 0 : p.kappa.front();
    return p;
}

Deployment generate_grid(int n_side, double spacing_m, const std::vector<Band>& bands,
                         int radios) {
    if (n_side < 1) throw InvalidInput("generate_grid: n_side must be ≥ 1");
    if (!(spacing_m > 0.0)) throw InvalidInput("generate_grid: spacing must be positive");
    Deployment d;
    d.bands = bands;
    for (int r = 0; r < n_side; ++r)
        for (int c = 0; c < n_side; ++c)
            d.nodes.push_back({static_cast<NodeId>(d.nodes.size()), c * spacing_m, r * spacing_m,
                               radios});
    return d;
}

Deployment generate_random(int n, double area_m2, double min_dist_m,
                           const std::vector<Band>& bands, int radios, std::uint64_t seed,
                           int retry_cap) {
    if (n < 1) throw InvalidInput("generate_random: n must be ≥ 1");
    if (!(area_m2 > 0.0)) throw InvalidInput("generate_random: area must be positive");
    const double side = std::sqrt(area_m2);
    RngStream rng(seed, StreamFamily::Topology, 0);
    Deployment d;
    d.bands = bands;
    int attempts = 0;
    while (d.num_nodes() < n) {
        if (++attempts > retry_cap)
            throw GenerationError("generate_random: placed " + std::to_string(d.num_nodes()) +
                                  " of " + std::to_string(n) + " nodes within " +
                                  std::to_string(retry_cap) + " attempts");
        const double x = rng.uniform() * side;
        const double y = rng.uniform() * side;
        bool ok = true;
        for (const NodePos& p : d.nodes)
            if (std::hypot(p.x - x, p.y - y) < min_dist_m) {
                ok = false;
                break;
            }
        if (ok) d.nodes.push_back({static_cast<NodeId>(d.nodes.size()), x, y, radios});
    }
    return d;
}

Deployment generate_chain(int n, double spacing_m, const std::vector<Band>& bands, int radios) {
    if (n < 1) throw InvalidInput("generate_chain: n must be ≥ 1");
    if (!(spacing_m > 0.0)) throw InvalidInput("generate_chain: spacing must be positive");
    Deployment d;
    d.bands = bands;
    for (int i = 0; i < n; ++i) d.nodes.push_back({i, i * spacing_m, 0.0, radios});
    return d;
}

std::vector<Band> whitespace_band_plan(int m, std::uint64_t seed) {
    constexpr int kChannels = 31;   // 512-698 MHz in 6 MHz steps
    if (m < 1 || m > kChannels)
        throw ConfigError("whitespace_band_plan: band count must be in [1, 31]");
    std::vector<int> idx(kChannels);
    std::iota(idx.begin(), idx.end(), 0);
    RngStream rng(seed, StreamFamily::Scenario, 1);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    std::vector<Band> out;
    for (int j = 0; j < m; ++j) out.push_back({j, 515.0 + 6.0 * idx[j], 6.0});
    return out;
}

std::vector<Band> contiguous_band_plan(int m, double first_center_mhz, double width_mhz) {
    if (m < 1) throw ConfigError("contiguous_band_plan: band count must be ≥ 1");
    std::vector<Band> out;
    for (int j = 0; j < m; ++j) out.push_back({j, first_center_mhz + width_mhz * j, width_mhz});
    return out;
}

std::vector<HopPair> assign_hops(const Deployment& d, const PhyConfig& phy, HopMode mode,
                                 std::uint64_t seed) {
    std::vector<HopPair> hops;
    if (mode == HopMode::ChainForward) {
        for (int i = 0; i + 1 < d.num_nodes(); ++i) hops.push_back({i, i + 1});
        return hops;
    }
    const BandGraph g0 = build_band_graph(d, 0, phy);
    RngStream rng(seed, StreamFamily::Hops, 0);
    for (int v = 0; v < d.num_nodes(); ++v) {
        const auto& nb = g0.adj[v];
        if (nb.empty()) continue;
        hops.push_back({v, nb[rng.uniform_int(0, static_cast<std::int64_t>(nb.size()) - 1)]});
    }
    return hops;
}

}  // namespace mgmac
