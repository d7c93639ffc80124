#pragma once

#include "mgmac/common.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mgmac {

struct Band {
    BandIndex index = 0;      // position in the plan, ascending in frequency
    double center_mhz = 0.0;
    double width_mhz = 6.0;
};

struct NodePos {
    NodeId id = 0;
    double x = 0.0;
    double y = 0.0;
    int radios = 1;
};

struct HopPair {
    NodeId tail = 0;
    NodeId head = 0;
};

// Node ids equal their index in `nodes`; bands are sorted by center frequency.
struct Deployment {
    std::vector<NodePos> nodes;
    std::vector<Band> bands;
    std::vector<HopPair> hops;
    double b_max_mhz = 6.0;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_bands() const { return static_cast<int>(bands.size()); }
    int num_hops() const { return static_cast<int>(hops.size()); }
    double distance(NodeId a, NodeId b) const;
};

// Throws InvalidInput on duplicate/non-contiguous ids, unordered bands,
// bad widths, radios < 1 or hop endpoints out of range.
void validate_deployment(const Deployment& d);

enum class PathLossModel { FreeSpace, ItuIndoor };

struct ItuParams {
    double distance_coeff = 30.0;   // N, power-loss coefficient
    double floor_loss_db = 0.0;     // Lf
};

double path_loss_db(double distance_m, double freq_mhz, PathLossModel model,
                    const ItuParams& itu = {});

struct RateStep {
    double min_margin_db = 0.0;
    int rate = 1;
};

// Step function from received-power margin to packets/slot. Thresholds are
// closed lower bounds; below the first step the rate is 0.
class RateTable {
public:
    RateTable() = default;
    explicit RateTable(std::vector<RateStep> steps);

    int lookup(double margin_db) const;
    double connect_threshold_db() const;
    int max_rate() const;
    const std::vector<RateStep>& steps() const { return steps_; }

private:
    std::vector<RateStep> steps_;
};

struct PhyConfig {
    PathLossModel model = PathLossModel::ItuIndoor;
    ItuParams itu;
    double tx_power_dbm = 0.0;
    double sensitivity_dbm = -65.0;
    // Decoding at the lowest modulation works this many dB below the data
    // threshold; it defines the secondary-interference range.
    double interference_margin_db = 10.0;
    RateTable rates{{{0.0, 1}, {4.0, 2}, {8.0, 3}, {12.0, 4}}};
    bool aci_enabled = false;
    double aci_window_mhz = 6.0;
};

double link_margin_db(const Deployment& d, NodeId a, NodeId b, const Band& band,
                      const PhyConfig& phy);

struct BandGraph {
    Band band;
    std::vector<std::pair<NodeId, NodeId>> edges;   // u < v, sorted
    std::vector<std::vector<NodeId>> adj;            // sorted neighbor lists
    int max_degree = 0;

    bool has_edge(NodeId u, NodeId v) const;
};

// Connectivity graph on one band: edge iff the data rate is positive.
BandGraph build_band_graph(const Deployment& d, BandIndex band, const PhyConfig& phy);
// Audibility graph on one band at the lowest modulation.
BandGraph build_decode_graph(const Deployment& d, BandIndex band, const PhyConfig& phy);
BandGraph graph_from_edges(int num_nodes, const Band& band,
                           const std::vector<std::pair<NodeId, NodeId>>& edges);

struct GeneralizedLink {
    LinkId id = 0;
    NodeId tail = 0;
    NodeId head = 0;
    BandIndex band = 0;
    int rate = 1;
    HopId hop = 0;
    std::vector<LinkId> interferers;   // sorted, excludes self
};

// All generalized links of a deployment with O(1) conflict lookup.
class LinkSet {
public:
    LinkSet() = default;
    LinkSet(std::vector<GeneralizedLink> links, int num_nodes, int num_bands, int num_hops,
            std::vector<int> radios);

    int size() const { return static_cast<int>(links_.size()); }
    const GeneralizedLink& operator[](LinkId l) const { return links_[l]; }
    const std::vector<GeneralizedLink>& links() const { return links_; }
    bool interferes(LinkId a, LinkId b) const { return conflict_[a * size() + b] != 0; }

    int num_nodes() const { return num_nodes_; }
    int num_bands() const { return num_bands_; }
    int num_hops() const { return num_hops_; }
    int radios(NodeId v) const { return radios_[v]; }
    const std::vector<int>& radios_all() const { return radios_; }

    // Links with v as tail or head, ascending id.
    const std::vector<LinkId>& incident(NodeId v) const { return incident_[v]; }
    // Links with v as tail, ascending id.
    const std::vector<LinkId>& outgoing(NodeId v) const { return outgoing_[v]; }
    const std::vector<LinkId>& of_hop(HopId h) const { return of_hop_[h]; }
    const std::vector<LinkId>& on_band(BandIndex b) const { return on_band_[b]; }

private:
    std::vector<GeneralizedLink> links_;
    std::vector<std::uint8_t> conflict_;
    int num_nodes_ = 0;
    int num_bands_ = 0;
    int num_hops_ = 0;
    std::vector<int> radios_;
    std::vector<std::vector<LinkId>> incident_;
    std::vector<std::vector<LinkId>> outgoing_;
    std::vector<std::vector<LinkId>> of_hop_;
    std::vector<std::vector<LinkId>> on_band_;
};

LinkSet enumerate_generalized_links(const Deployment& d, const PhyConfig& phy);

// Hand-built link set for small instances. Links sharing an endpoint on one
// band are made to conflict automatically; `extra_conflicts` adds more pairs.
struct LinkSpec {
    NodeId tail;
    NodeId head;
    BandIndex band;
    int rate;
    HopId hop;
};
LinkSet make_link_set(const std::vector<LinkSpec>& specs, int num_nodes, int num_bands,
                      int num_hops, std::vector<int> radios,
                      const std::vector<std::pair<LinkId, LinkId>>& extra_conflicts = {});

struct GraphParams {
    int beta_max = 1;
    std::vector<int> kappa;   // per band
    int kappa_1 = 0;          // lowest band
    int delta = 0;
    bool exact = true;
};

enum class ParamMode { Exact, Bound };

GraphParams compute_graph_params(const LinkSet& links, const std::vector<BandGraph>& graphs,
                                 ParamMode mode, int cap = 24);

// Maximum independent set size of the subgraph induced by `verts` under
// `adjacent`. Exponential; verts.size() must be ≤ 64.
template <typename Adj>
int max_independent_set(const std::vector<int>& verts, Adj&& adjacent);

// Upper bound: |verts| minus a greedy maximal matching.
template <typename Adj>
int mis_matching_bound(const std::vector<int>& verts, Adj&& adjacent);

// Generators: nodes only; hops and bands are filled separately.
Deployment generate_grid(int n_side, double spacing_m, const std::vector<Band>& bands, int radios);
Deployment generate_random(int n, double area_m2, double min_dist_m,
                           const std::vector<Band>& bands, int radios, std::uint64_t seed,
                           int retry_cap = 100000);
Deployment generate_chain(int n, double spacing_m, const std::vector<Band>& bands, int radios);

// M whitespace bands (6 MHz channels centered 515..695 MHz) chosen by seed,
// sorted ascending. M = 0 is an error.
std::vector<Band> whitespace_band_plan(int m, std::uint64_t seed);
// M contiguous 6 MHz channels starting at the lowest whitespace channel.
std::vector<Band> contiguous_band_plan(int m, double first_center_mhz = 515.0,
                                       double width_mhz = 6.0);

enum class HopMode { ChainForward, RandomNeighbor };
// ChainForward: i -> i+1. RandomNeighbor: each node sends to a uniformly
// chosen neighbor in the lowest-band graph (isolated nodes are skipped).
std::vector<HopPair> assign_hops(const Deployment& d, const PhyConfig& phy, HopMode mode,
                                 std::uint64_t seed);

}  // namespace mgmac

#include "mgmac/mis_impl.hpp"
