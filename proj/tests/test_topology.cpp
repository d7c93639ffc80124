#include <doctest.h>

#include "mgmac/topology.hpp"
#include "mgmac/rng.hpp"

#include <cmath>
#include <set>

using namespace mgmac;

namespace {

// Subset enumeration, independent of the branch-and-bound code.
template <typename Adj>
int brute_mis(const std::vector<int>& verts, Adj adj) {
    const int n = static_cast<int>(verts.size());
    int best = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            if (mask >> i & 1)
                for (int j = i + 1; j < n && ok; ++j)
                    if ((mask >> j & 1) && adj(verts[i], verts[j])) ok = false;
        if (ok) best = std::max(best, std::popcount(mask));
    }
    return best;
}

PhyConfig freespace_phy() {
    PhyConfig p;
    p.model = PathLossModel::FreeSpace;
    return p;
}

}  // namespace

TEST_CASE("free-space loss at 1 km and 600 MHz") {
    // 20·log10(600) + 32.45, evaluated independently.
    const double expect = 20.0 * std::log10(600.0) + 32.45;
    CHECK(expect == doctest::Approx(88.0130).epsilon(1e-5));
    CHECK(path_loss_db(1000.0, 600.0, PathLossModel::FreeSpace) == doctest::Approx(expect));
}

TEST_CASE("free-space doubling laws") {
    const double base = path_loss_db(120.0, 550.0, PathLossModel::FreeSpace);
    const double six = 20.0 * std::log10(2.0);
    CHECK(path_loss_db(120.0, 1100.0, PathLossModel::FreeSpace) - base == doctest::Approx(six));
    CHECK(path_loss_db(240.0, 550.0, PathLossModel::FreeSpace) - base == doctest::Approx(six));
}

TEST_CASE("path loss rejects non-positive arguments and is monotone") {
    CHECK_THROWS_AS(path_loss_db(0.0, 600.0, PathLossModel::FreeSpace), InvalidInput);
    CHECK_THROWS_AS(path_loss_db(10.0, -1.0, PathLossModel::ItuIndoor), InvalidInput);
    for (auto model : {PathLossModel::FreeSpace, PathLossModel::ItuIndoor}) {
        double prev = -1e9;
        for (double d = 1.0; d < 500.0; d *= 1.3) {
            const double l = path_loss_db(d, 600.0, model);
            CHECK(l >= prev);
            prev = l;
        }
        prev = -1e9;
        for (double f = 500.0; f < 720.0; f += 6.0) {
            const double l = path_loss_db(30.0, f, model);
            CHECK(l >= prev);
            prev = l;
        }
    }
}

TEST_CASE("rate table lookup") {
    RateTable t({{0.0, 1}, {4.0, 2}, {8.0, 3}});
    CHECK(t.lookup(-0.001) == 0);
    CHECK(t.lookup(0.0) == 1);
    CHECK(t.lookup(3.999) == 1);
    CHECK(t.lookup(4.0) == 2);
    CHECK(t.lookup(100.0) == 3);
    CHECK_THROWS_AS(RateTable(std::vector<RateStep>{}), ConfigError);
    RateTable empty;
    CHECK_THROWS_AS(empty.lookup(1.0), ConfigError);
}

TEST_CASE("band graph drops high-frequency edges first") {
    Deployment d;
    d.bands = {{0, 515.0, 6.0}, {1, 695.0, 6.0}};
    d.nodes = {{0, 0.0, 0.0, 1}, {1, 0.0, 0.0, 1}};
    PhyConfig phy;
    // Place node 1 where band 0 closes with margin 1 dB and band 1 falls short.
    const double l_target = phy.tx_power_dbm - phy.sensitivity_dbm - 1.0;
    const double d_m = std::pow(10.0, (l_target - 20.0 * std::log10(515.0) + 28.0) / 30.0);
    d.nodes[1].x = d_m;
    const BandGraph g0 = build_band_graph(d, 0, phy);
    const BandGraph g1 = build_band_graph(d, 1, phy);
    CHECK(g0.has_edge(0, 1));
    CHECK_FALSE(g1.has_edge(0, 1));
    CHECK(g0.max_degree == 1);
    CHECK(g1.max_degree == 0);

    Deployment single;
    single.bands = d.bands;
    single.nodes = {{0, 0.0, 0.0, 1}};
    const BandGraph gs = build_band_graph(single, 0, phy);
    CHECK(gs.edges.empty());
    CHECK(gs.max_degree == 0);
}

TEST_CASE("frequency monotonicity on a 25-node grid") {
    const auto bands = contiguous_band_plan(31, 515.0);
    for (auto phy : {PhyConfig{}, freespace_phy()}) {
        // Spacings put the diagonal neighbor inside range at 515 MHz and outside at 695 MHz.
        const double spacing = phy.model == PathLossModel::FreeSpace ? 50.0 : 12.5;
        const Deployment d = generate_grid(5, spacing, bands, 2);
        std::vector<BandGraph> gs;
        for (int j = 0; j < d.num_bands(); ++j) gs.push_back(build_band_graph(d, j, phy));
        std::size_t total = 0;
        for (int j = 1; j < d.num_bands(); ++j) {
            std::set<std::pair<NodeId, NodeId>> lo(gs[j - 1].edges.begin(), gs[j - 1].edges.end());
            for (const auto& e : gs[j].edges) CHECK(lo.count(e) == 1);
            total += gs[j].edges.size();
        }
        CHECK(gs.front().edges.size() > gs.back().edges.size());   // the test is not vacuous
        CHECK(total > 0);
    }
}

TEST_CASE("two nodes, three bands: one link per band, no cross-band conflicts") {
    Deployment d;
    d.bands = contiguous_band_plan(3, 515.0);
    d.nodes = {{0, 0.0, 0.0, 3}, {1, 5.0, 0.0, 3}};
    d.hops = {{0, 1}};
    const LinkSet ls = enumerate_generalized_links(d, PhyConfig{});
    REQUIRE(ls.size() == 3);
    for (int a = 0; a < 3; ++a) {
        CHECK(ls[a].band == a);
        for (int b = 0; b < 3; ++b) CHECK_FALSE(ls.interferes(a, b));
    }

    PhyConfig aci;
    aci.aci_enabled = true;
    const LinkSet la = enumerate_generalized_links(d, aci);
    CHECK(la.interferes(0, 1));
    CHECK(la.interferes(1, 2));
    CHECK_FALSE(la.interferes(0, 2));   // 12 MHz apart, outside the 6 MHz window
}

TEST_CASE("hops sharing a node on one band interfere") {
    Deployment d;
    d.bands = contiguous_band_plan(1);
    d.nodes = {{0, 0.0, 0.0, 2}, {1, 8.0, 0.0, 2}, {2, 16.0, 0.0, 2}};
    d.hops = {{0, 1}, {1, 2}};
    const LinkSet ls = enumerate_generalized_links(d, PhyConfig{});
    REQUIRE(ls.size() == 2);
    CHECK(ls.interferes(0, 1));
    CHECK(ls.interferes(1, 0));
}

TEST_CASE("unreachable hop is an invalid deployment") {
    Deployment d;
    d.bands = contiguous_band_plan(2);
    d.nodes = {{0, 0.0, 0.0, 1}, {1, 5000.0, 0.0, 1}};
    d.hops = {{0, 1}};
    CHECK_THROWS_AS(enumerate_generalized_links(d, PhyConfig{}), InvalidDeployment);
}

TEST_CASE("random deployment: spacing, determinism, symmetric interference") {
    const auto bands = whitespace_band_plan(8, 3);
    // 25 points 15 m apart do not fit in a 50 m square (the best packing holds
    // fewer than 20 points), so the retry cap must trip.
    CHECK_THROWS_AS(generate_random(25, 2500.0, 15.0, bands, 2, 7), GenerationError);
    for (double area : {2500.0, 10000.0}) {
        const double min_d = area == 2500.0 ? 8.0 : 15.0;
        const Deployment a = generate_random(25, area, min_d, bands, 2, 7);
        const Deployment b = generate_random(25, area, min_d, bands, 2, 7);
        REQUIRE(a.num_nodes() == 25);
        for (int i = 0; i < 25; ++i) {
            CHECK(a.nodes[i].x == b.nodes[i].x);
            CHECK(a.nodes[i].y == b.nodes[i].y);
            CHECK(a.nodes[i].x <= std::sqrt(area));
            for (int j = i + 1; j < 25; ++j) CHECK(a.distance(i, j) >= min_d);
        }
    }
    const Deployment a = generate_random(25, 2500.0, 8.0, bands, 2, 7);

    Deployment d = a;
    PhyConfig phy;
    d.hops = assign_hops(d, phy, HopMode::RandomNeighbor, 11);
    for (bool aci : {false, true}) {
        phy.aci_enabled = aci;
        const LinkSet ls = enumerate_generalized_links(d, phy);
        REQUIRE(ls.size() > 0);
        for (const auto& l : ls.links()) {
            CHECK(l.rate > 0);
            for (LinkId o : l.interferers) {
                CHECK(ls.interferes(o, l.id));
                const auto& oi = ls[o].interferers;
                CHECK(std::find(oi.begin(), oi.end(), l.id) != oi.end());
                if (!aci) CHECK(ls[o].band == l.band);
            }
            for (const auto& m : ls.links()) {
                const bool shared = l.tail == m.tail || l.tail == m.head || l.head == m.tail ||
                                    l.head == m.head;
                if (m.id != l.id && shared && m.band == l.band) CHECK(ls.interferes(l.id, m.id));
            }
        }
    }
}

TEST_CASE("grid generator") {
    const Deployment d = generate_grid(5, 10.0, contiguous_band_plan(1), 1);
    REQUIRE(d.num_nodes() == 25);
    for (int i = 0; i < 25; ++i)
        for (int j = i + 1; j < 25; ++j) CHECK(d.distance(i, j) >= 10.0 - 1e-9);
    const auto plan = whitespace_band_plan(8, 1);
    REQUIRE(plan.size() == 8);
    for (int j = 1; j < 8; ++j) CHECK(plan[j - 1].center_mhz < plan[j].center_mhz);
    for (const auto& b : plan) {
        CHECK(b.center_mhz >= 515.0);
        CHECK(b.center_mhz <= 695.0);
    }
}

TEST_CASE("graph params: lone link and 3-node path") {
    const LinkSet one = make_link_set({{0, 1, 0, 1, 0}}, 2, 1, 1, {1, 1});
    const BandGraph g2 = graph_from_edges(2, Band{0, 515.0, 6.0}, {{0, 1}});
    const GraphParams p1 = compute_graph_params(one, {g2}, ParamMode::Exact);
    CHECK(p1.beta_max == 1);
    CHECK(p1.exact);

    const BandGraph path = graph_from_edges(3, Band{0, 515.0, 6.0}, {{0, 1}, {1, 2}});
    const LinkSet ls = make_link_set({{0, 1, 0, 1, 0}, {1, 2, 0, 1, 1}}, 3, 1, 2, {1, 1, 1});
    const GraphParams p = compute_graph_params(ls, {path}, ParamMode::Exact);
    CHECK(p.kappa_1 == 2);
    CHECK(p.delta == 2);

    const GraphParams pb = compute_graph_params(ls, {path}, ParamMode::Bound);
    CHECK_FALSE(pb.exact);
    CHECK(pb.kappa_1 >= p.kappa_1);
    CHECK(pb.beta_max >= p.beta_max);
}

TEST_CASE("graph params match brute force on chains and random instances") {
    PhyConfig phy;
    for (int n : {3, 4, 5, 6, 7}) {
        Deployment d = generate_chain(n, 10.0, contiguous_band_plan(2), 1);
        d.hops = assign_hops(d, phy, HopMode::ChainForward, 0);
        const LinkSet ls = enumerate_generalized_links(d, phy);
        std::vector<BandGraph> gs;
        for (int j = 0; j < d.num_bands(); ++j) gs.push_back(build_band_graph(d, j, phy));
        const GraphParams p = compute_graph_params(ls, gs, ParamMode::Exact);

        int beta = 1;
        for (const auto& l : ls.links()) {
            std::vector<int> nb{l.id};
            for (LinkId o : l.interferers) nb.push_back(o);
            beta = std::max(beta, brute_mis(nb, [&](int a, int b) { return ls.interferes(a, b); }));
        }
        CHECK(p.beta_max == beta);
        for (int j = 0; j < d.num_bands(); ++j) {
            int kj = 0;
            for (int v = 0; v < n; ++v) {
                std::set<int> ball{v};
                for (int u : gs[j].adj[v]) {
                    ball.insert(u);
                    for (int w : gs[j].adj[u]) ball.insert(w);
                }
                kj = std::max(kj, brute_mis(std::vector<int>(ball.begin(), ball.end()),
                                            [&](int a, int b) { return gs[j].has_edge(a, b); }));
            }
            CHECK(p.kappa[j] == kj);
        }
    }

    RngStream rng(5, StreamFamily::Test, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 14));
        std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
        const double dens = rng.uniform();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.bernoulli(dens)) adj[i][j] = adj[j][i] = 1;
        std::vector<int> verts(n);
        for (int i = 0; i < n; ++i) verts[i] = i;
        auto f = [&](int a, int b) { return adj[a][b] != 0; };
        const int exact = max_independent_set(verts, f);
        CHECK(exact == brute_mis(verts, f));
        CHECK(mis_matching_bound(verts, f) >= exact);
    }
}

TEST_CASE("exact mode above the cap is refused") {
    std::vector<LinkSpec> specs;
    for (int i = 0; i < 6; ++i) specs.push_back({0, i + 1, 0, 1, i});
    const LinkSet ls = make_link_set(specs, 7, 1, 6, std::vector<int>(7, 6));
    const BandGraph g = graph_from_edges(7, Band{0, 515.0, 6.0}, {});
    CHECK_THROWS_AS(compute_graph_params(ls, {g}, ParamMode::Exact, 4), SizeLimitError);
    CHECK_NOTHROW(compute_graph_params(ls, {g}, ParamMode::Bound, 4));
}
