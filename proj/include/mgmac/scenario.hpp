#pragma once

#include "mgmac/analysis.hpp"
#include "mgmac/network.hpp"
#include "mgmac/sched_async.hpp"
#include "mgmac/sim_sync.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mgmac {

enum class Engine { Sync, Async };
enum class LoadBasis {
    Absolute,   // rates = load · weights
    Region,     // rates = load · s* · weights, s* the region scale along weights
    RegionMu,   // rates = load · s* · weights / μ
};

// One scenario file after defaults and validation. `to_json` echoes every
// field, so a run directory records all that affected the run.
struct ScenarioConfig {
    std::string name = "scenario";

    // topology
    std::string topology = "grid";           // grid | chain | random | explicit
    int side = 5;                            // grid
    int nodes = 25;                          // chain, random
    double spacing_m = 12.5;                 // grid, chain
    double area_m2 = 2500.0;                 // random
    double min_dist_m = 8.0;                 // random
    std::vector<std::pair<double, double>> positions;   // explicit
    std::vector<HopPair> explicit_hops;                 // explicit
    std::string hop_mode = "random_neighbor";  // random_neighbor | chain_forward
    std::uint64_t topology_seed = 1;         // placement, band draw, hops, grouping

    // radio
    std::string band_plan = "whitespace";    // whitespace | contiguous
    int bands = 8;
    int radios = 2;
    PhyConfig phy;

    // traffic
    ArrivalSpec arrivals{ArrivalKind::ZipfBurst};
    double load = 0.1;
    LoadBasis basis = LoadBasis::Absolute;
    std::vector<double> weights;             // per hop; empty means all ones

    // scheduling
    Engine engine = Engine::Async;
    SchedulerKind scheduler = SchedulerKind::MaxGain;
    std::int64_t slots = 1000;
    std::vector<std::uint64_t> seeds{1};
    MaxGainConfig maxgain;
    AsyncConfig async;
    int oracle_cap = 24;

    // analysis
    double epsilon = 0.1;
    VerdictParams verdict;

    // persistence
    bool trace = false;
    std::int64_t trace_event_cap = 1000000;

    nlohmann::json to_json() const;
};

// Throws ConfigError naming the offending field (e.g. "radio.bands").
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// "a.b.c=value" into the raw document before parsing. The value is read as
// JSON when it parses, else as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

struct Instance {
    Network net;
    std::vector<double> rates;   // per hop
    std::vector<double> weights;
    double region_scale = 0;     // s* along the weights; 0 when not computed
    BoundReport bounds;
    GraphParams params;
    int sigma = 0;
};

Instance build_instance(const ScenarioConfig& c);

// Rates for a given load on an already built instance.
std::vector<double> rates_for_load(const ScenarioConfig& c, const Instance& inst, double load);

struct RunOutput {
    RunMetrics metrics;
    AsyncCounters counters;      // async only
    std::int64_t contraction_identity_failures = 0;
};

// One seeded run; the trace goes to `trace_path` when non-empty.
RunOutput run_scenario(const ScenarioConfig& c, const Instance& inst, const std::vector<double>& rates,
                       std::uint64_t seed, const std::string& trace_path = "");

}  // namespace mgmac
