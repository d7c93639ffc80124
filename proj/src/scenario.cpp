#include "mgmac/scenario.hpp"

#include "mgmac/grouping.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace mgmac {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were used so leftovers can
// be reported as unknown fields.
class Section {
public:
    Section(const json& root, const std::string& key) : path_(key) {
        if (root.contains(key)) {
            obj_ = &root.at(key);
            if (!obj_->is_object()) throw ConfigError(path_ + ": expected an object");
        }
    }

    template <class T>
    T get(const std::string& key, T def) {
        used_.insert(key);
        if (!obj_ || !obj_->contains(key)) return def;
        const json& v = obj_->at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw ConfigError("");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw ConfigError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError("");
            }
            return v.get<T>();
        } catch (const std::exception&) {
            throw ConfigError(field(key) + ": wrong type (" + v.dump() + ")");
        }
    }

    const json* raw(const std::string& key) {
        used_.insert(key);
        return (obj_ && obj_->contains(key)) ? &obj_->at(key) : nullptr;
    }

    std::string field(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        if (!obj_) return;
        for (const auto& [k, _] : obj_->items())
            if (!used_.count(k)) throw ConfigError(field(k) + ": unknown field");
    }

private:
    const json* obj_ = nullptr;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError(field + ": " + why);
}

std::string engine_name(Engine e) { return e == Engine::Sync ? "sync" : "async"; }

std::string basis_name(LoadBasis b) {
    switch (b) {
        case LoadBasis::Absolute: return "absolute";
        case LoadBasis::Region: return "region";
        case LoadBasis::RegionMu: return "region_mu";
    }
    return "?";
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
    if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
    static const std::set<std::string> kSections = {"name",    "topology", "radio",    "traffic",
                                                    "schedule", "maxgain",  "async",    "analysis",
                                                    "output"};
    for (const auto& [k, _] : j.items())
        if (!kSections.count(k)) throw ConfigError(k + ": unknown section");

    ScenarioConfig c;
    if (j.contains("name")) {
        require(j.at("name").is_string(), "name", "expected a string");
        c.name = j.at("name").get<std::string>();
    }

    Section topo(j, "topology");
    c.topology = topo.get<std::string>("kind", c.topology);
    c.side = topo.get("side", c.side);
    c.nodes = topo.get("nodes", c.nodes);
    c.spacing_m = topo.get("spacing_m", c.spacing_m);
    c.area_m2 = topo.get("area_m2", c.area_m2);
    c.min_dist_m = topo.get("min_dist_m", c.min_dist_m);
    c.hop_mode = topo.get<std::string>("hops", c.topology == "chain" ? "chain_forward" : c.hop_mode);
    c.topology_seed = topo.get<std::uint64_t>("seed", c.topology_seed);
    if (const json* p = topo.raw("positions")) {
        try {
            for (const auto& xy : *p) c.positions.emplace_back(xy.at(0).get<double>(), xy.at(1).get<double>());
        } catch (const std::exception&) {
            throw ConfigError(topo.field("positions") + ": expected [[x, y], ...]");
        }
    }
    if (const json* p = topo.raw("hop_pairs")) {
        try {
            for (const auto& th : *p) c.explicit_hops.push_back({th.at(0).get<NodeId>(), th.at(1).get<NodeId>()});
        } catch (const std::exception&) {
            throw ConfigError(topo.field("hop_pairs") + ": expected [[tail, head], ...]");
        }
    }
    topo.finish();
    static const std::set<std::string> kKinds = {"grid", "chain", "random", "explicit"};
    require(kKinds.count(c.topology) > 0, "topology.kind", "one of grid, chain, random, explicit");
    require(c.hop_mode == "random_neighbor" || c.hop_mode == "chain_forward", "topology.hops",
            "one of random_neighbor, chain_forward");
    if (c.topology == "grid") require(c.side >= 1, "topology.side", "must be >= 1");
    if (c.topology == "chain" || c.topology == "random")
        require(c.nodes >= 1, "topology.nodes", "must be >= 1");
    if (c.topology == "grid" || c.topology == "chain")
        require(c.spacing_m > 0, "topology.spacing_m", "must be positive");
    if (c.topology == "random") {
        require(c.area_m2 > 0, "topology.area_m2", "must be positive");
        require(c.min_dist_m >= 0, "topology.min_dist_m", "must be >= 0");
    }
    if (c.topology == "explicit") {
        require(!c.positions.empty(), "topology.positions", "required for explicit topologies");
        require(!c.explicit_hops.empty(), "topology.hop_pairs", "required for explicit topologies");
    }

    Section radio(j, "radio");
    c.band_plan = radio.get<std::string>("band_plan", c.band_plan);
    c.bands = radio.get("bands", c.bands);
    c.radios = radio.get("radios", c.radios);
    const std::string model = radio.get<std::string>("path_loss", "itu_indoor");
    c.phy.itu.distance_coeff = radio.get("distance_coeff", c.phy.itu.distance_coeff);
    c.phy.itu.floor_loss_db = radio.get("floor_loss_db", c.phy.itu.floor_loss_db);
    c.phy.tx_power_dbm = radio.get("tx_power_dbm", c.phy.tx_power_dbm);
    c.phy.sensitivity_dbm = radio.get("sensitivity_dbm", c.phy.sensitivity_dbm);
    c.phy.interference_margin_db = radio.get("interference_margin_db", c.phy.interference_margin_db);
    c.phy.aci_enabled = radio.get("aci", c.phy.aci_enabled);
    c.phy.aci_window_mhz = radio.get("aci_window_mhz", c.phy.aci_window_mhz);
    if (const json* rt = radio.raw("rate_table")) {
        std::vector<RateStep> steps;
        try {
            for (const auto& s : *rt) steps.push_back({s.at(0).get<double>(), s.at(1).get<int>()});
            c.phy.rates = RateTable(steps);
        } catch (const std::exception& e) {
            throw ConfigError(radio.field("rate_table") + ": " + e.what());
        }
    }
    radio.finish();
    require(c.band_plan == "whitespace" || c.band_plan == "contiguous", "radio.band_plan",
            "one of whitespace, contiguous");
    require(c.bands >= 1, "radio.bands", "must be >= 1");
    require(c.band_plan != "whitespace" || c.bands <= 31, "radio.bands",
            "at most 31 whitespace channels exist");
    require(c.radios >= 1, "radio.radios", "must be >= 1");
    require(model == "itu_indoor" || model == "free_space", "radio.path_loss",
            "one of itu_indoor, free_space");
    c.phy.model = model == "free_space" ? PathLossModel::FreeSpace : PathLossModel::ItuIndoor;

    Section tr(j, "traffic");
    c.arrivals.kind = parse_arrival_kind(tr.get<std::string>("kind", to_string(c.arrivals.kind)));
    c.arrivals.zipf_exponent = tr.get("zipf_exponent", c.arrivals.zipf_exponent);
    c.arrivals.zipf_max = tr.get("zipf_max", c.arrivals.zipf_max);
    c.load = tr.get("load", c.load);
    const std::string basis = tr.get<std::string>("basis", "absolute");
    if (const json* w = tr.raw("weights")) {
        try {
            c.weights = w->get<std::vector<double>>();
        } catch (const std::exception&) {
            throw ConfigError(tr.field("weights") + ": expected a list of numbers");
        }
    }
    tr.finish();
    require(c.load >= 0, "traffic.load", "must be >= 0");
    require(c.arrivals.zipf_exponent > 1, "traffic.zipf_exponent", "must be > 1");
    require(c.arrivals.zipf_max >= 1, "traffic.zipf_max", "must be >= 1");
    for (double w : c.weights) require(w >= 0, "traffic.weights", "must be nonnegative");
    if (basis == "absolute") c.basis = LoadBasis::Absolute;
    else if (basis == "region") c.basis = LoadBasis::Region;
    else if (basis == "region_mu") c.basis = LoadBasis::RegionMu;
    else throw ConfigError("traffic.basis: one of absolute, region, region_mu");

    Section sch(j, "schedule");
    const std::string engine = sch.get<std::string>("engine", "async");
    c.scheduler = parse_scheduler(sch.get<std::string>("scheduler", "maxgain"));
    c.slots = sch.get("slots", c.slots);
    c.oracle_cap = sch.get("oracle_cap", c.oracle_cap);
    if (const json* s = sch.raw("seeds")) {
        try {
            c.seeds = s->get<std::vector<std::uint64_t>>();
        } catch (const std::exception&) {
            throw ConfigError(sch.field("seeds") + ": expected a list of nonnegative integers");
        }
    }
    const int seed_count = sch.get("seed_count", 0);
    const std::uint64_t first_seed = sch.get<std::uint64_t>("first_seed", 1);
    sch.finish();
    require(engine == "sync" || engine == "async", "schedule.engine", "one of sync, async");
    c.engine = engine == "sync" ? Engine::Sync : Engine::Async;
    require(c.slots >= 1, "schedule.slots", "must be >= 1");
    require(c.oracle_cap >= 1 && c.oracle_cap <= 64, "schedule.oracle_cap", "must lie in [1, 64]");
    require(seed_count >= 0, "schedule.seed_count", "must be >= 0");
    if (seed_count > 0) {
        c.seeds.clear();
        for (int i = 0; i < seed_count; ++i) c.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
    }
    require(!c.seeds.empty(), "schedule.seeds", "at least one seed");
    require(!(c.engine == Engine::Async && c.scheduler == SchedulerKind::MaxWeight), "schedule.scheduler",
            "the exact max-weight oracle runs on the sync engine only");

    Section mg(j, "maxgain");
    const std::string mode = mg.get<std::string>("mode", "randomized");
    c.maxgain.repeats = mg.get("repeats", c.maxgain.repeats);
    const std::string form = mg.get<std::string>("gain_form", "rate_weighted");
    mg.finish();
    require(mode == "randomized" || mode == "oracle", "maxgain.mode", "one of randomized, oracle");
    c.maxgain.mode = mode == "oracle" ? LocalMaxMode::Oracle : LocalMaxMode::Randomized;
    require(c.maxgain.repeats >= 1, "maxgain.repeats", "must be >= 1");
    require(form == "rate_weighted" || form == "unweighted", "maxgain.gain_form",
            "one of rate_weighted, unweighted");
    c.maxgain.form = form == "unweighted" ? GainForm::Unweighted : GainForm::RateWeighted;

    Section as(j, "async");
    AsyncConfig& a = c.async;
    a.cw = as.get("cw", a.cw);
    a.slot_us = as.get("slot_us", a.slot_us);
    a.rts_us = as.get("rts_us", a.rts_us);
    a.cts_us = as.get("cts_us", a.cts_us);
    a.packet_us = as.get("packet_us", a.packet_us);
    a.txopt_us = as.get("txopt_us", a.txopt_us);
    a.period_us = as.get("period_us", a.period_us);
    a.retune_us = as.get("retune_us", a.retune_us);
    a.control_loss = as.get("control_loss", a.control_loss);
    a.bcast_loss = as.get("bcast_loss", a.bcast_loss);
    a.exempt_destination = as.get("exempt_destination", a.exempt_destination);
    a.leaderless = as.get("leaderless", a.leaderless);
    a.clock_drift_us = as.get("clock_drift_us", a.clock_drift_us);
    a.qlen_update_threshold = as.get("qlen_update_threshold", a.qlen_update_threshold);
    a.qcsma_slots_per_band = as.get("qcsma_slots_per_band", a.qcsma_slots_per_band);
    as.finish();

    Section an(j, "analysis");
    c.epsilon = an.get("epsilon", c.epsilon);
    c.verdict.slope_eps = an.get("slope_eps", c.verdict.slope_eps);
    c.verdict.q_cap_per_hop = an.get("q_cap_per_hop", c.verdict.q_cap_per_hop);
    an.finish();
    require(c.epsilon >= 0 && c.epsilon < 1, "analysis.epsilon", "must lie in [0, 1)");
    require(c.verdict.slope_eps > 0, "analysis.slope_eps", "must be positive");
    require(c.verdict.q_cap_per_hop > 0, "analysis.q_cap_per_hop", "must be positive");

    Section out(j, "output");
    c.trace = out.get("trace", c.trace);
    c.trace_event_cap = out.get("trace_event_cap", c.trace_event_cap);
    out.finish();
    require(c.trace_event_cap >= 0, "output.trace_event_cap", "must be >= 0");
    return c;
}

json ScenarioConfig::to_json() const {
    json j;
    j["name"] = name;
    json t = {{"kind", topology}, {"hops", hop_mode}, {"seed", topology_seed}};
    if (topology == "grid") {
        t["side"] = side;
        t["spacing_m"] = spacing_m;
    } else if (topology == "chain") {
        t["nodes"] = nodes;
        t["spacing_m"] = spacing_m;
    } else if (topology == "random") {
        t["nodes"] = nodes;
        t["area_m2"] = area_m2;
        t["min_dist_m"] = min_dist_m;
    } else {
        json p = json::array(), h = json::array();
        for (const auto& [x, y] : positions) p.push_back({x, y});
        for (const auto& hp : explicit_hops) h.push_back({hp.tail, hp.head});
        t["positions"] = p;
        t["hop_pairs"] = h;
    }
    j["topology"] = t;
    json rt = json::array();
    for (const auto& s : phy.rates.steps()) rt.push_back({s.min_margin_db, s.rate});
    j["radio"] = {{"band_plan", band_plan},
                  {"bands", bands},
                  {"radios", radios},
                  {"path_loss", phy.model == PathLossModel::FreeSpace ? "free_space" : "itu_indoor"},
                  {"distance_coeff", phy.itu.distance_coeff},
                  {"floor_loss_db", phy.itu.floor_loss_db},
                  {"tx_power_dbm", phy.tx_power_dbm},
                  {"sensitivity_dbm", phy.sensitivity_dbm},
                  {"interference_margin_db", phy.interference_margin_db},
                  {"aci", phy.aci_enabled},
                  {"aci_window_mhz", phy.aci_window_mhz},
                  {"rate_table", rt}};
    j["traffic"] = {{"kind", to_string(arrivals.kind)},
                    {"zipf_exponent", arrivals.zipf_exponent},
                    {"zipf_max", arrivals.zipf_max},
                    {"load", load},
                    {"basis", basis_name(basis)}};
    if (!weights.empty()) j["traffic"]["weights"] = weights;
    j["schedule"] = {{"engine", engine_name(engine)},
                     {"scheduler", to_string(scheduler)},
                     {"slots", slots},
                     {"seeds", seeds},
                     {"oracle_cap", oracle_cap}};
    j["maxgain"] = {{"mode", maxgain.mode == LocalMaxMode::Oracle ? "oracle" : "randomized"},
                    {"repeats", maxgain.repeats},
                    {"gain_form", maxgain.form == GainForm::Unweighted ? "unweighted" : "rate_weighted"}};
    j["async"] = {{"cw", async.cw},
                  {"slot_us", async.slot_us},
                  {"rts_us", async.rts_us},
                  {"cts_us", async.cts_us},
                  {"packet_us", async.packet_us},
                  {"txopt_us", async.txopt_us},
                  {"period_us", async.period_us},
                  {"retune_us", async.retune_us},
                  {"control_loss", async.control_loss},
                  {"bcast_loss", async.bcast_loss},
                  {"exempt_destination", async.exempt_destination},
                  {"leaderless", async.leaderless},
                  {"clock_drift_us", async.clock_drift_us},
                  {"qlen_update_threshold", async.qlen_update_threshold},
                  {"qcsma_slots_per_band", async.qcsma_slots_per_band}};
    j["analysis"] = {{"epsilon", epsilon},
                     {"slope_eps", verdict.slope_eps},
                     {"q_cap_per_hop", verdict.q_cap_per_hop}};
    j["output"] = {{"trace", trace}, {"trace_event_cap", trace_event_cap}};
    return j;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    std::string pointer = "/" + key;
    for (char& ch : pointer)
        if (ch == '.') ch = '/';
    try {
        j[json::json_pointer(pointer)] = value;
    } catch (const json::exception& e) {
        throw ConfigError("override '" + key + "': " + e.what());
    }
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded()) throw ConfigError("scenario: '" + path + "' is not valid JSON");
    for (const auto& o : overrides) apply_override(j, o);
    return parse_scenario(j);
}

Instance build_instance(const ScenarioConfig& c) {
    const std::vector<Band> plan = c.band_plan == "whitespace" ? whitespace_band_plan(c.bands, c.topology_seed)
                                                               : contiguous_band_plan(c.bands);
    Deployment d;
    if (c.topology == "grid") {
        d = generate_grid(c.side, c.spacing_m, plan, c.radios);
    } else if (c.topology == "chain") {
        d = generate_chain(c.nodes, c.spacing_m, plan, c.radios);
    } else if (c.topology == "random") {
        d = generate_random(c.nodes, c.area_m2, c.min_dist_m, plan, c.radios, c.topology_seed);
    } else {
        d.bands = plan;
        for (std::size_t i = 0; i < c.positions.size(); ++i)
            d.nodes.push_back({static_cast<NodeId>(i), c.positions[i].first, c.positions[i].second, c.radios});
    }
    if (c.topology == "explicit") {
        d.hops = c.explicit_hops;
    } else {
        d.hops = assign_hops(d, c.phy,
                             c.hop_mode == "chain_forward" ? HopMode::ChainForward : HopMode::RandomNeighbor,
                             c.topology_seed);
    }
    validate_deployment(d);

    Instance inst;
    inst.net = build_network(std::move(d), c.phy, c.topology_seed);
    const LinkSet& links = inst.net.links;
    try {
        inst.params = compute_graph_params(links, inst.net.band_graphs, ParamMode::Exact, c.oracle_cap);
    } catch (const SizeLimitError&) {
        inst.params = compute_graph_params(links, inst.net.band_graphs, ParamMode::Bound, c.oracle_cap);
    }
    inst.sigma = compute_sigma(inst.net.grouping, links);
    inst.bounds = compute_bounds(inst.params, inst.sigma, c.bands, c.epsilon);

    inst.weights = c.weights.empty() ? std::vector<double>(links.num_hops(), 1.0) : c.weights;
    if (static_cast<int>(inst.weights.size()) != links.num_hops())
        throw ConfigError("traffic.weights: " + std::to_string(inst.weights.size()) + " entries for " +
                          std::to_string(links.num_hops()) + " hops");
    if (c.basis != LoadBasis::Absolute) {
        if (links.size() > c.oracle_cap)
            throw ConfigError("traffic.basis: region loads need at most schedule.oracle_cap (" +
                              std::to_string(c.oracle_cap) + ") links, instance has " +
                              std::to_string(links.size()));
        inst.region_scale = StabilityRegion(links, c.oracle_cap).max_scale(inst.weights);
    }
    inst.rates = rates_for_load(c, inst, c.load);

    AsyncConfig a = c.async;
    a.slots = c.slots;
    if (c.engine == Engine::Async) validate_async_config(a, links);
    return inst;
}

std::vector<double> rates_for_load(const ScenarioConfig& c, const Instance& inst, double load) {
    double scale = load;
    if (c.basis == LoadBasis::Region) scale *= inst.region_scale;
    if (c.basis == LoadBasis::RegionMu) scale *= inst.region_scale / inst.bounds.mu;
    std::vector<double> r(inst.weights);
    for (double& v : r) v *= scale;
    if (c.arrivals.kind == ArrivalKind::Bernoulli)
        for (double v : r)
            if (v > 1.0) throw ConfigError("traffic.load: bernoulli arrivals need every hop rate <= 1");
    return r;
}

RunOutput run_scenario(const ScenarioConfig& c, const Instance& inst, const std::vector<double>& rates,
                       std::uint64_t seed, const std::string& trace_path) {
    RunOutput out;
    if (c.engine == Engine::Sync) {
        SyncConfig s;
        s.scheduler = c.scheduler;
        s.slots = c.slots;
        s.maxgain = c.maxgain;
        s.oracle_cap = c.oracle_cap;
        s.trace_path = trace_path;
        SyncRun r = run_sync(inst.net, c.arrivals, rates, seed, s);
        out.metrics = std::move(r.metrics);
        out.contraction_identity_failures = r.identity_failures;
    } else {
        AsyncConfig a = c.async;
        a.slots = c.slots;
        a.form = c.maxgain.form;
        a.trace_path = trace_path;
        AsyncRun r = run_async(inst.net, c.arrivals, rates, seed, c.scheduler, a);
        out.metrics = std::move(r.metrics);
        out.counters = r.counters;
    }
    return out;
}

}  // namespace mgmac
