// mgmac: scenario runs, sweeps, comparisons and bound tables.
// Exit codes: 0 ok, 1 validation, 2 runtime, 3 partial sweep.

#include "store.hpp"

#include "mgmac/analysis.hpp"
#include "mgmac/scenario.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace mgmac;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

struct Common {
    std::string scenario;
    std::vector<std::uint64_t> seed;
    std::vector<std::uint64_t> seeds;
    std::string scheduler;
    std::int64_t horizon = 0;
    std::string out = "results";
    int workers = 1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c, bool needs_scenario = true) {
    auto* s = cmd->add_option("--scenario", c.scenario, "scenario JSON file");
    if (needs_scenario) s->required();
    cmd->add_option("--seed", c.seed, "run seed (repeatable)");
    cmd->add_option("--seeds", c.seeds, "comma-separated run seeds")->delimiter(',');
    cmd->add_option("--scheduler", c.scheduler, "maxgain | mb_qcsma | mb_gms | mw");
    cmd->add_option("--horizon", c.horizon, "slots of 5 ms");
    cmd->add_option("--out", c.out, "result root directory");
    cmd->add_option("--workers", c.workers, "parallel runs")->check(CLI::PositiveNumber);
    cmd->add_option("--override", c.overrides, "key.path=value (repeatable)");
}

ScenarioConfig load(const Common& c) {
    std::vector<std::string> ov = c.overrides;
    if (!c.scheduler.empty()) ov.push_back("schedule.scheduler=\"" + c.scheduler + "\"");
    if (c.horizon > 0) ov.push_back("schedule.slots=" + std::to_string(c.horizon));
    ScenarioConfig cfg = load_scenario(c.scenario, ov);
    std::vector<std::uint64_t> seeds = c.seed;
    seeds.insert(seeds.end(), c.seeds.begin(), c.seeds.end());
    if (!seeds.empty()) cfg.seeds = seeds;
    return cfg;
}

// Runs f(i) for i in [0, n) on up to `workers` threads.
template <class F>
void parallel_for(int n, int workers, F&& f) {
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i; (i = next.fetch_add(1)) < n;) f(i);
    };
    const int k = std::max(1, std::min(workers, n));
    if (k == 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    for (int i = 0; i < k; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

int cmd_run(const Common& opt) {
    const ScenarioConfig cfg = load(opt);
    const Instance inst = build_instance(cfg);
    const int n = static_cast<int>(cfg.seeds.size());
    std::vector<std::string> lines(n), errors(n);
    parallel_for(n, opt.workers, [&](int i) {
        const std::uint64_t seed = cfg.seeds[i];
        const std::string dir = store::run_dir(opt.out, cfg, seed);
        try {
            const RunOutput r = store::execute_run(cfg, inst, inst.rates, seed, dir);
            std::ostringstream os;
            os << "seed=" << seed << " mean_qtot=" << fmt(r.metrics.mean_qtot)
               << " throughput=" << fmt(r.metrics.throughput) << " dir=" << dir;
            lines[i] = os.str();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    int failed = 0;
    for (int i = 0; i < n; ++i) {
        if (errors[i].empty()) {
            std::cout << lines[i] << '\n';
        } else {
            ++failed;
            std::cerr << "seed=" << cfg.seeds[i] << " error: " << errors[i] << '\n';
        }
    }
    if (failed == 0) return kExitOk;
    return failed == n ? kExitRuntime : kExitPartial;
}

int cmd_sweep(const Common& opt, const std::string& axis, const std::vector<std::string>& values) {
    static const std::set<std::string> kAxes = {"load", "seeds", "bands", "radios", "loss_prob"};
    if (!kAxes.count(axis)) throw ConfigError("sweep: axis must be one of load, seeds, bands, radios, loss_prob");
    if (values.empty()) throw ConfigError("sweep: --values is empty");
    const ScenarioConfig base = load(opt);

    struct Cell {
        std::string value;
        ScenarioConfig cfg;
        std::vector<std::uint64_t> seeds;
        std::string hash;
        std::string error;   // instance-level failure
        std::optional<Instance> inst;
    };
    std::vector<Cell> cells;
    for (const auto& v : values) {
        Cell cell;
        cell.value = v;
        std::vector<std::string> ov = opt.overrides;
        if (axis == "load") ov.push_back("traffic.load=" + v);
        if (axis == "bands") ov.push_back("radio.bands=" + v);
        if (axis == "radios") ov.push_back("radio.radios=" + v);
        if (axis == "loss_prob") ov.push_back("async.control_loss=" + v);
        Common o = opt;
        o.overrides = ov;
        cell.cfg = load(o);
        cell.seeds = axis == "seeds" ? std::vector<std::uint64_t>{std::stoull(v)} : cell.cfg.seeds;
        cell.hash = store::config_hash(cell.cfg);
        try {
            cell.inst.emplace(build_instance(cell.cfg));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));
    }

    struct Job {
        int cell;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c)
        for (auto s : cells[c].seeds) jobs.push_back({c, s});
    std::vector<std::optional<RunMetrics>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    const fs::path root = fs::path(opt.out) / base.name / ("sweep_" + axis);
    parallel_for(static_cast<int>(jobs.size()), opt.workers, [&](int i) {
        const Cell& cell = cells[jobs[i].cell];
        if (!cell.inst) {
            errors[i] = cell.error;
            return;
        }
        try {
            const std::string dir = store::run_dir((root / cell.value).string(), cell.cfg, jobs[i].seed);
            results[i] = store::execute_run(cell.cfg, *cell.inst, cell.inst->rates, jobs[i].seed, dir).metrics;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::ostringstream csv;
    csv << "axis,value,runs,failed,mean_qtot,mean_qtot_sd,throughput,offered,mean_delay,stable_runs,verdict,config_hash\n";
    int failed_total = 0;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
        std::vector<double> q, thr, off, del;
        int failed = 0, stable = 0;
        const int hops = cells[c].inst ? cells[c].inst->net.links.num_hops() : 0;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].cell != c) continue;
            if (!results[i]) {
                ++failed;
                std::cerr << axis << '=' << cells[c].value << " seed=" << jobs[i].seed << " error: " << errors[i] << '\n';
                continue;
            }
            const RunMetrics& m = *results[i];
            q.push_back(m.mean_qtot);
            thr.push_back(m.throughput);
            off.push_back(m.offered);
            del.push_back(m.mean_delay);
            if (m.qtot.size() >= 4 && stability_verdict(m.qtot, hops, 0, cells[c].cfg.verdict).stable) ++stable;
        }
        failed_total += failed;
        const double mq = mean_of(q);
        double var = 0;
        for (double x : q) var += (x - mq) * (x - mq);
        const double sd = q.size() > 1 ? std::sqrt(var / static_cast<double>(q.size() - 1)) : 0.0;
        const bool ok = !q.empty() && stable == static_cast<int>(q.size());
        csv << axis << ',' << store::csv_field(cells[c].value) << ',' << q.size() << ',' << failed << ','
            << fmt(mq) << ',' << fmt(sd) << ',' << fmt(mean_of(thr)) << ',' << fmt(mean_of(off)) << ','
            << fmt(mean_of(del)) << ',' << stable << ',' << (q.empty() ? "none" : ok ? "stable" : "unstable")
            << ',' << cells[c].hash << '\n';
    }
    fs::create_directories(root);
    const fs::path out = root.string() + ".csv";
    std::ofstream(out) << csv.str();
    std::cout << csv.str() << "wrote " << out.string() << '\n';
    if (failed_total == 0) return kExitOk;
    return failed_total == static_cast<int>(jobs.size()) ? kExitRuntime : kExitPartial;
}

std::vector<RunMetrics> load_set(const std::string& root) {
    std::vector<RunMetrics> runs;
    for (const auto& d : store::find_runs(root)) runs.push_back(store::read_run(d));
    return runs;
}

int cmd_compare(const std::string& baseline, const std::string& candidate, const std::string& out,
                int threshold) {
    const auto base = load_set(baseline);
    const auto cand = load_set(candidate);
    const GainComparison g = compare_delay(base, cand);
    const NodeId v = bottleneck_node(base);
    json summary = {{"baseline", baseline},
                    {"candidate", candidate},
                    {"runs", g.seeds.size()},
                    {"median_gain", g.median},
                    {"frac_gain_at_least_2", 0.0},
                    {"bottleneck_node", v},
                    {"threshold", threshold},
                    {"baseline_frac_le", node_frac_at_most(base, v, threshold)},
                    {"candidate_frac_le", node_frac_at_most(cand, v, threshold)}};
    double at2 = 0;
    for (double r : g.ratios) at2 += r >= 2.0 ? 1.0 : 0.0;
    summary["frac_gain_at_least_2"] = at2 / static_cast<double>(g.ratios.size());

    std::ostringstream ccdf;
    ccdf << "gain_ratio,frac_runs_at_least\n";
    for (const auto& [x, p] : g.ccdf) ccdf << fmt(x) << ',' << fmt(p) << '\n';
    std::ostringstream cdf;
    cdf << "backlog,baseline_cdf,candidate_cdf\n";
    const auto cb = node_queue_cdf(base, v);
    const auto cc = node_queue_cdf(cand, v);
    for (std::size_t k = 0; k < cb.size(); ++k) cdf << k << ',' << fmt(cb[k].second) << ',' << fmt(cc[k].second) << '\n';
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "gain_ccdf.csv") << ccdf.str();
    std::ofstream(fs::path(out) / "bottleneck_cdf.csv") << cdf.str();
    std::ofstream(fs::path(out) / "compare.json") << summary.dump(2) << '\n';
    std::cout << ccdf.str() << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_bounds(const Common& opt) {
    const ScenarioConfig cfg = load(opt);
    const Instance inst = build_instance(cfg);
    const BoundReport& b = inst.bounds;
    json j = b.to_json();
    j["links"] = inst.net.links.size();
    j["hops"] = inst.net.links.num_hops();
    j["groups"] = inst.net.grouping.size();
    j["delta"] = inst.params.delta;
    if (inst.net.links.size() <= cfg.oracle_cap) {
        const StabilityRegion region(inst.net.links, cfg.oracle_cap);
        const double s = region.max_scale(inst.weights);
        j["region_scale"] = s;
        j["ref_load_region_over_mu"] = s / b.mu;
        j["ref_load_region_over_mu_prime"] = s / b.mu_prime;
        j["ref_load_region_over_mu_dprime"] = s / b.mu_dprime;
    } else {
        j["region_scale"] = nullptr;
    }
    std::cout << "key,value\n";
    for (const auto& [k, v] : j.items()) std::cout << k << ',' << v.dump() << '\n';
    if (cfg.topology == "chain") {
        // Chain example: a 1/8 guarantee means μ'' ≈ 8. Reported, not enforced.
        const bool pass = std::abs(b.mu_dprime - 8.0) <= 0.8;
        std::cout << "chain_check,mu_dprime=" << fmt(b.mu_dprime) << " target=8 " << (pass ? "PASS" : "FAIL") << '\n';
    }
    if (!opt.out.empty() && opt.out != "results") {
        fs::create_directories(opt.out);
        std::ofstream(fs::path(opt.out) / "bounds.json") << j.dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_validate(const Common& opt) {
    const ScenarioConfig cfg = load(opt);
    const Instance inst = build_instance(cfg);
    std::cout << "ok name=" << cfg.name << " nodes=" << inst.net.links.num_nodes()
              << " hops=" << inst.net.links.num_hops() << " links=" << inst.net.links.size()
              << " groups=" << inst.net.grouping.size() << " config_hash=" << store::config_hash(cfg) << '\n';
    return kExitOk;
}

int cmd_replay(const std::string& dir, const std::string& scratch) {
    const ScenarioConfig cfg = load_scenario((fs::path(dir) / "config.json").string());
    const Instance inst = build_instance(cfg);
    const fs::path tmp = scratch.empty() ? fs::temp_directory_path() / ("mgmac_replay_" + std::to_string(::getpid()))
                                         : fs::path(scratch);
    fs::remove_all(tmp);
    store::execute_run(cfg, inst, inst.rates, cfg.seeds.at(0), tmp.string());
    int diffs = 0;
    for (const char* f : {"metrics.json", "timeseries.csv", "node_hist.csv", "trace.txt"}) {
        const fs::path a = fs::path(dir) / f, b = tmp / f;
        if (!fs::exists(a) && !fs::exists(b)) continue;
        const bool same = fs::exists(a) && fs::exists(b) &&
                          store::sha256_file(a.string()) == store::sha256_file(b.string());
        std::cout << f << ' ' << (same ? "IDENTICAL" : "DIFFERS") << '\n';
        diffs += same ? 0 : 1;
    }
    if (scratch.empty()) fs::remove_all(tmp);
    return diffs == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-band multi-radio MAC scheduling experiments"};
    app.require_subcommand(1);

    Common run_opt, sweep_opt, bounds_opt, validate_opt;
    auto* run = app.add_subcommand("run", "run a scenario for each seed");
    add_common(run, run_opt);

    auto* sweep = app.add_subcommand("sweep", "sweep one axis and aggregate");
    add_common(sweep, sweep_opt);
    std::string axis;
    std::vector<std::string> values;
    sweep->add_option("--axis", axis, "load | seeds | bands | radios | loss_prob")->required();
    sweep->add_option("--values", values, "comma-separated axis values")->delimiter(',')->required();

    auto* compare = app.add_subcommand("compare", "delay-gain CCDF of candidate against baseline");
    std::string base_dir, cand_dir, cmp_out = "compare";
    int threshold = 25;
    compare->add_option("baseline", base_dir, "baseline result directory")->required();
    compare->add_option("candidate", cand_dir, "candidate result directory")->required();
    compare->add_option("--out", cmp_out, "output directory");
    compare->add_option("--threshold", threshold, "bottleneck backlog threshold");

    auto* bounds = app.add_subcommand("bounds", "bound table for a scenario");
    add_common(bounds, bounds_opt);

    auto* validate = app.add_subcommand("validate", "check a scenario without running it");
    add_common(validate, validate_opt);

    auto* replay = app.add_subcommand("replay", "re-execute a run directory and diff its outputs");
    std::string replay_dir, replay_scratch;
    replay->add_option("run_dir", replay_dir, "run directory")->required();
    replay->add_option("--out", replay_scratch, "keep the replay here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(run_opt);
        if (*sweep) return cmd_sweep(sweep_opt, axis, values);
        if (*compare) return cmd_compare(base_dir, cand_dir, cmp_out, threshold);
        if (*bounds) return cmd_bounds(bounds_opt);
        if (*validate) return cmd_validate(validate_opt);
        if (*replay) return cmd_replay(replay_dir, replay_scratch);
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
