#include "store.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace mgmac::store {

namespace {

std::string to_hex(const unsigned char* p, unsigned n) {
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned i = 0; i < n; ++i) os << std::setw(2) << static_cast<int>(p[i]);
    return os.str();
}

std::string sha256_bytes(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    return to_hex(md, n);
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidInput("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json counters_json(const AsyncCounters& c) {
    return {{"frames", c.frames},
            {"contenders", c.contenders},
            {"won", c.won},
            {"lost", c.lost},
            {"busy", c.busy},
            {"collided", c.collided},
            {"deferred", c.deferred},
            {"priority_yields", c.priority_yields},
            {"hp_grants", c.hp_grants},
            {"mp_grants", c.mp_grants},
            {"lp_grants", c.lp_grants},
            {"selections", c.selections},
            {"bcast_sent", c.bcast_sent},
            {"bcast_lost", c.bcast_lost},
            {"hp_adds", c.hp_adds},
            {"qlen_updates", c.qlen_updates},
            {"overheard", c.overheard},
            {"overhear_dropped", c.overhear_dropped},
            {"unknown_messages", c.unknown_messages},
            {"leaderless_disagreements", c.leaderless_disagreements},
            {"data_starts", c.data_starts},
            {"validator_checks", c.validator_checks},
            {"list_checks", c.list_checks}};
}

}  // namespace

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string run_dir(const std::string& root, const ScenarioConfig& c, std::uint64_t seed) {
    return (fs::path(root) / c.name / to_string(c.scheduler) / ("seed_" + std::to_string(seed))).string();
}

std::string config_hash(const ScenarioConfig& c) {
    json j = c.to_json();
    j["schedule"].erase("seeds");
    return sha256_bytes(j.dump());
}

std::string sha256_file(const std::string& path) { return sha256_bytes(read_file(path)); }

RunOutput execute_run(const ScenarioConfig& c, const Instance& inst, const std::vector<double>& rates,
                      std::uint64_t seed, const std::string& dir) {
    const fs::path d(dir);
    fs::create_directories(d);
    const fs::path trace = d / "trace.txt";
    fs::remove(trace);
    RunOutput out = run_scenario(c, inst, rates, seed, c.trace ? trace.string() : "");
    const bool trace_kept = c.trace && out.metrics.trace_events <= c.trace_event_cap;
    if (c.trace && !trace_kept) fs::remove(trace);

    ScenarioConfig echo = c;
    echo.seeds = {seed};
    std::vector<std::string> files = {"config.json", "metrics.json", "timeseries.csv", "node_hist.csv"};
    write_file(d / "config.json", echo.to_json().dump(2) + "\n");

    json m = out.metrics.to_json(false);
    m["config_hash"] = config_hash(c);
    m["rates"] = rates;
    m["trace_kept"] = trace_kept;
    if (c.engine == Engine::Async) m["counters"] = counters_json(out.counters);
    else m["identity_failures"] = out.contraction_identity_failures;
    write_file(d / "metrics.json", m.dump(2) + "\n");

    std::ostringstream ts;
    ts << "slot,qtot\n";
    for (std::size_t i = 0; i < out.metrics.qtot.size(); ++i) ts << i << ',' << out.metrics.qtot[i] << '\n';
    write_file(d / "timeseries.csv", ts.str());

    std::ostringstream nh;
    nh << "node,backlog,samples\n";
    for (std::size_t v = 0; v < out.metrics.node_hist.size(); ++v)
        for (std::size_t k = 0; k < out.metrics.node_hist[v].size(); ++k)
            if (out.metrics.node_hist[v][k]) nh << v << ',' << k << ',' << out.metrics.node_hist[v][k] << '\n';
    write_file(d / "node_hist.csv", nh.str());

    if (trace_kept) files.push_back("trace.txt");
    std::ostringstream sums;
    for (const auto& f : files) sums << sha256_file((d / f).string()) << "  " << f << '\n';
    write_file(d / "checksums.sha256", sums.str());
    return out;
}

RunMetrics read_run(const std::string& dir) {
    const fs::path d(dir);
    const json j = json::parse(read_file(d / "metrics.json"), nullptr, false);
    if (j.is_discarded()) throw InvalidInput(dir + ": metrics.json is not valid JSON");
    RunMetrics m;
    try {
        m.engine = j.at("engine").get<std::string>();
        m.scheduler = j.at("scheduler").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.slots = j.at("slots").get<std::int64_t>();
        m.mean_qtot = j.at("mean_qtot").get<double>();
        m.offered = j.at("offered_per_slot").get<double>();
        m.throughput = j.at("throughput_per_slot").get<double>();
        m.mean_delay = j.at("mean_delay_ticks").get<double>();
        m.node_mean_q = j.at("node_mean_q").get<std::vector<double>>();
        m.node_frac_le = j.at("node_frac_le").get<std::vector<double>>();
        m.node_q_threshold = j.at("node_q_threshold").get<int>();
    } catch (const json::exception& e) {
        throw InvalidInput(dir + ": metrics.json: " + e.what());
    }

    std::istringstream ts(read_file(d / "timeseries.csv"));
    std::string line;
    std::getline(ts, line);
    while (std::getline(ts, line)) {
        const auto comma = line.find(',');
        if (comma != std::string::npos) m.qtot.push_back(std::stod(line.substr(comma + 1)));
    }

    m.node_hist.assign(m.node_mean_q.size(), std::vector<std::int64_t>(kNodeHistCap + 1, 0));
    std::istringstream nh(read_file(d / "node_hist.csv"));
    std::getline(nh, line);
    while (std::getline(nh, line)) {
        std::size_t v = 0, k = 0;
        long long n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ls(line);
        if (ls >> v >> c1 >> k >> c2 >> n && v < m.node_hist.size() && k <= static_cast<std::size_t>(kNodeHistCap))
            m.node_hist[v][k] = n;
    }
    return m;
}

std::vector<std::string> find_runs(const std::string& root) {
    std::vector<std::string> out;
    if (!fs::exists(root)) throw InvalidInput("no such result directory: " + root);
    if (fs::exists(fs::path(root) / "metrics.json")) return {root};
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().filename() == "metrics.json")
            out.push_back(e.path().parent_path().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mgmac::store
