#pragma once

#include "mgmac/common.hpp"
#include "mgmac/topology.hpp"
#include "mgmac/traffic.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mgmac {

// Line-oriented trace: `time_us node radio band event link hop qlen`.
// Every line feeds a running FNV-1a hash; the file is written only when a
// path is given.
class TraceWriter {
public:
    TraceWriter() = default;
    explicit TraceWriter(const std::string& path, const std::string& header = "");

    void record(TimeUs t, NodeId node, int radio, BandIndex band, const char* event, LinkId link,
                HopId hop, std::int64_t qlen);
    void comment(const std::string& text);

    std::uint64_t hash() const { return hash_; }
    std::int64_t events() const { return events_; }
    bool writing() const { return static_cast<bool>(out_); }

private:
    void feed(const std::string& line);

    std::unique_ptr<std::ofstream> out_;
    std::uint64_t hash_ = 1469598103934665603ull;
    std::int64_t events_ = 0;
};

std::string hex64(std::uint64_t v);

inline constexpr int kNodeHistCap = 500;

struct RunMetrics {
    std::string engine;        // "sync" or "async"
    std::string scheduler;
    std::uint64_t seed = 0;
    std::int64_t slots = 0;
    std::int64_t steps = 0;    // scheduler decisions (slots or contention frames)
    double mean_qtot = 0.0;
    double offered = 0.0;      // arrivals per slot
    double throughput = 0.0;   // departures per slot
    double mean_delay = 0.0;   // ticks
    std::int64_t delay_p50 = 0;
    std::int64_t delay_p90 = 0;
    std::int64_t delay_p99 = 0;
    std::vector<double> qtot;  // one sample per slot
    std::vector<double> node_mean_q;
    std::vector<double> node_frac_le;   // fraction of samples with node backlog ≤ threshold
    int node_q_threshold = 25;
    // node_hist[v][k]: samples with node backlog k; the last bin pools ≥ kNodeHistCap.
    std::vector<std::vector<std::int64_t>> node_hist;
    std::uint64_t trace_hash = 0;
    std::int64_t trace_events = 0;
    std::map<std::string, double> extra;

    nlohmann::json to_json(bool with_series = false) const;
};

// Per-slot sampler for Q_tot and per-node backlog (sum over hops the node sends on).
class QueueSampler {
public:
    QueueSampler(const Deployment* d, const LinkSet& links, int threshold = 25);
    void sample(const QueueState& q);
    void finish(RunMetrics& m) const;

private:
    std::vector<NodeId> hop_tail_;
    int num_nodes_ = 0;
    int threshold_ = 25;
    std::vector<double> qtot_;
    std::vector<double> node_sum_;
    std::vector<std::int64_t> node_le_;
    std::vector<std::vector<std::int64_t>> node_hist_;
    std::int64_t samples_ = 0;
};

void fill_delay(RunMetrics& m, const DelayStats& d);

}  // namespace mgmac
