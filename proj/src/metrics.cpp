#include "mgmac/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace mgmac {

TraceWriter::TraceWriter(const std::string& path, const std::string& header) {
    if (!path.empty()) {
        out_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
        if (!*out_) throw ConfigError("cannot open trace file " + path);
        *out_ << "# time_us node radio band event link hop qlen\n";
    }
    if (!header.empty()) comment(header);
}

void TraceWriter::feed(const std::string& line) {
    for (unsigned char c : line) {
        hash_ ^= c;
        hash_ *= 1099511628211ull;
    }
    if (out_) *out_ << line;
}

void TraceWriter::comment(const std::string& text) { feed("# " + text + "\n"); }

void TraceWriter::record(TimeUs t, NodeId node, int radio, BandIndex band, const char* event,
                         LinkId link, HopId hop, std::int64_t qlen) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld %d %d %d %s %d %d %lld\n", static_cast<long long>(t),
                  node, radio, band, event, link, hop, static_cast<long long>(qlen));
    feed(buf);
    ++events_;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json RunMetrics::to_json(bool with_series) const {
    nlohmann::json j;
    j["engine"] = engine;
    j["scheduler"] = scheduler;
    j["seed"] = seed;
    j["slots"] = slots;
    j["steps"] = steps;
    j["mean_qtot"] = mean_qtot;
    j["offered_per_slot"] = offered;
    j["throughput_per_slot"] = throughput;
    j["mean_delay_ticks"] = mean_delay;
    j["delay_p50"] = delay_p50;
    j["delay_p90"] = delay_p90;
    j["delay_p99"] = delay_p99;
    j["node_mean_q"] = node_mean_q;
    j["node_frac_le"] = node_frac_le;
    j["node_q_threshold"] = node_q_threshold;
    j["trace_hash"] = hex64(trace_hash);
    j["trace_events"] = trace_events;
    for (const auto& [k, v] : extra) j["extra"][k] = v;
    if (with_series) {
        j["qtot"] = qtot;
        j["node_hist"] = node_hist;
    }
    return j;
}

QueueSampler::QueueSampler(const Deployment* d, const LinkSet& links, int threshold)
    : num_nodes_(links.num_nodes()), threshold_(threshold) {
    hop_tail_.assign(links.num_hops(), 0);
    if (d) {
        for (int h = 0; h < d->num_hops(); ++h) hop_tail_[h] = d->hops[h].tail;
    } else {
        for (const GeneralizedLink& l : links.links()) hop_tail_[l.hop] = l.tail;
    }
    node_sum_.assign(num_nodes_, 0.0);
    node_le_.assign(num_nodes_, 0);
    node_hist_.assign(num_nodes_, std::vector<std::int64_t>(kNodeHistCap + 1, 0));
}

void QueueSampler::sample(const QueueState& q) {
    qtot_.push_back(static_cast<double>(q.total()));
    std::vector<std::int64_t> per(num_nodes_, 0);
    for (int h = 0; h < q.num_hops(); ++h) per[hop_tail_[h]] += q.q(h);
    for (int v = 0; v < num_nodes_; ++v) {
        node_sum_[v] += static_cast<double>(per[v]);
        if (per[v] <= threshold_) ++node_le_[v];
        ++node_hist_[v][std::min<std::int64_t>(per[v], kNodeHistCap)];
    }
    ++samples_;
}

void QueueSampler::finish(RunMetrics& m) const {
    m.qtot = qtot_;
    m.mean_qtot = qtot_.empty() ? 0.0
                                : std::accumulate(qtot_.begin(), qtot_.end(), 0.0) /
                                      static_cast<double>(qtot_.size());
    m.node_q_threshold = threshold_;
    m.node_hist = node_hist_;
    m.node_mean_q.assign(num_nodes_, 0.0);
    m.node_frac_le.assign(num_nodes_, 1.0);
    if (samples_ == 0) return;
    for (int v = 0; v < num_nodes_; ++v) {
        m.node_mean_q[v] = node_sum_[v] / static_cast<double>(samples_);
        m.node_frac_le[v] = static_cast<double>(node_le_[v]) / static_cast<double>(samples_);
    }
}

void fill_delay(RunMetrics& m, const DelayStats& d) {
    m.mean_delay = d.mean();
    m.delay_p50 = d.percentile(0.5);
    m.delay_p90 = d.percentile(0.9);
    m.delay_p99 = d.percentile(0.99);
}

}  // namespace mgmac
