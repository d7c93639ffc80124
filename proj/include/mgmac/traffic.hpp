#pragma once

#include "mgmac/common.hpp"
#include "mgmac/rng.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace mgmac {

enum class ArrivalKind { Bernoulli, Poisson, ZipfBurst };

ArrivalKind parse_arrival_kind(const std::string& s);
std::string to_string(ArrivalKind k);

struct ArrivalSpec {
    ArrivalKind kind = ArrivalKind::Bernoulli;
    double zipf_exponent = 1.6;
    int zipf_max = 64;   // truncation keeps the second moment finite
};

// Truncated Zipf on {1..max}: P(k) ∝ k^-s.
class ZipfSampler {
public:
    ZipfSampler(double exponent, int max);
    int sample(RngStream& rng) const;
    double mean() const { return mean_; }
    double pmf(int k) const;
    int max() const { return static_cast<int>(pmf_.size()); }

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    double mean_ = 0.0;
};

// Per-hop arrival generator; each hop draws from its own stream so the
// sequence does not depend on the scheduler.
//   bernoulli: one packet w.p. rate (rate ≤ 1 enforced)
//   poisson:   Poisson(rate) packets
//   zipf_burst: bursts of Zipf size at exponential epochs with mean gap
//               E[size]/rate slots; a slot collects bursts with epoch in [t, t+1)
class ArrivalProcess {
public:
    ArrivalProcess(const ArrivalSpec& spec, std::vector<double> rates, std::uint64_t seed);

    // Arrivals for the next tick, one entry per hop. Ticks are consumed in order.
    const std::vector<std::int64_t>& next();
    std::int64_t tick() const { return tick_; }
    const std::vector<double>& rates() const { return rates_; }

private:
    ArrivalSpec spec_;
    std::vector<double> rates_;
    std::vector<RngStream> streams_;
    std::vector<double> next_burst_;
    ZipfSampler zipf_;
    std::vector<std::int64_t> buf_;
    std::int64_t tick_ = 0;
};

struct DelayStats {
    std::int64_t packets = 0;
    double sum = 0.0;
    std::vector<std::int64_t> hist;   // hist[d] = packets with sojourn d

    void add(std::int64_t sojourn, std::int64_t count);
    double mean() const { return packets ? sum / static_cast<double>(packets) : 0.0; }
    std::int64_t percentile(double p) const;
};

// Backlogs with FIFO arrival stamps. Sojourn = departure tick - arrival tick + 1.
class QueueState {
public:
    explicit QueueState(int num_hops = 0);

    int num_hops() const { return static_cast<int>(q_.size()); }
    std::int64_t q(HopId h) const { return q_[h]; }
    const std::vector<std::int64_t>& all() const { return q_; }
    std::int64_t total() const { return total_; }

    void arrive(HopId h, std::int64_t count, std::int64_t tick);
    // Removes up to `max_packets` from the head of hop h; returns departures.
    std::int64_t depart(HopId h, std::int64_t max_packets, std::int64_t tick);

    std::int64_t cumulative_arrivals(HopId h) const { return arrived_[h]; }
    std::int64_t cumulative_departures(HopId h) const { return departed_[h]; }
    const DelayStats& delay() const { return delay_; }

    // For tests that pin a backlog directly. Stamps use `tick`.
    void set(HopId h, std::int64_t value, std::int64_t tick = 0);

private:
    struct Run {
        std::int64_t tick;
        std::int64_t count;
    };
    std::vector<std::int64_t> q_;
    std::vector<std::deque<Run>> fifo_;
    std::vector<std::int64_t> arrived_;
    std::vector<std::int64_t> departed_;
    std::int64_t total_ = 0;
    DelayStats delay_;
};

class LinkSet;

// Serves active links: D_h = min(q_h, Σ r_l over active links of hop h).
// Arrivals of this tick must already be in the queue. Returns per-hop departures.
std::vector<std::int64_t> apply_service(QueueState& queues, const std::vector<LinkId>& active,
                                        const LinkSet& links, std::int64_t tick);

}  // namespace mgmac
