#include "mgmac/traffic.hpp"

#include "mgmac/topology.hpp"

#include <algorithm>
#include <cmath>

namespace mgmac {

ArrivalKind parse_arrival_kind(const std::string& s) {
    if (s == "bernoulli") return ArrivalKind::Bernoulli;
    if (s == "poisson") return ArrivalKind::Poisson;
    if (s == "zipf_burst" || s == "zipf") return ArrivalKind::ZipfBurst;
    throw ConfigError("traffic.kind: unknown arrival kind '" + s + "'");
}

std::string to_string(ArrivalKind k) {
    switch (k) {
        case ArrivalKind::Bernoulli: return "bernoulli";
        case ArrivalKind::Poisson: return "poisson";
        case ArrivalKind::ZipfBurst: return "zipf_burst";
    }
    return "?";
}

ZipfSampler::ZipfSampler(double exponent, int max) {
    if (!(exponent > 1.0)) throw ConfigError("zipf exponent must be > 1");
    if (max < 1) throw ConfigError("zipf truncation must be ≥ 1");
    pmf_.resize(max);
    double z = 0.0;
    for (int k = 1; k <= max; ++k) z += std::pow(static_cast<double>(k), -exponent);
    double acc = 0.0;
    for (int k = 1; k <= max; ++k) {
        pmf_[k - 1] = std::pow(static_cast<double>(k), -exponent) / z;
        acc += pmf_[k - 1];
        cdf_.push_back(acc);
        mean_ += k * pmf_[k - 1];
    }
    cdf_.back() = 1.0;
}

int ZipfSampler::sample(RngStream& rng) const {
    const double u = rng.uniform();
    return static_cast<int>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) + 1;
}

double ZipfSampler::pmf(int k) const {
    if (k < 1 || k > max()) return 0.0;
    return pmf_[k - 1];
}

ArrivalProcess::ArrivalProcess(const ArrivalSpec& spec, std::vector<double> rates,
                               std::uint64_t seed)
    : spec_(spec), rates_(std::move(rates)), zipf_(spec.zipf_exponent, spec.zipf_max) {
    for (std::size_t h = 0; h < rates_.size(); ++h) {
        if (!(rates_[h] >= 0.0)) throw ConfigError("arrival rate must be non-negative");
        if (spec_.kind == ArrivalKind::Bernoulli && rates_[h] > 1.0)
            throw ConfigError("bernoulli arrival rate must be ≤ 1 packet per tick");
        streams_.emplace_back(seed, StreamFamily::Arrivals, h);
    }
    next_burst_.assign(rates_.size(), 0.0);
    if (spec_.kind == ArrivalKind::ZipfBurst) {
        for (std::size_t h = 0; h < rates_.size(); ++h)
            next_burst_[h] = rates_[h] > 0.0 ? streams_[h].exponential(zipf_.mean() / rates_[h])
                                             : INFINITY;
    }
    buf_.assign(rates_.size(), 0);
}

const std::vector<std::int64_t>& ArrivalProcess::next() {
    const double t_end = static_cast<double>(tick_ + 1);
    for (std::size_t h = 0; h < rates_.size(); ++h) {
        const double lam = rates_[h];
        RngStream& rng = streams_[h];
        std::int64_t a = 0;
        switch (spec_.kind) {
            case ArrivalKind::Bernoulli: a = rng.bernoulli(lam) ? 1 : 0; break;
            case ArrivalKind::Poisson: a = rng.poisson(lam); break;
            case ArrivalKind::ZipfBurst:
                while (next_burst_[h] < t_end) {
                    a += zipf_.sample(rng);
                    next_burst_[h] += rng.exponential(zipf_.mean() / lam);
                }
                break;
        }
        buf_[h] = a;
    }
    ++tick_;
    return buf_;
}

void DelayStats::add(std::int64_t sojourn, std::int64_t count) {
    if (count <= 0) return;
    packets += count;
    sum += static_cast<double>(sojourn) * static_cast<double>(count);
    if (sojourn >= static_cast<std::int64_t>(hist.size())) hist.resize(sojourn + 1, 0);
    hist[sojourn] += count;
}

std::int64_t DelayStats::percentile(double p) const {
    if (packets == 0) return 0;
    const double target = p * static_cast<double>(packets);
    std::int64_t acc = 0;
    for (std::size_t d = 0; d < hist.size(); ++d) {
        acc += hist[d];
        if (static_cast<double>(acc) >= target) return static_cast<std::int64_t>(d);
    }
    return static_cast<std::int64_t>(hist.size()) - 1;
}

QueueState::QueueState(int num_hops)
    : q_(num_hops, 0), fifo_(num_hops), arrived_(num_hops, 0), departed_(num_hops, 0) {}

void QueueState::arrive(HopId h, std::int64_t count, std::int64_t tick) {
    if (count <= 0) return;
    q_[h] += count;
    total_ += count;
    arrived_[h] += count;
    auto& f = fifo_[h];
    if (!f.empty() && f.back().tick == tick) f.back().count += count;
    else f.push_back({tick, count});
}

std::int64_t QueueState::depart(HopId h, std::int64_t max_packets, std::int64_t tick) {
    const std::int64_t d = std::min(q_[h], std::max<std::int64_t>(0, max_packets));
    std::int64_t left = d;
    auto& f = fifo_[h];
    while (left > 0) {
        Run& r = f.front();
        const std::int64_t take = std::min(left, r.count);
        delay_.add(tick - r.tick + 1, take);
        r.count -= take;
        left -= take;
        if (r.count == 0) f.pop_front();
    }
    q_[h] -= d;
    total_ -= d;
    departed_[h] += d;
    return d;
}

void QueueState::set(HopId h, std::int64_t value, std::int64_t tick) {
    total_ -= q_[h];
    q_[h] = 0;
    fifo_[h].clear();
    if (value > 0) {
        q_[h] = value;
        total_ += value;
        fifo_[h].push_back({tick, value});
    }
}

std::vector<std::int64_t> apply_service(QueueState& queues, const std::vector<LinkId>& active,
                                        const LinkSet& links, std::int64_t tick) {
    std::vector<std::int64_t> cap(queues.num_hops(), 0);
    for (LinkId l : active) cap[links[l].hop] += links[l].rate;
    std::vector<std::int64_t> dep(queues.num_hops(), 0);
    for (int h = 0; h < queues.num_hops(); ++h)
        if (cap[h] > 0) dep[h] = queues.depart(h, cap[h], tick);
    return dep;
}

}  // namespace mgmac
