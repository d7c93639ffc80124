#pragma once

#include <cstdint>
#include <random>

namespace mgmac {

// Every random decision in a run draws from a stream derived from the master
// seed, a stream family and an id, so swapping schedulers does not perturb
// arrivals and per-group draws stay independent of evaluation order.
enum class StreamFamily : std::uint32_t {
    Arrivals = 1,
    GroupBand = 2,
    LocalMax = 3,
    Contention = 4,
    Qcsma = 5,
    Topology = 6,
    Grouping = 7,
    NodeBackoff = 8,
    ControlLoss = 9,
    LeaderPhase = 10,
    Scenario = 11,
    Hops = 12,
    Test = 99,
};

class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t master, StreamFamily family, std::uint64_t id);

    double uniform();                                  // [0, 1)
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
    bool bernoulli(double p);
    double exponential(double mean);
    std::int64_t poisson(double mean);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mgmac
