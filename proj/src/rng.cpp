#include "mgmac/rng.hpp"

namespace mgmac {

RngStream::RngStream(std::uint64_t master, StreamFamily family, std::uint64_t id) {
    const auto fam = static_cast<std::uint32_t>(family);
    std::seed_seq seq{static_cast<std::uint32_t>(master & 0xffffffffu),
                      static_cast<std::uint32_t>(master >> 32), fam,
                      static_cast<std::uint32_t>(id & 0xffffffffu),
                      static_cast<std::uint32_t>(id >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
}

bool RngStream::bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
}

double RngStream::exponential(double mean) {
    return std::exponential_distribution<double>(1.0 / mean)(engine_);
}

std::int64_t RngStream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(engine_);
}

}  // namespace mgmac
