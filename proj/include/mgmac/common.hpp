#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mgmac {

using NodeId = std::int32_t;
using LinkId = std::int32_t;
using HopId = std::int32_t;
using BandIndex = std::int32_t;   // 0-based position in the band plan
using Weight = std::int64_t;      // queue backlog times rate, always integral
using TimeUs = std::int64_t;

inline constexpr LinkId kNoLink = -1;
inline constexpr NodeId kNoNode = -1;

// Bad argument to an operation (non-positive distance, malformed input set).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Scenario or table contents that cannot be used to build a run.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact enumeration requested above the configured cap.
class SizeLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Random deployment could not satisfy its constraints within the retry cap.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A hop pair that no band can carry, or an otherwise unusable deployment.
class InvalidDeployment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal invariant broken (infeasible schedule emitted, list corruption).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mgmac
