#pragma once

#include "mgmac/metrics.hpp"
#include "mgmac/network.hpp"
#include "mgmac/sched_sync.hpp"
#include "mgmac/traffic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mgmac {

enum class SchedulerKind { MaxGain, Qcsma, Gms, MaxWeight };

SchedulerKind parse_scheduler(const std::string& s);
std::string to_string(SchedulerKind k);

struct SyncConfig {
    SchedulerKind scheduler = SchedulerKind::MaxGain;
    std::int64_t slots = 1000;
    MaxGainConfig maxgain;
    // Per-slot W*, W, W_{-1}, W+, W- bookkeeping (max-gain only; needs the oracle).
    bool contraction = false;
    int oracle_cap = 24;
    std::string trace_path;
    int node_q_threshold = 25;
};

struct ContractionSample {
    Weight w_star = 0;
    Weight w = 0;
    Weight w_prev = 0;
    Weight w_plus = 0;
    Weight w_minus = 0;
};

struct SyncRun {
    RunMetrics metrics;
    std::vector<ContractionSample> contraction;
    std::int64_t identity_failures = 0;   // slots where W - W_{-1} != W+ - W-
    std::vector<Schedule> schedules;      // only when keep_schedules
};

// Slot loop: arrivals, schedule at the post-arrival backlog, feasibility
// check, service, sample, then links with empty queues leave the schedule.
SyncRun run_sync(const Network& net, const ArrivalSpec& spec, const std::vector<double>& rates,
                 std::uint64_t seed, const SyncConfig& cfg, bool keep_schedules = false);

}  // namespace mgmac
