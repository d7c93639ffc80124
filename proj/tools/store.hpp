#pragma once

#include "mgmac/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mgmac::store {

// <root>/<name>/<scheduler>/seed_<seed>
std::string run_dir(const std::string& root, const ScenarioConfig& c, std::uint64_t seed);

// SHA-256 of the config echo with the seed list removed, so all seeds of one
// configuration share it.
std::string config_hash(const ScenarioConfig& c);
std::string sha256_file(const std::string& path);

// Runs one seed and writes the run directory:
//   config.json      effective scenario, seeds = [seed]; loads back as a scenario
//   metrics.json     summary, counters, config hash
//   timeseries.csv   slot,qtot
//   node_hist.csv    node,backlog,samples (nonzero bins)
//   trace.txt        only with output.trace and at most trace_event_cap events
//   checksums.sha256 sha256sum format over the files above
// Reruns overwrite with identical bytes.
RunOutput execute_run(const ScenarioConfig& c, const Instance& inst, const std::vector<double>& rates,
                      std::uint64_t seed, const std::string& dir);

// Loads metrics.json, timeseries.csv and node_hist.csv of one run directory.
RunMetrics read_run(const std::string& dir);
// Every run directory (one holding metrics.json) under `root`, ordered by path.
std::vector<std::string> find_runs(const std::string& root);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace mgmac::store
