#pragma once

#include "mgmac/metrics.hpp"
#include "mgmac/network.hpp"
#include "mgmac/sim_sync.hpp"
#include "mgmac/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mgmac {

// ---------------------------------------------------------------------------
// Bounds

struct BoundReport {
    double beta_max = 1;
    double kappa_1 = 0;
    double sigma = 0;
    int M = 1;
    double epsilon = 0;
    bool exact = true;          // graph parameters came from exact enumeration

    double mu = 0;              // β(1 + 2(1+κ))
    double mu_prime = 0;        // β(1 + (1+κ)/(1-ε))
    double mu_dprime = 0;       // β(1 + (1+σ)/(1-ε))
    double theta = 0;           // 1 - (1 - 1/M)^(1+κ)
    double alpha = 0;           // 1 - θ(1 + 1/(2(1+κ)))
    double p_kj_lower = 0;      // θ/(1+κ)
    double p_kj_exact = 0;      // (1/M)·E[1/(1+Bin(κ, 1/M))], by direct sum

    nlohmann::json to_json() const;
};

// Throws InvalidInput unless β ≥ 1, κ ≥ 0, σ ≥ 0, M ≥ 1 and 0 ≤ ε < 1.
BoundReport compute_bounds(double beta_max, double kappa_1, double sigma, int M, double epsilon);
BoundReport compute_bounds(const GraphParams& gp, int sigma, int M, double epsilon);

// Probability that a fixed one of the κ+1 contenders on a band is the band's
// chooser, each contender picking one of M bands uniformly and ties split evenly.
double exact_pkj(int M, int kappa_1);

// ---------------------------------------------------------------------------
// Stability region

// Maximal feasible schedules and their per-hop service vectors. Membership of
// λ in ρΛ is decided by an LP over convex combinations (dominance allowed,
// since a schedule that serves more also serves less).
class StabilityRegion {
public:
    explicit StabilityRegion(const LinkSet& links, int cap = 24);

    int num_hops() const { return hops_; }
    const std::vector<std::vector<double>>& service() const { return service_; }
    const std::vector<std::vector<LinkId>>& schedules() const { return schedules_; }

    // Largest s with s·λ ∈ Λ; +inf for λ = 0.
    double max_scale(const std::vector<double>& lambda) const;
    bool contains(const std::vector<double>& lambda, double rho = 1.0) const;
    // Largest Σ_h service over all schedules.
    double max_total_service() const;

private:
    int hops_ = 0;
    std::vector<std::vector<LinkId>> schedules_;
    std::vector<std::vector<double>> service_;
};

// max cᵀx s.t. Ax ≤ b, x ≥ 0, with b ≥ 0 so the origin is a start vertex.
// Bland's rule; `unbounded` set when the objective has no finite maximum.
struct LpResult {
    double value = 0;
    std::vector<double> x;
    bool unbounded = false;
    int pivots = 0;
};
LpResult simplex_max(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                     const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Stability verdict and rate search

struct VerdictParams {
    double slope_eps = 0.01;      // packets per slot
    double q_cap_per_hop = 50.0;  // tail-mean cap is this times H
};

struct StabilityVerdict {
    double load = 0;
    bool stable = false;
    double slope = 0;        // least squares over the last half of the horizon
    double tail_mean = 0;    // mean over the same window
    double threshold = 0;    // q cap in packets
};

StabilityVerdict stability_verdict(const std::vector<double>& qtot, int hops, double load,
                                   const VerdictParams& p = {});

double ls_slope(const std::vector<double>& y, std::size_t begin, std::size_t end);

struct RateProbe {
    double rho = 0;
    bool stable = false;     // every seed stable
    int stable_seeds = 0;
    std::vector<StabilityVerdict> verdicts;   // seed order
};

struct RateSearch {
    double rho_star = 0;
    double tol = 0;
    bool flapping = false;   // some probe split across seeds
    std::string warning;
    std::vector<RateProbe> probes;   // evaluation order
};

// Returns per-slot Q_tot for one run at scale ρ.
using ProbeFn = std::function<std::vector<double>(double rho, std::uint64_t seed)>;

// Bisection on [lo, hi]. A probe is stable only if every seed is. Seeds of a
// probe run on up to `workers` threads; results are reduced in seed order.
RateSearch max_stabilizable_rate(const ProbeFn& run, int hops, const std::vector<std::uint64_t>& seeds,
                                 double lo, double hi, double tol, const VerdictParams& p = {},
                                 int workers = 1);

// ---------------------------------------------------------------------------
// Contraction

struct ContractionReport {
    double mu = 0;
    double alpha = 0;
    std::int64_t samples = 0;
    std::int64_t identity_failures = 0;
    double lhs_mean = 0;          // mean of W* - μW
    double rhs_mean = 0;          // α · mean of W* - μW₋₁
    double max_running_slope = 0; // worst seed, last half of the running mean
    double max_final_running = 0;
    double delta1 = 0;            // Σ_h λ_h
    double delta2 = 0;            // largest per-slot service
    bool plateau = false;         // max_running_slope ≤ slope_eps

    nlohmann::json to_json() const;
};

ContractionReport contraction_report(const std::vector<SyncRun>& runs, double mu, double alpha,
                                     double delta1, double delta2, double slope_eps = 0.01);

// Runs synchronous max-gain with per-slot oracle bookkeeping on each seed.
ContractionReport contraction_check(const Network& net, const ArrivalSpec& spec,
                                    const std::vector<double>& rates,
                                    const std::vector<std::uint64_t>& seeds, std::int64_t slots,
                                    const BoundReport& bounds, const MaxGainConfig& mg = {},
                                    double slope_eps = 0.01, int cap = 24);

// ---------------------------------------------------------------------------
// Delay and queue statistics

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

struct GainComparison {
    std::vector<std::uint64_t> seeds;   // ascending
    std::vector<double> ratios;         // mean Q_tot(baseline) / mean Q_tot(candidate), seed order
    double median = 0;
    // (x, fraction of runs with ratio ≥ x) at each distinct ratio.
    std::vector<std::pair<double, double>> ccdf;
};

// Runs are matched by seed. Throws InvalidInput naming the unmatched seeds.
GainComparison compare_delay(const std::vector<RunMetrics>& baseline,
                             const std::vector<RunMetrics>& candidate);

// Node with the largest mean backlog averaged over `runs`; ties to the lower id.
NodeId bottleneck_node(const std::vector<RunMetrics>& runs);

// Pooled backlog CDF of one node: (k, P(Q ≤ k)) for k = 0..kNodeHistCap.
std::vector<std::pair<int, double>> node_queue_cdf(const std::vector<RunMetrics>& runs, NodeId v);
double node_frac_at_most(const std::vector<RunMetrics>& runs, NodeId v, int threshold);

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};
// Least squares of log y on log x. Throws InvalidInput on non-positive data
// or fewer than two points.
SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mgmac
