#include "mgmac/analysis.hpp"

#include "mgmac/schedule.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace mgmac {

// ---------------------------------------------------------------------------
// Bounds

double exact_pkj(int M, int kappa_1) {
    if (M < 1 || kappa_1 < 0) throw InvalidInput("exact_pkj: M >= 1 and kappa_1 >= 0 required");
    const double p = 1.0 / M;
    // Binomial terms built iteratively; log-space keeps κ up to a few hundred safe.
    double sum = 0.0;
    for (int i = 0; i <= kappa_1; ++i) {
        const double log_c = std::lgamma(kappa_1 + 1.0) - std::lgamma(i + 1.0) -
                             std::lgamma(kappa_1 - i + 1.0);
        double term;
        if (M == 1) {
            term = (i == kappa_1) ? 1.0 : 0.0;
        } else {
            term = std::exp(log_c + i * std::log(p) + (kappa_1 - i) * std::log1p(-p));
        }
        sum += term / (1.0 + i);
    }
    return p * sum;
}

BoundReport compute_bounds(double beta_max, double kappa_1, double sigma, int M, double epsilon) {
    if (!(beta_max >= 1.0)) throw InvalidInput("compute_bounds: beta_max must be >= 1");
    if (!(kappa_1 >= 0.0)) throw InvalidInput("compute_bounds: kappa_1 must be >= 0");
    if (!(sigma >= 0.0)) throw InvalidInput("compute_bounds: sigma must be >= 0");
    if (M < 1) throw InvalidInput("compute_bounds: M must be >= 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw InvalidInput("compute_bounds: epsilon must lie in [0, 1)");

    BoundReport r;
    r.beta_max = beta_max;
    r.kappa_1 = kappa_1;
    r.sigma = sigma;
    r.M = M;
    r.epsilon = epsilon;
    const double k1 = 1.0 + kappa_1;
    r.mu = beta_max * (1.0 + 2.0 * k1);
    r.mu_prime = beta_max * (1.0 + k1 / (1.0 - epsilon));
    r.mu_dprime = beta_max * (1.0 + (1.0 + sigma) / (1.0 - epsilon));
    r.theta = 1.0 - std::pow(1.0 - 1.0 / M, k1);
    r.alpha = 1.0 - (r.theta + r.theta / (2.0 * k1));
    r.p_kj_lower = r.theta / k1;
    const double k_int = std::round(kappa_1);
    r.p_kj_exact = (k_int == kappa_1) ? exact_pkj(M, static_cast<int>(k_int))
                                      : std::numeric_limits<double>::quiet_NaN();
    return r;
}

BoundReport compute_bounds(const GraphParams& gp, int sigma, int M, double epsilon) {
    BoundReport r = compute_bounds(gp.beta_max, gp.kappa_1, sigma, M, epsilon);
    r.exact = gp.exact;
    return r;
}

nlohmann::json BoundReport::to_json() const {
    nlohmann::json j;
    j["beta_max"] = beta_max;
    j["kappa_1"] = kappa_1;
    j["sigma"] = sigma;
    j["M"] = M;
    j["epsilon"] = epsilon;
    j["exact"] = exact;
    j["mu"] = mu;
    j["mu_prime"] = mu_prime;
    j["mu_dprime"] = mu_dprime;
    j["theta"] = theta;
    j["alpha"] = alpha;
    j["p_kj_lower"] = p_kj_lower;
    if (std::isfinite(p_kj_exact)) j["p_kj_exact"] = p_kj_exact;
    return j;
}

// ---------------------------------------------------------------------------
// Simplex

LpResult simplex_max(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                     const std::vector<double>& b) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(c.size());
    if (static_cast<int>(b.size()) != m) throw InvalidInput("simplex_max: b size mismatch");
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(a[i].size()) != n) throw InvalidInput("simplex_max: row width mismatch");
        if (b[i] < 0) throw InvalidInput("simplex_max: b must be nonnegative");
    }
    constexpr double kEps = 1e-12;
    const int cols = n + m;
    // Row i: [A | I | b]; objective row holds c - z.
    std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        std::copy(a[i].begin(), a[i].end(), t[i].begin());
        t[i][n + i] = 1.0;
        t[i][cols] = b[i];
    }
    std::vector<double> obj(cols + 1, 0.0);
    std::copy(c.begin(), c.end(), obj.begin());
    std::vector<int> basis(m);
    std::iota(basis.begin(), basis.end(), n);

    LpResult res;
    for (;;) {
        int enter = -1;
        for (int j = 0; j < cols; ++j)
            if (obj[j] > kEps) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        double best = 0;
        for (int i = 0; i < m; ++i) {
            if (t[i][enter] <= kEps) continue;
            const double ratio = t[i][cols] / t[i][enter];
            if (leave < 0 || ratio < best - kEps ||
                (std::abs(ratio - best) <= kEps && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) {
            res.unbounded = true;
            res.value = std::numeric_limits<double>::infinity();
            return res;
        }
        const double piv = t[leave][enter];
        for (double& v : t[leave]) v /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave || t[i][enter] == 0.0) continue;
            const double f = t[i][enter];
            for (int j = 0; j <= cols; ++j) t[i][j] -= f * t[leave][j];
        }
        const double f = obj[enter];
        for (int j = 0; j <= cols; ++j) obj[j] -= f * t[leave][j];
        basis[leave] = enter;
        ++res.pivots;
    }
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = t[i][cols];
    res.value = -obj[cols];
    return res;
}

// ---------------------------------------------------------------------------
// Stability region

namespace {

void enumerate_maximal(const LinkSet& links, LinkId next, std::vector<LinkId>& active,
                       std::vector<std::vector<LinkId>>& out) {
    if (next == links.size()) {
        for (LinkId l = 0; l < links.size(); ++l)
            if (!std::binary_search(active.begin(), active.end(), l) && can_add(active, l, links))
                return;
        out.push_back(active);
        return;
    }
    if (can_add(active, next, links)) {
        active.push_back(next);
        enumerate_maximal(links, next + 1, active, out);
        active.pop_back();
    }
    enumerate_maximal(links, next + 1, active, out);
}

}  // namespace

StabilityRegion::StabilityRegion(const LinkSet& links, int cap) : hops_(links.num_hops()) {
    if (links.size() > cap) {
        std::ostringstream os;
        os << "stability region: " << links.size() << " links above cap " << cap;
        throw SizeLimitError(os.str());
    }
    std::vector<LinkId> active;
    enumerate_maximal(links, 0, active, schedules_);
    for (const auto& s : schedules_) {
        std::vector<double> v(hops_, 0.0);
        for (LinkId l : s) v[links[l].hop] += links[l].rate;
        service_.push_back(std::move(v));
    }
}

double StabilityRegion::max_scale(const std::vector<double>& lambda) const {
    if (static_cast<int>(lambda.size()) != hops_)
        throw InvalidInput("stability region: lambda has the wrong number of hops");
    const int n = 1 + static_cast<int>(service_.size());
    // Variables: s, φ_1..φ_n. Rows: s·λ_h − Σ φ_i S_ih ≤ 0 per loaded hop, Σ φ ≤ 1.
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (int h = 0; h < hops_; ++h) {
        if (lambda[h] < 0) throw InvalidInput("stability region: negative rate");
        if (lambda[h] == 0) continue;
        std::vector<double> row(n, 0.0);
        row[0] = lambda[h];
        for (std::size_t i = 0; i < service_.size(); ++i) row[1 + i] = -service_[i][h];
        a.push_back(std::move(row));
        b.push_back(0.0);
    }
    std::vector<double> sum(n, 1.0);
    sum[0] = 0.0;
    a.push_back(std::move(sum));
    b.push_back(1.0);
    std::vector<double> c(n, 0.0);
    c[0] = 1.0;
    const LpResult r = simplex_max(c, a, b);
    return r.unbounded ? std::numeric_limits<double>::infinity() : r.value;
}

bool StabilityRegion::contains(const std::vector<double>& lambda, double rho) const {
    std::vector<double> scaled(lambda);
    for (double& v : scaled) v *= rho;
    return max_scale(scaled) >= 1.0 - 1e-9;
}

double StabilityRegion::max_total_service() const {
    double best = 0;
    for (const auto& v : service_) best = std::max(best, std::accumulate(v.begin(), v.end(), 0.0));
    return best;
}

// ---------------------------------------------------------------------------
// Verdict and search

double ls_slope(const std::vector<double>& y, std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    if (end > y.size() || n < 2) return 0.0;
    const double xm = (static_cast<double>(n) - 1.0) / 2.0;
    double ym = 0;
    for (std::size_t i = begin; i < end; ++i) ym += y[i];
    ym /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xm;
        sxy += dx * (y[begin + i] - ym);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

StabilityVerdict stability_verdict(const std::vector<double>& qtot, int hops, double load,
                                   const VerdictParams& p) {
    if (qtot.size() < 4) throw InvalidInput("stability verdict: series too short");
    StabilityVerdict v;
    v.load = load;
    const std::size_t begin = qtot.size() / 2;
    v.slope = ls_slope(qtot, begin, qtot.size());
    v.tail_mean = std::accumulate(qtot.begin() + static_cast<std::ptrdiff_t>(begin), qtot.end(), 0.0) /
                  static_cast<double>(qtot.size() - begin);
    v.threshold = p.q_cap_per_hop * hops;
    v.stable = v.slope < p.slope_eps && v.tail_mean < v.threshold;
    return v;
}

namespace {

RateProbe run_probe(const ProbeFn& run, int hops, const std::vector<std::uint64_t>& seeds,
                    double rho, const VerdictParams& p, int workers) {
    RateProbe probe;
    probe.rho = rho;
    probe.verdicts.resize(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                probe.verdicts[i] = stability_verdict(run(rho, seeds[i]), hops, rho, p);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    for (const auto& v : probe.verdicts) probe.stable_seeds += v.stable ? 1 : 0;
    probe.stable = probe.stable_seeds == static_cast<int>(seeds.size());
    return probe;
}

}  // namespace

RateSearch max_stabilizable_rate(const ProbeFn& run, int hops, const std::vector<std::uint64_t>& seeds,
                                 double lo, double hi, double tol, const VerdictParams& p,
                                 int workers) {
    if (seeds.empty()) throw InvalidInput("rate search: no seeds");
    if (!(lo >= 0 && hi > lo && tol > 0)) throw InvalidInput("rate search: need 0 <= lo < hi, tol > 0");
    RateSearch rs;
    rs.tol = tol;
    auto probe = [&](double rho) {
        rs.probes.push_back(run_probe(run, hops, seeds, rho, p, workers));
        const RateProbe& pr = rs.probes.back();
        if (pr.stable_seeds > 0 && !pr.stable) rs.flapping = true;
        return pr.stable;
    };
    if (!probe(lo)) {
        rs.rho_star = lo;
        rs.warning = "lower bracket unstable";
        return rs;
    }
    if (probe(hi)) {
        rs.rho_star = hi;
        rs.warning = "upper bracket stable";
        return rs;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (probe(mid) ? lo : hi) = mid;
    }
    rs.rho_star = lo;
    if (rs.flapping) {
        std::ostringstream os;
        os << "verdicts split across seeds; treat rho* as +-" << 2 * tol;
        rs.warning = os.str();
    }
    return rs;
}

// ---------------------------------------------------------------------------
// Contraction

ContractionReport contraction_report(const std::vector<SyncRun>& runs, double mu, double alpha,
                                     double delta1, double delta2, double slope_eps) {
    ContractionReport r;
    r.mu = mu;
    r.alpha = alpha;
    r.delta1 = delta1;
    r.delta2 = delta2;
    double lhs = 0, rhs = 0;
    for (const SyncRun& run : runs) {
        const auto& cs = run.contraction;
        std::vector<double> running(cs.size());
        double acc = 0;
        for (std::size_t t = 0; t < cs.size(); ++t) {
            const auto& s = cs[t];
            if (s.w - s.w_prev != s.w_plus - s.w_minus) ++r.identity_failures;
            const double d = static_cast<double>(s.w_star) - mu * static_cast<double>(s.w);
            acc += d;
            running[t] = acc / static_cast<double>(t + 1);
            lhs += d;
            rhs += static_cast<double>(s.w_star) - mu * static_cast<double>(s.w_prev);
        }
        r.samples += static_cast<std::int64_t>(cs.size());
        if (cs.size() >= 4) {
            r.max_running_slope = std::max(r.max_running_slope,
                                           ls_slope(running, running.size() / 2, running.size()));
            r.max_final_running = std::max(r.max_final_running, running.back());
        }
    }
    if (r.samples > 0) {
        r.lhs_mean = lhs / static_cast<double>(r.samples);
        r.rhs_mean = alpha * rhs / static_cast<double>(r.samples);
    }
    r.plateau = r.max_running_slope <= slope_eps;
    return r;
}

ContractionReport contraction_check(const Network& net, const ArrivalSpec& spec,
                                    const std::vector<double>& rates,
                                    const std::vector<std::uint64_t>& seeds, std::int64_t slots,
                                    const BoundReport& bounds, const MaxGainConfig& mg,
                                    double slope_eps, int cap) {
    const StabilityRegion region(net.links, cap);
    SyncConfig cfg;
    cfg.scheduler = SchedulerKind::MaxGain;
    cfg.slots = slots;
    cfg.maxgain = mg;
    cfg.contraction = true;
    cfg.oracle_cap = cap;
    std::vector<SyncRun> runs;
    for (std::uint64_t s : seeds) runs.push_back(run_sync(net, spec, rates, s, cfg));
    return contraction_report(runs, bounds.mu, bounds.alpha,
                              std::accumulate(rates.begin(), rates.end(), 0.0),
                              region.max_total_service(), slope_eps);
}

nlohmann::json ContractionReport::to_json() const {
    return {{"mu", mu},
            {"alpha", alpha},
            {"samples", samples},
            {"identity_failures", identity_failures},
            {"lhs_mean", lhs_mean},
            {"rhs_mean", rhs_mean},
            {"max_running_slope", max_running_slope},
            {"max_final_running", max_final_running},
            {"delta1", delta1},
            {"delta2", delta2},
            {"plateau", plateau}};
}

// ---------------------------------------------------------------------------
// Delay statistics

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

std::map<std::uint64_t, double> by_seed(const std::vector<RunMetrics>& runs, const char* which) {
    std::map<std::uint64_t, double> m;
    for (const auto& r : runs)
        if (!m.emplace(r.seed, r.mean_qtot).second)
            throw InvalidInput(std::string("compare: duplicate seed ") + std::to_string(r.seed) +
                               " in " + which);
    return m;
}

}  // namespace

GainComparison compare_delay(const std::vector<RunMetrics>& baseline,
                             const std::vector<RunMetrics>& candidate) {
    const auto b = by_seed(baseline, "baseline");
    const auto c = by_seed(candidate, "candidate");
    std::vector<std::uint64_t> only_b, only_c;
    for (const auto& [s, _] : b)
        if (!c.count(s)) only_b.push_back(s);
    for (const auto& [s, _] : c)
        if (!b.count(s)) only_c.push_back(s);
    if (!only_b.empty() || !only_c.empty() || b.empty()) {
        std::ostringstream os;
        os << "compare: unmatched seeds";
        if (b.empty() && c.empty()) os << " (no runs)";
        if (!only_b.empty()) {
            os << "; baseline only:";
            for (auto s : only_b) os << ' ' << s;
        }
        if (!only_c.empty()) {
            os << "; candidate only:";
            for (auto s : only_c) os << ' ' << s;
        }
        throw InvalidInput(os.str());
    }
    GainComparison g;
    for (const auto& [s, qb] : b) {
        const double qc = c.at(s);
        g.seeds.push_back(s);
        if (qc == qb) g.ratios.push_back(1.0);
        else g.ratios.push_back(qc == 0 ? std::numeric_limits<double>::infinity() : qb / qc);
    }
    g.median = median_of(g.ratios);
    std::vector<double> sorted(g.ratios);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (i == 0 || sorted[i] != sorted[i - 1])
            g.ccdf.emplace_back(sorted[i], static_cast<double>(sorted.size() - i) / n);
    return g;
}

NodeId bottleneck_node(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) throw InvalidInput("bottleneck: no runs");
    const std::size_t n = runs.front().node_mean_q.size();
    std::vector<double> acc(n, 0.0);
    for (const auto& r : runs) {
        if (r.node_mean_q.size() != n) throw InvalidInput("bottleneck: runs disagree on node count");
        for (std::size_t v = 0; v < n; ++v) acc[v] += r.node_mean_q[v];
    }
    return static_cast<NodeId>(std::max_element(acc.begin(), acc.end()) - acc.begin());
}

std::vector<std::pair<int, double>> node_queue_cdf(const std::vector<RunMetrics>& runs, NodeId v) {
    std::vector<std::int64_t> hist(kNodeHistCap + 1, 0);
    std::int64_t total = 0;
    for (const auto& r : runs) {
        if (v < 0 || static_cast<std::size_t>(v) >= r.node_hist.size())
            throw InvalidInput("node queue cdf: node out of range");
        for (int k = 0; k <= kNodeHistCap; ++k) {
            hist[k] += r.node_hist[v][k];
            total += r.node_hist[v][k];
        }
    }
    std::vector<std::pair<int, double>> cdf;
    std::int64_t acc = 0;
    for (int k = 0; k <= kNodeHistCap; ++k) {
        acc += hist[k];
        cdf.emplace_back(k, total ? static_cast<double>(acc) / static_cast<double>(total) : 1.0);
    }
    return cdf;
}

double node_frac_at_most(const std::vector<RunMetrics>& runs, NodeId v, int threshold) {
    if (threshold < 0 || threshold >= kNodeHistCap)
        throw InvalidInput("node queue cdf: threshold outside the histogram");
    return node_queue_cdf(runs, v)[threshold].second;
}

SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("loglog fit: need >= 2 paired points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0 && y[i] > 0)) throw InvalidInput("loglog fit: data must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = mean_of(lx), my = mean_of(ly);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0) throw InvalidInput("loglog fit: x values all equal");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace mgmac
