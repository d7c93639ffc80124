#include "mgmac/sim_sync.hpp"

#include <memory>

namespace mgmac {

SchedulerKind parse_scheduler(const std::string& s) {
    if (s == "maxgain") return SchedulerKind::MaxGain;
    if (s == "qcsma" || s == "mb_qcsma") return SchedulerKind::Qcsma;
    if (s == "gms" || s == "mb_gms") return SchedulerKind::Gms;
    if (s == "mw" || s == "maxweight") return SchedulerKind::MaxWeight;
    throw ConfigError("scheduler: unknown scheduler '" + s + "'");
}

std::string to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::MaxGain: return "maxgain";
        case SchedulerKind::Qcsma: return "mb_qcsma";
        case SchedulerKind::Gms: return "mb_gms";
        case SchedulerKind::MaxWeight: return "mw";
    }
    return "?";
}

SyncRun run_sync(const Network& net, const ArrivalSpec& spec, const std::vector<double>& rates,
                 std::uint64_t seed, const SyncConfig& cfg, bool keep_schedules) {
    const LinkSet& links = net.links;
    if (static_cast<int>(rates.size()) != links.num_hops())
        throw ConfigError("traffic: one arrival rate per hop is required");
    constexpr TimeUs kSlotUs = 5000;

    SyncRun run;
    RunMetrics& m = run.metrics;
    m.engine = "sync";
    m.scheduler = to_string(cfg.scheduler);
    m.seed = seed;
    m.slots = cfg.slots;

    ArrivalProcess arrivals(spec, rates, seed);
    QueueState queues(links.num_hops());
    QueueSampler sampler(net.deployment.num_nodes() ? &net.deployment : nullptr, links,
                         cfg.node_q_threshold);
    TraceWriter trace(cfg.trace_path, "engine=sync scheduler=" + m.scheduler +
                                          " seed=" + std::to_string(seed));

    std::unique_ptr<MaximalGainScheduler> mg;
    if (cfg.scheduler == SchedulerKind::MaxGain)
        mg = std::make_unique<MaximalGainScheduler>(links, net.grouping, cfg.maxgain, seed);
    RngStream qcsma_rng(seed, StreamFamily::Qcsma, 0);

    Schedule prev;
    std::int64_t arrived = 0;
    std::int64_t departed = 0;
    double minislots = 0.0;
    std::int64_t lmax_misses = 0;
    for (std::int64_t t = 0; t < cfg.slots; ++t) {
        const auto& a = arrivals.next();
        for (int h = 0; h < links.num_hops(); ++h) {
            queues.arrive(h, a[h], t);
            arrived += a[h];
        }
        const std::vector<std::int64_t>& q = queues.all();

        Schedule s;
        switch (cfg.scheduler) {
            case SchedulerKind::MaxGain: {
                StepReport rep = mg->step(prev, q);
                minislots += static_cast<double>(rep.minislots);
                lmax_misses += rep.local_max_misses;
                if (cfg.contraction) {
                    ContractionSample c;
                    c.w_star = mw_oracle(links, q, cfg.oracle_cap).weight;
                    c.w = rep.w_new;
                    c.w_prev = rep.w_prev;
                    c.w_plus = rep.w_plus;
                    c.w_minus = rep.w_minus;
                    if (c.w - c.w_prev != c.w_plus - c.w_minus) ++run.identity_failures;
                    run.contraction.push_back(c);
                }
                s = std::move(rep.schedule);
                break;
            }
            case SchedulerKind::Qcsma: s = qcsma_step(prev, q, links, qcsma_rng); break;
            case SchedulerKind::Gms: s = gms_schedule(links, q); break;
            case SchedulerKind::MaxWeight: s = mw_oracle(links, q, cfg.oracle_cap).schedule; break;
        }
        require_feasible(s, links, m.scheduler.c_str());

        for (LinkId l : s.active())
            trace.record(t * kSlotUs, links[l].tail, -1, links[l].band, "ACTIVE", l, links[l].hop,
                         q[links[l].hop]);
        const auto dep = apply_service(queues, s.active(), links, t);
        for (int h = 0; h < links.num_hops(); ++h) departed += dep[h];
        sampler.sample(queues);
        trace.record(t * kSlotUs, -1, -1, -1, "SLOT", -1, -1, queues.total());

        Schedule next;
        for (LinkId l : s.active())
            if (queues.q(links[l].hop) > 0) next.add(l);
        if (keep_schedules) run.schedules.push_back(s);
        prev = std::move(next);
        ++m.steps;
    }

    sampler.finish(m);
    fill_delay(m, queues.delay());
    m.offered = cfg.slots ? static_cast<double>(arrived) / static_cast<double>(cfg.slots) : 0.0;
    m.throughput = cfg.slots ? static_cast<double>(departed) / static_cast<double>(cfg.slots) : 0.0;
    m.trace_hash = trace.hash();
    m.trace_events = trace.events();
    if (mg) {
        m.extra["minislots_per_slot"] = cfg.slots ? minislots / static_cast<double>(cfg.slots) : 0.0;
        m.extra["local_max_misses"] = static_cast<double>(lmax_misses);
        m.extra["chi"] = net.grouping.chi;
    }
    if (cfg.contraction) m.extra["identity_failures"] = static_cast<double>(run.identity_failures);
    return run;
}

}  // namespace mgmac
