#pragma once

#include "mgmac/common.hpp"
#include "mgmac/grouping.hpp"
#include "mgmac/rng.hpp"
#include "mgmac/schedule.hpp"
#include "mgmac/topology.hpp"

#include <cstdint>
#include <vector>

namespace mgmac {

// RateWeighted scores a link by w·r; Unweighted by w alone (the printed form
// of the gain formula, kept for sensitivity runs).
enum class GainForm { RateWeighted, Unweighted };

inline Weight link_value(LinkId l, const std::vector<std::int64_t>& q, const LinkSet& links,
                         GainForm form) {
    const Weight w = q[links[l].hop];
    return form == GainForm::RateWeighted ? w * links[l].rate : w;
}

struct LossReport {
    Weight loss = 0;
    std::vector<LinkId> displaced;
};

// Links of `prev` that v must drop to start a new outgoing link on `band`:
// every active link at v on that band, else (all radios busy) the one with
// the least value, else nothing.
LossReport compute_loss(NodeId v, BandIndex band, const Schedule& prev,
                        const std::vector<std::int64_t>& q, const LinkSet& links,
                        GainForm form = GainForm::RateWeighted);

struct GainReport {
    NodeId node = kNoNode;
    BandIndex band = 0;
    LinkId best_link = kNoLink;
    Weight gain = 0;
    std::vector<LinkId> displaced;
};

GainReport compute_gain(NodeId v, BandIndex band, const std::vector<std::int64_t>& q,
                        const LinkSet& links, const LossReport& loss,
                        GainForm form = GainForm::RateWeighted);

enum class LocalMaxMode { Randomized, Oracle };

double local_max_c1();
double local_max_c2();
// Mini-slots between probability escalations for a group of n nodes.
int local_max_period(int n);
// Total mini-slot budget for a group of n nodes (0 for n = 1).
int local_max_budget(int n);

struct LocalMaxResult {
    NodeId winner = kNoNode;
    Weight gain = 0;
    bool success = false;     // winner's gain equals the true group maximum
    int minislots = 0;
    int announcements = 0;    // successful, collision-free broadcasts
};

// gains[i] belongs to members[i]; only positive gains are candidates. The
// group size used for p_bc and the budget is members.size().
LocalMaxResult local_max(const std::vector<NodeId>& members, const std::vector<Weight>& gains,
                         RngStream& rng, LocalMaxMode mode);

// Random-order greedy selection among winner links: each pick is uniform over
// the remaining winners and must fit SI and radio limits with those already
// accepted. Returns accepted links in acceptance order.
std::vector<LinkId> contention_resolve(const std::vector<LinkId>& winners, const LinkSet& links,
                                       RngStream& rng);

struct MaxGainConfig {
    LocalMaxMode mode = LocalMaxMode::Randomized;
    int repeats = 1;
    GainForm form = GainForm::RateWeighted;
};

struct StepReport {
    Schedule schedule;
    std::vector<LinkId> hp_links;       // activated high-priority links
    std::vector<LinkId> displaced;      // links of prev not in schedule
    Weight w_prev = 0;                  // W_{-1}: prev at current queues
    Weight w_new = 0;                   // W
    Weight w_plus = 0;                  // weight of links new in schedule
    Weight w_minus = 0;                 // weight of links dropped from prev
    std::int64_t minislots = 0;
    int groups_with_winner = 0;
    int local_max_misses = 0;           // groups where the winner was not the true max
};

class MaximalGainScheduler {
public:
    MaximalGainScheduler(const LinkSet& links, const Grouping& grouping, MaxGainConfig cfg,
                         std::uint64_t seed);

    StepReport step(const Schedule& prev, const std::vector<std::int64_t>& q);

    // chi · budget(largest group) · repeats.
    std::int64_t minislots_per_slot() const { return minislots_per_slot_; }

private:
    const LinkSet& links_;
    const Grouping& grouping_;
    MaxGainConfig cfg_;
    std::vector<RngStream> band_rng_;
    std::vector<RngStream> lmax_rng_;
    RngStream contention_rng_;
    std::int64_t minislots_per_slot_ = 0;
};

// Exact max-weight schedule by include-first branch and bound over ascending
// link ids; among optima the lexicographically smallest id set is returned.
// Links with zero weight are never included. Throws SizeLimitError above cap.
struct MwResult {
    Weight weight = 0;
    Schedule schedule;
};
MwResult mw_oracle(const LinkSet& links, const std::vector<std::int64_t>& q, int cap = 24);

Schedule gms_schedule(const LinkSet& links, const std::vector<std::int64_t>& q);

// Contention probability with f(w) = log(1 + w·r): a = (1 + wr)/(2 + wr), a(0) = 0.
double qcsma_access_prob(Weight wr);

Schedule qcsma_step(const Schedule& prev, const std::vector<std::int64_t>& q,
                    const LinkSet& links, RngStream& rng);

}  // namespace mgmac
