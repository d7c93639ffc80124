#pragma once

#include "mgmac/metrics.hpp"
#include "mgmac/network.hpp"
#include "mgmac/sched_sync.hpp"
#include "mgmac/sim_sync.hpp"
#include "mgmac/traffic.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgmac {

// ---------------------------------------------------------------------------
// Control messages

enum class MessageKind : std::uint8_t { Rts, Cts, LeaderBcast, QlenUpdate };
const char* to_string(MessageKind k);

struct ControlMessage {
    MessageKind kind = MessageKind::Rts;
    LinkId link = kNoLink;
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    BandIndex band = 0;
    std::int64_t qlen = 0;
    int rate = 0;
    int src_radio = 0;
    int dst_radio = 0;
    LinkId displaced = kNoLink;   // LEADER_BCAST only
    TimeUs time = 0;
    TimeUs hold_until = 0;        // end of the reserved data interval (CTS and granted RTS)
};

// Bytes added on top of the base MAC header: destination MAC (6), band (1),
// queue or displaced band (1), source/destination radio nibbles (1).
inline constexpr std::size_t kControlPayloadBytes = 9;
using ControlPayload = std::array<std::uint8_t, kControlPayloadBytes>;

struct DecodedPayload {
    NodeId dst = kNoNode;
    BandIndex band = 0;
    int qlen_or_band = 0;
    int src_radio = 0;
    int dst_radio = 0;
};

// Queue saturates at 255. LEADER_BCAST puts the displaced link's band in the
// queue byte (255 when nothing is displaced); `links` resolves it.
ControlPayload encode_payload(const ControlMessage& m, const LinkSet& links);
DecodedPayload decode_payload(const ControlPayload& p);

// ---------------------------------------------------------------------------
// Leader bookkeeping

// What a view holder (leader, or every node when leaderless) believes about
// queues and activity. Only overheard messages update it; last message wins.
class LeaderView {
public:
    explicit LeaderView(const LinkSet& links);

    // False, and counted, when the message names a link outside the set.
    bool on_overhear(const ControlMessage& m);

    const std::vector<std::int64_t>& q() const { return q_; }
    int rate(LinkId l) const { return rate_[l]; }
    Schedule active_at(TimeUs t) const;
    std::int64_t unknown_messages() const { return unknown_; }

private:
    const LinkSet* links_;
    std::vector<std::int64_t> q_;     // per hop
    std::vector<int> rate_;           // per link
    std::vector<TimeUs> until_;       // per link
    std::int64_t unknown_ = 0;
};

struct Selection {
    NodeId node = kNoNode;
    LinkId link = kNoLink;
    BandIndex band = 0;
    Weight gain = 0;
    std::vector<LinkId> displaced;
};

// Max-gain member link on `band` under the view at time `now`. Ties go to
// the lowest node id. No selection when every gain is zero.
Selection leader_select(const Group& group, BandIndex band, const LeaderView& view, TimeUs now,
                        const LinkSet& links, GainForm form = GainForm::RateWeighted);

// ---------------------------------------------------------------------------
// Priority lists

enum class Priority { HP, MP, LP };
const char* to_string(Priority p);

// Per node: HP and MP lists per radio, one LP list shared by all radios.
// Every outgoing link of the node sits in exactly one place.
class PriorityLists {
public:
    PriorityLists() = default;
    PriorityLists(NodeId v, const LinkSet& links);

    // Named in a broadcast: into HP of `radio`, out of LP and every MP/HP.
    void add_hp(LinkId l, int radio);
    // First activation of an HP link: HP -> MP of the same radio.
    bool on_activated(LinkId l, int radio);
    // Lost exchange of an MP link: MP -> LP.
    bool on_lost(LinkId l, int radio);
    // Displaced by a broadcast: wherever it was -> LP.
    bool demote(LinkId l);

    Priority priority(LinkId l, int radio) const;
    const std::vector<LinkId>& hp(int radio) const { return hp_[radio]; }
    const std::vector<LinkId>& mp(int radio) const { return mp_[radio]; }
    const std::vector<LinkId>& lp() const { return lp_; }
    int radios() const { return static_cast<int>(hp_.size()); }

    // Step-1 order for `radio`: HP, MP, then LP by queue descending (ties to
    // the lower id). Returns the first link passing `usable`.
    template <class Pred>
    std::optional<std::pair<LinkId, Priority>> pick(int radio, const std::vector<std::int64_t>& q,
                                                    const LinkSet& links, Pred usable) const;

    // Each outgoing link in exactly one list; no foreign links.
    bool invariants_hold() const;

private:
    void erase_everywhere(LinkId l);

    NodeId node_ = kNoNode;
    std::vector<LinkId> owned_;
    std::vector<std::vector<LinkId>> hp_;
    std::vector<std::vector<LinkId>> mp_;
    std::vector<LinkId> lp_;
};

template <class Pred>
std::optional<std::pair<LinkId, Priority>> PriorityLists::pick(int radio,
                                                               const std::vector<std::int64_t>& q,
                                                               const LinkSet& links,
                                                               Pred usable) const {
    for (LinkId l : hp_[radio])
        if (usable(l)) return std::pair{l, Priority::HP};
    for (LinkId l : mp_[radio])
        if (usable(l)) return std::pair{l, Priority::MP};
    LinkId best = kNoLink;
    for (LinkId l : lp_) {
        if (!usable(l)) continue;
        if (best == kNoLink || q[links[l].hop] > q[links[best].hop] ||
            (q[links[l].hop] == q[links[best].hop] && l < best))
            best = l;
    }
    if (best != kNoLink) return std::pair{best, Priority::LP};
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Contention

enum class ContendOutcome { Won, Lost, Busy, Collided, Deferred };
const char* to_string(ContendOutcome o);

// Backoff window for a priority class, inclusive bounds.
std::pair<int, int> backoff_window(Priority p, int cw);

// Drops each receiver independently with probability p. With `exempt` set,
// the addressed receiver always gets the message.
std::vector<NodeId> inject_control_loss(const std::vector<NodeId>& receivers, NodeId addressed,
                                        double p, bool exempt, std::vector<RngStream>& per_receiver);

// ---------------------------------------------------------------------------
// Engine

struct AsyncConfig {
    int cw = 32;
    TimeUs slot_us = 20;
    TimeUs rts_us = 50;
    TimeUs cts_us = 50;
    TimeUs packet_us = 1000;
    TimeUs txopt_us = 5000;
    TimeUs period_us = 4000;          // leader selection period T
    TimeUs retune_us = 500;
    double control_loss = 0.0;        // overhearing RTS/CTS/QLEN_UPDATE, per receiver
    double bcast_loss = -1.0;         // LEADER_BCAST at the named node; < 0 means control_loss
    bool exempt_destination = true;
    bool leaderless = false;
    TimeUs clock_drift_us = 0;        // leaderless: per-node epoch offset in [-d, d]
    int qlen_update_threshold = 8;
    GainForm form = GainForm::RateWeighted;
    int qcsma_slots_per_band = 8;
    std::int64_t slots = 1000;        // horizon in 5 ms sampling slots
    std::string trace_path;
    int node_q_threshold = 25;
    bool keep_exchanges = false;
};

// Throws ConfigError naming the first bad field.
void validate_async_config(const AsyncConfig& c, const LinkSet& links);

struct ExchangeRecord {
    TimeUs frame = 0;
    int slot = 0;
    LinkId link = kNoLink;
    Priority priority = Priority::LP;
    ContendOutcome outcome = ContendOutcome::Lost;
};

struct SelectionRecord {
    TimeUs time = 0;
    int group = 0;
    std::int64_t epoch = 0;
    NodeId node = kNoNode;
    LinkId link = kNoLink;
    Weight gain = 0;
};

struct AsyncCounters {
    std::int64_t frames = 0;
    std::int64_t contenders = 0;
    std::int64_t won = 0;
    std::int64_t lost = 0;
    std::int64_t busy = 0;
    std::int64_t collided = 0;
    std::int64_t deferred = 0;
    std::int64_t priority_yields = 0;
    std::int64_t hp_grants = 0;
    std::int64_t mp_grants = 0;
    std::int64_t lp_grants = 0;
    std::int64_t selections = 0;
    std::int64_t bcast_sent = 0;
    std::int64_t bcast_lost = 0;
    std::int64_t hp_adds = 0;
    std::int64_t qlen_updates = 0;
    std::int64_t overheard = 0;
    std::int64_t overhear_dropped = 0;
    std::int64_t unknown_messages = 0;
    std::int64_t leaderless_disagreements = 0;
    std::int64_t data_starts = 0;
    std::int64_t validator_checks = 0;
    std::int64_t list_checks = 0;
};

struct AsyncRun {
    RunMetrics metrics;
    AsyncCounters counters;
    std::vector<ExchangeRecord> exchanges;     // only with keep_exchanges
    std::vector<SelectionRecord> selections;   // winners acted on (maxgain)
};

// Event loop to slots * 5 ms. Arrival rates are per packet time (1 ms) and a
// link of rate r moves r packets per packet time. The instantaneous validator
// runs at every data start and throws ContractViolation on an SI/MR breach.
AsyncRun run_async(const Network& net, const ArrivalSpec& spec, const std::vector<double>& rates,
                   std::uint64_t seed, SchedulerKind scheduler, const AsyncConfig& cfg);

// Rebuilds activity from DATA_START/DATA_END lines and list state from the
// list events, checking feasibility and list invariants at every line.
struct TraceAudit {
    std::int64_t lines = 0;
    std::int64_t data_starts = 0;
    std::int64_t feasibility_violations = 0;
    std::int64_t list_violations = 0;
    std::int64_t max_concurrent = 0;
};
TraceAudit audit_trace(std::istream& in, const LinkSet& links);

}  // namespace mgmac
