#include "mgmac/sched_async.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace mgmac {

const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::Rts: return "RTS";
        case MessageKind::Cts: return "CTS";
        case MessageKind::LeaderBcast: return "LEADER_BCAST";
        case MessageKind::QlenUpdate: return "QLEN_UPDATE";
    }
    return "?";
}

const char* to_string(Priority p) {
    switch (p) {
        case Priority::HP: return "HP";
        case Priority::MP: return "MP";
        case Priority::LP: return "LP";
    }
    return "?";
}

const char* to_string(ContendOutcome o) {
    switch (o) {
        case ContendOutcome::Won: return "won";
        case ContendOutcome::Lost: return "lost";
        case ContendOutcome::Busy: return "busy";
        case ContendOutcome::Collided: return "collided";
        case ContendOutcome::Deferred: return "deferred";
    }
    return "?";
}

// --- messages -------------------------------------------------------------

ControlPayload encode_payload(const ControlMessage& m, const LinkSet& links) {
    ControlPayload p{};
    const std::uint64_t mac = static_cast<std::uint64_t>(static_cast<std::uint32_t>(m.dst));
    for (int i = 0; i < 6; ++i) p[i] = static_cast<std::uint8_t>(mac >> (8 * (5 - i)));
    p[6] = static_cast<std::uint8_t>(m.band);
    if (m.kind == MessageKind::LeaderBcast)
        p[7] = m.displaced == kNoLink ? 0xFF : static_cast<std::uint8_t>(links[m.displaced].band);
    else
        p[7] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(m.qlen, 0, 255));
    p[8] = static_cast<std::uint8_t>((m.src_radio & 0xF) << 4 | (m.dst_radio & 0xF));
    return p;
}

DecodedPayload decode_payload(const ControlPayload& p) {
    DecodedPayload d;
    std::uint64_t mac = 0;
    for (int i = 0; i < 6; ++i) mac = mac << 8 | p[i];
    d.dst = static_cast<NodeId>(mac);
    d.band = p[6];
    d.qlen_or_band = p[7];
    d.src_radio = p[8] >> 4;
    d.dst_radio = p[8] & 0xF;
    return d;
}

// --- leader view ----------------------------------------------------------

LeaderView::LeaderView(const LinkSet& links)
    : links_(&links),
      q_(links.num_hops(), 0),
      rate_(links.size(), 0),
      until_(links.size(), 0) {
    for (const auto& l : links.links()) rate_[l.id] = l.rate;
}

bool LeaderView::on_overhear(const ControlMessage& m) {
    if (m.link < 0 || m.link >= links_->size()) {
        ++unknown_;
        return false;
    }
    const GeneralizedLink& l = (*links_)[m.link];
    q_[l.hop] = std::clamp<std::int64_t>(m.qlen, 0, 255);
    if (m.rate > 0) rate_[m.link] = m.rate;
    if (m.kind == MessageKind::Cts) until_[m.link] = m.hold_until;
    return true;
}

Schedule LeaderView::active_at(TimeUs t) const {
    std::vector<LinkId> a;
    for (LinkId l = 0; l < static_cast<LinkId>(until_.size()); ++l)
        if (until_[l] > t) a.push_back(l);
    return Schedule(std::move(a));
}

Selection leader_select(const Group& group, BandIndex band, const LeaderView& view, TimeUs now,
                        const LinkSet& links, GainForm form) {
    const Schedule prev = view.active_at(now);
    Selection best;
    for (NodeId v : group.members) {
        const LossReport loss = compute_loss(v, band, prev, view.q(), links, form);
        const GainReport g = compute_gain(v, band, view.q(), links, loss, form);
        if (g.best_link == kNoLink || g.gain <= 0) continue;
        if (g.gain > best.gain || (g.gain == best.gain && v < best.node)) {
            best.node = v;
            best.link = g.best_link;
            best.band = band;
            best.gain = g.gain;
            best.displaced = g.displaced;
        }
    }
    return best;
}

// --- priority lists -------------------------------------------------------

PriorityLists::PriorityLists(NodeId v, const LinkSet& links)
    : node_(v),
      owned_(links.outgoing(v)),
      hp_(links.radios(v)),
      mp_(links.radios(v)),
      lp_(links.outgoing(v)) {}

void PriorityLists::erase_everywhere(LinkId l) {
    auto drop = [l](std::vector<LinkId>& v) { std::erase(v, l); };
    for (auto& h : hp_) drop(h);
    for (auto& m : mp_) drop(m);
    drop(lp_);
}

void PriorityLists::add_hp(LinkId l, int radio) {
    erase_everywhere(l);
    hp_[radio].push_back(l);
}

bool PriorityLists::on_activated(LinkId l, int radio) {
    auto& h = hp_[radio];
    const auto it = std::find(h.begin(), h.end(), l);
    if (it == h.end()) return false;
    h.erase(it);
    mp_[radio].push_back(l);
    return true;
}

bool PriorityLists::on_lost(LinkId l, int radio) {
    auto& m = mp_[radio];
    const auto it = std::find(m.begin(), m.end(), l);
    if (it == m.end()) return false;
    m.erase(it);
    lp_.push_back(l);
    return true;
}

bool PriorityLists::demote(LinkId l) {
    if (std::find(owned_.begin(), owned_.end(), l) == owned_.end()) return false;
    if (std::find(lp_.begin(), lp_.end(), l) != lp_.end()) return false;
    erase_everywhere(l);
    lp_.push_back(l);
    return true;
}

Priority PriorityLists::priority(LinkId l, int radio) const {
    if (std::find(hp_[radio].begin(), hp_[radio].end(), l) != hp_[radio].end()) return Priority::HP;
    if (std::find(mp_[radio].begin(), mp_[radio].end(), l) != mp_[radio].end()) return Priority::MP;
    return Priority::LP;
}

bool PriorityLists::invariants_hold() const {
    std::vector<LinkId> all(lp_);
    for (const auto& h : hp_) all.insert(all.end(), h.begin(), h.end());
    for (const auto& m : mp_) all.insert(all.end(), m.begin(), m.end());
    std::sort(all.begin(), all.end());
    return all == owned_;
}

// --- contention helpers ---------------------------------------------------

std::pair<int, int> backoff_window(Priority p, int cw) {
    switch (p) {
        case Priority::HP: return {0, cw / 2 - 1};
        case Priority::MP: return {cw / 2, 3 * cw / 4 - 1};
        case Priority::LP: return {3 * cw / 4, cw - 1};
    }
    return {0, cw - 1};
}

std::vector<NodeId> inject_control_loss(const std::vector<NodeId>& receivers, NodeId addressed,
                                        double p, bool exempt, std::vector<RngStream>& per_receiver) {
    std::vector<NodeId> got;
    for (NodeId r : receivers) {
        if (exempt && r == addressed) {
            got.push_back(r);
            continue;
        }
        if (!per_receiver[r].bernoulli(p)) got.push_back(r);
    }
    return got;
}

void validate_async_config(const AsyncConfig& c, const LinkSet& links) {
    if (links.num_bands() < 1) throw ConfigError("bands: at least one data band is required");
    if (links.size() < 1) throw ConfigError("links: no generalized links");
    if (c.cw < 4 || c.cw % 4 != 0) throw ConfigError("async.cw: must be a positive multiple of 4");
    if (c.slot_us <= 0 || c.rts_us <= 0 || c.cts_us <= 0)
        throw ConfigError("async.slot_us/rts_us/cts_us: must be positive");
    if (c.packet_us <= 0) throw ConfigError("async.packet_us: must be positive");
    if (c.txopt_us < c.packet_us) throw ConfigError("async.txopt_us: must cover one packet");
    if (c.period_us <= 0) throw ConfigError("async.period_us: must be positive");
    if (c.retune_us < 0) throw ConfigError("async.retune_us: must be non-negative");
    if (c.control_loss < 0 || c.control_loss > 1)
        throw ConfigError("async.control_loss: must lie in [0, 1]");
    if (c.bcast_loss > 1) throw ConfigError("async.bcast_loss: must be at most 1");
    if (c.qlen_update_threshold < 1)
        throw ConfigError("async.qlen_update_threshold: must be at least 1");
    if (c.clock_drift_us < 0) throw ConfigError("async.clock_drift_us: must be non-negative");
    if (c.slots < 1) throw ConfigError("horizon: at least one slot");
    if (c.qcsma_slots_per_band < 1) throw ConfigError("async.qcsma_slots_per_band: must be positive");
}

// --- engine ---------------------------------------------------------------

namespace {

constexpr TimeUs kSampleUs = 5000;

enum EventKind : int { kPacket = 0, kArrival = 1, kDataStart = 2, kSample = 3, kEpoch = 4, kFrame = 5 };

struct Event {
    TimeUs t;
    int kind;
    NodeId node;
    std::int64_t seq;
    std::int64_t a;
    bool operator>(const Event& o) const {
        if (t != o.t) return t > o.t;
        if (kind != o.kind) return kind > o.kind;
        if (node != o.node) return node > o.node;
        return seq > o.seq;
    }
};

struct Radio {
    TimeUs busy_until = 0;
    BandIndex band = -1;
};

struct Tx {
    LinkId link;
    int tail_radio;
    int head_radio;
    TimeUs start;
    TimeUs end;
    Priority priority;
    bool ended = false;
};

struct Contender {
    NodeId node;
    int radio;
    LinkId link;
    Priority priority;
    int slot;
    int remaining;
    int frozen_until = 0;
    bool done = false;
};

class Engine {
public:
    Engine(const Network& net, const ArrivalSpec& spec, const std::vector<double>& rates,
           std::uint64_t seed, SchedulerKind kind, const AsyncConfig& cfg)
        : net_(net),
          links_(net.links),
          cfg_(cfg),
          kind_(kind),
          seed_(seed),
          n_(links_.num_nodes()),
          horizon_(cfg.slots * kSampleUs),
          frame_us_(cfg.cw * cfg.slot_us + cfg.rts_us + cfg.cts_us),
          exchange_slots_(static_cast<int>((cfg.rts_us + cfg.cts_us + cfg.slot_us - 1) / cfg.slot_us)),
          arrivals_(spec, rates, seed),
          queues_(links_.num_hops()),
          sampler_(net.deployment.num_nodes() ? &net.deployment : nullptr, links_,
                   cfg.node_q_threshold),
          trace_(cfg.trace_path, "engine=async scheduler=" + to_string(kind) +
                                     " seed=" + std::to_string(seed)),
          qcsma_rng_(seed, StreamFamily::Qcsma, 0),
          arrived_since_(links_.num_hops(), 0) {
        audible_.assign(static_cast<std::size_t>(n_) * n_, 0);
        for (NodeId u = 0; u < n_; ++u) {
            audible_[u * n_ + u] = 1;
            if (u < static_cast<int>(net.control_graph.adj.size()))
                for (NodeId v : net.control_graph.adj[u]) audible_[u * n_ + v] = 1;
        }
        radios_.resize(n_);
        for (NodeId v = 0; v < n_; ++v) radios_[v].resize(links_.radios(v));
        link_until_.assign(links_.size(), 0);
        for (NodeId v = 0; v < n_; ++v) {
            lists_.emplace_back(v, links_);
            backoff_rng_.emplace_back(seed, StreamFamily::NodeBackoff, v);
            loss_rng_.emplace_back(seed, StreamFamily::ControlLoss, v);
        }

        const Grouping& gr = net.grouping;
        if (kind_ == SchedulerKind::MaxGain) {
            holder_of_.assign(n_, -1);
            if (cfg.leaderless) {
                for (NodeId v = 0; v < n_; ++v) add_holder(v);
            } else {
                for (const Group& g : gr.groups) add_holder(g.leader);
            }
            audible_holders_.resize(n_);
            for (NodeId v = 0; v < n_; ++v)
                for (NodeId h : holders_)
                    if (audible(v, h)) audible_holders_[v].push_back(h);
            for (int g = 0; g < gr.size(); ++g) {
                band_rng_.emplace_back(seed, StreamFamily::GroupBand, gr.seed_of_group[g]);
                RngStream ph(seed, StreamFamily::LeaderPhase, g);
                phase_.push_back(ph.uniform_int(0, cfg.period_us - 1));
            }
            band_draws_.resize(gr.size());
            epoch_first_.resize(gr.size());
            drift_.assign(n_, 0);
            if (cfg.leaderless && cfg.clock_drift_us > 0)
                for (NodeId v = 0; v < n_; ++v) {
                    RngStream d(seed, StreamFamily::LeaderPhase, (1u << 20) + v);
                    drift_[v] = d.uniform_int(-cfg.clock_drift_us, cfg.clock_drift_us);
                }
        }
        for (HopId h = 0; h < links_.num_hops(); ++h)
            hop_tail_.push_back(links_.of_hop(h).empty() ? kNoNode : links_[links_.of_hop(h)[0]].tail);
    }

    AsyncRun run() {
        push(0, kArrival, -1, 0);
        for (std::int64_t k = 1; k <= cfg_.slots; ++k) push(k * kSampleUs, kSample, -1, k);
        push(0, kFrame, -1, 0);
        if (kind_ == SchedulerKind::MaxGain) {
            const Grouping& gr = net_.grouping;
            if (cfg_.leaderless) {
                for (NodeId v = 0; v < n_; ++v) schedule_member_epoch(v, 0);
            } else {
                for (int g = 0; g < gr.size(); ++g)
                    push(phase_[g], kEpoch, gr.groups[g].leader, 0);
            }
        }

        while (!events_.empty()) {
            const Event e = events_.top();
            events_.pop();
            if (e.t > horizon_) break;
            switch (e.kind) {
                case kPacket: on_packet(e); break;
                case kArrival: on_arrival(e); break;
                case kDataStart: on_data_start(e); break;
                case kSample: sampler_.sample(queues_); break;
                case kEpoch: on_epoch(e); break;
                case kFrame:
                    if (kind_ == SchedulerKind::MaxGain) on_maxgain_frame(e.t);
                    else on_central_frame(e.t);
                    break;
            }
        }
        return finish();
    }

private:
    // --- plumbing
    void push(TimeUs t, int kind, NodeId node, std::int64_t a) {
        events_.push(Event{t, kind, node, seq_++, a});
    }
    bool audible(NodeId u, NodeId v) const { return audible_[u * n_ + v] != 0; }
    bool hears_link(NodeId x, LinkId l) const {
        return audible(x, links_[l].tail) || audible(x, links_[l].head);
    }
    void add_holder(NodeId v) {
        holder_of_[v] = static_cast<int>(holders_.size());
        holders_.push_back(v);
        views_.emplace_back(links_);
    }
    void log(TimeUs t, NodeId node, int radio, BandIndex band, const char* ev, LinkId l,
             std::int64_t qlen) {
        trace_.record(t, node, radio, band, ev, l, l == kNoLink ? -1 : links_[l].hop, qlen);
    }
    void check_lists(NodeId v) {
        ++c_.list_checks;
        if (!lists_[v].invariants_hold())
            throw ContractViolation("priority lists corrupted at node " + std::to_string(v));
    }

    // Sender always hears itself; other view holders in range may drop it.
    void broadcast(const ControlMessage& m, NodeId sender, NodeId addressed) {
        if (holders_.empty()) return;
        std::vector<NodeId> others;
        for (NodeId h : audible_holders_[sender])
            if (h != sender) others.push_back(h);
        const auto got =
            inject_control_loss(others, addressed, cfg_.control_loss, cfg_.exempt_destination, loss_rng_);
        c_.overhear_dropped += static_cast<std::int64_t>(others.size() - got.size());
        auto deliver = [&](NodeId h) {
            ++c_.overheard;
            if (!views_[holder_of_[h]].on_overhear(m)) ++c_.unknown_messages;
        };
        if (holder_of_[sender] >= 0) deliver(sender);
        for (NodeId h : got) deliver(h);
    }

    ControlMessage message(MessageKind k, LinkId l, TimeUs t, int sr, int dr) const {
        ControlMessage m;
        m.kind = k;
        m.link = l;
        m.src = k == MessageKind::Cts ? links_[l].head : links_[l].tail;
        m.dst = k == MessageKind::Cts ? links_[l].tail : links_[l].head;
        m.band = links_[l].band;
        m.qlen = queues_.q(links_[l].hop);
        m.rate = links_[l].rate;
        m.src_radio = sr;
        m.dst_radio = dr;
        m.time = t;
        return m;
    }

    // --- arrivals and service
    void on_arrival(const Event& e) {
        const std::int64_t tick = e.a;
        const auto& a = arrivals_.next();
        for (HopId h = 0; h < links_.num_hops(); ++h) {
            if (a[h] == 0) continue;
            queues_.arrive(h, a[h], tick);
            arrived_ += a[h];
            arrived_since_[h] += a[h];
            if (kind_ == SchedulerKind::MaxGain && hop_tail_[h] != kNoNode &&
                arrived_since_[h] >= cfg_.qlen_update_threshold) {
                arrived_since_[h] = 0;
                const LinkId l = links_.of_hop(h)[0];
                ControlMessage m = message(MessageKind::QlenUpdate, l, e.t, 0, 0);
                ++c_.qlen_updates;
                log(e.t, m.src, -1, -1, "QLEN_UPDATE", l, m.qlen);
                broadcast(m, m.src, kNoNode);
            }
        }
        const TimeUs next = e.t + cfg_.packet_us;
        if (next < horizon_) push(next, kArrival, -1, tick + 1);
    }

    void on_data_start(const Event& e) {
        Tx& tx = txs_[e.a];
        const LinkId l = tx.link;
        ++c_.validator_checks;
        if (!can_add(started_, l, links_))
            throw ContractViolation("async: link " + std::to_string(l) + " starts at t=" +
                                    std::to_string(e.t) + " against an active conflicting set");
        started_.push_back(l);
        if (c_.data_starts++ == 0) first_start_ = e.t;
        log(e.t, links_[l].tail, tx.tail_radio, links_[l].band, "DATA_START", l,
            queues_.q(links_[l].hop));
        push(e.t + cfg_.packet_us, kPacket, links_[l].tail, e.a);
    }

    void on_packet(const Event& e) {
        Tx& tx = txs_[e.a];
        const GeneralizedLink& l = links_[tx.link];
        departed_ += queues_.depart(l.hop, l.rate, e.t / cfg_.packet_us);
        if (e.t + cfg_.packet_us <= tx.end && queues_.q(l.hop) > 0 && e.t + cfg_.packet_us <= horizon_) {
            push(e.t + cfg_.packet_us, kPacket, l.tail, e.a);
            return;
        }
        end_tx(e.a, e.t);
    }

    void end_tx(std::int64_t id, TimeUs t) {
        Tx& tx = txs_[id];
        const GeneralizedLink& l = links_[tx.link];
        tx.ended = true;
        // Only give back what is still ours: a later grant may already hold the radio.
        if (t < tx.end) {
            for (auto [v, r] : {std::pair{l.tail, tx.tail_radio}, std::pair{l.head, tx.head_radio}})
                if (radios_[v][r].busy_until == tx.end) radios_[v][r].busy_until = t;
            if (link_until_[tx.link] == tx.end) link_until_[tx.link] = t;
        }
        std::erase(started_, tx.link);
        std::erase(live_, id);
        log(t, l.tail, tx.tail_radio, l.band, "DATA_END", tx.link, queues_.q(l.hop));
    }

    // Reserves both radios and queues the data start.
    // `ready` is when both radios are free; a retune adds its cost on top.
    void grant(LinkId l, int tr, int hr, TimeUs ready, Priority p, TimeUs hold) {
        const GeneralizedLink& gl = links_[l];
        Radio& a = radios_[gl.tail][tr];
        Radio& b = radios_[gl.head][hr];
        const bool retune = a.band != gl.band || b.band != gl.band;
        const TimeUs start = ready + (retune ? cfg_.retune_us : 0);
        const TimeUs end = start + hold;
        a.busy_until = b.busy_until = end;
        a.band = b.band = gl.band;
        link_until_[l] = end;
        txs_.push_back(Tx{l, tr, hr, start, end, p});
        live_.push_back(static_cast<std::int64_t>(txs_.size()) - 1);
        arrived_since_[gl.hop] = 0;
        if (start < horizon_) push(start, kDataStart, gl.tail, static_cast<std::int64_t>(txs_.size()) - 1);
    }

    // Some radio other than `except` holds band b past t.
    bool band_busy_at(NodeId v, BandIndex b, TimeUs t, int except = -1) const {
        for (int r = 0; r < static_cast<int>(radios_[v].size()); ++r)
            if (r != except && radios_[v][r].band == b && radios_[v][r].busy_until > t) return true;
        return false;
    }

    // Free radio at v for band b by time t: prefer one already tuned to b.
    int free_radio(NodeId v, BandIndex b, TimeUs t, const std::vector<int>* exclude = nullptr) const {
        int pick = -1;
        for (int r = 0; r < static_cast<int>(radios_[v].size()); ++r) {
            if (radios_[v][r].busy_until > t) continue;
            if (exclude && std::find(exclude->begin(), exclude->end(), r) != exclude->end()) continue;
            if (radios_[v][r].band == b) return r;
            if (pick < 0) pick = r;
        }
        return pick;
    }

    bool conflicts_live(LinkId l, TimeUs t, bool audible_only, NodeId listener) const {
        for (std::int64_t id : live_) {
            const Tx& tx = txs_[id];
            if (tx.end <= t || !links_.interferes(tx.link, l)) continue;
            if (!audible_only || hears_link(listener, tx.link)) return true;
        }
        return false;
    }

    // --- leader side
    void schedule_member_epoch(NodeId v, std::int64_t k) {
        const int g = net_.grouping.group_of[v];
        const TimeUs t = std::max<TimeUs>(0, phase_[g] + k * cfg_.period_us + drift_[v]);
        if (t < horizon_) push(t, kEpoch, v, k);
    }

    BandIndex band_draw(int g, std::int64_t k) {
        auto& d = band_draws_[g];
        while (static_cast<std::int64_t>(d.size()) <= k)
            d.push_back(static_cast<BandIndex>(band_rng_[g].uniform_int(0, links_.num_bands() - 1)));
        return d[k];
    }

    void on_epoch(const Event& e) {
        const Grouping& gr = net_.grouping;
        const int g = gr.group_of[e.node];
        const std::int64_t k = e.a;
        const BandIndex band = band_draw(g, k);
        const Group& group = gr.groups[g];
        const LeaderView& view = views_[holder_of_[e.node]];
        const Selection sel = leader_select(group, band, view, e.t, links_, cfg_.form);

        if (cfg_.leaderless) {
            auto& first = epoch_first_[g];
            const std::pair<NodeId, LinkId> mine{sel.node, sel.link};
            auto it = first.find(k);
            if (it == first.end()) first.emplace(k, std::pair{mine, false});
            else if (it->second.first != mine && !it->second.second) {
                it->second.second = true;
                ++c_.leaderless_disagreements;
            }
            if (first.size() > 64) first.erase(first.begin());
            if (sel.node == e.node) {
                ++c_.selections;
                record_selection(e.t, g, k, sel);
                log(e.t, e.node, -1, band, "SELECT", sel.link, sel.gain);
                apply_selection(sel, e.t);
            }
            schedule_member_epoch(e.node, k + 1);
            return;
        }

        if (sel.link != kNoLink) {
            ++c_.selections;
            record_selection(e.t, g, k, sel);
            log(e.t, e.node, -1, band, "SELECT", sel.link, sel.gain);
            ++c_.bcast_sent;
            const double p = cfg_.bcast_loss < 0 ? cfg_.control_loss : cfg_.bcast_loss;
            const bool delivered = sel.node == e.node || !loss_rng_[sel.node].bernoulli(p);
            if (delivered) {
                log(e.t, sel.node, -1, band, "BCAST", sel.link,
                    sel.displaced.empty() ? -1 : sel.displaced.front());
                apply_selection(sel, e.t);
            } else {
                ++c_.bcast_lost;
                log(e.t, sel.node, -1, band, "BCAST_LOST", sel.link, -1);
            }
        }
        const TimeUs next = e.t + cfg_.period_us;
        if (next < horizon_) push(next, kEpoch, e.node, k + 1);
    }

    void record_selection(TimeUs t, int g, std::int64_t k, const Selection& s) {
        selections_.push_back(SelectionRecord{t, g, k, s.node, s.link, s.gain});
    }

    // Designated radio: the one carrying a displaced link, else a free one,
    // else the one that frees up first.
    void apply_selection(const Selection& s, TimeUs t) {
        const NodeId v = s.node;
        int radio = -1;
        for (LinkId d : s.displaced)
            for (std::int64_t id : live_) {
                if (txs_[id].link != d || radio >= 0) continue;
                radio = links_[d].tail == v ? txs_[id].tail_radio : txs_[id].head_radio;
            }
        if (radio < 0) {
            TimeUs best = 0;
            for (int r = 0; r < static_cast<int>(radios_[v].size()); ++r)
                if (radio < 0 || radios_[v][r].busy_until < best) {
                    radio = r;
                    best = radios_[v][r].busy_until;
                }
        }
        lists_[v].add_hp(s.link, radio);
        ++c_.hp_adds;
        log(t, v, radio, links_[s.link].band, "HP_ADD", s.link, 0);
        for (LinkId d : s.displaced)
            if (lists_[v].demote(d)) log(t, v, -1, links_[d].band, "TO_LP", d, 0);
        check_lists(v);
    }

    // --- maximal-gain contention frame
    void on_maxgain_frame(TimeUs t0) {
        ++c_.frames;
        const TimeUs data0 = t0 + frame_us_;
        const auto& q = queues_.all();
        std::vector<Contender> cs;
        std::vector<LinkId> picked;

        for (NodeId v = 0; v < n_; ++v) {
            std::vector<BandIndex> picked_bands;
            for (int r = 0; r < static_cast<int>(radios_[v].size()); ++r) {
                // A radio still sending may line up its next transmission
                // to start when the current one ends, before the next frame.
                if (radios_[v][r].busy_until >= data0 + frame_us_) continue;
                const TimeUs ready = std::max(data0, radios_[v][r].busy_until);
                auto usable = [&](LinkId l) {
                    const BandIndex b = links_[l].band;
                    return q[links_[l].hop] > 0 && link_until_[l] <= ready &&
                           std::find(picked.begin(), picked.end(), l) == picked.end() &&
                           std::find(picked_bands.begin(), picked_bands.end(), b) == picked_bands.end() &&
                           !band_busy_at(v, b, ready, r);
                };
                const auto choice = lists_[v].pick(r, q, links_, usable);
                if (!choice) continue;
                const auto [l, pri] = *choice;
                if (conflicts_live(l, ready, true, v)) {
                    ++c_.busy;
                    continue;
                }
                const auto [lo, hi] = backoff_window(pri, cfg_.cw);
                const int slot = static_cast<int>(backoff_rng_[v].uniform_int(lo, hi));
                cs.push_back(Contender{v, r, l, pri, slot, slot});
                picked.push_back(l);
                picked_bands.push_back(links_[l].band);
            }
        }
        c_.contenders += static_cast<std::int64_t>(cs.size());

        std::vector<LinkId> granted;
        for (int s = 0; s < cfg_.cw; ++s) {
            std::vector<int> fire;
            bool any_pending = false;
            for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
                Contender& c = cs[i];
                if (c.done) continue;
                any_pending = true;
                if (c.frozen_until > s) continue;
                if (c.remaining == 0) fire.push_back(i);
                else --c.remaining;
            }
            if (!any_pending) break;
            if (fire.empty()) continue;

            // A lower class never starts while a conflicting HP contender waits.
            std::vector<int> go;
            for (int i : fire) {
                Contender& c = cs[i];
                bool yield = false;
                if (c.priority != Priority::HP)
                    for (const Contender& o : cs)
                        if (!o.done && o.priority == Priority::HP && links_.interferes(o.link, c.link)) {
                            yield = true;
                            break;
                        }
                if (yield) {
                    ++c_.priority_yields;
                    ++c_.deferred;
                    finish_contender(c, t0, s, ContendOutcome::Deferred);
                } else {
                    go.push_back(i);
                }
            }

            std::vector<char> collided(go.size(), 0);
            for (std::size_t a = 0; a < go.size(); ++a)
                for (std::size_t b = a + 1; b < go.size(); ++b) {
                    const GeneralizedLink& x = links_[cs[go[a]].link];
                    const GeneralizedLink& y = links_[cs[go[b]].link];
                    if (links_.interferes(x.id, y.id) || audible(x.tail, y.tail) ||
                        audible(x.tail, y.head) || audible(y.tail, x.head))
                        collided[a] = collided[b] = 1;
                }

            std::vector<LinkId> on_air;
            for (std::size_t a = 0; a < go.size(); ++a) {
                Contender& c = cs[go[a]];
                const GeneralizedLink& gl = links_[c.link];
                if (collided[a]) {
                    ++c_.collided;
                    log(t0, gl.tail, c.radio, gl.band, "COLLIDE", c.link, q[gl.hop]);
                    finish_contender(c, t0, s, ContendOutcome::Collided);
                    on_air.push_back(c.link);
                    continue;
                }
                const TimeUs tail_ready = std::max(data0, radios_[gl.tail][c.radio].busy_until);
                if (tail_ready >= data0 + frame_us_ || band_busy_at(gl.tail, gl.band, tail_ready, c.radio)) {
                    ++c_.deferred;
                    finish_contender(c, t0, s, ContendOutcome::Deferred);
                    continue;
                }
                bool heard = false;
                for (LinkId gdone : granted)
                    if (links_.interferes(gdone, c.link) && hears_link(gl.tail, gdone)) heard = true;
                if (heard) {
                    ++c_.busy;
                    finish_contender(c, t0, s, ContendOutcome::Busy);
                    continue;
                }
                on_air.push_back(c.link);
                ControlMessage rts = message(MessageKind::Rts, c.link, t0, c.radio, 0);
                log(t0, gl.tail, c.radio, gl.band, "RTS", c.link, rts.qlen);
                broadcast(rts, gl.tail, gl.head);

                std::vector<int> busy_radios;
                for (const Contender& o : cs)
                    if (!o.done && o.node == gl.head) busy_radios.push_back(o.radio);
                const int hr = free_radio(gl.head, gl.band, data0 + frame_us_ - 1, &busy_radios);
                const TimeUs ready =
                    hr < 0 ? 0 : std::max(tail_ready, radios_[gl.head][hr].busy_until);
                const bool ok = hr >= 0 && !band_busy_at(gl.head, gl.band, ready, hr) &&
                                !band_busy_at(gl.tail, gl.band, ready, c.radio) &&
                                !conflicts_live(c.link, ready, false, kNoNode);
                if (!ok) {
                    ++c_.lost;
                    log(t0, gl.tail, c.radio, gl.band, "LOST", c.link, q[gl.hop]);
                    if (c.priority == Priority::MP && lists_[gl.tail].on_lost(c.link, c.radio)) {
                        log(t0, gl.tail, c.radio, gl.band, "MP_TO_LP", c.link, 0);
                        check_lists(gl.tail);
                    }
                    finish_contender(c, t0, s, ContendOutcome::Lost);
                    continue;
                }
                const TimeUs hold = c.priority == Priority::HP ? cfg_.txopt_us : cfg_.packet_us;
                grant(c.link, c.radio, hr, ready, c.priority, hold);
                granted.push_back(c.link);
                ControlMessage cts = message(MessageKind::Cts, c.link, t0, hr, c.radio);
                cts.hold_until = txs_.back().end;
                log(t0, gl.head, hr, gl.band, "CTS", c.link, cts.qlen);
                broadcast(cts, gl.head, gl.tail);
                ++c_.won;
                if (c.priority == Priority::HP) {
                    ++c_.hp_grants;
                    if (lists_[gl.tail].on_activated(c.link, c.radio)) {
                        log(t0, gl.tail, c.radio, gl.band, "HP_TO_MP", c.link, 0);
                        check_lists(gl.tail);
                    }
                } else if (c.priority == Priority::MP) {
                    ++c_.mp_grants;
                } else {
                    ++c_.lp_grants;
                }
                finish_contender(c, t0, s, ContendOutcome::Won);
            }

            // Everyone who hears an exchange freezes its countdown until it ends.
            for (Contender& o : cs) {
                if (o.done) continue;
                for (LinkId l : on_air)
                    if (hears_link(o.node, l)) {
                        o.frozen_until = std::max(o.frozen_until, s + exchange_slots_);
                        break;
                    }
            }
        }
        for (Contender& c : cs)
            if (!c.done) {
                ++c_.deferred;
                finish_contender(c, t0, cfg_.cw, ContendOutcome::Deferred);
            }

        if (data0 < horizon_) push(data0, kFrame, -1, 0);
    }

    void finish_contender(Contender& c, TimeUs t0, int slot, ContendOutcome o) {
        c.done = true;
        if (cfg_.keep_exchanges) exchanges_.push_back(ExchangeRecord{t0, slot, c.link, c.priority, o});
    }

    // --- MB-QCSMA and MB-GMS frames: one decision, one TXOPT hold
    void on_central_frame(TimeUs t0) {
        ++c_.frames;
        const auto& q = queues_.all();
        Schedule s;
        TimeUs control = 0;
        if (kind_ == SchedulerKind::Qcsma) {
            Schedule prev;
            for (LinkId l : last_.active())
                if (q[links_[l].hop] > 0) prev.add(l);
            s = qcsma_step(prev, q, links_, qcsma_rng_);
            control = static_cast<TimeUs>(links_.num_bands()) * cfg_.qcsma_slots_per_band * cfg_.slot_us;
        } else {
            s = gms_schedule(links_, q);
            control = static_cast<TimeUs>(s.size()) * (cfg_.rts_us + cfg_.cts_us);
        }
        Schedule kept;
        for (LinkId l : s.active())
            if (q[links_[l].hop] > 0) kept.add(l);
        require_feasible(kept, links_, "async central frame");

        const TimeUs data0 = t0 + control;
        TimeUs frame_end = data0;
        for (LinkId l : kept.active()) {
            const GeneralizedLink& gl = links_[l];
            const int tr = free_radio(gl.tail, gl.band, data0);
            const int hr = free_radio(gl.head, gl.band, data0);
            if (tr < 0 || hr < 0) throw ContractViolation("async central frame: radio budget exceeded");
            log(t0, gl.tail, tr, gl.band, "GRANT", l, q[gl.hop]);
            grant(l, tr, hr, data0, Priority::HP, cfg_.txopt_us);
            frame_end = std::max(frame_end, txs_.back().end);
            ++c_.won;
        }
        c_.contenders += kept.size();
        last_ = kept;
        const TimeUs next = std::max(frame_end, t0 + (control > 0 ? control : cfg_.packet_us));
        if (next < horizon_) push(next, kFrame, -1, 0);
    }

    AsyncRun finish() {
        AsyncRun run;
        RunMetrics& m = run.metrics;
        m.engine = "async";
        m.scheduler = to_string(kind_);
        m.seed = seed_;
        m.slots = cfg_.slots;
        m.steps = c_.frames;
        sampler_.finish(m);
        fill_delay(m, queues_.delay());
        const double ticks = static_cast<double>(horizon_) / static_cast<double>(cfg_.packet_us);
        m.offered = static_cast<double>(arrived_) / ticks;
        m.throughput = static_cast<double>(departed_) / ticks;
        m.trace_hash = trace_.hash();
        m.trace_events = trace_.events();
        const auto put = [&m](const char* k, std::int64_t v) { m.extra[k] = static_cast<double>(v); };
        put("frames", c_.frames);
        put("won", c_.won);
        put("lost", c_.lost);
        put("busy", c_.busy);
        put("collided", c_.collided);
        put("deferred", c_.deferred);
        put("hp_grants", c_.hp_grants);
        put("selections", c_.selections);
        put("bcast_lost", c_.bcast_lost);
        put("overhear_dropped", c_.overhear_dropped);
        put("leaderless_disagreements", c_.leaderless_disagreements);
        put("validator_checks", c_.validator_checks);
        put("first_data_start_us", first_start_);
        run.counters = c_;
        run.exchanges = std::move(exchanges_);
        run.selections = std::move(selections_);
        return run;
    }

    const Network& net_;
    const LinkSet& links_;
    AsyncConfig cfg_;
    SchedulerKind kind_;
    std::uint64_t seed_;
    int n_;
    TimeUs horizon_;
    TimeUs frame_us_;
    int exchange_slots_;

    ArrivalProcess arrivals_;
    QueueState queues_;
    QueueSampler sampler_;
    TraceWriter trace_;
    RngStream qcsma_rng_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::int64_t seq_ = 0;

    std::vector<std::uint8_t> audible_;
    std::vector<std::vector<Radio>> radios_;
    std::vector<TimeUs> link_until_;
    std::vector<PriorityLists> lists_;
    std::vector<RngStream> backoff_rng_;
    std::vector<RngStream> loss_rng_;
    std::vector<Tx> txs_;
    std::vector<std::int64_t> live_;
    std::vector<LinkId> started_;
    Schedule last_;

    std::vector<NodeId> holders_;
    std::vector<int> holder_of_;
    std::vector<std::vector<NodeId>> audible_holders_;
    std::vector<LeaderView> views_;
    std::vector<RngStream> band_rng_;
    std::vector<TimeUs> phase_;
    std::vector<TimeUs> drift_;
    std::vector<std::vector<BandIndex>> band_draws_;
    std::vector<std::map<std::int64_t, std::pair<std::pair<NodeId, LinkId>, bool>>> epoch_first_;
    std::vector<NodeId> hop_tail_;
    std::vector<std::int64_t> arrived_since_;

    std::int64_t arrived_ = 0;
    std::int64_t departed_ = 0;
    TimeUs first_start_ = -1;
    AsyncCounters c_;
    std::vector<ExchangeRecord> exchanges_;
    std::vector<SelectionRecord> selections_;
};

}  // namespace

AsyncRun run_async(const Network& net, const ArrivalSpec& spec, const std::vector<double>& rates,
                   std::uint64_t seed, SchedulerKind scheduler, const AsyncConfig& cfg) {
    validate_async_config(cfg, net.links);
    if (scheduler == SchedulerKind::MaxWeight)
        throw ConfigError("scheduler: the exact max-weight oracle has no asynchronous engine");
    if (static_cast<int>(rates.size()) != net.links.num_hops())
        throw ConfigError("traffic: one arrival rate per hop is required");
    Engine e(net, spec, rates, seed, scheduler, cfg);
    return e.run();
}

// --- trace audit ----------------------------------------------------------

TraceAudit audit_trace(std::istream& in, const LinkSet& links) {
    TraceAudit a;
    std::vector<LinkId> active;
    // Location per link: -1 LP, else radio * 2 + (0 HP, 1 MP).
    std::vector<int> where(links.size(), -1);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++a.lines;
        std::istringstream ss(line);
        long long t = 0, qlen = 0;
        int node = 0, radio = 0, band = 0, link = 0, hop = 0;
        std::string ev;
        if (!(ss >> t >> node >> radio >> band >> ev >> link >> hop >> qlen)) continue;
        if (link < 0 || link >= links.size()) continue;
        if (ev == "DATA_START") {
            ++a.data_starts;
            if (!can_add(active, link, links)) ++a.feasibility_violations;
            active.push_back(link);
            a.max_concurrent = std::max<std::int64_t>(a.max_concurrent, active.size());
        } else if (ev == "DATA_END") {
            const auto it = std::find(active.begin(), active.end(), link);
            if (it == active.end()) ++a.feasibility_violations;
            else active.erase(it);
        } else if (ev == "HP_ADD") {
            if (radio < 0 || radio >= links.radios(node) || links[link].tail != node) ++a.list_violations;
            where[link] = radio * 2;
        } else if (ev == "HP_TO_MP") {
            if (where[link] != radio * 2) ++a.list_violations;
            where[link] = radio * 2 + 1;
        } else if (ev == "MP_TO_LP") {
            if (where[link] != radio * 2 + 1) ++a.list_violations;
            where[link] = -1;
        } else if (ev == "TO_LP") {
            if (where[link] == -1) ++a.list_violations;
            where[link] = -1;
        }
    }
    return a;
}

}  // namespace mgmac
