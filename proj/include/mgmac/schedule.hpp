#pragma once

#include "mgmac/common.hpp"
#include "mgmac/topology.hpp"
#include "mgmac/traffic.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgmac {

// Set of active generalized links, kept sorted by id.
class Schedule {
public:
    Schedule() = default;
    explicit Schedule(std::vector<LinkId> active);

    const std::vector<LinkId>& active() const { return active_; }
    bool contains(LinkId l) const;
    bool empty() const { return active_.empty(); }
    int size() const { return static_cast<int>(active_.size()); }
    void add(LinkId l);
    void remove(LinkId l);

    std::map<BandIndex, std::vector<LinkId>> by_band(const LinkSet& links) const;
    std::vector<int> radios_used(const LinkSet& links) const;

    bool operator==(const Schedule& o) const { return active_ == o.active_; }

private:
    std::vector<LinkId> active_;
};

enum class ViolationKind { Interference, MaxRadio, SharedBand };

struct Violation {
    ViolationKind kind;
    LinkId a = kNoLink;
    LinkId b = kNoLink;
    NodeId node = kNoNode;
    std::string what;
};

// Scan order: interfering pairs (a < b ascending), then per-node radio
// counts, then per-node band repeats. Radio budget comes from links.radios().
std::optional<Violation> validate_schedule(const Schedule& s, const LinkSet& links);

// Throws ContractViolation naming the violation.
void require_feasible(const Schedule& s, const LinkSet& links, const char* who);

// Whether l can join s without breaking SI, MR or band distinctness.
bool can_add(const std::vector<LinkId>& active, LinkId l, const LinkSet& links);

inline Weight link_weight(LinkId l, const std::vector<std::int64_t>& q, const LinkSet& links) {
    return q[links[l].hop] * links[l].rate;
}
Weight schedule_weight(const std::vector<LinkId>& active, const std::vector<std::int64_t>& q,
                       const LinkSet& links);

}  // namespace mgmac
