// Availability records, transit costs and the algebra the propagation
// protocol folds over.

#pragma once

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "bbroker/types.hpp"

namespace bbroker {

/// Capacity bound of a path segment. An empty segment has no bound.
class Bottleneck {
 public:
  static Bottleneck unbounded() { return Bottleneck(); }
  static Bottleneck of(Kbps capacity) { return Bottleneck(capacity); }

  bool is_unbounded() const { return unbounded_; }
  /// Precondition: !is_unbounded().
  Kbps value() const;

  /// Caps `bandwidth` by this bound.
  Kbps clamp(Kbps bandwidth) const {
    return unbounded_ ? bandwidth : std::min(bandwidth, value_);
  }

  friend Bottleneck min(const Bottleneck& a, const Bottleneck& b);
  friend bool operator==(const Bottleneck&, const Bottleneck&) = default;

 private:
  Bottleneck() = default;
  explicit Bottleneck(Kbps capacity) : unbounded_(false), value_(capacity) {}

  bool unbounded_ = true;
  Kbps value_ = 0;
};

/// QoS cost of crossing one segment (links, a domain, or a chain of both).
struct TransitCost {
  Micros avg_delay = 0;
  Micros max_delay = 0;
  Micros jitter = 0;
  Bottleneck bottleneck = Bottleneck::unbounded();
  LossProb loss = 0.0;

  static TransitCost identity() { return {}; }

  friend bool operator==(const TransitCost&, const TransitCost&) = default;
};

/// Advertised reachability of one edge domain in one service class, as seen
/// from the ingress border router of the broker holding it.
struct AvailabilityInfo {
  DomainId edge_domain;
  ServiceClass service_class;
  Kbps bandwidth = 0;
  Micros avg_delay = 0;
  Micros max_delay = 0;
  Micros jitter = 0;
  LossProb loss = 0.0;
  BrokerId origin_broker;
  SimTime valid_until = 0;

  friend bool operator==(const AvailabilityInfo&,
                         const AvailabilityInfo&) = default;
};

std::ostream& operator<<(std::ostream& os, const AvailabilityInfo& ai);

/// True when the QoS parameters match; valid_until is ignored.
bool same_parameters(const AvailabilityInfo& a, const AvailabilityInfo& b);

enum class AiOrder { kBetter, kEqual, kWorse };

const char* to_string(AiOrder order);

/// Strict total order over AIs for the same (edge domain, class):
/// lexicographic on avg delay, max delay, loss, jitter (all ascending),
/// bandwidth (descending), origin broker (ascending). Throws
/// ErrorCode::kMismatchedKey when the keys differ.
///
/// Every ranked field composes monotonically, which keeps the order isotone
/// under compose(); distributed best-route selection depends on that.
AiOrder compare_ai(const AvailabilityInfo& a, const AvailabilityInfo& b);

/// Survival-product loss composition, arranged so that a zero operand
/// returns the other one bit-exactly.
inline LossProb compose_loss(LossProb first, LossProb second) {
  return first + second * (1.0 - first);
}

/// Extends `ai` across a segment of cost `t`.
AvailabilityInfo compose(const TransitCost& t, const AvailabilityInfo& ai);

/// Monoid operation on costs; identity is TransitCost::identity().
TransitCost merge_costs(const TransitCost& t1, const TransitCost& t2);

/// Seed record for an edge domain before any link is crossed. Its bandwidth
/// is unlimited so the first composition caps it at the access link.
AvailabilityInfo origin_ai(const DomainId& edge, ServiceClass service_class,
                           const BrokerId& origin, SimTime valid_until);

inline constexpr Kbps kUnlimitedKbps = std::numeric_limits<Kbps>::max();

}  // namespace bbroker
