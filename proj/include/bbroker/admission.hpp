// Intra-domain resource authority: reservation ledger, path admission and
// border router filters.

#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bbroker/types.hpp"

namespace bbroker {

/// Reservation aggregate: traffic entering at `ingress` toward `dest_edge`
/// in one class.
struct AggregateKey {
  RouterId ingress;
  DomainId dest_edge;
  ServiceClass service_class;

  friend auto operator<=>(const AggregateKey&, const AggregateKey&) = default;
  friend bool operator==(const AggregateKey&, const AggregateKey&) = default;
};

std::string to_string(const AggregateKey& key);

struct Admitted {
  friend bool operator==(const Admitted&, const Admitted&) = default;
};
struct Rejected {
  LinkId bottleneck;
  friend bool operator==(const Rejected&, const Rejected&) = default;
};
using AdmitResult = std::variant<Admitted, Rejected>;

inline bool is_admitted(const AdmitResult& r) {
  return std::holds_alternative<Admitted>(r);
}

/// Accepted ledger mutation; the ledger is always the fold of these.
struct LedgerDecision {
  enum class Kind { kAdmit, kRelease };
  Kind kind = Kind::kAdmit;
  AggregateKey key;
  Kbps target = 0;
  std::vector<LinkId> path;
  TermIndex term = 0;

  friend bool operator==(const LedgerDecision&, const LedgerDecision&) = default;
};

/// Per-key reservation as it stands.
struct KeyReservation {
  Kbps target = 0;
  std::vector<LinkId> path;
  TermIndex last_refreshed_term = 0;

  friend bool operator==(const KeyReservation&, const KeyReservation&) = default;
};

class ReservationLedger {
 public:
  ReservationLedger() = default;
  explicit ReservationLedger(std::map<LinkId, Kbps> capacities);

  bool has_link(const LinkId& link) const { return capacity_.count(link) > 0; }
  Kbps capacity(const LinkId& link) const;
  Kbps reserved_total(const LinkId& link) const;
  Kbps reserved(const LinkId& link, const AggregateKey& key) const;
  /// capacity minus everything reserved on the link.
  Kbps free_capacity(const LinkId& link) const;

  /// Sets the key's reservation to `target` along `path` (replacement
  /// semantics). Each link must be able to absorb target minus what the key
  /// already holds there; otherwise the first short link is reported and the
  /// ledger is left untouched. Links the key held outside `path` are freed
  /// on success. Throws kUnknownLink / kNegativeTarget.
  AdmitResult admit(std::span<const LinkId> path, const AggregateKey& key,
                    Kbps target, TermIndex term);

  /// Drops keys whose last refresh is at or before current_term - hold_terms.
  std::vector<AggregateKey> release_stale(TermIndex current_term, int hold_terms);

  const std::map<AggregateKey, KeyReservation>& keys() const { return keys_; }
  const std::map<LinkId, Kbps>& capacities() const { return capacity_; }
  const std::map<LinkId, std::map<AggregateKey, Kbps>>& reservations() const {
    return reserved_;
  }
  const std::vector<LedgerDecision>& decisions() const { return log_; }

  /// Rebuilds a ledger from scratch by folding a decision log.
  static ReservationLedger replay(const std::map<LinkId, Kbps>& capacities,
                                  const std::vector<LedgerDecision>& log);

  /// Copy of the reservations without the decision log.
  ReservationLedger snapshot() const;

  /// Same reservations (targets and paths). Refresh terms and the decision
  /// log are not compared.
  bool same_state(const ReservationLedger& other) const;

  /// Writes a reservation that bypasses admission control. Fault injection
  /// only: it is not logged, so replay checks will also flag it.
  void inject_unchecked(const LinkId& link, const AggregateKey& key, Kbps amount);

  /// Violations of sum(reserved) <= capacity and of the no-zero-entry rule.
  std::vector<std::string> check_conservation() const;

 private:
  void apply(const LedgerDecision& d);
  void erase_key(const AggregateKey& key);

  std::map<LinkId, Kbps> capacity_;
  std::map<LinkId, std::map<AggregateKey, Kbps>> reserved_;
  std::map<AggregateKey, KeyReservation> keys_;
  std::vector<LedgerDecision> log_;
};

/// Next hop of a route: a neighbor broker, or local delivery.
class NextHop {
 public:
  static NextHop local() { return NextHop(std::nullopt); }
  static NextHop via(BrokerId broker) { return NextHop(std::move(broker)); }

  bool is_local() const { return !broker_.has_value(); }
  /// Precondition: !is_local().
  const BrokerId& broker() const { return *broker_; }
  std::string str() const { return broker_ ? broker_->str() : "local"; }

  friend bool operator==(const NextHop&, const NextHop&) = default;

 private:
  explicit NextHop(std::optional<BrokerId> b) : broker_(std::move(b)) {}
  std::optional<BrokerId> broker_;
};

struct FilterEntry {
  AggregateKey key;
  Kbps admitted = 0;
  /// Empty when no route is currently known for the destination.
  std::optional<NextHop> next_hop;

  friend bool operator==(const FilterEntry&, const FilterEntry&) = default;
};

/// Ingress router configuration, one entry per admitted aggregate.
using FilterTable = std::map<RouterId, std::vector<FilterEntry>>;

using RouteLookup = std::function<std::optional<NextHop>(const DomainId&, ServiceClass)>;

FilterTable build_filter_table(const ReservationLedger& ledger,
                               const RouteLookup& routes);

}  // namespace bbroker
