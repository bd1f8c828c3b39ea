// Per-broker protocol state shared by the propagation, demand and admission
// machinery.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bbroker/admission.hpp"
#include "bbroker/messages.hpp"
#include "bbroker/qos.hpp"
#include "bbroker/topology.hpp"

namespace bbroker {

struct AiKey {
  DomainId edge_domain;
  ServiceClass service_class;

  friend auto operator<=>(const AiKey&, const AiKey&) = default;
  friend bool operator==(const AiKey&, const AiKey&) = default;
};

inline AiKey key_of(const AvailabilityInfo& ai) {
  return {ai.edge_domain, ai.service_class};
}

struct StoredAi {
  AvailabilityInfo ai;
  /// Neighbor the AI was learned from; empty for locally attached edges.
  std::optional<BrokerId> learned_from;
  /// Border router at which the AI applies (ingress or access router).
  RouterId anchor;
  SimTime stored_at = 0;

  friend bool operator==(const StoredAi&, const StoredAi&) = default;
};

/// Holds at most one AI, the best known, per (edge domain, class).
using AiDatabase = std::map<AiKey, StoredAi>;

struct BrokerConfig {
  SimTime term_length = 1'000'000;
  /// Zero disables periodic refresh; AIs then never expire.
  SimTime refresh_interval = 1'000'000;
  SimTime validity_window = 3'000'000;
  int hold_terms = 2;
};

/// Term boundaries of one broker: begin, mid and end at offsets 0, T/2 and T
/// from phase_offset + k*T.
struct TermClock {
  SimTime term_length = 1'000'000;
  SimTime phase_offset = 0;

  SimTime begin(TermIndex k) const { return phase_offset + k * term_length; }
  SimTime mid(TermIndex k) const { return begin(k) + term_length / 2; }
  SimTime end(TermIndex k) const { return begin(k + 1); }
  /// Term containing t; -1 before the first term starts.
  TermIndex term_at(SimTime t) const {
    return t < phase_offset ? -1 : (t - phase_offset) / term_length;
  }
};

struct DemandSpec {
  DemandId id;
  DomainId src_edge;
  DomainId dest_edge;
  ServiceClass service_class;
  Kbps bandwidth = 0;
  TermIndex issued_term = 0;
};

/// One demand arrival at a broker: a local user DS or an upstream aggregate.
struct DemandInput {
  AggregateKey key;
  Kbps bandwidth = 0;
  std::vector<DemandId> component_ids;
  /// Upstream broker; empty for local users.
  std::optional<BrokerId> from;
  SimTime arrived_at = 0;
  std::uint64_t arrival_seq = 0;
};

enum class ArchiveKind {
  kSubmitted,
  kReceived,
  kForwarded,
  kAdmitted,
  kRejected,
  kNoticeSent,
  kUserRejection,
  kReleased,
};

const char* to_string(ArchiveKind kind);

struct ArchiveRecord {
  TermIndex term = 0;
  SimTime time = 0;
  ArchiveKind kind = ArchiveKind::kSubmitted;
  DomainId dest_edge;
  ServiceClass service_class;
  Kbps bandwidth = 0;
  /// Neighbor involved (sender, receiver or notice target); empty if local.
  std::optional<BrokerId> peer;
  std::optional<RouterId> ingress;
  std::vector<DemandId> component_ids;
  std::string note;

  /// One-line audit form: space separated key=value fields.
  std::string to_line() const;
};

/// Append-only demand history of one broker.
class DemandArchive {
 public:
  void append(ArchiveRecord record) { records_.push_back(std::move(record)); }
  const std::vector<ArchiveRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<ArchiveRecord> records_;
};

/// Amount to forward onward for (dest, class) given the observed sum this
/// term. The default restates the observation.
using Forecaster = std::function<Kbps(const DemandArchive&, const DomainId&,
                                      ServiceClass, Kbps observed)>;

Kbps persistence_forecast(const DemandArchive&, const DomainId&, ServiceClass,
                          Kbps observed);

struct UserRejection {
  SimTime time = 0;
  TermIndex term = 0;
  DomainId src_edge;
  DomainId dest_edge;
  ServiceClass service_class;
  BrokerId rejected_by;
  std::vector<DemandId> component_ids;
};

struct DemandState {
  /// Arrivals since the last mid-cycle; aggregated and forwarded there.
  std::vector<DemandInput> forward_buffer;
  /// Arrivals since the last end-of-cycle; admitted there in arrival order.
  std::vector<DemandInput> admission_queue;
  std::set<DemandId> seen_ids;
  /// Where each demand id entered this broker; empty optional = local user.
  std::map<DemandId, std::optional<BrokerId>> sources;
  std::map<DemandId, DomainId> local_src;
  DemandArchive archive;
  std::vector<UserRejection> user_rejections;
  std::uint64_t next_arrival_seq = 0;
};

struct BrokerCounters {
  std::uint64_t stale_drops = 0;
  std::uint64_t unknown_origin = 0;
};

struct BrokerState {
  BrokerId id;
  DomainId domain;
  std::shared_ptr<const NetworkTopology> topology;
  BrokerConfig config;
  TermClock clock;
  /// Transit neighbors, ordered by broker id.
  std::vector<Adjacency> neighbors;

  AiDatabase ai_db;
  /// Set when the broker stood up without local edge domains: its first
  /// relayed AI then goes out as a NewAi.
  bool relay_next_as_new_ai = false;

  TermIndex current_term = 0;
  DemandState demand;
  ReservationLedger ledger;
  FilterTable filters;
  Forecaster forecaster = persistence_forecast;
  /// The two most recent end-of-term ledgers, newest last.
  std::vector<ReservationLedger> recent_ledgers;

  BrokerCounters counters;

  const Adjacency* neighbor(const BrokerId& broker) const;
};

/// Fresh state for the broker of `domain`. The ledger covers the domain's
/// intra links, the access links of its edge domains and the inter links it
/// sends over.
BrokerState make_broker_state(std::shared_ptr<const NetworkTopology> topology,
                              const DomainId& domain, const BrokerConfig& config,
                              SimTime phase_offset);

}  // namespace bbroker
