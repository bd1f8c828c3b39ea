// Per-term demand specification processing of one broker:
//   begin - users submit DSs,
//   mid   - aggregate by destination, archive, forward to the next hop,
//   end   - admit everything received this term in arrival order.

#pragma once

#include <optional>
#include <vector>

#include "bbroker/broker.hpp"
#include "bbroker/propagation.hpp"

namespace bbroker {

/// Marks the start of term `term` at this broker.
void begin_term(BrokerState& state, TermIndex term);

/// Queues a user DS for the current term. Throws kNotLocalSource when the
/// source edge is not attached here, kDuplicateId on a repeated id and
/// kInvalidArgument for malformed demands.
void submit_ds(BrokerState& state, const DemandSpec& ds, SimTime now);

/// Queues an aggregated DS received from an upstream neighbor.
void receive_aggregated_ds(BrokerState& state, const BrokerId& from,
                           const AggregatedDs& ds, SimTime now);

/// Aggregates everything received since the previous mid-cycle by
/// (dest, class) and sends one AggregatedDs per key to its next hop. Keys
/// without a route are rejected on the spot.
Messages mid_cycle(BrokerState& state, SimTime now);

/// Outcome for one arrival. Arrivals sharing an aggregate key are admitted
/// one after another against a growing target; a rejected arrival leaves the
/// key at what was accepted before it.
struct AdmissionDecision {
  enum class Outcome { kAdmitted, kRejected, kNoRoute, kNoPath };
  AggregateKey key;
  /// This arrival's amount.
  Kbps bandwidth = 0;
  /// Key reservation requested when this arrival was tried.
  Kbps target = 0;
  Outcome outcome = Outcome::kAdmitted;
  std::optional<LinkId> bottleneck;
  std::vector<LinkId> path;
  std::vector<DemandId> component_ids;
};

const char* to_string(AdmissionDecision::Outcome outcome);

struct EndOfCycle {
  std::vector<AdmissionDecision> decisions;
  /// Rejection notices for upstream neighbors.
  Messages messages;
  std::vector<AggregateKey> released;
};

/// Admits the term's arrivals in order, notifies the sources of
/// rejected ones, releases stale reservations and rebuilds the filters.
EndOfCycle end_of_cycle(BrokerState& state, SimTime now);

/// Routes a notice one step back along the recorded forwarding chain. At the
/// origin the rejection is recorded for the user. Throws kUnknownOrigin when
/// a listed id never passed through this broker; nothing is changed then.
Messages handle_rejection(BrokerState& state, const BrokerId& from,
                          const RejectionNotice& notice, SimTime now);

/// Intra path from `ingress` to the egress for `hop`, followed by the
/// outgoing link (inter link toward the neighbor, or the access link of a
/// local destination). Throws kNoPath.
std::vector<LinkId> admission_path(const BrokerState& state, const RouterId& ingress,
                                   const DomainId& dest_edge, const NextHop& hop);

}  // namespace bbroker
