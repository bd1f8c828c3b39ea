// Availability Information protocol: best-AI database maintenance, NewAi
// bootstrap, database transfer, periodic refresh and soft-state expiry.
//
// The sender composes before emitting: its own transit from the AI's anchor
// router to the egress toward the receiver, plus the inter-domain link. A
// received AI therefore always describes the path as seen from the
// receiver's ingress border router.

#pragma once

#include <optional>
#include <vector>

#include "bbroker/broker.hpp"

namespace bbroker {

using Messages = std::vector<InterDomainMessage>;

/// Cost from `anchor` inside the broker's domain to the neighbor's ingress.
/// Empty when the domain is internally disconnected between the two.
std::optional<TransitCost> cost_toward(const BrokerState& state,
                                       const RouterId& anchor,
                                       const Adjacency& neighbor);

/// Local AI for an attached edge domain, anchored at its access router.
AvailabilityInfo local_ai(const NetworkTopology& topology, const Attachment& att,
                          ServiceClass service_class, const BrokerId& origin,
                          SimTime valid_until);

/// Installs one local AI per (attached edge, class).
void install_local_ais(BrokerState& state, SimTime now);

/// Stores `ai` if it beats the stored entry and forwards it to every other
/// neighbor. An equal AI from the current next hop with a later valid_until
/// refreshes the entry and passes the refresh on. Throws kStaleMessage if the
/// AI is already expired.
Messages handle_ai(BrokerState& state, const BrokerId& from,
                   const AvailabilityInfo& ai, SimTime now);

/// handle_ai, plus a database transfer back to the sender holding every
/// stored AI not learned from it.
Messages handle_new_ai(BrokerState& state, const BrokerId& from,
                       const AvailabilityInfo& ai, SimTime now);

/// Element-wise handle_ai; stale elements are dropped and counted.
Messages handle_db_transfer(BrokerState& state, const BrokerId& from,
                            const std::vector<AvailabilityInfo>& ais, SimTime now);

/// First local AI as NewAi, the rest as Ai, to every neighbor. Throws
/// kNoLocalEdgeDomains when nothing is attached; the broker is then marked
/// to announce its first relayed AI as a NewAi instead.
Messages bootstrap(BrokerState& state, SimTime now);

/// Re-advertises local AIs with a fresh validity window.
Messages emit_refresh(BrokerState& state, SimTime now);

/// Drops entries with valid_until <= now. Silent: nothing is sent.
std::vector<AiKey> expire_stale(BrokerState& state, SimTime now);

/// Throws kUnknownDestination if no AI is stored for the key.
NextHop route_next_hop(const BrokerState& state, const DomainId& edge,
                       ServiceClass service_class);

std::optional<NextHop> find_next_hop(const BrokerState& state, const DomainId& edge,
                                     ServiceClass service_class);

}  // namespace bbroker
