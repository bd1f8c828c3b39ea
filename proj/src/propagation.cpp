#include "bbroker/propagation.hpp"

namespace bbroker {

namespace {

SimTime local_validity(const BrokerState& state, SimTime now) {
  if (state.config.refresh_interval <= 0) return kForever;
  return now + state.config.validity_window;
}

InterDomainMessage make(const BrokerState& state, const BrokerId& to,
                        MessagePayload payload) {
  return InterDomainMessage{state.id, to, std::move(payload)};
}

/// Sends the stored AI for `key` to every neighbor except `exclude`.
void forward(BrokerState& state, const StoredAi& stored,
             const std::optional<BrokerId>& exclude, Messages& out) {
  bool as_new = false;
  if (state.relay_next_as_new_ai && stored.learned_from) {
    // A broker that stood up empty queries its neighbors' databases through
    // the first AI it relays, including back toward where it came from.
    as_new = true;
    state.relay_next_as_new_ai = false;
  }
  for (const Adjacency& adj : state.neighbors) {
    if (!as_new && exclude && adj.neighbor_broker == *exclude) continue;
    auto cost = cost_toward(state, stored.anchor, adj);
    if (!cost) continue;
    AvailabilityInfo composed = compose(*cost, stored.ai);
    if (as_new) {
      out.push_back(make(state, adj.neighbor_broker, NewAiMessage{composed}));
    } else {
      out.push_back(make(state, adj.neighbor_broker, AiMessage{composed}));
    }
  }
}

enum class Outcome { kStored, kRefreshed, kIgnored };

Outcome accept(BrokerState& state, const BrokerId& from, const AvailabilityInfo& ai,
               SimTime now) {
  if (ai.valid_until <= now) {
    throw Error(ErrorCode::kStaleMessage,
                ai.edge_domain.str() + " from " + from.str() + " expired at " +
                    std::to_string(ai.valid_until));
  }
  const Adjacency* adj = state.neighbor(from);
  if (!adj) {
    throw Error(ErrorCode::kInvalidArgument,
                from.str() + " is not a neighbor of " + state.id.str());
  }
  const AiKey key = key_of(ai);
  auto it = state.ai_db.find(key);
  if (it == state.ai_db.end()) {
    state.ai_db.emplace(key, StoredAi{ai, from, adj->local_router, now});
    return Outcome::kStored;
  }
  StoredAi& stored = it->second;
  switch (compare_ai(ai, stored.ai)) {
    case AiOrder::kBetter:
      stored = StoredAi{ai, from, adj->local_router, now};
      return Outcome::kStored;
    case AiOrder::kEqual:
      if (stored.learned_from == from && ai.valid_until > stored.ai.valid_until) {
        stored.ai.valid_until = ai.valid_until;
        return Outcome::kRefreshed;
      }
      return Outcome::kIgnored;
    case AiOrder::kWorse:
      return Outcome::kIgnored;
  }
  return Outcome::kIgnored;
}

Messages process_ai(BrokerState& state, const BrokerId& from,
                    const AvailabilityInfo& ai, SimTime now) {
  Messages out;
  if (accept(state, from, ai, now) != Outcome::kIgnored) {
    forward(state, state.ai_db.at(key_of(ai)), from, out);
  }
  return out;
}

}  // namespace

std::optional<TransitCost> cost_toward(const BrokerState& state,
                                       const RouterId& anchor,
                                       const Adjacency& neighbor) {
  const NetworkTopology& topo = *state.topology;
  try {
    TransitCost intra =
        domain_transit_cost(topo, state.domain, anchor, neighbor.local_router);
    return merge_costs(intra, link_cost(topo.link(neighbor.link)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoPath) return std::nullopt;
    throw;
  }
}

AvailabilityInfo local_ai(const NetworkTopology& topology, const Attachment& att,
                          ServiceClass service_class, const BrokerId& origin,
                          SimTime valid_until) {
  return compose(link_cost(topology.link(att.link)),
                 origin_ai(att.edge, service_class, origin, valid_until));
}

void install_local_ais(BrokerState& state, SimTime now) {
  const NetworkTopology& topo = *state.topology;
  const SimTime until = local_validity(state, now);
  for (const DomainId& edge : topo.local_edges(state.domain)) {
    const Attachment att = *topo.attachment(edge);
    for (ServiceClass c : topo.domain(edge).classes) {
      AvailabilityInfo ai = local_ai(topo, att, c, state.id, until);
      state.ai_db[key_of(ai)] = StoredAi{ai, std::nullopt, att.transit_router, now};
    }
  }
}

Messages handle_ai(BrokerState& state, const BrokerId& from,
                   const AvailabilityInfo& ai, SimTime now) {
  return process_ai(state, from, ai, now);
}

Messages handle_new_ai(BrokerState& state, const BrokerId& from,
                       const AvailabilityInfo& ai, SimTime now) {
  Messages out = process_ai(state, from, ai, now);
  const Adjacency* adj = state.neighbor(from);
  AiDatabaseTransfer transfer;
  for (const auto& [key, stored] : state.ai_db) {
    if (stored.learned_from == from) continue;
    auto cost = cost_toward(state, stored.anchor, *adj);
    if (!cost) continue;
    transfer.ais.push_back(compose(*cost, stored.ai));
  }
  out.push_back(make(state, from, std::move(transfer)));
  return out;
}

Messages handle_db_transfer(BrokerState& state, const BrokerId& from,
                            const std::vector<AvailabilityInfo>& ais, SimTime now) {
  Messages out;
  for (const AvailabilityInfo& ai : ais) {
    try {
      Messages part = process_ai(state, from, ai, now);
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kStaleMessage) throw;
      ++state.counters.stale_drops;
    }
  }
  return out;
}

Messages bootstrap(BrokerState& state, SimTime /*now*/) {
  std::vector<const StoredAi*> locals;
  for (const auto& [key, stored] : state.ai_db) {
    if (!stored.learned_from) locals.push_back(&stored);
  }
  if (locals.empty()) {
    state.relay_next_as_new_ai = true;
    throw Error(ErrorCode::kNoLocalEdgeDomains,
                state.id.str() + " has no attached edge domain");
  }
  Messages out;
  for (const Adjacency& adj : state.neighbors) {
    bool first = true;
    for (const StoredAi* stored : locals) {
      auto cost = cost_toward(state, stored->anchor, adj);
      if (!cost) continue;
      AvailabilityInfo composed = compose(*cost, stored->ai);
      if (first) {
        out.push_back(make(state, adj.neighbor_broker, NewAiMessage{composed}));
        first = false;
      } else {
        out.push_back(make(state, adj.neighbor_broker, AiMessage{composed}));
      }
    }
  }
  return out;
}

Messages emit_refresh(BrokerState& state, SimTime now) {
  Messages out;
  const SimTime until = local_validity(state, now);
  std::vector<const StoredAi*> locals;
  for (auto& [key, stored] : state.ai_db) {
    if (stored.learned_from) continue;
    stored.ai.valid_until = until;
    locals.push_back(&stored);
  }
  for (const Adjacency& adj : state.neighbors) {
    for (const StoredAi* stored : locals) {
      auto cost = cost_toward(state, stored->anchor, adj);
      if (!cost) continue;
      out.push_back(make(state, adj.neighbor_broker, AiMessage{compose(*cost, stored->ai)}));
    }
  }
  return out;
}

std::vector<AiKey> expire_stale(BrokerState& state, SimTime now) {
  std::vector<AiKey> removed;
  for (auto it = state.ai_db.begin(); it != state.ai_db.end();) {
    if (it->second.ai.valid_until <= now) {
      removed.push_back(it->first);
      it = state.ai_db.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

std::optional<NextHop> find_next_hop(const BrokerState& state, const DomainId& edge,
                                     ServiceClass service_class) {
  auto it = state.ai_db.find(AiKey{edge, service_class});
  if (it == state.ai_db.end()) return std::nullopt;
  if (!it->second.learned_from) return NextHop::local();
  return NextHop::via(*it->second.learned_from);
}

NextHop route_next_hop(const BrokerState& state, const DomainId& edge,
                       ServiceClass service_class) {
  auto hop = find_next_hop(state, edge, service_class);
  if (!hop) {
    throw Error(ErrorCode::kUnknownDestination,
                state.id.str() + " has no route to " + edge.str() + "/c" +
                    std::to_string(service_class.id()));
  }
  return *hop;
}

}  // namespace bbroker
