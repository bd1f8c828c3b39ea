#include "bbroker/demand_cycle.hpp"

#include <algorithm>
#include <map>

namespace bbroker {

namespace {

ArchiveRecord record(const BrokerState& state, SimTime now, ArchiveKind kind,
                     const DomainId& dest, ServiceClass c, Kbps bw) {
  ArchiveRecord r;
  r.term = state.current_term;
  r.time = now;
  r.kind = kind;
  r.dest_edge = dest;
  r.service_class = c;
  r.bandwidth = bw;
  return r;
}

/// Sends `ids` back toward where each of them entered this broker.
void route_back(BrokerState& state, const std::vector<DemandId>& ids,
                const DomainId& dest, ServiceClass c, Kbps bw,
                const BrokerId& rejected_by, SimTime now, Messages& out) {
  std::map<BrokerId, std::vector<DemandId>> upstream;
  std::map<DomainId, std::vector<DemandId>> local;
  for (const DemandId& id : ids) {
    const auto& src = state.demand.sources.at(id);
    if (src) {
      upstream[*src].push_back(id);
    } else {
      local[state.demand.local_src.at(id)].push_back(id);
    }
  }
  for (auto& [peer, part] : upstream) {
    ArchiveRecord r = record(state, now, ArchiveKind::kNoticeSent, dest, c, bw);
    r.peer = peer;
    r.component_ids = part;
    r.note = "by=" + rejected_by.str();
    state.demand.archive.append(std::move(r));
    out.push_back(InterDomainMessage{
        state.id, peer,
        RejectionNotice{dest, c, bw, state.current_term, rejected_by, std::move(part)}});
  }
  for (auto& [src, part] : local) {
    ArchiveRecord r = record(state, now, ArchiveKind::kUserRejection, dest, c, bw);
    r.component_ids = part;
    r.note = "src=" + src.str() + ",by=" + rejected_by.str();
    state.demand.archive.append(std::move(r));
    state.demand.user_rejections.push_back(
        UserRejection{now, state.current_term, src, dest, c, rejected_by, std::move(part)});
  }
}

void append_ids(std::vector<DemandId>& into, const std::vector<DemandId>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

bool comes_from(const std::vector<const DemandInput*>& inputs, const BrokerId& b) {
  return std::any_of(inputs.begin(), inputs.end(),
                     [&b](const DemandInput* in) { return in->from == b; });
}

}  // namespace

const char* to_string(AdmissionDecision::Outcome outcome) {
  switch (outcome) {
    case AdmissionDecision::Outcome::kAdmitted: return "admitted";
    case AdmissionDecision::Outcome::kRejected: return "rejected";
    case AdmissionDecision::Outcome::kNoRoute: return "no_route";
    case AdmissionDecision::Outcome::kNoPath: return "no_path";
  }
  return "?";
}

void begin_term(BrokerState& state, TermIndex term) { state.current_term = term; }

void submit_ds(BrokerState& state, const DemandSpec& ds, SimTime now) {
  if (ds.id.empty()) throw Error(ErrorCode::kInvalidArgument, "demand without id");
  if (ds.bandwidth < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative bandwidth in " + ds.id);
  }
  if (ds.src_edge == ds.dest_edge) {
    throw Error(ErrorCode::kInvalidArgument, ds.id + " has src == dest");
  }
  auto att = state.topology->attachment(ds.src_edge);
  if (!att || att->transit != state.domain) {
    throw Error(ErrorCode::kNotLocalSource,
                ds.id + ": " + ds.src_edge.str() + " is not attached to " +
                    state.domain.str());
  }
  if (!state.demand.seen_ids.insert(ds.id).second) {
    throw Error(ErrorCode::kDuplicateId, ds.id);
  }
  DemandInput in;
  in.key = AggregateKey{att->transit_router, ds.dest_edge, ds.service_class};
  in.bandwidth = ds.bandwidth;
  in.component_ids = {ds.id};
  in.arrived_at = now;
  in.arrival_seq = state.demand.next_arrival_seq++;
  state.demand.forward_buffer.push_back(in);
  state.demand.admission_queue.push_back(std::move(in));
  state.demand.sources[ds.id] = std::nullopt;
  state.demand.local_src[ds.id] = ds.src_edge;

  ArchiveRecord r = record(state, now, ArchiveKind::kSubmitted, ds.dest_edge,
                           ds.service_class, ds.bandwidth);
  r.ingress = att->transit_router;
  r.component_ids = {ds.id};
  r.note = "src=" + ds.src_edge.str();
  state.demand.archive.append(std::move(r));
}

void receive_aggregated_ds(BrokerState& state, const BrokerId& from,
                           const AggregatedDs& ds, SimTime now) {
  const Adjacency* adj = state.neighbor(from);
  if (!adj) {
    throw Error(ErrorCode::kInvalidArgument,
                from.str() + " is not a neighbor of " + state.id.str());
  }
  DemandInput in;
  in.key = AggregateKey{adj->local_router, ds.dest_edge, ds.service_class};
  in.bandwidth = ds.bandwidth;
  in.component_ids = ds.component_ids;
  in.from = from;
  in.arrived_at = now;
  in.arrival_seq = state.demand.next_arrival_seq++;
  for (const DemandId& id : ds.component_ids) state.demand.sources[id] = from;
  state.demand.forward_buffer.push_back(in);
  state.demand.admission_queue.push_back(std::move(in));

  ArchiveRecord r = record(state, now, ArchiveKind::kReceived, ds.dest_edge,
                           ds.service_class, ds.bandwidth);
  r.peer = from;
  r.ingress = adj->local_router;
  r.component_ids = ds.component_ids;
  r.note = "term=" + std::to_string(ds.term);
  state.demand.archive.append(std::move(r));
}

Messages mid_cycle(BrokerState& state, SimTime now) {
  struct Group {
    Kbps bandwidth = 0;
    std::vector<DemandId> ids;
    std::vector<const DemandInput*> inputs;
  };
  std::map<AiKey, Group> groups;
  for (const DemandInput& in : state.demand.forward_buffer) {
    Group& g = groups[AiKey{in.key.dest_edge, in.key.service_class}];
    g.bandwidth += in.bandwidth;
    append_ids(g.ids, in.component_ids);
    g.inputs.push_back(&in);
  }

  Messages out;
  std::vector<std::uint64_t> dropped;
  for (const auto& [key, g] : groups) {
    auto hop = find_next_hop(state, key.edge_domain, key.service_class);
    const bool loops = hop && !hop->is_local() && comes_from(g.inputs, hop->broker());
    if (!hop || loops) {
      ArchiveRecord r = record(state, now, ArchiveKind::kRejected, key.edge_domain,
                               key.service_class, g.bandwidth);
      r.component_ids = g.ids;
      r.note = loops ? "loop" : "no_route";
      state.demand.archive.append(std::move(r));
      route_back(state, g.ids, key.edge_domain, key.service_class, g.bandwidth,
                 state.id, now, out);
      for (const DemandInput* in : g.inputs) dropped.push_back(in->arrival_seq);
      continue;
    }
    if (hop->is_local()) continue;

    const Kbps onward = state.forecaster(state.demand.archive, key.edge_domain,
                                         key.service_class, g.bandwidth);
    ArchiveRecord r = record(state, now, ArchiveKind::kForwarded, key.edge_domain,
                             key.service_class, onward);
    r.peer = hop->broker();
    r.component_ids = g.ids;
    state.demand.archive.append(std::move(r));
    out.push_back(InterDomainMessage{
        state.id, hop->broker(),
        AggregatedDs{key.edge_domain, key.service_class, onward, state.current_term,
                     state.id, g.ids}});
  }

  auto& queue = state.demand.admission_queue;
  queue.erase(std::remove_if(queue.begin(), queue.end(),
                             [&dropped](const DemandInput& in) {
                               return std::find(dropped.begin(), dropped.end(),
                                                in.arrival_seq) != dropped.end();
                             }),
              queue.end());
  state.demand.forward_buffer.clear();
  return out;
}

std::vector<LinkId> admission_path(const BrokerState& state, const RouterId& ingress,
                                   const DomainId& dest_edge, const NextHop& hop) {
  const NetworkTopology& topo = *state.topology;
  RouterId egress;
  LinkId out_link;
  if (hop.is_local()) {
    auto att = topo.attachment(dest_edge);
    if (!att || att->transit != state.domain) {
      throw Error(ErrorCode::kNoPath, dest_edge.str() + " is not attached to " +
                                          state.domain.str());
    }
    egress = att->transit_router;
    out_link = att->link;
  } else {
    const Adjacency* adj = state.neighbor(hop.broker());
    if (!adj) {
      throw Error(ErrorCode::kNoPath, hop.broker().str() + " is not adjacent");
    }
    egress = adj->local_router;
    out_link = adj->link;
  }
  std::vector<LinkId> path = intra_path(topo, state.domain, ingress, egress);
  path.push_back(out_link);
  return path;
}

EndOfCycle end_of_cycle(BrokerState& state, SimTime now) {
  // Keys in order of their first arrival; inputs of one key in arrival order.
  std::vector<AggregateKey> order;
  std::map<AggregateKey, std::vector<const DemandInput*>> groups;
  for (const DemandInput& in : state.demand.admission_queue) {
    auto [it, fresh] = groups.try_emplace(in.key);
    if (fresh) order.push_back(in.key);
    it->second.push_back(&in);
  }

  EndOfCycle result;
  for (const AggregateKey& key : order) {
    const auto& inputs = groups.at(key);
    auto hop = find_next_hop(state, key.dest_edge, key.service_class);
    std::optional<AdmissionDecision::Outcome> refused;
    std::vector<LinkId> path;
    if (!hop || (!hop->is_local() && comes_from(inputs, hop->broker()))) {
      refused = AdmissionDecision::Outcome::kNoRoute;
    } else {
      try {
        path = admission_path(state, key.ingress, key.dest_edge, *hop);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoPath) throw;
        refused = AdmissionDecision::Outcome::kNoPath;
      }
    }

    Kbps accepted = 0;
    for (const DemandInput* in : inputs) {
      AdmissionDecision d;
      d.key = key;
      d.bandwidth = in->bandwidth;
      d.target = accepted + in->bandwidth;
      d.component_ids = in->component_ids;
      d.path = path;
      if (refused) {
        d.outcome = *refused;
      } else {
        AdmitResult r = state.ledger.admit(path, key, d.target, state.current_term);
        if (auto* rej = std::get_if<Rejected>(&r)) {
          d.outcome = AdmissionDecision::Outcome::kRejected;
          d.bottleneck = rej->bottleneck;
        } else {
          accepted = d.target;
        }
      }

      const bool ok = d.outcome == AdmissionDecision::Outcome::kAdmitted;
      ArchiveRecord r = record(state, now, ok ? ArchiveKind::kAdmitted : ArchiveKind::kRejected,
                               key.dest_edge, key.service_class, d.bandwidth);
      r.ingress = key.ingress;
      r.peer = in->from;
      r.component_ids = d.component_ids;
      r.note = "target=" + std::to_string(d.target);
      if (!ok) {
        r.note += " " + std::string(to_string(d.outcome));
        if (d.bottleneck) r.note += ":" + d.bottleneck->str();
      }
      state.demand.archive.append(std::move(r));
      if (!ok) {
        route_back(state, d.component_ids, key.dest_edge, key.service_class, d.bandwidth,
                   state.id, now, result.messages);
      }
      result.decisions.push_back(std::move(d));
    }
  }

  result.released = state.ledger.release_stale(state.current_term, state.config.hold_terms);
  for (const AggregateKey& key : result.released) {
    ArchiveRecord r = record(state, now, ArchiveKind::kReleased, key.dest_edge,
                             key.service_class, 0);
    r.ingress = key.ingress;
    state.demand.archive.append(std::move(r));
  }

  state.filters = build_filter_table(state.ledger, [&state](const DomainId& e, ServiceClass c) {
    return find_next_hop(state, e, c);
  });
  state.recent_ledgers.push_back(state.ledger.snapshot());
  if (state.recent_ledgers.size() > 2) {
    state.recent_ledgers.erase(state.recent_ledgers.begin());
  }
  state.demand.admission_queue.clear();
  return result;
}

Messages handle_rejection(BrokerState& state, const BrokerId& from,
                          const RejectionNotice& notice, SimTime now) {
  for (const DemandId& id : notice.component_ids) {
    if (!state.demand.sources.count(id)) {
      throw Error(ErrorCode::kUnknownOrigin,
                  state.id.str() + " never forwarded " + id + " (notice from " +
                      from.str() + ")");
    }
  }
  Messages out;
  route_back(state, notice.component_ids, notice.dest_edge, notice.service_class,
             notice.bandwidth, notice.origin, now, out);
  return out;
}

}  // namespace bbroker
