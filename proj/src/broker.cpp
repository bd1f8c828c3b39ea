#include "bbroker/broker.hpp"

#include <sstream>

namespace bbroker {

const char* to_string(ArchiveKind kind) {
  switch (kind) {
    case ArchiveKind::kSubmitted: return "submitted";
    case ArchiveKind::kReceived: return "received";
    case ArchiveKind::kForwarded: return "forwarded";
    case ArchiveKind::kAdmitted: return "admitted";
    case ArchiveKind::kRejected: return "rejected";
    case ArchiveKind::kNoticeSent: return "notice";
    case ArchiveKind::kUserRejection: return "user_rejection";
    case ArchiveKind::kReleased: return "released";
  }
  return "?";
}

std::string ArchiveRecord::to_line() const {
  std::ostringstream os;
  os << "term=" << term << " time=" << time << " kind=" << to_string(kind)
     << " dest=" << dest_edge << " class=" << service_class.id()
     << " bw_kbps=" << bandwidth << " peer=" << (peer ? peer->str() : "-")
     << " ingress=" << (ingress ? ingress->str() : "-") << " ids=";
  if (component_ids.empty()) os << "-";
  for (std::size_t i = 0; i < component_ids.size(); ++i) {
    os << (i ? "," : "") << component_ids[i];
  }
  if (!note.empty()) os << " note=" << note;
  return os.str();
}

Kbps persistence_forecast(const DemandArchive&, const DomainId&, ServiceClass,
                          Kbps observed) {
  return observed;
}

const Adjacency* BrokerState::neighbor(const BrokerId& broker) const {
  for (const Adjacency& adj : neighbors) {
    if (adj.neighbor_broker == broker) return &adj;
  }
  return nullptr;
}

BrokerState make_broker_state(std::shared_ptr<const NetworkTopology> topology,
                              const DomainId& domain, const BrokerConfig& config,
                              SimTime phase_offset) {
  BrokerState state;
  state.id = topology->broker_of(domain);
  state.domain = domain;
  state.config = config;
  state.clock = TermClock{config.term_length, phase_offset};
  state.neighbors = topology->neighbors(domain);

  std::map<LinkId, Kbps> capacities;
  for (const Link& l : topology->links()) {
    if (l.kind == LinkKind::kIntra && topology->domain_of(l.a) == domain &&
        topology->domain_of(l.b) == domain) {
      capacities[l.id] = l.capacity;
    }
  }
  for (const DomainId& edge : topology->local_edges(domain)) {
    const Link& access = topology->link(topology->attachment(edge)->link);
    capacities[access.id] = access.capacity;
  }
  for (const Adjacency& adj : state.neighbors) {
    capacities[adj.link] = topology->link(adj.link).capacity;
  }
  state.ledger = ReservationLedger(std::move(capacities));
  state.topology = std::move(topology);
  return state;
}

}  // namespace bbroker
