#include "bbroker/oracle.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace bbroker {

namespace {

struct Search {
  const NetworkTopology& topo;
  const DomainId& edge;
  ServiceClass service_class;
  AvailabilityInfo seed;
  RouteTable& table;

  void offer(const DomainId& domain, const TransitCost& cost, const NextHop& hop) {
    AvailabilityInfo candidate = compose(cost, seed);
    RouteKey key{topo.broker_of(domain), edge, service_class};
    auto it = table.find(key);
    if (it == table.end() ||
        compare_ai(candidate, it->second.ai) == AiOrder::kBetter) {
      table[key] = RouteEntry{candidate, hop};
    }
  }

  // `cost` runs from the edge domain up to `anchor` inside `domain`.
  void walk(const DomainId& domain, const RouterId& anchor, const TransitCost& cost,
            const NextHop& hop, std::set<DomainId>& visited) {
    offer(domain, cost, hop);
    for (const Adjacency& adj : topo.neighbors(domain)) {
      if (visited.count(adj.neighbor)) continue;
      TransitCost segment;
      try {
        segment = domain_transit_cost(topo, domain, anchor, adj.local_router);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoPath) throw;
        continue;
      }
      segment = merge_costs(segment, link_cost(topo.link(adj.link)));
      visited.insert(adj.neighbor);
      walk(adj.neighbor, adj.remote_router, merge_costs(cost, segment),
           NextHop::via(topo.broker_of(domain)), visited);
      visited.erase(adj.neighbor);
    }
  }
};

}  // namespace

RouteTable oracle_best_routes(const NetworkTopology& topology) {
  if (topology.transit_domains().size() > kOracleMaxTransitDomains) {
    throw Error(ErrorCode::kInvalidArgument,
                "exhaustive oracle limited to " +
                    std::to_string(kOracleMaxTransitDomains) + " transit domains");
  }
  RouteTable table;
  for (const DomainId& edge : topology.edge_domains()) {
    auto att = topology.attachment(edge);
    if (!att) continue;
    const Domain* home = topology.find_domain(att->transit);
    if (!home || home->kind != DomainKind::kTransit) continue;
    const BrokerId& origin = topology.broker_of(att->transit);
    for (ServiceClass c : topology.domain(edge).classes) {
      Search search{topology, edge, c, origin_ai(edge, c, origin, 0), table};
      std::set<DomainId> visited{att->transit};
      search.walk(att->transit, att->transit_router,
                  link_cost(topology.link(att->link)), NextHop::local(), visited);
    }
  }
  return table;
}

RouteTable route_table_of(const std::map<BrokerId, BrokerState>& brokers) {
  RouteTable table;
  for (const auto& [id, state] : brokers) {
    for (const auto& [key, stored] : state.ai_db) {
      AvailabilityInfo ai = stored.ai;
      ai.valid_until = 0;
      table[RouteKey{id, key.edge_domain, key.service_class}] =
          RouteEntry{ai, stored.learned_from ? NextHop::via(*stored.learned_from)
                                             : NextHop::local()};
    }
  }
  return table;
}

namespace {

std::string describe(const RouteKey& k) {
  return k.broker.str() + " " + k.edge_domain.str() + "/c" +
         std::to_string(k.service_class.id());
}

}  // namespace

std::vector<std::string> diff_route_tables(const RouteTable& expected,
                                           const RouteTable& actual,
                                           double loss_tolerance,
                                           bool compare_next_hop) {
  std::vector<std::string> out;
  for (const auto& [key, want] : expected) {
    auto it = actual.find(key);
    if (it == actual.end()) {
      out.push_back(describe(key) + ": missing");
      continue;
    }
    const AvailabilityInfo& a = want.ai;
    const AvailabilityInfo& b = it->second.ai;
    std::ostringstream os;
    if (a.bandwidth != b.bandwidth) os << " bw " << a.bandwidth << "!=" << b.bandwidth;
    if (a.avg_delay != b.avg_delay) os << " avg " << a.avg_delay << "!=" << b.avg_delay;
    if (a.max_delay != b.max_delay) os << " max " << a.max_delay << "!=" << b.max_delay;
    if (a.jitter != b.jitter) os << " jitter " << a.jitter << "!=" << b.jitter;
    if (!(std::fabs(a.loss - b.loss) <= loss_tolerance)) {
      os << " loss " << a.loss << "!=" << b.loss;
    }
    if (a.origin_broker != b.origin_broker) {
      os << " origin " << a.origin_broker << "!=" << b.origin_broker;
    }
    if (compare_next_hop && !(want.next_hop == it->second.next_hop)) {
      os << " next " << want.next_hop.str() << "!=" << it->second.next_hop.str();
    }
    if (!os.str().empty()) out.push_back(describe(key) + ":" + os.str());
  }
  for (const auto& [key, have] : actual) {
    if (!expected.count(key)) out.push_back(describe(key) + ": unexpected");
  }
  return out;
}

}  // namespace bbroker
