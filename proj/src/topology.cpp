#include "bbroker/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace bbroker {

const char* to_string(DomainKind kind) {
  return kind == DomainKind::kTransit ? "transit" : "edge";
}

const char* to_string(LinkKind kind) {
  return kind == LinkKind::kIntra ? "intra" : "inter";
}

NetworkTopology::NetworkTopology(std::vector<Domain> domains,
                                 std::vector<Router> routers,
                                 std::vector<Link> links)
    : domains_(std::move(domains)),
      routers_(std::move(routers)),
      links_(std::move(links)) {
  // First occurrence wins; validate() reports the duplicates.
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    domain_index_.emplace(domains_[i].id, i);
    if (domains_[i].broker) {
      broker_domain_.emplace(*domains_[i].broker, domains_[i].id);
    }
  }
  for (std::size_t i = 0; i < routers_.size(); ++i) {
    router_index_.emplace(routers_[i].id, i);
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (!link_index_.emplace(links_[i].id, i).second) continue;
    incident_[links_[i].a].push_back(i);
    if (links_[i].b != links_[i].a) incident_[links_[i].b].push_back(i);
  }
  for (auto& [router, idx] : incident_) {
    std::sort(idx.begin(), idx.end(), [this](std::size_t x, std::size_t y) {
      return links_[x].id < links_[y].id;
    });
  }
}

const Domain* NetworkTopology::find_domain(const DomainId& id) const {
  auto it = domain_index_.find(id);
  return it == domain_index_.end() ? nullptr : &domains_[it->second];
}

const Router* NetworkTopology::find_router(const RouterId& id) const {
  auto it = router_index_.find(id);
  return it == router_index_.end() ? nullptr : &routers_[it->second];
}

const Link* NetworkTopology::find_link(const LinkId& id) const {
  auto it = link_index_.find(id);
  return it == link_index_.end() ? nullptr : &links_[it->second];
}

const Domain& NetworkTopology::domain(const DomainId& id) const {
  const Domain* d = find_domain(id);
  if (!d) throw Error(ErrorCode::kInvalidArgument, "unknown domain " + id.str());
  return *d;
}

const Link& NetworkTopology::link(const LinkId& id) const {
  const Link* l = find_link(id);
  if (!l) throw Error(ErrorCode::kUnknownLink, "unknown link " + id.str());
  return *l;
}

const DomainId& NetworkTopology::domain_of(const RouterId& router) const {
  const Router* r = find_router(router);
  if (!r) {
    throw Error(ErrorCode::kInvalidArgument, "unknown router " + router.str());
  }
  return r->domain;
}

const DomainId& NetworkTopology::domain_of_broker(const BrokerId& broker) const {
  auto it = broker_domain_.find(broker);
  if (it == broker_domain_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown broker " + broker.str());
  }
  return it->second;
}

const BrokerId& NetworkTopology::broker_of(const DomainId& transit) const {
  const Domain& d = domain(transit);
  if (!d.broker) {
    throw Error(ErrorCode::kInvalidArgument,
                "domain " + transit.str() + " has no broker");
  }
  return *d.broker;
}

std::vector<DomainId> NetworkTopology::transit_domains() const {
  std::vector<DomainId> out;
  for (const auto& [id, idx] : domain_index_) {
    if (domains_[idx].kind == DomainKind::kTransit) out.push_back(id);
  }
  return out;
}

std::vector<DomainId> NetworkTopology::edge_domains() const {
  std::vector<DomainId> out;
  for (const auto& [id, idx] : domain_index_) {
    if (domains_[idx].kind == DomainKind::kEdge) out.push_back(id);
  }
  return out;
}

std::vector<BrokerId> NetworkTopology::brokers() const {
  std::vector<BrokerId> out;
  for (const auto& [broker, domain] : broker_domain_) out.push_back(broker);
  return out;
}

std::vector<const Link*> NetworkTopology::links_at(const RouterId& router) const {
  std::vector<const Link*> out;
  auto it = incident_.find(router);
  if (it == incident_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t idx : it->second) out.push_back(&links_[idx]);
  return out;
}

std::vector<Adjacency> NetworkTopology::neighbors(const DomainId& transit) const {
  std::vector<Adjacency> out;
  for (const Link& l : links_) {
    if (l.kind != LinkKind::kInter) continue;
    const Router* ra = find_router(l.a);
    const Router* rb = find_router(l.b);
    if (!ra || !rb) continue;
    const Router* local = nullptr;
    const Router* remote = nullptr;
    if (ra->domain == transit && rb->domain != transit) {
      local = ra;
      remote = rb;
    } else if (rb->domain == transit && ra->domain != transit) {
      local = rb;
      remote = ra;
    } else {
      continue;
    }
    const Domain* other = find_domain(remote->domain);
    if (!other || other->kind != DomainKind::kTransit || !other->broker) continue;
    out.push_back({other->id, *other->broker, l.id, local->id, remote->id});
  }
  std::sort(out.begin(), out.end(), [](const Adjacency& x, const Adjacency& y) {
    if (x.neighbor_broker != y.neighbor_broker) {
      return x.neighbor_broker < y.neighbor_broker;
    }
    return x.link < y.link;
  });
  return out;
}

std::optional<Adjacency> NetworkTopology::adjacency(const DomainId& from,
                                                    const DomainId& to) const {
  for (const Adjacency& adj : neighbors(from)) {
    if (adj.neighbor == to) return adj;
  }
  return std::nullopt;
}

std::optional<Attachment> NetworkTopology::attachment(const DomainId& edge) const {
  const Domain* d = find_domain(edge);
  if (!d || d->kind != DomainKind::kEdge) return std::nullopt;
  for (const Link& l : links_) {
    if (l.kind != LinkKind::kInter) continue;
    const Router* ra = find_router(l.a);
    const Router* rb = find_router(l.b);
    if (!ra || !rb) continue;
    if (ra->domain == edge && rb->domain != edge) {
      return Attachment{edge, rb->domain, l.id, rb->id, ra->id};
    }
    if (rb->domain == edge && ra->domain != edge) {
      return Attachment{edge, ra->domain, l.id, ra->id, rb->id};
    }
  }
  return std::nullopt;
}

std::vector<DomainId> NetworkTopology::local_edges(const DomainId& transit) const {
  std::vector<DomainId> out;
  for (const DomainId& e : edge_domains()) {
    auto att = attachment(e);
    if (att && att->transit == transit) out.push_back(e);
  }
  return out;
}

namespace {

std::string component_list(const std::vector<std::set<DomainId>>& comps) {
  std::ostringstream os;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    os << (i ? " " : "") << "{";
    bool first = true;
    for (const DomainId& d : comps[i]) {
      os << (first ? "" : ",") << d;
      first = false;
    }
    os << "}";
  }
  return os.str();
}

}  // namespace

std::vector<Violation> validate(const NetworkTopology& topology) {
  std::vector<Violation> out;
  auto report = [&out](std::string subject, std::string message) {
    out.push_back({std::move(subject), std::move(message)});
  };

  std::set<DomainId> domain_ids;
  std::set<BrokerId> broker_ids;
  for (const Domain& d : topology.domains()) {
    if (d.id.empty()) report("<domain>", "empty domain id");
    if (!domain_ids.insert(d.id).second) report(d.id.str(), "duplicate domain id");
    if (d.kind == DomainKind::kTransit) {
      if (!d.broker || d.broker->empty()) {
        report(d.id.str(), "transit domain without a broker");
      } else if (!broker_ids.insert(*d.broker).second) {
        report(d.broker->str(), "broker manages more than one domain");
      }
    } else {
      if (d.broker) report(d.id.str(), "edge domain must not have a broker");
      if (d.classes.empty()) report(d.id.str(), "edge domain advertises no class");
      std::set<ServiceClass> seen(d.classes.begin(), d.classes.end());
      if (seen.size() != d.classes.size()) {
        report(d.id.str(), "edge domain lists a class twice");
      }
    }
  }

  std::map<RouterId, DomainId> router_home;
  std::map<DomainId, int> router_count;
  for (const Router& r : topology.routers()) {
    if (r.id.empty()) report("<router>", "empty router id");
    auto [it, fresh] = router_home.emplace(r.id, r.domain);
    if (!fresh) {
      report(r.id.str(), it->second == r.domain ? "duplicate router id"
                                                : "router in multiple domains");
      continue;
    }
    if (!topology.find_domain(r.domain)) {
      report(r.id.str(), "router belongs to unknown domain " + r.domain.str());
    }
    ++router_count[r.domain];
  }

  std::set<LinkId> link_ids;
  std::map<DomainId, int> edge_links;
  std::set<std::pair<DomainId, DomainId>> transit_pairs;
  for (const Link& l : topology.links()) {
    const std::string subject = l.id.str();
    if (l.id.empty()) report("<link>", "empty link id");
    if (!link_ids.insert(l.id).second) {
      report(subject, "duplicate link id");
      continue;
    }
    if (l.capacity < 0) report(subject, "negative capacity");
    if (l.avg_delay < 0 || l.max_delay < 0 || l.jitter < 0) {
      report(subject, "negative delay");
    }
    if (l.avg_delay > l.max_delay) report(subject, "avg_delay exceeds max_delay");
    if (!(l.loss >= 0.0 && l.loss <= 1.0)) report(subject, "loss outside [0,1]");
    if (l.a == l.b) report(subject, "self loop");

    auto ha = router_home.find(l.a);
    auto hb = router_home.find(l.b);
    if (ha == router_home.end() || hb == router_home.end()) {
      report(subject, "endpoint router unknown");
      continue;
    }
    const Domain* da = topology.find_domain(ha->second);
    const Domain* db = topology.find_domain(hb->second);
    if (!da || !db) continue;
    if (l.kind == LinkKind::kIntra) {
      if (da->id != db->id) report(subject, "intra link crosses domains");
      if (da->kind == DomainKind::kEdge) {
        report(subject, "edge domains have no internal links");
      }
    } else {
      if (da->id == db->id) {
        report(subject, "inter link inside one domain");
        continue;
      }
      if (da->kind == DomainKind::kEdge && db->kind == DomainKind::kEdge) {
        report(subject, "inter link joins two edge domains");
      }
      if (da->kind == DomainKind::kEdge) ++edge_links[da->id];
      if (db->kind == DomainKind::kEdge) ++edge_links[db->id];
      if (da->kind == DomainKind::kTransit && db->kind == DomainKind::kTransit) {
        auto key = std::minmax(da->id, db->id);
        if (!transit_pairs.emplace(key.first, key.second).second) {
          report(subject, "second inter link between " + key.first.str() +
                              " and " + key.second.str());
        }
      }
    }
  }

  for (const Domain& d : topology.domains()) {
    if (d.kind != DomainKind::kEdge) {
      if (router_count[d.id] == 0) report(d.id.str(), "transit domain without routers");
      continue;
    }
    if (router_count[d.id] != 1) {
      report(d.id.str(), "edge domain must have exactly one router");
    }
    if (edge_links[d.id] != 1) {
      report(d.id.str(), "edge domain must have exactly one inter link");
    }
  }

  // Domain-level connectivity over inter links.
  std::map<DomainId, std::set<DomainId>> graph;
  for (const Domain& d : topology.domains()) graph[d.id];
  for (const Link& l : topology.links()) {
    if (l.kind != LinkKind::kInter) continue;
    auto ha = router_home.find(l.a);
    auto hb = router_home.find(l.b);
    if (ha == router_home.end() || hb == router_home.end()) continue;
    if (!graph.count(ha->second) || !graph.count(hb->second)) continue;
    graph[ha->second].insert(hb->second);
    graph[hb->second].insert(ha->second);
  }
  std::vector<std::set<DomainId>> components;
  std::set<DomainId> visited;
  for (const auto& [start, adj] : graph) {
    if (visited.count(start)) continue;
    std::set<DomainId> comp;
    std::deque<DomainId> queue{start};
    visited.insert(start);
    while (!queue.empty()) {
      DomainId cur = queue.front();
      queue.pop_front();
      comp.insert(cur);
      for (const DomainId& nb : graph[cur]) {
        if (visited.insert(nb).second) queue.push_back(nb);
      }
    }
    components.push_back(std::move(comp));
  }
  if (components.size() > 1) {
    report("<network>", "partitioned into " + std::to_string(components.size()) +
                            " components: " + component_list(components));
  }
  return out;
}

std::vector<LinkId> intra_path(const NetworkTopology& topology,
                               const DomainId& domain, const RouterId& ingress,
                               const RouterId& egress) {
  if (topology.domain_of(ingress) != domain || topology.domain_of(egress) != domain) {
    throw Error(ErrorCode::kInvalidArgument,
                "routers " + ingress.str() + "," + egress.str() +
                    " are not both in " + domain.str());
  }
  if (ingress == egress) return {};

  auto usable = [&](const Link* l) {
    return l->kind == LinkKind::kIntra &&
           topology.domain_of(l->a) == domain &&
           topology.domain_of(l->b) == domain;
  };

  // Hop distance to the egress, then a greedy walk picking the smallest
  // LinkId that stays on a shortest path. Every continuation from a
  // shortest-path successor has the same length, so the greedy choice yields
  // the lexicographically smallest sequence.
  std::map<RouterId, int> dist{{egress, 0}};
  std::deque<RouterId> queue{egress};
  while (!queue.empty()) {
    RouterId cur = queue.front();
    queue.pop_front();
    for (const Link* l : topology.links_at(cur)) {
      if (!usable(l)) continue;
      const RouterId& nb = l->other_end(cur);
      if (dist.emplace(nb, dist[cur] + 1).second) queue.push_back(nb);
    }
  }
  if (!dist.count(ingress)) {
    throw Error(ErrorCode::kNoPath, "no path " + ingress.str() + " -> " +
                                        egress.str() + " inside " + domain.str());
  }

  std::vector<LinkId> path;
  RouterId cur = ingress;
  while (cur != egress) {
    const int want = dist[cur] - 1;
    const Link* best = nullptr;
    for (const Link* l : topology.links_at(cur)) {
      if (!usable(l)) continue;
      auto it = dist.find(l->other_end(cur));
      if (it == dist.end() || it->second != want) continue;
      if (!best || l->id < best->id) best = l;
    }
    path.push_back(best->id);
    cur = best->other_end(cur);
  }
  return path;
}

TransitCost link_cost(const Link& link) {
  TransitCost t;
  t.avg_delay = link.avg_delay;
  t.max_delay = link.max_delay;
  t.jitter = link.jitter;
  t.bottleneck = Bottleneck::of(link.capacity);
  t.loss = link.loss;
  return t;
}

TransitCost path_cost(const NetworkTopology& topology,
                      const std::vector<LinkId>& path) {
  TransitCost total = TransitCost::identity();
  for (const LinkId& id : path) {
    total = merge_costs(total, link_cost(topology.link(id)));
  }
  return total;
}

TransitCost domain_transit_cost(const NetworkTopology& topology,
                                const DomainId& domain, const RouterId& ingress,
                                const RouterId& egress) {
  return path_cost(topology, intra_path(topology, domain, ingress, egress));
}

}  // namespace bbroker
