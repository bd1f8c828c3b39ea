#include "generators.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>

#include "bbroker/wire.hpp"

namespace bbtest {

std::string fixture_path(const std::string& name) {
  return std::string(BB_TEST_DATA_DIR) + "/fixtures/" + name;
}

std::string golden_path(const std::string& name) {
  return std::string(BB_TEST_DATA_DIR) + "/golden/" + name;
}

std::shared_ptr<const NetworkTopology> load_fixture(const std::string& name) {
  return std::make_shared<const NetworkTopology>(parse_topology(read_file(fixture_path(name))));
}

TopologyBuilder& TopologyBuilder::transit(const std::string& domain, const std::string& broker) {
  domains_.push_back(Domain{DomainId(domain), DomainKind::kTransit, BrokerId(broker), {}});
  return *this;
}

TopologyBuilder& TopologyBuilder::edge(const std::string& domain, std::vector<int> classes) {
  Domain d{DomainId(domain), DomainKind::kEdge, std::nullopt, {}};
  for (int c : classes) d.classes.emplace_back(c);
  domains_.push_back(std::move(d));
  return *this;
}

TopologyBuilder& TopologyBuilder::router(const std::string& router, const std::string& domain) {
  routers_.push_back(Router{RouterId(router), DomainId(domain)});
  return *this;
}

TopologyBuilder& TopologyBuilder::link(const std::string& id, const std::string& a,
                                       const std::string& b, LinkKind kind, Kbps capacity,
                                       Micros avg, Micros max, LossProb loss, Micros jitter) {
  Link l;
  l.id = LinkId(id);
  l.a = RouterId(a);
  l.b = RouterId(b);
  l.kind = kind;
  l.capacity = capacity;
  l.avg_delay = avg;
  l.max_delay = max;
  l.loss = loss;
  l.jitter = jitter;
  links_.push_back(std::move(l));
  return *this;
}

NetworkTopology TopologyBuilder::build() const { return NetworkTopology(domains_, routers_, links_); }

std::shared_ptr<const NetworkTopology> TopologyBuilder::shared() const {
  return std::make_shared<const NetworkTopology>(build());
}

NetworkTopology random_topology(std::uint64_t seed, const RandomTopologyParams& p) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  auto loss = [&rng]() { return std::uniform_real_distribution<double>(0.0, 0.05)(rng); };

  TopologyBuilder b;
  const int n = static_cast<int>(pick(p.min_transit, p.max_transit));
  std::vector<std::vector<std::string>> routers(n);
  int intra_id = 0;
  for (int i = 0; i < n; ++i) {
    const std::string t = "T" + std::to_string(i);
    b.transit(t, "B" + std::to_string(i));
    const int k = static_cast<int>(pick(1, p.max_routers_per_transit));
    for (int r = 0; r < k; ++r) {
      routers[i].push_back(t + "r" + std::to_string(r));
      b.router(routers[i].back(), t);
    }
    auto intra = [&](const std::string& x, const std::string& y) {
      const std::string id = "I" + std::to_string(intra_id++);
      if (p.cost_free_intra) {
        b.link(id, x, y, LinkKind::kIntra, pick(5'000, 100'000), 0, 0);
      } else {
        const Micros avg = pick(100, 50'000);
        b.link(id, x, y, LinkKind::kIntra, pick(5'000, 100'000), avg, avg + pick(0, 20'000),
               loss() / 10, pick(0, 1'000));
      }
    };
    for (int r = 1; r < k; ++r) intra(routers[i][r - 1], routers[i][r]);
    if (k == 3 && pick(0, 1) == 1) intra(routers[i][0], routers[i][2]);
  }

  std::set<std::pair<int, int>> joined;
  int inter_id = 0;
  auto inter = [&](int x, int y) {
    joined.insert({std::min(x, y), std::max(x, y)});
    const auto& rx = routers[x];
    const auto& ry = routers[y];
    const Micros avg = pick(1'000, 1'000'000);
    b.link("X" + std::to_string(inter_id++), rx[pick(0, rx.size() - 1)],
           ry[pick(0, ry.size() - 1)], LinkKind::kInter, pick(1'000, 100'000), avg,
           avg + pick(0, 500'000), loss(), pick(0, 50'000));
  };
  for (int i = 1; i < n; ++i) inter(i, static_cast<int>(pick(0, i - 1)));
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      if (!joined.count({x, y}) && pick(0, 9) < 3) inter(x, y);
    }
  }

  const int edges = static_cast<int>(pick(p.min_edge, p.max_edge));
  for (int e = 0; e < edges; ++e) {
    const std::string id = "E" + std::to_string(e);
    std::vector<int> pool = {0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> classes(pool.begin(), pool.begin() + pick(p.min_classes, p.max_classes));
    std::sort(classes.begin(), classes.end());
    b.edge(id, classes);
    b.router(id + "r", id);
    const int t = static_cast<int>(pick(0, n - 1));
    const Micros avg = pick(100, 100'000);
    b.link("A" + std::to_string(e), id + "r", routers[t][pick(0, routers[t].size() - 1)],
           LinkKind::kInter, pick(1'000, 100'000), avg, avg + pick(0, 50'000), loss(),
           pick(0, 5'000));
  }
  return b.build();
}

namespace {

NetworkTopology graph_topology(int n, int edges, int classes, bool complete) {
  TopologyBuilder b;
  for (int i = 0; i < n; ++i) {
    const std::string t = "T" + std::to_string(i);
    b.transit(t, "B" + std::to_string(i)).router(t + "r", t);
  }
  int id = 0;
  auto join = [&](int x, int y) {
    const Micros avg = 1'000 + 37 * x + 101 * y;
    b.link("X" + std::to_string(id++), "T" + std::to_string(x) + "r",
           "T" + std::to_string(y) + "r", LinkKind::kInter, 10'000, avg, 2 * avg, 0.001);
  };
  if (complete) {
    for (int x = 0; x < n; ++x) {
      for (int y = x + 1; y < n; ++y) join(x, y);
    }
  } else {
    for (int x = 0; x < n; ++x) join(x, (x + 1) % n);
  }
  std::vector<int> cls;
  for (int c = 0; c < classes; ++c) cls.push_back(c);
  for (int e = 0; e < edges; ++e) {
    const std::string d = "E" + std::to_string(e);
    b.edge(d, cls).router(d + "r", d);
    b.link("A" + std::to_string(e), d + "r", "T0r", LinkKind::kInter, 10'000, 100, 200);
  }
  return b.build();
}

}  // namespace

NetworkTopology ring_topology(int n, int edges, int classes) {
  return graph_topology(n, edges, classes, false);
}

NetworkTopology complete_topology(int n, int edges, int classes) {
  return graph_topology(n, edges, classes, true);
}

RouteTable relaxation_oracle(const NetworkTopology& topology) {
  struct Label {
    AvailabilityInfo ai;
    RouterId anchor;
    NextHop next = NextHop::local();
  };
  RouteTable table;
  for (const DomainId& edge : topology.edge_domains()) {
    const auto att = topology.attachment(edge);
    if (!att) continue;
    for (ServiceClass c : topology.domain(edge).classes) {
      std::map<DomainId, Label> labels;
      AvailabilityInfo seed;
      seed.edge_domain = edge;
      seed.service_class = c;
      seed.bandwidth = std::numeric_limits<Kbps>::max();
      seed.origin_broker = topology.broker_of(att->transit);
      labels[att->transit] = Label{compose(link_cost(topology.link(att->link)), seed),
                                   att->transit_router, NextHop::local()};
      for (bool changed = true; changed;) {
        changed = false;
        for (const DomainId& u : topology.transit_domains()) {
          auto lu = labels.find(u);
          if (lu == labels.end()) continue;
          const Label from = lu->second;
          for (const Adjacency& adj : topology.neighbors(u)) {
            TransitCost cost;
            try {
              cost = domain_transit_cost(topology, u, from.anchor, adj.local_router);
            } catch (const Error&) {
              continue;
            }
            cost = merge_costs(cost, link_cost(topology.link(adj.link)));
            AvailabilityInfo cand = compose(cost, from.ai);
            auto lv = labels.find(adj.neighbor);
            if (lv == labels.end() || compare_ai(cand, lv->second.ai) == AiOrder::kBetter) {
              labels[adj.neighbor] =
                  Label{cand, adj.remote_router, NextHop::via(topology.broker_of(u))};
              changed = true;
            }
          }
        }
      }
      for (const auto& [d, l] : labels) {
        table[RouteKey{topology.broker_of(d), edge, c}] = RouteEntry{l.ai, l.next};
      }
    }
  }
  return table;
}

std::vector<std::vector<LinkId>> all_simple_intra_paths(const NetworkTopology& topology,
                                                        const DomainId& domain,
                                                        const RouterId& from,
                                                        const RouterId& to) {
  std::vector<std::vector<LinkId>> out;
  std::vector<LinkId> path;
  std::set<RouterId> seen{from};
  std::function<void(const RouterId&)> dfs = [&](const RouterId& at) {
    if (at == to) {
      out.push_back(path);
      return;
    }
    for (const Link* l : topology.links_at(at)) {
      if (l->kind != LinkKind::kIntra) continue;
      const RouterId& next = l->other_end(at);
      if (topology.domain_of(next) != domain || seen.count(next)) continue;
      seen.insert(next);
      path.push_back(l->id);
      dfs(next);
      path.pop_back();
      seen.erase(next);
    }
  };
  dfs(from);
  return out;
}

int transit_diameter(const NetworkTopology& topology) {
  int best = 0;
  for (const DomainId& s : topology.transit_domains()) {
    std::map<DomainId, int> dist{{s, 0}};
    std::deque<DomainId> q{s};
    while (!q.empty()) {
      DomainId u = q.front();
      q.pop_front();
      for (const Adjacency& a : topology.neighbors(u)) {
        if (dist.emplace(a.neighbor, dist[u] + 1).second) q.push_back(a.neighbor);
      }
    }
    for (const auto& [d, k] : dist) best = std::max(best, k);
  }
  return best;
}

}  // namespace bbtest
