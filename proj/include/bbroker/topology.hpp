// Immutable multi-domain network model.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbroker/qos.hpp"
#include "bbroker/types.hpp"

namespace bbroker {

enum class DomainKind { kTransit, kEdge };
enum class LinkKind { kIntra, kInter };

const char* to_string(DomainKind kind);
const char* to_string(LinkKind kind);

struct Domain {
  DomainId id;
  DomainKind kind = DomainKind::kTransit;
  /// Set for transit domains only.
  std::optional<BrokerId> broker;
  /// Classes an edge domain advertises. Empty for transit domains.
  std::vector<ServiceClass> classes;
};

struct Router {
  RouterId id;
  DomainId domain;
};

struct Link {
  LinkId id;
  RouterId a;
  RouterId b;
  Kbps capacity = 0;
  Micros avg_delay = 0;
  Micros max_delay = 0;
  Micros jitter = 0;
  LossProb loss = 0.0;
  LinkKind kind = LinkKind::kIntra;

  const RouterId& other_end(const RouterId& r) const { return r == a ? b : a; }
};

/// A transit-to-transit adjacency as seen from one side.
struct Adjacency {
  DomainId neighbor;
  BrokerId neighbor_broker;
  LinkId link;
  RouterId local_router;
  RouterId remote_router;
};

/// Where an edge domain hangs off its transit domain.
struct Attachment {
  DomainId edge;
  DomainId transit;
  LinkId link;
  RouterId transit_router;
  RouterId edge_router;
};

struct Violation {
  std::string subject;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

class NetworkTopology {
 public:
  NetworkTopology() = default;
  NetworkTopology(std::vector<Domain> domains, std::vector<Router> routers,
                  std::vector<Link> links);

  const std::vector<Domain>& domains() const { return domains_; }
  const std::vector<Router>& routers() const { return routers_; }
  const std::vector<Link>& links() const { return links_; }

  const Domain* find_domain(const DomainId& id) const;
  const Router* find_router(const RouterId& id) const;
  const Link* find_link(const LinkId& id) const;

  /// Throw ErrorCode::kInvalidArgument for unknown ids.
  const Domain& domain(const DomainId& id) const;
  const Link& link(const LinkId& id) const;
  const DomainId& domain_of(const RouterId& router) const;
  const DomainId& domain_of_broker(const BrokerId& broker) const;
  const BrokerId& broker_of(const DomainId& transit) const;

  /// Sorted by id.
  std::vector<DomainId> transit_domains() const;
  std::vector<DomainId> edge_domains() const;
  std::vector<BrokerId> brokers() const;

  /// Links incident to a router, in LinkId order.
  std::vector<const Link*> links_at(const RouterId& router) const;

  /// Transit neighbors of a transit domain, ordered by neighbor broker id.
  std::vector<Adjacency> neighbors(const DomainId& transit) const;
  std::optional<Adjacency> adjacency(const DomainId& from,
                                     const DomainId& to) const;

  std::optional<Attachment> attachment(const DomainId& edge) const;
  /// Edge domains attached to a transit domain, sorted by id.
  std::vector<DomainId> local_edges(const DomainId& transit) const;

 private:
  std::vector<Domain> domains_;
  std::vector<Router> routers_;
  std::vector<Link> links_;

  std::map<DomainId, std::size_t> domain_index_;
  std::map<RouterId, std::size_t> router_index_;
  std::map<LinkId, std::size_t> link_index_;
  std::map<BrokerId, DomainId> broker_domain_;
  std::map<RouterId, std::vector<std::size_t>> incident_;
};

/// Lists every broken invariant; an empty result means the topology is
/// usable. Never throws.
std::vector<Violation> validate(const NetworkTopology& topology);

/// Hop-minimal simple path over intra links of `domain`. Among equal-length
/// paths the lexicographically smallest LinkId sequence wins. Throws
/// ErrorCode::kNoPath when the routers are disconnected inside the domain.
std::vector<LinkId> intra_path(const NetworkTopology& topology,
                               const DomainId& domain, const RouterId& ingress,
                               const RouterId& egress);

TransitCost link_cost(const Link& link);

/// Folds link costs along a path.
TransitCost path_cost(const NetworkTopology& topology,
                      const std::vector<LinkId>& path);

TransitCost domain_transit_cost(const NetworkTopology& topology,
                                const DomainId& domain,
                                const RouterId& ingress,
                                const RouterId& egress);

}  // namespace bbroker
