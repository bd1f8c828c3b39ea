// Centralized best-route computation used to check the distributed protocol.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "bbroker/admission.hpp"
#include "bbroker/broker.hpp"
#include "bbroker/topology.hpp"

namespace bbroker {

struct RouteKey {
  BrokerId broker;
  DomainId edge_domain;
  ServiceClass service_class;

  friend auto operator<=>(const RouteKey&, const RouteKey&) = default;
  friend bool operator==(const RouteKey&, const RouteKey&) = default;
};

struct RouteEntry {
  AvailabilityInfo ai;
  NextHop next_hop = NextHop::local();
};

using RouteTable = std::map<RouteKey, RouteEntry>;

/// Upper bound on transit domains for the exhaustive search.
inline constexpr std::size_t kOracleMaxTransitDomains = 8;

/// Best AI per (broker, edge, class) over every simple domain-level route,
/// folding segment costs with merge_costs and ranking with compare_ai.
/// valid_until is zero in the result. Unreachable pairs are absent. Throws
/// kInvalidArgument above kOracleMaxTransitDomains transit domains.
RouteTable oracle_best_routes(const NetworkTopology& topology);

/// The AI databases of a set of brokers in route table form (valid_until
/// zeroed).
RouteTable route_table_of(const std::map<BrokerId, BrokerState>& brokers);

/// Human-readable differences; integer fields must match exactly, loss
/// within `loss_tolerance`.
std::vector<std::string> diff_route_tables(const RouteTable& expected,
                                           const RouteTable& actual,
                                           double loss_tolerance = 1e-12,
                                           bool compare_next_hop = true);

}  // namespace bbroker
