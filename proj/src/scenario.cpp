#include "bbroker/scenario.hpp"

#include <algorithm>

namespace bbroker {

const char* to_string(ScenarioAction::Kind kind) {
  switch (kind) {
    case ScenarioAction::Kind::kJoin: return "join";
    case ScenarioAction::Kind::kBlackout: return "blackout";
    case ScenarioAction::Kind::kDemand: return "demand";
    case ScenarioAction::Kind::kFault: return "fault";
  }
  return "?";
}

namespace {

std::string subject_of(const ScenarioAction& a, std::size_t index) {
  std::string s = "action " + std::to_string(index) + " (" + to_string(a.kind) +
                  " at " + std::to_string(a.time);
  if (a.line > 0) s += ", line " + std::to_string(a.line);
  return s + ")";
}

void check_demand(const StandingDemand& d, const NetworkTopology& topo, bool allow_zero,
                  const std::string& subject, std::vector<Violation>& out) {
  const Domain* src = topo.find_domain(d.src_edge);
  const Domain* dest = topo.find_domain(d.dest_edge);
  if (!src || src->kind != DomainKind::kEdge) {
    out.push_back({subject, "unknown source edge domain " + d.src_edge.str()});
  } else if (!topo.attachment(d.src_edge)) {
    out.push_back({subject, "source edge domain " + d.src_edge.str() + " is not attached"});
  }
  if (!dest || dest->kind != DomainKind::kEdge) {
    out.push_back({subject, "unknown destination edge domain " + d.dest_edge.str()});
  } else if (std::find(dest->classes.begin(), dest->classes.end(), d.service_class) ==
             dest->classes.end()) {
    out.push_back({subject, d.dest_edge.str() + " does not offer class " +
                                std::to_string(d.service_class.id())});
  }
  if (d.src_edge == d.dest_edge) {
    out.push_back({subject, "source equals destination " + d.src_edge.str()});
  }
  if (d.bandwidth < 0 || (!allow_zero && d.bandwidth == 0)) {
    out.push_back({subject, "bandwidth " + std::to_string(d.bandwidth) + " out of range"});
  }
}

bool is_broker(const NetworkTopology& topo, const BrokerId& b) {
  const auto all = topo.brokers();
  return std::binary_search(all.begin(), all.end(), b);
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& scenario,
                                         const NetworkTopology& topology,
                                         std::optional<SimTime> horizon) {
  std::vector<Violation> out;
  if (scenario.term_length <= 0) {
    out.push_back({"term_length", "must be positive"});
  }
  if (scenario.latency && *scenario.latency < 0) {
    out.push_back({"latency", "must be non-negative"});
  }
  if (scenario.refresh_interval && *scenario.refresh_interval < 0) {
    out.push_back({"refresh_interval", "must be non-negative"});
  }
  if (scenario.validity_window && *scenario.validity_window <= 0) {
    out.push_back({"validity_window", "must be positive"});
  }
  if (scenario.hold_terms < 0) {
    out.push_back({"hold_terms", "must be non-negative"});
  }
  for (const auto& [pair, lat] : scenario.pair_latency) {
    const std::string subject = "link_latency " + pair.first.str() + " " + pair.second.str();
    for (const BrokerId& b : {pair.first, pair.second}) {
      if (!is_broker(topology, b)) out.push_back({subject, "unknown broker " + b.str()});
    }
    if (lat < 0) out.push_back({subject, "must be non-negative"});
  }
  for (const auto& [b, off] : scenario.phase_offsets) {
    const std::string subject = "phase " + b.str();
    if (!is_broker(topology, b)) out.push_back({subject, "unknown broker " + b.str()});
    if (off < 0 || (scenario.term_length > 0 && off >= scenario.term_length)) {
      out.push_back({subject, "offset " + std::to_string(off) + " outside [0, term_length)"});
    }
  }
  for (std::size_t i = 0; i < scenario.demands.size(); ++i) {
    check_demand(scenario.demands[i], topology, false, "demand " + std::to_string(i), out);
  }
  for (std::size_t i = 0; i < scenario.actions.size(); ++i) {
    const ScenarioAction& a = scenario.actions[i];
    const std::string subject = subject_of(a, i);
    if (a.time < 0 || (horizon && a.time > *horizon)) {
      out.push_back({subject, "time outside the run horizon"});
    }
    switch (a.kind) {
      case ScenarioAction::Kind::kJoin:
      case ScenarioAction::Kind::kBlackout:
        if (!is_broker(topology, a.broker)) {
          out.push_back({subject, "unknown broker " + a.broker.str()});
        }
        break;
      case ScenarioAction::Kind::kDemand:
        check_demand(a.demand, topology, true, subject, out);
        break;
      case ScenarioAction::Kind::kFault: {
        if (!is_broker(topology, a.broker)) {
          out.push_back({subject, "unknown broker " + a.broker.str()});
          break;
        }
        if (!topology.find_link(a.link)) {
          out.push_back({subject, "unknown link " + a.link.str()});
        }
        if (a.amount <= 0) out.push_back({subject, "amount must be positive"});
        break;
      }
    }
  }
  return out;
}

}  // namespace bbroker
