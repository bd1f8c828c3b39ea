// Scenario description driving a simulation run.

#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "bbroker/topology.hpp"

namespace bbroker {

/// A demand re-issued by `src` at the beginning of every term while active.
struct StandingDemand {
  DomainId src_edge;
  DomainId dest_edge;
  ServiceClass service_class;
  Kbps bandwidth = 0;

  friend bool operator==(const StandingDemand&, const StandingDemand&) = default;
};

struct ScenarioAction {
  enum class Kind {
    kJoin,      // broker stands up and bootstraps
    kBlackout,  // broker goes silent: no refresh, no processing
    kDemand,    // sets a standing demand; bandwidth 0 removes it
    kFault,     // writes an unchecked reservation into a broker's ledger
  };
  SimTime time = 0;
  Kind kind = Kind::kJoin;
  BrokerId broker;
  StandingDemand demand;
  LinkId link;
  Kbps amount = 0;
  /// Source line in the scenario file; 0 when built in code.
  int line = 0;

  friend bool operator==(const ScenarioAction&, const ScenarioAction&) = default;
};

const char* to_string(ScenarioAction::Kind kind);

struct Scenario {
  SimTime term_length = 1'000'000;
  /// Inter-broker message latency; defaults to term_length / 10.
  std::optional<SimTime> latency;
  /// Symmetric per broker pair overrides.
  std::map<std::pair<BrokerId, BrokerId>, SimTime> pair_latency;
  /// Defaults to one term. Zero disables refresh and expiry.
  std::optional<SimTime> refresh_interval;
  /// Defaults to three refresh intervals.
  std::optional<SimTime> validity_window;
  int hold_terms = 2;
  /// Explicit phase offsets; other brokers draw theirs from the run seed.
  std::map<BrokerId, SimTime> phase_offsets;
  std::vector<StandingDemand> demands;
  std::vector<ScenarioAction> actions;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Violations of the scenario's own invariants against a topology; each
/// names the offending action (and its line when known). Action times are
/// checked against `horizon` when given.
std::vector<Violation> validate_scenario(const Scenario& scenario,
                                         const NetworkTopology& topology,
                                         std::optional<SimTime> horizon = std::nullopt);

}  // namespace bbroker
