// Deterministic discrete-event engine owning every broker of a run.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bbroker/broker.hpp"
#include "bbroker/demand_cycle.hpp"
#include "bbroker/scenario.hpp"
#include "bbroker/topology.hpp"

namespace bbroker {

enum class PhaseKind { kBegin, kMid, kEnd };

const char* to_string(PhaseKind phase);

struct Event {
  enum class Kind { kBootstrap, kDeliver, kPhase, kRefresh, kExpiry, kAction };

  SimTime time = 0;
  std::uint64_t seq = 0;
  Kind kind = Kind::kPhase;
  /// Target broker; the receiver for deliveries.
  BrokerId broker;
  PhaseKind phase = PhaseKind::kBegin;
  TermIndex term = 0;
  InterDomainMessage message;
  std::size_t action_index = 0;
  /// Liveness generation of the target broker when the timer was armed.
  std::uint64_t epoch = 0;
};

const char* to_string(Event::Kind kind);

struct RunOptions {
  std::uint64_t seed = 0;
  TermIndex terms = 10;
  /// Invariants after every event instead of at term boundaries only.
  bool checked = false;
  bool stop_at_quiescence = false;
  bool keep_trace_lines = false;
  /// Brokers bootstrapped at time 0. Empty: every broker that starts up.
  std::optional<std::set<BrokerId>> bootstrappers;
};

using MessageCounts = std::array<std::uint64_t, kMessageKinds>;

/// One row per (broker, term), written at the broker's end-of-cycle.
struct MetricsRow {
  TermIndex term = 0;
  BrokerId broker;
  SimTime time = 0;
  MessageCounts sent{};
  std::size_t ai_db_size = 0;
  std::map<int, Kbps> admitted_by_class;
  std::map<int, Kbps> rejected_by_class;
  std::map<LinkId, double> utilization;
  bool stable = false;
};

struct RunResult {
  std::uint64_t trace_hash = 0;
  std::vector<std::string> trace_lines;
  std::uint64_t events = 0;
  SimTime end_time = 0;
  std::vector<MetricsRow> metrics;
  std::map<BrokerId, BrokerState> brokers;
  std::set<BrokerId> down;
  MessageCounts total_sent{};
  bool quiescent = false;
  /// Non-empty when an invariant failed; the run stopped at `violation_event`.
  std::vector<std::string> violations;
  std::optional<std::uint64_t> violation_event;
};

/// True iff no AI protocol message is in flight and every broker's last two
/// end-of-term ledgers are identical.
bool check_quiescence(const std::map<BrokerId, BrokerState>& states,
                      std::size_t availability_in_flight);

/// Per-broker ledger conservation and AI database consistency.
std::vector<std::string> assert_invariants(const std::map<BrokerId, BrokerState>& states);

/// Empty when the broker's ledger equals the fold of its own decision log.
std::optional<std::string> check_ledger_replay(const BrokerState& state);

/// FNV-1a 64 over trace lines, each terminated by a newline.
class TraceHasher {
 public:
  void add(const std::string& line);
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

class Simulator {
 public:
  using Observer = std::function<void(const Event&, const Simulator&)>;

  /// Throws kScenarioError when the scenario does not fit the topology and
  /// kValidationError when the topology is invalid.
  Simulator(std::shared_ptr<const NetworkTopology> topology, Scenario scenario,
            RunOptions options);

  /// Processes the next event. False once the queue is exhausted, the
  /// horizon is passed, an invariant failed, or the run stopped at
  /// quiescence.
  bool step();
  void run_until(SimTime t);
  RunResult run();
  RunResult result() const;

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  SimTime now() const { return now_; }
  SimTime horizon() const { return horizon_; }
  std::uint64_t events_processed() const { return events_; }
  const std::map<BrokerId, BrokerState>& brokers() const { return brokers_; }
  const BrokerState& broker(const BrokerId& id) const { return brokers_.at(id); }
  bool is_up(const BrokerId& id) const { return !down_.count(id); }
  SimTime phase_offset(const BrokerId& id) const { return offsets_.at(id); }
  SimTime latency(const BrokerId& a, const BrokerId& b) const;
  std::size_t availability_in_flight() const { return av_in_flight_; }
  const MessageCounts& total_sent() const { return total_sent_; }
  bool quiescent() const;
  const std::vector<std::string>& violations() const { return violations_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }
  std::uint64_t trace_hash() const { return hasher_.value(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void schedule(Event e);
  void send(const Messages& messages);
  void arm_expiry(const BrokerId& id);
  void start_broker(const BrokerId& id, bool bootstrap_now);
  void handle(const Event& e, std::string& note);
  void handle_deliver(const Event& e, std::string& note);
  void handle_phase(const Event& e, std::string& note);
  void handle_action(const Event& e, std::string& note);
  void finish_term(BrokerState& state, const EndOfCycle& eoc,
                   const ReservationLedger& before);
  void check_after(const Event& e);
  std::string trace_line(const Event& e, const std::string& note) const;
  BrokerConfig config() const;

  std::shared_ptr<const NetworkTopology> topology_;
  Scenario scenario_;
  RunOptions options_;
  SimTime horizon_ = 0;
  SimTime default_latency_ = 0;

  std::map<BrokerId, BrokerState> brokers_;
  std::map<BrokerId, SimTime> offsets_;
  std::set<BrokerId> down_;
  std::map<BrokerId, std::uint64_t> epoch_;
  std::map<BrokerId, std::set<SimTime>> expiry_armed_;
  std::map<std::tuple<DomainId, DomainId, ServiceClass>, StandingDemand> demands_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;
  std::uint64_t events_ = 0;
  std::size_t av_in_flight_ = 0;
  std::size_t actions_pending_ = 0;
  bool stopped_ = false;

  MessageCounts total_sent_{};
  std::map<BrokerId, MessageCounts> term_sent_;
  std::vector<MetricsRow> metrics_;
  std::vector<std::string> violations_;
  std::optional<std::uint64_t> violation_event_;

  TraceHasher hasher_;
  std::vector<std::string> trace_lines_;
  Observer observer_;
};

}  // namespace bbroker
