#include "bbroker/simulator.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "bbroker/propagation.hpp"
#include "bbroker/wire.hpp"

namespace bbroker {

const char* to_string(PhaseKind phase) {
  switch (phase) {
    case PhaseKind::kBegin: return "begin";
    case PhaseKind::kMid: return "mid";
    case PhaseKind::kEnd: return "end";
  }
  return "?";
}

const char* to_string(Event::Kind kind) {
  switch (kind) {
    case Event::Kind::kBootstrap: return "bootstrap";
    case Event::Kind::kDeliver: return "deliver";
    case Event::Kind::kPhase: return "phase";
    case Event::Kind::kRefresh: return "refresh";
    case Event::Kind::kExpiry: return "expiry";
    case Event::Kind::kAction: return "action";
  }
  return "?";
}

void TraceHasher::add(const std::string& line) {
  for (unsigned char ch : line) {
    hash_ ^= ch;
    hash_ *= 1099511628211ULL;
  }
  hash_ ^= static_cast<unsigned char>('\n');
  hash_ *= 1099511628211ULL;
}

namespace {

bool ledgers_stable(const BrokerState& state) {
  return state.recent_ledgers.size() == 2 &&
         state.recent_ledgers[0].same_state(state.recent_ledgers[1]);
}

void broker_invariants(const BrokerState& state, std::vector<std::string>& out) {
  const std::string who = state.id.str() + ": ";
  for (const std::string& v : state.ledger.check_conservation()) out.push_back(who + v);
  const NetworkTopology& topo = *state.topology;
  for (const auto& [key, stored] : state.ai_db) {
    const std::string what = who + "AI " + key.edge_domain.str() + "/c" +
                             std::to_string(key.service_class.id());
    if (key_of(stored.ai) != key) out.push_back(what + " stored under the wrong key");
    if (!stored.learned_from) {
      auto att = topo.attachment(key.edge_domain);
      if (!att || att->transit != state.domain) {
        out.push_back(what + " is local but the edge is not attached here");
      }
      if (stored.ai.origin_broker != state.id) {
        out.push_back(what + " is local but originates at " +
                      stored.ai.origin_broker.str());
      }
    } else {
      if (!state.neighbor(*stored.learned_from)) {
        out.push_back(what + " learned from non-neighbor " + stored.learned_from->str());
      }
      if (stored.ai.origin_broker == state.id) {
        out.push_back(what + " is its own advertisement learned back from " +
                      stored.learned_from->str());
      }
    }
  }
}

/// Reservations held by `key` on every link of the ledger.
std::map<LinkId, Kbps> holdings(const ReservationLedger& ledger, const AggregateKey& key) {
  std::map<LinkId, Kbps> out;
  for (const auto& [link, by_key] : ledger.reservations()) {
    auto it = by_key.find(key);
    if (it != by_key.end()) out[link] = it->second;
  }
  return out;
}

const AggregateKey kFaultKey{RouterId("fault"), DomainId("fault"), ServiceClass(0)};

}  // namespace

bool check_quiescence(const std::map<BrokerId, BrokerState>& states,
                      std::size_t availability_in_flight) {
  if (availability_in_flight != 0) return false;
  for (const auto& [id, state] : states) {
    if (!ledgers_stable(state)) return false;
  }
  return true;
}

std::vector<std::string> assert_invariants(const std::map<BrokerId, BrokerState>& states) {
  std::vector<std::string> out;
  for (const auto& [id, state] : states) broker_invariants(state, out);
  return out;
}

std::optional<std::string> check_ledger_replay(const BrokerState& state) {
  ReservationLedger replayed =
      ReservationLedger::replay(state.ledger.capacities(), state.ledger.decisions());
  if (replayed.same_state(state.ledger) && replayed.keys() == state.ledger.keys()) {
    return std::nullopt;
  }
  return state.id.str() + ": ledger differs from the replay of its " +
         std::to_string(state.ledger.decisions().size()) + " decisions";
}

Simulator::Simulator(std::shared_ptr<const NetworkTopology> topology, Scenario scenario,
                     RunOptions options)
    : topology_(std::move(topology)),
      scenario_(std::move(scenario)),
      options_(std::move(options)) {
  const auto topo_errors = validate(*topology_);
  if (!topo_errors.empty()) {
    std::string msg;
    for (const Violation& v : topo_errors) msg += "\n  " + v.subject + ": " + v.message;
    throw Error(ErrorCode::kValidationError, "invalid topology:" + msg);
  }
  const SimTime T = scenario_.term_length;
  if (T <= 0) throw Error(ErrorCode::kScenarioError, "term_length must be positive");
  if (options_.terms < 0) throw Error(ErrorCode::kInvalidArgument, "negative term count");

  std::mt19937_64 rng(options_.seed);
  SimTime max_offset = 0;
  for (const BrokerId& b : topology_->brokers()) {
    SimTime off = static_cast<SimTime>(rng() % static_cast<std::uint64_t>(T));
    auto it = scenario_.phase_offsets.find(b);
    if (it != scenario_.phase_offsets.end()) off = it->second;
    offsets_[b] = off;
    max_offset = std::max(max_offset, off);
  }
  horizon_ = max_offset + options_.terms * T;

  const auto scen_errors = validate_scenario(scenario_, *topology_, horizon_);
  if (!scen_errors.empty()) {
    std::string msg;
    for (const Violation& v : scen_errors) msg += "\n  " + v.subject + ": " + v.message;
    throw Error(ErrorCode::kScenarioError, "invalid scenario:" + msg);
  }
  default_latency_ = scenario_.latency.value_or(T / 10);

  for (const DomainId& d : topology_->transit_domains()) {
    const BrokerId& b = topology_->broker_of(d);
    brokers_.emplace(b, make_broker_state(topology_, d, config(), offsets_.at(b)));
    epoch_[b] = 0;
  }
  for (std::size_t i = 0; i < scenario_.actions.size(); ++i) {
    const ScenarioAction& a = scenario_.actions[i];
    if (a.kind == ScenarioAction::Kind::kFault && !brokers_.at(a.broker).ledger.has_link(a.link)) {
      throw Error(ErrorCode::kScenarioError,
                  "action " + std::to_string(i) + " (fault, line " + std::to_string(a.line) +
                      "): link " + a.link.str() + " is not accounted by " + a.broker.str());
    }
  }
  for (const StandingDemand& d : scenario_.demands) {
    demands_[{d.src_edge, d.dest_edge, d.service_class}] = d;
  }

  std::vector<std::size_t> order(scenario_.actions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [this](std::size_t x, std::size_t y) {
    return scenario_.actions[x].time < scenario_.actions[y].time;
  });
  std::set<BrokerId> seen;
  for (std::size_t i : order) {
    const ScenarioAction& a = scenario_.actions[i];
    if (a.kind == ScenarioAction::Kind::kDemand) continue;
    if (seen.insert(a.broker).second && a.kind == ScenarioAction::Kind::kJoin) {
      down_.insert(a.broker);
    }
  }
  for (std::size_t i : order) {
    Event e;
    e.time = scenario_.actions[i].time;
    e.kind = Event::Kind::kAction;
    e.action_index = i;
    schedule(std::move(e));
  }
  actions_pending_ = order.size();

  for (const auto& [b, state] : brokers_) {
    if (down_.count(b)) continue;
    Event e;
    e.time = 0;
    e.kind = Event::Kind::kBootstrap;
    e.broker = b;
    schedule(std::move(e));
  }
  if (options_.terms > 0) {
    for (const auto& [b, off] : offsets_) {
      Event e;
      e.time = off;
      e.kind = Event::Kind::kPhase;
      e.broker = b;
      e.phase = PhaseKind::kBegin;
      e.term = 0;
      schedule(std::move(e));
    }
  }
}

BrokerConfig Simulator::config() const {
  BrokerConfig c;
  c.term_length = scenario_.term_length;
  c.refresh_interval = scenario_.refresh_interval.value_or(scenario_.term_length);
  c.validity_window = scenario_.validity_window.value_or(
      3 * (c.refresh_interval > 0 ? c.refresh_interval : scenario_.term_length));
  c.hold_terms = scenario_.hold_terms;
  return c;
}

SimTime Simulator::latency(const BrokerId& a, const BrokerId& b) const {
  auto it = scenario_.pair_latency.find(std::minmax(a, b));
  if (it == scenario_.pair_latency.end()) {
    it = scenario_.pair_latency.find({std::max(a, b), std::min(a, b)});
  }
  return it == scenario_.pair_latency.end() ? default_latency_ : it->second;
}

void Simulator::schedule(Event e) {
  e.seq = next_seq_++;
  queue_.push(std::move(e));
}

void Simulator::send(const Messages& messages) {
  for (const InterDomainMessage& m : messages) {
    const auto kind = static_cast<std::size_t>(m.kind());
    ++total_sent_[kind];
    ++term_sent_[m.sender][kind];
    if (m.is_availability()) ++av_in_flight_;
    Event e;
    e.time = now_ + latency(m.sender, m.receiver);
    e.kind = Event::Kind::kDeliver;
    e.broker = m.receiver;
    e.message = m;
    schedule(std::move(e));
  }
}

void Simulator::arm_expiry(const BrokerId& id) {
  const BrokerState& state = brokers_.at(id);
  auto& armed = expiry_armed_[id];
  for (const auto& [key, stored] : state.ai_db) {
    const SimTime t = stored.ai.valid_until;
    if (t == kForever || t < now_ || !armed.insert(t).second) continue;
    Event e;
    e.time = t;
    e.kind = Event::Kind::kExpiry;
    e.broker = id;
    schedule(std::move(e));
  }
}

void Simulator::start_broker(const BrokerId& id, bool bootstrap_now) {
  BrokerState& state = brokers_.at(id);
  const std::uint64_t epoch = ++epoch_[id];
  install_local_ais(state, now_);
  if (bootstrap_now) {
    try {
      send(bootstrap(state, now_));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoLocalEdgeDomains) throw;
    }
  }
  if (state.config.refresh_interval > 0) {
    Event e;
    e.time = now_ + state.config.refresh_interval;
    e.kind = Event::Kind::kRefresh;
    e.broker = id;
    e.epoch = epoch;
    schedule(std::move(e));
  }
  arm_expiry(id);
}

bool Simulator::quiescent() const {
  if (av_in_flight_ != 0) return false;
  for (const auto& [id, state] : brokers_) {
    if (down_.count(id)) continue;
    if (!ledgers_stable(state)) return false;
  }
  return true;
}

bool Simulator::step() {
  if (stopped_ || queue_.empty()) return false;
  if (queue_.top().time > horizon_) {
    stopped_ = true;
    return false;
  }
  Event e = queue_.top();
  queue_.pop();
  now_ = e.time;
  ++events_;
  std::string note;
  handle(e, note);
  std::string line = trace_line(e, note);
  hasher_.add(line);
  if (options_.keep_trace_lines) trace_lines_.push_back(std::move(line));
  if (observer_) observer_(e, *this);
  check_after(e);
  if (!stopped_ && options_.stop_at_quiescence && actions_pending_ == 0 && quiescent()) {
    stopped_ = true;
  }
  return true;
}

void Simulator::run_until(SimTime t) {
  while (!stopped_ && !queue_.empty() && queue_.top().time <= t && step()) {
  }
}

RunResult Simulator::run() {
  while (step()) {
  }
  return result();
}

RunResult Simulator::result() const {
  RunResult r;
  r.trace_hash = hasher_.value();
  r.trace_lines = trace_lines_;
  r.events = events_;
  r.end_time = now_;
  r.metrics = metrics_;
  r.brokers = brokers_;
  r.down = down_;
  r.total_sent = total_sent_;
  r.quiescent = quiescent();
  r.violations = violations_;
  r.violation_event = violation_event_;
  return r;
}

void Simulator::handle(const Event& e, std::string& note) {
  switch (e.kind) {
    case Event::Kind::kBootstrap: {
      const bool announce =
          !options_.bootstrappers || options_.bootstrappers->count(e.broker) > 0;
      start_broker(e.broker, announce);
      if (!announce) note = "silent";
      break;
    }
    case Event::Kind::kDeliver:
      handle_deliver(e, note);
      break;
    case Event::Kind::kPhase:
      handle_phase(e, note);
      break;
    case Event::Kind::kRefresh: {
      if (down_.count(e.broker) || e.epoch != epoch_.at(e.broker)) {
        note = "cancelled";
        break;
      }
      BrokerState& state = brokers_.at(e.broker);
      send(emit_refresh(state, now_));
      arm_expiry(e.broker);
      Event next;
      next.time = now_ + state.config.refresh_interval;
      next.kind = Event::Kind::kRefresh;
      next.broker = e.broker;
      next.epoch = e.epoch;
      schedule(std::move(next));
      break;
    }
    case Event::Kind::kExpiry: {
      expiry_armed_[e.broker].erase(e.time);
      if (down_.count(e.broker)) {
        note = "down";
        break;
      }
      const auto removed = expire_stale(brokers_.at(e.broker), now_);
      note = "removed=" + std::to_string(removed.size());
      break;
    }
    case Event::Kind::kAction:
      --actions_pending_;
      handle_action(e, note);
      break;
  }
}

void Simulator::handle_deliver(const Event& e, std::string& note) {
  const InterDomainMessage& m = e.message;
  if (m.is_availability()) --av_in_flight_;
  if (down_.count(m.receiver)) {
    note = "dropped";
    return;
  }
  BrokerState& state = brokers_.at(m.receiver);
  try {
    if (const auto* ai = std::get_if<AiMessage>(&m.payload)) {
      send(handle_ai(state, m.sender, ai->ai, now_));
    } else if (const auto* nai = std::get_if<NewAiMessage>(&m.payload)) {
      send(handle_new_ai(state, m.sender, nai->ai, now_));
    } else if (const auto* db = std::get_if<AiDatabaseTransfer>(&m.payload)) {
      const auto before = state.counters.stale_drops;
      send(handle_db_transfer(state, m.sender, db->ais, now_));
      if (state.counters.stale_drops != before) {
        note = "stale=" + std::to_string(state.counters.stale_drops - before);
      }
    } else if (const auto* ds = std::get_if<AggregatedDs>(&m.payload)) {
      receive_aggregated_ds(state, m.sender, *ds, now_);
    } else if (const auto* rej = std::get_if<RejectionNotice>(&m.payload)) {
      send(handle_rejection(state, m.sender, *rej, now_));
    }
  } catch (const Error& err) {
    if (err.code() == ErrorCode::kStaleMessage) {
      ++state.counters.stale_drops;
      note = "stale";
    } else if (err.code() == ErrorCode::kUnknownOrigin) {
      ++state.counters.unknown_origin;
      note = "unknown_origin";
    } else {
      throw;
    }
  }
  if (m.is_availability()) arm_expiry(m.receiver);
}

void Simulator::handle_phase(const Event& e, std::string& note) {
  BrokerState& state = brokers_.at(e.broker);
  const bool up = !down_.count(e.broker);
  switch (e.phase) {
    case PhaseKind::kBegin: {
      const SimTime begin = state.clock.begin(e.term);
      Event mid = e;
      mid.time = state.clock.mid(e.term);
      mid.phase = PhaseKind::kMid;
      schedule(std::move(mid));
      Event end = e;
      end.time = state.clock.end(e.term);
      end.phase = PhaseKind::kEnd;
      schedule(std::move(end));
      if (e.term + 1 < options_.terms) {
        Event next = e;
        next.time = begin + scenario_.term_length;
        next.term = e.term + 1;
        schedule(std::move(next));
      }
      if (!up) {
        note = "down";
        return;
      }
      begin_term(state, e.term);
      std::size_t submitted = 0;
      for (const auto& [key, d] : demands_) {
        auto att = topology_->attachment(d.src_edge);
        if (!att || att->transit != state.domain) continue;
        DemandSpec ds;
        ds.id = d.src_edge.str() + ">" + d.dest_edge.str() + "/c" +
                std::to_string(d.service_class.id()) + "@" + std::to_string(e.term);
        ds.src_edge = d.src_edge;
        ds.dest_edge = d.dest_edge;
        ds.service_class = d.service_class;
        ds.bandwidth = d.bandwidth;
        ds.issued_term = e.term;
        submit_ds(state, ds, now_);
        ++submitted;
      }
      note = "submitted=" + std::to_string(submitted);
      return;
    }
    case PhaseKind::kMid:
      if (!up) {
        note = "down";
        return;
      }
      send(mid_cycle(state, now_));
      return;
    case PhaseKind::kEnd: {
      if (!up) {
        note = "down";
        return;
      }
      ReservationLedger before = state.ledger.snapshot();
      EndOfCycle eoc = end_of_cycle(state, now_);
      send(eoc.messages);
      std::size_t admitted = 0;
      for (const AdmissionDecision& d : eoc.decisions) {
        if (d.outcome == AdmissionDecision::Outcome::kAdmitted) ++admitted;
      }
      note = "admitted=" + std::to_string(admitted) +
             " rejected=" + std::to_string(eoc.decisions.size() - admitted) +
             " released=" + std::to_string(eoc.released.size());
      finish_term(state, eoc, before);
      return;
    }
  }
}

void Simulator::finish_term(BrokerState& state, const EndOfCycle& eoc,
                            const ReservationLedger& before) {
  std::vector<std::string> found;
  for (const std::string& v : state.ledger.check_conservation()) {
    found.push_back(state.id.str() + ": " + v);
  }
  const ReservationLedger& after = state.ledger;
  // Per key: the last admitted arrival fixes the reservation on its whole
  // path; with none admitted the key is untouched.
  std::map<AggregateKey, const AdmissionDecision*> last_admitted;
  std::set<AggregateKey> touched;
  for (const AdmissionDecision& d : eoc.decisions) {
    touched.insert(d.key);
    if (d.outcome == AdmissionDecision::Outcome::kAdmitted) last_admitted[d.key] = &d;
  }
  for (const AggregateKey& key : touched) {
    if (std::find(eoc.released.begin(), eoc.released.end(), key) != eoc.released.end()) {
      continue;
    }
    const std::string what = state.id.str() + ": all-or-nothing: " + to_string(key);
    const auto held = holdings(after, key);
    if (auto it = last_admitted.find(key); it != last_admitted.end()) {
      std::map<LinkId, Kbps> want;
      if (it->second->target > 0) {
        for (const LinkId& l : it->second->path) want[l] = it->second->target;
      }
      if (held != want) found.push_back(what + " admitted but not held on its whole path");
    } else {
      auto b = before.keys().find(key);
      auto a = after.keys().find(key);
      const bool same_key = (b == before.keys().end()) == (a == after.keys().end()) &&
                            (b == before.keys().end() || b->second == a->second);
      if (!same_key || holdings(before, key) != held) {
        found.push_back(what + " rejected but its reservation changed");
      }
    }
  }
  if (auto replay = check_ledger_replay(state)) found.push_back(*replay);
  if (!found.empty() && violations_.empty()) {
    violations_ = std::move(found);
    violation_event_ = events_;
    stopped_ = true;
  }

  MetricsRow row;
  row.term = state.current_term;
  row.broker = state.id;
  row.time = now_;
  row.sent = term_sent_[state.id];
  term_sent_[state.id] = MessageCounts{};
  row.ai_db_size = state.ai_db.size();
  for (const AdmissionDecision& d : eoc.decisions) {
    const int c = d.key.service_class.id();
    if (d.outcome == AdmissionDecision::Outcome::kAdmitted) {
      row.admitted_by_class[c] += d.bandwidth;
    } else {
      row.rejected_by_class[c] += d.bandwidth;
    }
  }
  for (const auto& [link, cap] : after.capacities()) {
    const Kbps used = after.reserved_total(link);
    row.utilization[link] = cap > 0 ? static_cast<double>(used) / static_cast<double>(cap) : 0.0;
  }
  row.stable = ledgers_stable(state);
  metrics_.push_back(std::move(row));
}

void Simulator::handle_action(const Event& e, std::string& note) {
  const ScenarioAction& a = scenario_.actions.at(e.action_index);
  note = to_string(a.kind);
  switch (a.kind) {
    case ScenarioAction::Kind::kJoin: {
      note += " " + a.broker.str();
      if (!down_.count(a.broker)) {
        note += " ignored";
        return;
      }
      down_.erase(a.broker);
      BrokerState& old = brokers_.at(a.broker);
      BrokerState fresh = make_broker_state(topology_, old.domain, old.config,
                                            old.clock.phase_offset);
      fresh.current_term = std::max<TermIndex>(0, fresh.clock.term_at(now_));
      old = std::move(fresh);
      expiry_armed_[a.broker].clear();
      start_broker(a.broker, true);
      return;
    }
    case ScenarioAction::Kind::kBlackout:
      note += " " + a.broker.str();
      if (down_.count(a.broker)) {
        note += " ignored";
        return;
      }
      down_.insert(a.broker);
      ++epoch_[a.broker];
      return;
    case ScenarioAction::Kind::kDemand: {
      const StandingDemand& d = a.demand;
      note += " " + d.src_edge.str() + ">" + d.dest_edge.str() + "/c" +
              std::to_string(d.service_class.id()) + " bw=" + std::to_string(d.bandwidth);
      const auto key = std::make_tuple(d.src_edge, d.dest_edge, d.service_class);
      if (d.bandwidth == 0) {
        demands_.erase(key);
      } else {
        demands_[key] = d;
      }
      auto att = topology_->attachment(d.src_edge);
      brokers_.at(topology_->broker_of(att->transit)).recent_ledgers.clear();
      return;
    }
    case ScenarioAction::Kind::kFault:
      note += " " + a.broker.str() + " " + a.link.str() + " " + std::to_string(a.amount);
      brokers_.at(a.broker).ledger.inject_unchecked(a.link, kFaultKey, a.amount);
      return;
  }
}

void Simulator::check_after(const Event& e) {
  if (!options_.checked || !violations_.empty()) return;
  std::vector<std::string> found;
  if (e.kind == Event::Kind::kAction || e.kind == Event::Kind::kDeliver ||
      e.kind == Event::Kind::kPhase || e.kind == Event::Kind::kBootstrap) {
    found = assert_invariants(brokers_);
  } else {
    broker_invariants(brokers_.at(e.broker), found);
  }
  if (!found.empty()) {
    violations_ = std::move(found);
    violation_event_ = events_;
    stopped_ = true;
  }
}

std::string Simulator::trace_line(const Event& e, const std::string& note) const {
  std::ostringstream os;
  os << e.time << ' ' << e.seq << ' ' << to_string(e.kind);
  switch (e.kind) {
    case Event::Kind::kDeliver:
      os << ' ' << encode_message(e.message);
      break;
    case Event::Kind::kPhase:
      os << ' ' << e.broker << ' ' << to_string(e.phase) << ' ' << e.term;
      break;
    case Event::Kind::kAction:
      break;
    default:
      os << ' ' << e.broker;
      break;
  }
  if (!note.empty()) os << ' ' << note;
  return os.str();
}

}  // namespace bbroker
