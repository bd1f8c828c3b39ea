#include <gtest/gtest.h>

#include <set>

#include "bbroker/simulator.hpp"
#include "bbroker/wire.hpp"
#include "generators.hpp"

using namespace bbroker;

namespace {

Scenario fixture_scenario(const std::string& name) {
  return parse_scenario(read_file(bbtest::fixture_path(name)));
}

RunOptions opts(std::uint64_t seed, TermIndex terms = 10) {
  RunOptions o;
  o.seed = seed;
  o.terms = terms;
  return o;
}

std::string kind_of(const std::string& trace_line) {
  // "time seq kind ..."
  std::size_t a = trace_line.find(' ');
  std::size_t b = trace_line.find(' ', a + 1);
  std::size_t c = trace_line.find(' ', b + 1);
  return trace_line.substr(b + 1, c - b - 1);
}

}  // namespace

TEST(Simulator, EmptyScenarioCarriesNoDemandTraffic) {
  auto topo = bbtest::load_fixture("line3.topo");
  RunOptions o = opts(1, 3);
  o.keep_trace_lines = true;
  Simulator sim(topo, Scenario{}, o);
  RunResult r = sim.run();
  std::set<std::string> kinds;
  for (const auto& line : r.trace_lines) {
    kinds.insert(kind_of(line));
    EXPECT_EQ(line.find("<ds"), std::string::npos);
    EXPECT_EQ(line.find("<reject"), std::string::npos);
  }
  for (const auto& k : kinds) {
    EXPECT_TRUE(k == "bootstrap" || k == "deliver" || k == "phase" || k == "refresh" ||
                k == "expiry")
        << k;
  }
  EXPECT_EQ(r.total_sent[static_cast<int>(MessageKind::kDs)], 0u);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.metrics.size(), 3u * 3u);
}

TEST(Simulator, SameSeedSameTrace) {
  auto topo = bbtest::load_fixture("line3.topo");
  auto scen = fixture_scenario("line3_constant.scen");
  auto a = Simulator(topo, scen, opts(42)).run();
  auto b = Simulator(topo, scen, opts(42)).run();
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_EQ(a.events, b.events);
  auto c = Simulator(topo, scen, opts(43)).run();
  EXPECT_NE(a.trace_hash, c.trace_hash);
}

TEST(Simulator, PhaseOffsetsFromSeedAndOverrides) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  scen.phase_offsets[BrokerId("BB2")] = 123;
  Simulator sim(topo, scen, opts(5, 4));
  EXPECT_EQ(sim.phase_offset(BrokerId("BB2")), 123);
  SimTime max_off = 0;
  for (const char* b : {"BB1", "BB2", "BB3"}) {
    EXPECT_GE(sim.phase_offset(BrokerId(b)), 0);
    EXPECT_LT(sim.phase_offset(BrokerId(b)), scen.term_length);
    max_off = std::max(max_off, sim.phase_offset(BrokerId(b)));
  }
  EXPECT_EQ(sim.horizon(), max_off + 4 * scen.term_length);
}

TEST(Simulator, LatencyDefaultsAndPairOverrides) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  scen.pair_latency[{BrokerId("BB2"), BrokerId("BB1")}] = 7;
  Simulator sim(topo, scen, opts(0, 1));
  EXPECT_EQ(sim.latency(BrokerId("BB1"), BrokerId("BB2")), 7);
  EXPECT_EQ(sim.latency(BrokerId("BB2"), BrokerId("BB1")), 7);
  EXPECT_EQ(sim.latency(BrokerId("BB2"), BrokerId("BB3")), scen.term_length / 10);
}

TEST(Simulator, ConvergesForEveryLatency) {
  auto topo = bbtest::load_fixture("diamond.topo");
  const RouteTable oracle = oracle_best_routes(*topo);
  for (SimTime lat : {SimTime{0}, SimTime{1}, SimTime{100'000}, SimTime{499'999}}) {
    Scenario scen;
    scen.refresh_interval = 0;
    scen.latency = lat;
    auto r = Simulator(topo, scen, opts(9, 4)).run();
    EXPECT_TRUE(r.violations.empty());
    EXPECT_TRUE(diff_route_tables(oracle, route_table_of(r.brokers)).empty()) << "latency " << lat;
  }
}

TEST(Simulator, QuiescenceRequiresIdleNetworkAndStableLedgers) {
  auto topo = bbtest::load_fixture("line3.topo");
  auto states = std::map<BrokerId, BrokerState>{};
  for (const DomainId& d : topo->transit_domains()) {
    BrokerState s = make_broker_state(topo, d, BrokerConfig{}, 0);
    states.emplace(s.id, std::move(s));
  }
  EXPECT_FALSE(check_quiescence(states, 0));  // no end-of-term ledgers yet
  for (auto& [id, s] : states) s.recent_ledgers = {s.ledger.snapshot(), s.ledger.snapshot()};
  EXPECT_TRUE(check_quiescence(states, 0));
  EXPECT_FALSE(check_quiescence(states, 1));
}

TEST(Simulator, NewDemandBreaksQuiescenceUntilLedgersSettle) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  scen.refresh_interval = 0;
  scen.phase_offsets = {{BrokerId("BB1"), 0}, {BrokerId("BB2"), 0}, {BrokerId("BB3"), 0}};
  ScenarioAction a;
  a.time = 4'200'000;
  a.kind = ScenarioAction::Kind::kDemand;
  a.demand = StandingDemand{DomainId("E1"), DomainId("E3"), ServiceClass(0), 100};
  scen.actions.push_back(a);

  Simulator sim(topo, scen, opts(0, 10));
  sim.run_until(4'100'000);
  EXPECT_TRUE(sim.quiescent());
  sim.run_until(6'100'000);  // first admissions at the end of term 4
  EXPECT_FALSE(sim.quiescent());
  sim.run_until(8'100'000);
  EXPECT_TRUE(sim.quiescent());
}

TEST(Simulator, StopAtQuiescence) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  scen.refresh_interval = 0;
  RunOptions o = opts(3, 50);
  o.stop_at_quiescence = true;
  Simulator sim(topo, scen, o);
  auto r = sim.run();
  EXPECT_TRUE(r.quiescent);
  EXPECT_LT(r.end_time, sim.horizon());
}

TEST(Simulator, FaultIsCaughtAtTheEvent) {
  auto topo = bbtest::load_fixture("line3.topo");
  RunOptions o = opts(0);
  o.checked = true;
  Simulator sim(topo, fixture_scenario("line3_fault.scen"), o);
  auto r = sim.run();
  ASSERT_FALSE(r.violations.empty());
  EXPECT_NE(r.violations[0].find("X23"), std::string::npos);
  EXPECT_EQ(r.end_time, 2'500'000);
  ASSERT_TRUE(r.violation_event.has_value());
  EXPECT_EQ(*r.violation_event, r.events);
}

TEST(Simulator, FaultIsCaughtAtTermEndWhenUnchecked) {
  auto topo = bbtest::load_fixture("line3.topo");
  auto r = Simulator(topo, fixture_scenario("line3_fault.scen"), opts(0)).run();
  ASSERT_FALSE(r.violations.empty());
  EXPECT_GT(r.end_time, 2'500'000);
  EXPECT_LE(r.end_time, 2'500'000 + 1'000'000);
}

TEST(Simulator, CheckedRunsOnRandomTopologiesStayClean) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto topo = std::make_shared<const NetworkTopology>(bbtest::random_topology(seed));
    Scenario scen;
    const auto edges = topo->edge_domains();
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const Domain& dst = topo->domain(edges[i + 1]);
      scen.demands.push_back(StandingDemand{edges[i], edges[i + 1], dst.classes.front(),
                                            static_cast<Kbps>(1'000 * (seed + i + 1))});
    }
    RunOptions o = opts(seed, 6);
    o.checked = true;
    auto r = Simulator(topo, scen, o).run();
    EXPECT_TRUE(r.violations.empty()) << "seed " << seed << ": " << r.violations.front();
  }
}

TEST(Simulator, BlackoutExpiresRoutesAndJoinRestoresThem) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  ScenarioAction off;
  off.time = 2'000'000;
  off.kind = ScenarioAction::Kind::kBlackout;
  off.broker = BrokerId("BB3");
  ScenarioAction on = off;
  on.time = 7'000'000;
  on.kind = ScenarioAction::Kind::kJoin;
  scen.actions = {off, on};
  Simulator sim(topo, scen, opts(2, 10));
  const AiKey e3{DomainId("E3"), ServiceClass(0)};

  sim.run_until(1'999'999);
  EXPECT_TRUE(sim.broker(BrokerId("BB1")).ai_db.count(e3));
  // Validity is 3 terms; one more latency hop for the last refresh.
  sim.run_until(2'000'000 + 3'000'000 + 2 * 100'000);
  EXPECT_FALSE(sim.is_up(BrokerId("BB3")));
  EXPECT_FALSE(sim.broker(BrokerId("BB1")).ai_db.count(e3));
  EXPECT_FALSE(sim.broker(BrokerId("BB2")).ai_db.count(e3));
  sim.run_until(7'000'000 + 3 * 100'000);
  EXPECT_TRUE(sim.is_up(BrokerId("BB3")));
  EXPECT_TRUE(sim.broker(BrokerId("BB1")).ai_db.count(e3));
}

TEST(Simulator, BrokerWhoseFirstActionIsJoinStartsDown) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  ScenarioAction on;
  on.time = 3'000'000;
  on.kind = ScenarioAction::Kind::kJoin;
  on.broker = BrokerId("BB1");
  scen.actions = {on};
  Simulator sim(topo, scen, opts(0, 6));
  EXPECT_FALSE(sim.is_up(BrokerId("BB1")));
  sim.run_until(2'999'999);
  EXPECT_FALSE(sim.broker(BrokerId("BB3")).ai_db.count(AiKey{DomainId("E1"), ServiceClass(0)}));
  auto r = sim.run();
  EXPECT_TRUE(r.down.empty());
  EXPECT_TRUE(r.brokers.at(BrokerId("BB3")).ai_db.count(AiKey{DomainId("E1"), ServiceClass(0)}));
}

TEST(Simulator, InvalidScenarioIsRejectedUpFront) {
  auto topo = bbtest::load_fixture("line3.topo");
  Scenario scen;
  scen.demands.push_back(StandingDemand{DomainId("E1"), DomainId("E9"), ServiceClass(0), 5});
  try {
    Simulator(topo, scen, opts(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScenarioError);
  }
  Scenario fault;
  ScenarioAction a;
  a.kind = ScenarioAction::Kind::kFault;
  a.broker = BrokerId("BB1");
  a.link = LinkId("X23");  // accounted by BB2, not BB1
  a.amount = 5;
  fault.actions = {a};
  EXPECT_THROW(Simulator(topo, fault, opts(0)), Error);
}

TEST(Simulator, MetricsRowPerBrokerAndTerm) {
  auto topo = bbtest::load_fixture("line3.topo");
  auto r = Simulator(topo, fixture_scenario("line3_constant.scen"), opts(4, 5)).run();
  ASSERT_EQ(r.metrics.size(), 15u);
  const auto& last = r.metrics.back();
  EXPECT_EQ(last.term, 4);
  EXPECT_TRUE(last.stable);
  std::uint64_t sum = 0;
  for (const auto& row : r.metrics) {
    for (auto v : row.sent) sum += v;
  }
  std::uint64_t total = 0;
  for (auto v : r.total_sent) total += v;
  EXPECT_LE(sum, total);
}

TEST(TraceHasher, KnownValue) {
  TraceHasher h;
  EXPECT_EQ(h.value(), 14695981039346656037ULL);
  h.add("a");
  // FNV-1a 64 of "a\n".
  std::uint64_t ref = 14695981039346656037ULL;
  for (unsigned char ch : std::string("a\n")) {
    ref ^= ch;
    ref *= 1099511628211ULL;
  }
  EXPECT_EQ(h.value(), ref);
}
