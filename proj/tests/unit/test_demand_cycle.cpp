#include <gtest/gtest.h>

#include <deque>

#include "bbroker/demand_cycle.hpp"
#include "generators.hpp"

using namespace bbroker;

namespace {

using States = std::map<BrokerId, BrokerState>;

/// line3 brokers with converged AI databases.
States converged_line3() {
  auto topo = bbtest::load_fixture("line3.topo");
  BrokerConfig cfg;
  cfg.refresh_interval = 0;
  States states;
  for (const DomainId& d : topo->transit_domains()) {
    BrokerState s = make_broker_state(topo, d, cfg, 0);
    install_local_ais(s, 0);
    states.emplace(s.id, std::move(s));
  }
  std::deque<InterDomainMessage> q;
  for (auto& [id, s] : states) {
    try {
      for (auto& m : bootstrap(s, 0)) q.push_back(m);
    } catch (const Error&) {
    }
  }
  while (!q.empty()) {
    auto m = q.front();
    q.pop_front();
    BrokerState& r = states.at(m.receiver);
    Messages out;
    if (auto* a = std::get_if<AiMessage>(&m.payload)) out = handle_ai(r, m.sender, a->ai, 0);
    if (auto* n = std::get_if<NewAiMessage>(&m.payload)) out = handle_new_ai(r, m.sender, n->ai, 0);
    if (auto* t = std::get_if<AiDatabaseTransfer>(&m.payload)) {
      out = handle_db_transfer(r, m.sender, t->ais, 0);
    }
    q.insert(q.end(), out.begin(), out.end());
  }
  return states;
}

DemandSpec ds(const std::string& id, const std::string& src, const std::string& dest, int cls,
              Kbps bw) {
  return DemandSpec{id, DomainId(src), DomainId(dest), ServiceClass(cls), bw, 0};
}

template <typename F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST(SubmitDs, RejectsForeignSourcesDuplicatesAndSelfDemands) {
  auto states = converged_line3();
  BrokerState& bb1 = states.at(BrokerId("BB1"));
  EXPECT_EQ(code_of([&] { submit_ds(bb1, ds("d1", "E3", "E1", 0, 10), 0); }),
            ErrorCode::kNotLocalSource);
  submit_ds(bb1, ds("d2", "E1", "E3", 0, 10), 0);
  EXPECT_EQ(code_of([&] { submit_ds(bb1, ds("d2", "E1", "E3", 0, 10), 0); }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([&] { submit_ds(bb1, ds("d3", "E1", "E1", 0, 10), 0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { submit_ds(bb1, ds("d4", "E1", "E3", 0, -5), 0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(bb1.demand.forward_buffer.size(), 1u);
}

TEST(MidCycle, AggregatesByDestinationAndClass) {
  auto states = converged_line3();
  BrokerState& bb1 = states.at(BrokerId("BB1"));
  submit_ds(bb1, ds("a", "E1", "E3", 0, 10'000), 0);
  submit_ds(bb1, ds("b", "E1", "E3", 0, 20'000), 1);
  submit_ds(bb1, ds("c", "E1", "E3", 1, 7), 2);
  auto out = mid_cycle(bb1, 500'000);
  ASSERT_EQ(out.size(), 2u);
  const auto& agg = std::get<AggregatedDs>(out[0].payload);
  EXPECT_EQ(out[0].receiver, BrokerId("BB2"));
  EXPECT_EQ(agg.bandwidth, 30'000);
  EXPECT_EQ(agg.component_ids, (std::vector<DemandId>{"a", "b"}));
  EXPECT_EQ(std::get<AggregatedDs>(out[1].payload).bandwidth, 7);
  EXPECT_TRUE(bb1.demand.forward_buffer.empty());
  EXPECT_EQ(bb1.demand.admission_queue.size(), 3u);
}

TEST(MidCycle, TransitReaggregates) {
  auto states = converged_line3();
  BrokerState& bb2 = states.at(BrokerId("BB2"));
  const DomainId e3("E3");
  receive_aggregated_ds(bb2, BrokerId("BB1"),
                        AggregatedDs{e3, ServiceClass(0), 30'000, 0, BrokerId("BB1"), {"a", "b"}}, 1);
  receive_aggregated_ds(bb2, BrokerId("BB1"),
                        AggregatedDs{e3, ServiceClass(0), 5'000, 0, BrokerId("BB1"), {"c"}}, 2);
  auto out = mid_cycle(bb2, 3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].receiver, BrokerId("BB3"));
  EXPECT_EQ(std::get<AggregatedDs>(out[0].payload).bandwidth, 35'000);
  EXPECT_EQ(std::get<AggregatedDs>(out[0].payload).component_ids.size(), 3u);
}

TEST(MidCycle, LocalDestinationIsNotForwarded) {
  auto states = converged_line3();
  BrokerState& bb3 = states.at(BrokerId("BB3"));
  receive_aggregated_ds(bb3, BrokerId("BB2"),
                        AggregatedDs{DomainId("E3"), ServiceClass(0), 10, 0, BrokerId("BB1"), {"x"}}, 1);
  EXPECT_TRUE(mid_cycle(bb3, 2).empty());
  EXPECT_EQ(bb3.demand.admission_queue.size(), 1u);
}

TEST(EndOfCycle, AdmitsInArrivalOrder) {
  // X12 carries 5000; two 3000 demands for different classes compete.
  for (int first : {0, 1}) {
    auto states = converged_line3();
    BrokerState& bb1 = states.at(BrokerId("BB1"));
    submit_ds(bb1, ds("p", "E1", "E3", first, 3'000), 0);
    submit_ds(bb1, ds("q", "E1", "E3", 1 - first, 3'000), 1);
    mid_cycle(bb1, 2);
    auto r = end_of_cycle(bb1, 3);
    ASSERT_EQ(r.decisions.size(), 2u);
    EXPECT_EQ(r.decisions[0].key.service_class, ServiceClass(first));
    EXPECT_EQ(r.decisions[0].outcome, AdmissionDecision::Outcome::kAdmitted);
    EXPECT_EQ(r.decisions[0].path, (std::vector<LinkId>{LinkId("L1"), LinkId("X12")}));
    EXPECT_EQ(r.decisions[1].outcome, AdmissionDecision::Outcome::kRejected);
    EXPECT_EQ(r.decisions[1].bottleneck, LinkId("X12"));
    ASSERT_EQ(bb1.demand.user_rejections.size(), 1u);
    EXPECT_EQ(bb1.demand.user_rejections[0].component_ids, std::vector<DemandId>{"q"});
    EXPECT_TRUE(r.messages.empty());
    EXPECT_EQ(bb1.filters.at(RouterId("R1a")).size(), 1u);
    EXPECT_EQ(bb1.recent_ledgers.size(), 1u);
  }
}

TEST(EndOfCycle, RejectionTravelsBackToTheOrigin) {
  auto states = converged_line3();
  BrokerState& bb1 = states.at(BrokerId("BB1"));
  BrokerState& bb2 = states.at(BrokerId("BB2"));
  BrokerState& bb3 = states.at(BrokerId("BB3"));
  // A3 carries 2000: the last hop refuses 3000.
  submit_ds(bb1, ds("big", "E1", "E3", 0, 3'000), 0);
  auto m1 = mid_cycle(bb1, 1);
  receive_aggregated_ds(bb2, BrokerId("BB1"), std::get<AggregatedDs>(m1.at(0).payload), 2);
  auto m2 = mid_cycle(bb2, 3);
  receive_aggregated_ds(bb3, BrokerId("BB2"), std::get<AggregatedDs>(m2.at(0).payload), 4);
  mid_cycle(bb3, 5);
  EXPECT_TRUE(end_of_cycle(bb1, 6).messages.empty());
  EXPECT_TRUE(end_of_cycle(bb2, 6).messages.empty());
  auto r3 = end_of_cycle(bb3, 6);
  ASSERT_EQ(r3.decisions.size(), 1u);
  EXPECT_EQ(r3.decisions[0].bottleneck, LinkId("A3"));
  ASSERT_EQ(r3.messages.size(), 1u);
  EXPECT_EQ(r3.messages[0].receiver, BrokerId("BB2"));

  const auto& notice = std::get<RejectionNotice>(r3.messages[0].payload);
  EXPECT_EQ(notice.origin, BrokerId("BB3"));
  auto back = handle_rejection(bb2, BrokerId("BB3"), notice, 7);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].receiver, BrokerId("BB1"));
  auto none = handle_rejection(bb1, BrokerId("BB2"), std::get<RejectionNotice>(back[0].payload), 8);
  EXPECT_TRUE(none.empty());
  ASSERT_EQ(bb1.demand.user_rejections.size(), 1u);
  EXPECT_EQ(bb1.demand.user_rejections[0].rejected_by, BrokerId("BB3"));
  EXPECT_EQ(bb1.demand.user_rejections[0].src_edge, DomainId("E1"));
  // Upstream admissions stay: releasing them is left to hold_terms.
  EXPECT_EQ(bb1.ledger.reserved_total(LinkId("X12")), 3'000);
}

TEST(HandleRejection, UnknownIdThrowsAndChangesNothing) {
  auto states = converged_line3();
  BrokerState& bb2 = states.at(BrokerId("BB2"));
  const auto archive_size = bb2.demand.archive.size();
  RejectionNotice n{DomainId("E3"), ServiceClass(0), 5, 0, BrokerId("BB3"), {"ghost"}};
  EXPECT_EQ(code_of([&] { handle_rejection(bb2, BrokerId("BB3"), n, 1); }),
            ErrorCode::kUnknownOrigin);
  EXPECT_EQ(bb2.demand.archive.size(), archive_size);
}

TEST(MidCycle, NoRouteRejectsOnTheSpot) {
  auto states = converged_line3();
  BrokerState& bb1 = states.at(BrokerId("BB1"));
  bb1.ai_db.clear();
  submit_ds(bb1, ds("lost", "E1", "E3", 0, 10), 0);
  EXPECT_TRUE(mid_cycle(bb1, 1).empty());
  ASSERT_EQ(bb1.demand.user_rejections.size(), 1u);
  EXPECT_TRUE(bb1.demand.admission_queue.empty());
}

TEST(MidCycle, LoopGuardRefusesToSendBack) {
  auto states = converged_line3();
  BrokerState& bb2 = states.at(BrokerId("BB2"));
  // Demand toward E1 arriving from BB1 itself cannot be sent back to BB1.
  receive_aggregated_ds(bb2, BrokerId("BB1"),
                        AggregatedDs{DomainId("E1"), ServiceClass(0), 10, 0, BrokerId("BB1"), {"x"}}, 1);
  auto out = mid_cycle(bb2, 2);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].kind(), MessageKind::kReject);
  EXPECT_EQ(out[0].receiver, BrokerId("BB1"));
}
