#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "bbroker/qos.hpp"

using namespace bbroker;

namespace {

AvailabilityInfo make_ai(Micros avg, Micros max, Micros jitter, Kbps bw, LossProb loss,
                         const std::string& origin = "BB1") {
  AvailabilityInfo ai;
  ai.edge_domain = DomainId("E1");
  ai.service_class = ServiceClass(0);
  ai.avg_delay = avg;
  ai.max_delay = max;
  ai.jitter = jitter;
  ai.bandwidth = bw;
  ai.loss = loss;
  ai.origin_broker = BrokerId(origin);
  ai.valid_until = 5'000'000;
  return ai;
}

TransitCost make_cost(Micros avg, Micros max, Micros jitter, std::optional<Kbps> bottleneck,
                      LossProb loss) {
  TransitCost t;
  t.avg_delay = avg;
  t.max_delay = max;
  t.jitter = jitter;
  t.bottleneck = bottleneck ? Bottleneck::of(*bottleneck) : Bottleneck::unbounded();
  t.loss = loss;
  return t;
}

TransitCost random_cost(std::mt19937_64& rng) {
  std::uniform_int_distribution<Micros> d(0, 100'000);
  std::uniform_real_distribution<double> l(0.0, 0.1);
  std::uniform_int_distribution<Kbps> c(1, 1'000'000);
  const Micros avg = d(rng);
  return make_cost(avg, avg + d(rng), d(rng) / 10, c(rng), l(rng));
}

AvailabilityInfo random_ai(std::mt19937_64& rng) {
  // Small ranges so that ties on leading fields are frequent.
  std::uniform_int_distribution<Micros> d(0, 3);
  std::uniform_int_distribution<int> o(1, 3);
  const double losses[] = {0.0, 0.01, 0.02};
  const Micros avg = d(rng);
  return make_ai(avg, avg + d(rng), d(rng), 100 * (1 + d(rng)), losses[d(rng) % 3],
                 "BB" + std::to_string(o(rng)));
}

AiOrder flip(AiOrder o) {
  if (o == AiOrder::kBetter) return AiOrder::kWorse;
  if (o == AiOrder::kWorse) return AiOrder::kBetter;
  return AiOrder::kEqual;
}

}  // namespace

TEST(ServiceClass, RangeIsSixBits) {
  EXPECT_NO_THROW(ServiceClass(0));
  EXPECT_NO_THROW(ServiceClass(63));
  EXPECT_THROW(ServiceClass(64), Error);
  EXPECT_THROW(ServiceClass(-1), Error);
}

TEST(CompareAi, IdenticalRecordsAreEqual) {
  auto a = make_ai(10'000, 20'000, 0, 100'000, 0.01);
  EXPECT_EQ(compare_ai(a, a), AiOrder::kEqual);
}

TEST(CompareAi, LowerAverageDelayWins) {
  auto a = make_ai(10'000, 30'000, 0, 100'000, 0.01);
  auto b = make_ai(20'000, 30'000, 0, 100'000, 0.01);
  EXPECT_EQ(compare_ai(a, b), AiOrder::kBetter);
  EXPECT_EQ(compare_ai(b, a), AiOrder::kWorse);
}

TEST(CompareAi, HigherBandwidthBreaksTies) {
  auto a = make_ai(10'000, 20'000, 0, 100'000, 0.01);
  auto b = make_ai(10'000, 20'000, 0, 50'000, 0.01);
  EXPECT_EQ(compare_ai(a, b), AiOrder::kBetter);
}

TEST(CompareAi, ValidUntilIsIgnored) {
  auto a = make_ai(1, 2, 0, 10, 0.0);
  auto b = a;
  b.valid_until = 99;
  EXPECT_EQ(compare_ai(a, b), AiOrder::kEqual);
}

TEST(CompareAi, MismatchedKeyThrows) {
  auto a = make_ai(1, 2, 0, 10, 0.0);
  auto b = a;
  b.edge_domain = DomainId("E2");
  try {
    compare_ai(a, b);
    FAIL() << "expected MismatchedKey";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatchedKey);
  }
  b = a;
  b.service_class = ServiceClass(1);
  EXPECT_THROW(compare_ai(a, b), Error);
}

TEST(CompareAi, TotalOrderLawsOnRandomTriples) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20'000; ++i) {
    auto a = random_ai(rng), b = random_ai(rng), c = random_ai(rng);
    const AiOrder ab = compare_ai(a, b);
    EXPECT_EQ(compare_ai(b, a), flip(ab));
    if (ab == AiOrder::kEqual) EXPECT_TRUE(same_parameters(a, b));
    if (ab == AiOrder::kBetter && compare_ai(b, c) == AiOrder::kBetter) {
      EXPECT_EQ(compare_ai(a, c), AiOrder::kBetter);
    }
  }
}

TEST(Compose, IdentityLeavesAiUnchanged) {
  auto ai = make_ai(10'000, 20'000, 2'000, 100'000, 0.01);
  EXPECT_EQ(compose(TransitCost::identity(), ai), ai);
}

TEST(Compose, WorkedExample) {
  auto t = make_cost(5'000, 8'000, 1'000, 50'000, 0.02);
  auto ai = make_ai(10'000, 20'000, 2'000, 100'000, 0.01);
  auto out = compose(t, ai);
  EXPECT_EQ(out.avg_delay, 15'000);
  EXPECT_EQ(out.max_delay, 28'000);
  EXPECT_EQ(out.jitter, 3'000);
  EXPECT_EQ(out.bandwidth, 50'000);
  EXPECT_NEAR(out.loss, 0.0298, 1e-15);
  EXPECT_EQ(out.edge_domain, ai.edge_domain);
  EXPECT_EQ(out.service_class, ai.service_class);
  EXPECT_EQ(out.valid_until, ai.valid_until);
  EXPECT_EQ(out.origin_broker, ai.origin_broker);
}

TEST(Compose, ZeroLossOperandIsExact) {
  EXPECT_EQ(compose_loss(0.0, 0.0123456789), 0.0123456789);
  EXPECT_EQ(compose_loss(0.0123456789, 0.0), 0.0123456789);
}

TEST(Compose, ChainedEqualsMergedComposition) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1'000; ++i) {
    auto t1 = random_cost(rng), t2 = random_cost(rng);
    auto ai = make_ai(1'000, 2'000, 10, 500'000, 0.003);
    // Per-hop oracle: apply each segment separately, t1 first.
    auto chained = compose(t2, compose(t1, ai));
    auto merged = compose(merge_costs(t1, t2), ai);
    EXPECT_EQ(chained.avg_delay, merged.avg_delay);
    EXPECT_EQ(chained.max_delay, merged.max_delay);
    EXPECT_EQ(chained.jitter, merged.jitter);
    EXPECT_EQ(chained.bandwidth, merged.bandwidth);
    EXPECT_NEAR(chained.loss, merged.loss, 1e-15);
    const double survival = (1 - t1.loss) * (1 - t2.loss) * (1 - ai.loss);
    EXPECT_NEAR(chained.loss, 1 - survival, 1e-15);
  }
}

TEST(Compose, MonotoneInEveryField) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1'000; ++i) {
    auto ai = random_ai(rng);
    auto out = compose(random_cost(rng), ai);
    EXPECT_GE(out.avg_delay, ai.avg_delay);
    EXPECT_GE(out.max_delay, ai.max_delay);
    EXPECT_GE(out.jitter, ai.jitter);
    EXPECT_GE(out.loss, ai.loss);
    EXPECT_LE(out.bandwidth, ai.bandwidth);
  }
}

TEST(Compose, IsotoneOnRandomPairs) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20'000; ++i) {
    auto a = random_ai(rng), b = random_ai(rng);
    auto t = random_cost(rng);
    if (compare_ai(a, b) != AiOrder::kBetter) continue;
    EXPECT_NE(compare_ai(compose(t, a), compose(t, b)), AiOrder::kWorse);
  }
}

TEST(MergeCosts, IdentityIsNeutral) {
  auto t = make_cost(5'000, 6'000, 7, 40'000, 0.01);
  EXPECT_EQ(merge_costs(TransitCost::identity(), t), t);
  EXPECT_EQ(merge_costs(t, TransitCost::identity()), t);
}

TEST(MergeCosts, DoublingExample) {
  auto t = make_cost(5'000, 6'000, 100, 40'000, 0.01);
  auto m = merge_costs(t, t);
  EXPECT_EQ(m.avg_delay, 10'000);
  EXPECT_EQ(m.max_delay, 12'000);
  EXPECT_EQ(m.jitter, 200);
  EXPECT_EQ(m.bottleneck, Bottleneck::of(40'000));
  EXPECT_NEAR(m.loss, 0.0199, 1e-15);
}

TEST(MergeCosts, AllParenthesizationsAgree) {
  std::mt19937_64 rng(19);
  // Every binary bracketing of a 5-element sequence.
  std::function<std::vector<TransitCost>(const std::vector<TransitCost>&, std::size_t, std::size_t)>
      fold_all = [&](const std::vector<TransitCost>& xs, std::size_t lo, std::size_t hi) {
        if (hi - lo == 1) return std::vector<TransitCost>{xs[lo]};
        std::vector<TransitCost> out;
        for (std::size_t mid = lo + 1; mid < hi; ++mid) {
          for (const auto& l : fold_all(xs, lo, mid)) {
            for (const auto& r : fold_all(xs, mid, hi)) out.push_back(merge_costs(l, r));
          }
        }
        return out;
      };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TransitCost> xs;
    for (int i = 0; i < 5; ++i) xs.push_back(random_cost(rng));
    const auto all = fold_all(xs, 0, xs.size());
    ASSERT_EQ(all.size(), 14u);
    for (const auto& t : all) {
      EXPECT_EQ(t.avg_delay, all[0].avg_delay);
      EXPECT_EQ(t.max_delay, all[0].max_delay);
      EXPECT_EQ(t.jitter, all[0].jitter);
      EXPECT_EQ(t.bottleneck, all[0].bottleneck);
      EXPECT_NEAR(t.loss, all[0].loss, 1e-15);
    }
  }
}

TEST(Bottleneck, UnboundedIsIdentityForMin) {
  EXPECT_EQ(min(Bottleneck::unbounded(), Bottleneck::of(5)), Bottleneck::of(5));
  EXPECT_EQ(min(Bottleneck::of(7), Bottleneck::of(5)), Bottleneck::of(5));
  EXPECT_TRUE(min(Bottleneck::unbounded(), Bottleneck::unbounded()).is_unbounded());
  EXPECT_EQ(Bottleneck::unbounded().clamp(123), 123);
}
