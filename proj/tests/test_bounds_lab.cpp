#include <gtest/gtest.h>

#include <cmath>

#include "excut/bounds_lab.hpp"
#include "excut/errors.hpp"
#include "support/oracles.hpp"

using namespace excut;

namespace {

SetSystem make(std::vector<double> w, std::vector<std::vector<std::size_t>> sets) {
  return SetSystem(MeasureSpace(std::move(w)), std::move(sets));
}

// Pr(clock i rings last) = int_0^inf m_i e^{-m_i t} prod_{j != i} (1 - e^{-m_j t}) dt,
// by composite Simpson on [0, 60 / min m].
double last_ring_quadrature(const std::vector<double>& m, std::size_t i) {
  const double lo_rate = *std::min_element(m.begin(), m.end());
  const double upper = 60.0 / lo_rate;
  const std::size_t steps = 200'000;
  const double h = upper / static_cast<double>(steps);
  auto f = [&](double t) {
    double v = m[i] * std::exp(-m[i] * t);
    for (std::size_t j = 0; j < m.size(); ++j)
      if (j != i) v *= 1.0 - std::exp(-m[j] * t);
    return v;
  };
  double sum = f(0.0) + f(upper);
  for (std::size_t s = 1; s < steps; ++s) sum += f(static_cast<double>(s) * h) * (s % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST(EvaluatePass, UpperBoundAndIdentityRules) {
  EstimateReport r;
  r.kind = ClaimKind::upper_bound;
  r.bound = 1.0;
  r.sigmas = 3.0;
  r.std_error = 0.1;
  r.estimate = 1.29;
  EXPECT_TRUE(evaluate_pass(r));
  r.estimate = 1.31;
  EXPECT_FALSE(evaluate_pass(r));
  r.kind = ClaimKind::identity;
  r.estimate = 0.71;
  EXPECT_TRUE(evaluate_pass(r));
  r.estimate = 0.69;
  EXPECT_FALSE(evaluate_pass(r));
  r.estimate = 1.0;
  r.violations = 1;
  EXPECT_FALSE(evaluate_pass(r));
}

TEST(EvaluatePass, ExactStdErrorWidensDegenerateSamples) {
  EstimateReport r;
  r.kind = ClaimKind::identity;
  r.bound = 0.01;
  r.sigmas = 4.0;
  r.estimate = 0.0;
  r.std_error = 0.0;
  EXPECT_FALSE(evaluate_pass(r));
  r.exact_std_error = std::sqrt(0.01 * 0.99 / 10.0);
  EXPECT_TRUE(evaluate_pass(r));
}

TEST(Finalize, StandardErrorAndLowPower) {
  EstimateReport r;
  r.bound = 10.0;
  finalize(r, 1.0, 2.0, 400);
  EXPECT_DOUBLE_EQ(r.std_error, 0.1);
  EXPECT_TRUE(r.low_power);
  finalize(r, 1.0, 2.0, kLowPowerTrials);
  EXPECT_FALSE(r.low_power);
  const auto j = r.to_json();
  EXPECT_EQ(j.at("trials"), kLowPowerTrials);
  EXPECT_EQ(j.at("pass"), true);
}

TEST(CompetitiveBound, Values) {
  EXPECT_DOUBLE_EQ(competitive_bound(1), 2.0);
  EXPECT_NEAR(competitive_bound(10), 6.6052, 1e-4);
  EXPECT_NEAR(competitive_bound(64), 10.3178, 1e-4);
}

TEST(GameCostBound, SingleSet) {
  const auto s = make({1.5, 0.5}, {{0, 1}});
  const EstimateReport r = check_game_cost_bound(s, 100, 1);
  EXPECT_DOUBLE_EQ(r.estimate, 2.0);
  EXPECT_DOUBLE_EQ(r.bound, 4.0);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.reference);
  EXPECT_DOUBLE_EQ(*r.reference, 2.0);
}

TEST(GameCostBound, NestedExactWithinBound) {
  for (std::size_t k = 1; k <= 6; ++k) {
    const SetSystem s = nested_system(k);
    EXPECT_LE(exact_expected_cost(s), competitive_bound(k) * s.set_measure(s.smallest_index()));
    const EstimateReport r = check_game_cost_bound(s, 20'000, k);
    EXPECT_TRUE(r.pass) << k;
  }
}

TEST(GameCostBound, RandomSystemsPassWithOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SetSystem s = random_overlap_system(4, 8, 0.4, seed);
    const EstimateReport r = check_game_cost_bound(s, 20'000, seed);
    EXPECT_TRUE(r.reference.has_value());
    EXPECT_TRUE(r.pass) << r.to_json().dump();
  }
}

TEST(ExponentialTail, ClosedForm) {
  EXPECT_DOUBLE_EQ(exponential_tail_probability(1, 1, 0), 0.5);
  EXPECT_NEAR(exponential_tail_probability(1, 2, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(exponential_tail_probability(1, 1, 1), 0.06767, 1e-5);
  EXPECT_THROW(check_exponential_tail(0.0, 1.0, 0.0, 10, 1), NonPositiveRate);
}

TEST(ExponentialTail, MonteCarloAgrees) {
  const EstimateReport r = check_exponential_tail(1.0, 2.0, 0.5, 100'000, 3);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.estimate, exponential_tail_probability(1.0, 2.0, 0.5), 0.005);
}

TEST(SurpriseBound, EqualPair) {
  const auto s = make({1.0, 1.0}, {{0}, {1}});
  const SurpriseReports r = check_surprise_bound(s, 100'000, 5);
  ASSERT_EQ(r.per_set.size(), 1u);
  EXPECT_DOUBLE_EQ(r.per_set[0].bound, 0.5);
  EXPECT_NEAR(r.per_set[0].estimate, 0.125, 0.01);
  EXPECT_TRUE(r.per_set[0].pass);
  EXPECT_TRUE(r.aggregate.pass);
  const EstimateReport id = check_surprise_probability(s, 1, 0.125, 100'000, 5);
  EXPECT_TRUE(id.pass);
  EXPECT_EQ(id.kind, ClaimKind::identity);
}

TEST(SurpriseBound, NestedPair) {
  const SetSystem s = nested_system(2);
  const SurpriseReports r = check_surprise_bound(s, 100'000, 6);
  ASSERT_EQ(r.per_set.size(), 1u);
  EXPECT_DOUBLE_EQ(r.per_set[0].bound, 0.5 * 1.0 / 2.0);
  EXPECT_TRUE(r.per_set[0].pass);
  EXPECT_TRUE(r.aggregate.pass);
}

TEST(SurpriseBound, RandomSystems) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SurpriseReports r =
        check_surprise_bound(random_overlap_system(8, 16, 0.3, seed), 20'000, seed);
    for (const auto& p : r.per_set) EXPECT_TRUE(p.pass) << p.to_json().dump();
    EXPECT_TRUE(r.aggregate.pass);
  }
}

TEST(DisjointCase, LastHitMatchesQuadrature) {
  for (const std::vector<double>& m :
       {std::vector<double>{1, 2}, {1, 2, 3}, {0.3, 1.7, 2.2, 0.9}}) {
    const auto p = last_hit_probabilities(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      EXPECT_NEAR(p[i], last_ring_quadrature(m, i), 1e-8);
      total += p[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  EXPECT_NEAR(last_hit_probabilities(std::vector<double>{1, 2})[0], 2.0 / 3.0, 1e-12);
}

TEST(DisjointCase, ExpectedCost) {
  const std::vector<double> equal = {2.5, 2.5, 2.5};
  const EstimateReport e = check_disjoint_case(equal, 1000, 1);
  EXPECT_DOUBLE_EQ(e.estimate, 2.5);
  EXPECT_NEAR(e.bound, 2.5, 1e-12);
  EXPECT_TRUE(e.pass);

  const std::vector<double> pair = {1.0, 2.0};
  const EstimateReport r = check_disjoint_case(pair, 100'000, 2);
  EXPECT_NEAR(r.bound, 4.0 / 3.0, 1e-12);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_TRUE(r.pass);

  const std::vector<double> three = {1.0, 2.0, 3.0};
  EXPECT_TRUE(check_disjoint_case(three, 100'000, 3).pass);
}

TEST(ElementCostBound, SingleSetCostsNothing) {
  const auto s = make({1.0}, {{0}});
  const EstimateReport r = check_element_cost_bound(s, 0, 1000, 1);
  EXPECT_DOUBLE_EQ(r.estimate, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(ElementCostBound, DisjointPairMatchesIntegral) {
  // cost = 2 * Pr(h(a) < h(b), h(a) < ln 2 / 2) = (2/3)(1 - 2^{-3/2}) with rates 1, 2.
  const auto s = make({1.0, 2.0}, {{0}, {1}});
  const EstimateReport r = check_element_cost_bound(s, 0, 100'000, 7);
  const double expected = 2.0 / 3.0 * (1.0 - std::pow(2.0, -1.5));
  EXPECT_NEAR(r.estimate, expected, 4 * r.std_error);
  EXPECT_DOUBLE_EQ(r.bound, 2.0 * std::log(2.0));
  EXPECT_TRUE(r.pass);
}

TEST(ElementCostBound, ElementOutsideSmallestSet) {
  const auto s = make({1.0, 2.0}, {{0}, {1}});
  EXPECT_THROW(check_element_cost_bound(s, 1, 10, 1), ElementNotInS1);
}

TEST(ElementCostBound, OverlappingSystems) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SetSystem s = random_overlap_system(6, 12, 0.4, seed);
    for (std::size_t w : s.set(s.smallest_index())) {
      const EstimateReport r = check_element_cost_bound(s, w, 10'000, seed);
      EXPECT_EQ(r.violations, 0u);
      EXPECT_TRUE(r.pass);
    }
  }
}

TEST(HittingOrder, NoViolations) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EstimateReport r = check_hitting_order(random_overlap_system(8, 14, 0.4, seed), 5000, seed);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.sigmas, 0.0);
  }
}

TEST(PartitionCoupling, NoViolations) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SetSystem s = random_overlap_system(6, 12, 0.3, seed);
    const EstimateReport r = check_partition_coupling(s, {{0, 1}, {2, 3, 4}, {5}}, 5000, seed);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_TRUE(r.pass);
  }
  EXPECT_THROW(check_partition_coupling(nested_system(3), {{0}, {1}}, 10, 1), InvalidPartition);
}

TEST(OracleAgreement, SmallSystems) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EstimateReport r = check_oracle_agreement(random_overlap_system(4, 6, 0.5, seed),
                                                    100'000, seed);
    EXPECT_LT(r.estimate, 0.02);
    EXPECT_TRUE(r.pass);
  }
}

TEST(CompetitiveRatio, RaceInstance) {
  const CenterSet c(PointCloud::from_rows({{1.0, 0.0}, {0.0, 2.0}}));
  const auto x = PointCloud::from_rows({{0.0, 0.0}});
  const EstimateReport r = check_competitive_ratio(x, c, 100'000, 1);
  EXPECT_NEAR(r.estimate, 4.0 / 3.0, 0.02);
  EXPECT_NEAR(r.bound, 3.386, 1e-3);
  EXPECT_TRUE(r.pass);
}

TEST(CompetitiveRatio, ZeroOptimal) {
  const CenterSet c(PointCloud::from_rows({{1.0}, {2.0}}));
  EXPECT_THROW(check_competitive_ratio(c.points(), c, 10, 1), ZeroOptimal);
}

TEST(CompetitiveRatio, Mixtures) {
  for (std::size_t k : {2, 4, 8, 16, 32}) {
    const RatioInstance inst = mixture_instance(300, 4, k, k);
    const EstimateReport r = check_competitive_ratio(inst.data, inst.centers, 300, k);
    EXPECT_TRUE(r.pass) << r.to_json().dump();
    EXPECT_GE(r.estimate, 1.0 - 1e-12);
  }
}

TEST(Families, ShapesAndValidity) {
  const SetSystem n = nested_system(4);
  EXPECT_TRUE(n.report().ok());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(n.set_measure(i), static_cast<double>(i + 1));
  const SetSystem r = random_overlap_system(10, 20, 0.3, 4);
  EXPECT_TRUE(r.report().ok());
  EXPECT_EQ(r.num_sets(), 10u);
  const PointCloud g = gaussian_mixture(50, 3, 4, 10.0, 1);
  EXPECT_EQ(g.size(), 50u);
  EXPECT_EQ(g.dim(), 3u);
  const RatioInstance inst = mixture_instance(100, 2, 3, 9);
  for (double v : inst.data.values()) EXPECT_LE(std::abs(v), inst.centers.bound());
  EXPECT_NEAR(inst.objective, reference_cost(inst.data, inst.centers), 1e-9);
}
