#include <gtest/gtest.h>

#include <cmath>

#include "excut/bounds_lab.hpp"
#include "excut/errors.hpp"
#include "excut/threshold_tree.hpp"

using namespace excut;

namespace {

CenterSet centers(std::vector<std::vector<double>> rows) {
  return CenterSet(PointCloud::from_rows(rows));
}

CenterSet random_centers(std::size_t k, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(k, std::vector<double>(d));
  for (auto& r : rows)
    for (double& v : r) v = rng.uniform_open(-5.0, 5.0);
  return centers(rows);
}

}  // namespace

TEST(BuildTree, SingleCenterNeedsNoCuts) {
  const auto c = centers({{0.5, -1.0}});
  Rng rng(1);
  const BuildResult r = build_tree(c, rng);
  EXPECT_TRUE(r.cuts.empty());
  EXPECT_EQ(r.tree.num_leaves(), 1u);
  EXPECT_TRUE(r.tree.complete());
}

TEST(BuildTree, TwoCentersNeedTwoCutsOnAverage) {
  // Success probability per cut is |[0,1)| / |(-1,1)| = 1/2: geometric with mean 2.
  const auto c = centers({{0.0}, {1.0}});
  ASSERT_DOUBLE_EQ(c.bound(), 1.0);
  const std::size_t runs = 100'000;
  double total = 0.0;
  for (std::size_t t = 0; t < runs; ++t) {
    Rng rng(derive_seed(3, "cuts", 0, t));
    total += static_cast<double>(build_tree(c, rng).cuts.size());
  }
  EXPECT_NEAR(total / runs, 2.0, 2.0 * 0.02);
}

TEST(BuildTree, CollinearCentersKeepAxisOrder) {
  const auto c = centers({{-1.0}, {0.0}, {1.0}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const BuildResult r = build_tree(c, rng);
    std::vector<std::size_t> order;
    for (std::size_t leaf : r.tree.leaves()) order.push_back(r.tree.node(leaf).centers.at(0));
    EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2}));
  }
}

TEST(BuildTree, StructuralInvariants) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = random_centers(2 + seed % 12, 1 + seed % 4, seed);
    Rng rng(seed);
    const BuildResult r = build_tree(c, rng);
    EXPECT_NO_THROW(r.tree.check_invariants(c));
    EXPECT_EQ(r.tree.num_leaves(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(r.tree.assign(c[i]), i);
    for (const ThresholdCut& cut : r.cuts) {
      EXPECT_LT(cut.coordinate, c.dim());
      EXPECT_GT(cut.threshold, -c.bound());
      EXPECT_LT(cut.threshold, c.bound());
    }
  }
}

TEST(BuildTree, CutLimit) {
  // Separation probability 1e-6 / 40 per cut.
  const auto c = centers({{10.0, 0.0}, {10.0, 1e-6}});
  Rng rng(1);
  EXPECT_THROW(build_tree(c, rng, 5), CutLimitExceeded);
}

TEST(BuildTree, DeterministicGivenSeed) {
  const auto c = random_centers(8, 3, 42);
  Rng a(5), b(5);
  EXPECT_EQ(build_tree(c, a).tree.to_json(), build_tree(c, b).tree.to_json());
}

TEST(ThresholdTree, LeafCellsPartitionSpace) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = random_centers(6, 2, seed + 100);
    Rng rng(seed);
    const ThresholdTree tree = build_tree(c, rng).tree;
    Rng pts(seed + 7);
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> x = {pts.uniform_open(-8, 8), pts.uniform_open(-8, 8)};
      std::size_t inside = 0;
      for (std::size_t leaf : tree.leaves()) inside += tree.cell(leaf).contains(x);
      EXPECT_EQ(inside, 1u);
      EXPECT_TRUE(tree.cell(tree.leaf_of(x)).contains(x));
    }
  }
}

TEST(ThresholdTree, JsonRoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = random_centers(7, 3, seed);
    Rng rng(seed);
    const ThresholdTree tree = build_tree(c, rng).tree;
    const nlohmann::json j = tree.to_json();
    const ThresholdTree back = ThresholdTree::from_json(nlohmann::json::parse(j.dump()), 3);
    EXPECT_EQ(back.to_json(), j);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(back.assign(c[i]), i);
  }
}

TEST(ThresholdTree, FromJsonRejectsMalformed) {
  EXPECT_THROW(ThresholdTree::from_json(nlohmann::json::parse(R"({"foo": 1})"), 1), ParseError);
  // Leaves must be a permutation of 0..k-1.
  const auto dup = nlohmann::json::parse(
      R"({"cut": {"j": 0, "theta": 0.5}, "left": {"center": 0}, "right": {"center": 0}})");
  EXPECT_THROW(ThresholdTree::from_json(dup, 1), ParseError);
  const auto bad_dim = nlohmann::json::parse(
      R"({"cut": {"j": 3, "theta": 0.5}, "left": {"center": 0}, "right": {"center": 1}})");
  EXPECT_THROW(ThresholdTree::from_json(bad_dim, 1), ParseError);
}

TEST(TreeCost, ZeroWhenPointsAreCenters) {
  const auto c = random_centers(5, 2, 9);
  Rng rng(9);
  const ThresholdTree tree = build_tree(c, rng).tree;
  EXPECT_DOUBLE_EQ(tree_cost(tree, c.points(), c, CostMode::proxy), 0.0);
  EXPECT_DOUBLE_EQ(tree_cost(tree, c.points(), c, CostMode::optimal), 0.0);
}

TEST(TreeCost, SingleLeafTwoPoints) {
  const auto c = centers({{1.0}});
  const ThresholdTree tree(1, 1);
  const auto data = PointCloud::from_rows({{0.0}, {2.0}});
  EXPECT_DOUBLE_EQ(tree_cost(tree, data, c, CostMode::proxy), 2.0);
  EXPECT_DOUBLE_EQ(tree_cost(tree, data, c, CostMode::optimal), 2.0);
}

TEST(TreeCost, OptimalNeverExceedsProxy) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = random_centers(4, 2, seed);
    const PointCloud data = gaussian_mixture(60, 2, 4, 5.0, seed);
    Rng rng(seed);
    const ThresholdTree tree = build_tree(c, rng).tree;
    EXPECT_LE(tree_cost(tree, data, c, CostMode::optimal),
              tree_cost(tree, data, c, CostMode::proxy) + 1e-9);
  }
}

TEST(TreeCost, RaceInstanceExpectedProxyCost) {
  // x = (0,0) with cut sets of mass 1 (c0) and 2 (c1) on different axes.
  const auto c = centers({{1.0, 0.0}, {0.0, 2.0}});
  const auto x = PointCloud::from_rows({{0.0, 0.0}});
  const std::size_t trees = 100'000;
  double total = 0.0;
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(derive_seed(21, "race", 0, t));
    total += tree_cost(build_tree(c, rng).tree, x, c, CostMode::proxy);
  }
  EXPECT_NEAR(total / trees, 4.0 / 3.0, 0.02);
}

TEST(CutSet, Examples) {
  const std::vector<double> x = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(cut_set(x, x, 1.0).measure(), 0.0);

  const std::vector<double> c1 = {1.0, 0.0};
  const CutSet a = cut_set(x, c1, 2.0);
  ASSERT_EQ(a.intervals.size(), 1u);
  EXPECT_EQ(a.intervals[0].coordinate, 0u);
  EXPECT_DOUBLE_EQ(a.intervals[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(a.intervals[0].hi, 1.0);
  EXPECT_DOUBLE_EQ(a.measure(), 1.0);

  const std::vector<double> c2 = {1.0, -2.0};
  const CutSet b = cut_set(x, c2, 2.0);
  ASSERT_EQ(b.intervals.size(), 2u);
  EXPECT_DOUBLE_EQ(b.intervals[1].lo, -2.0);
  EXPECT_DOUBLE_EQ(b.intervals[1].hi, 0.0);
  EXPECT_DOUBLE_EQ(b.measure(), 3.0);
}

TEST(CutSet, MembershipMatchesSeparation) {
  Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::vector<double> x = {rng.uniform_open(-3, 3), rng.uniform_open(-3, 3)};
    const std::vector<double> c = {rng.uniform_open(-3, 3), rng.uniform_open(-3, 3)};
    const CutSet s = cut_set(x, c, 3.0);
    EXPECT_NEAR(s.measure(), std::abs(x[0] - c[0]) + std::abs(x[1] - c[1]), 1e-12);
    const ThresholdCut cut = sample_cut(2, 3.0, rng);
    EXPECT_EQ(s.contains(cut), cut.separates(x, c));
  }
}

TEST(QuotientSystem, NestedOnTheLine) {
  const auto c = centers({{1.0}, {2.0}});
  const std::vector<double> x = {0.0};
  const QuotientSystem q = quotient_system(x, c);
  ASSERT_EQ(q.system.num_elements(), 2u);
  EXPECT_DOUBLE_EQ(q.system.set_measure(0), 1.0);
  EXPECT_DOUBLE_EQ(q.system.set_measure(1), 2.0);
  EXPECT_EQ(q.element_of({0, 0.5}), q.element_of({0, 0.1}));
  EXPECT_NE(q.element_of({0, 0.5}), q.element_of({0, 1.5}));
  EXPECT_EQ(q.element_of({0, -0.5}), kNoElement);
}

TEST(QuotientSystem, DifferentAxesGiveDisjointSets) {
  const auto c = centers({{1.0, 0.0}, {0.0, 2.0}});
  const std::vector<double> x = {0.0, 0.0};
  const QuotientSystem q = quotient_system(x, c);
  EXPECT_EQ(q.system.num_elements(), 2u);
  EXPECT_DOUBLE_EQ(q.system.set_measure(0), 1.0);
  EXPECT_DOUBLE_EQ(q.system.set_measure(1), 2.0);
  const auto p = exact_winner_distribution(q.system);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(exact_expected_cost(q.system), 4.0 / 3.0, 1e-12);
}

TEST(QuotientSystem, SingleCenter) {
  const auto c = centers({{1.0, -0.5}});
  const std::vector<double> x = {0.0, 0.0};
  const QuotientSystem q = quotient_system(x, c);
  ASSERT_EQ(q.system.num_sets(), 1u);
  EXPECT_DOUBLE_EQ(q.system.set_measure(0), 1.5);
}

TEST(QuotientSystem, SetMeasuresAreDistances) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = random_centers(5, 3, seed);
    Rng rng(seed);
    std::vector<double> x(3);
    for (double& v : x) v = rng.uniform_open(-c.bound(), c.bound());
    bool x_is_center = false;
    for (std::size_t i = 0; i < c.size(); ++i) x_is_center |= l1_distance(x, c[i]) == 0.0;
    if (x_is_center) continue;
    for (bool merge : {true, false}) {
      const QuotientSystem q = quotient_system(x, c, merge);
      for (std::size_t i = 0; i < c.size(); ++i)
        EXPECT_NEAR(q.system.set_measure(i), l1_distance(x, c[i]), 1e-9);
    }
  }
}

TEST(Replay, SingleCenterSurvivesAtRoundZero) {
  const auto c = centers({{1.0}});
  const std::vector<double> x = {0.0};
  const ReplayReport r = replay_reduction(x, c, {});
  EXPECT_EQ(r.survivor, 0u);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0], std::vector<std::size_t>{0});
}

TEST(Replay, TreeCellMatchesGameEveryRound) {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto c = random_centers(2 + seed % 6, 1 + seed % 3, seed / 7);
    Rng rng(seed);
    std::vector<double> x(c.dim());
    for (double& v : x) v = rng.uniform_open(-c.bound(), c.bound());
    const BuildResult built = build_tree(c, rng);
    const ReplayReport r = replay_reduction(x, c, built.cuts);
    EXPECT_EQ(r.survivor, built.tree.assign(x));
    EXPECT_EQ(r.cells.size(), built.cuts.size() + 1);
  }
}

TEST(Replay, RaceSurvivorDistribution) {
  const auto c = centers({{1.0, 0.0}, {0.0, 2.0}});
  const std::vector<double> x = {0.0, 0.0};
  const std::size_t trees = 100'000;
  std::size_t first = 0;
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(derive_seed(23, "replay", 0, t));
    first += replay_reduction(x, c, build_tree(c, rng).cuts).survivor == 0;
  }
  EXPECT_NEAR(static_cast<double>(first) / trees, 2.0 / 3.0, 0.01);
}
