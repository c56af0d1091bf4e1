#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "knnshap/dataset.hpp"
#include "knnshap/errors.hpp"
#include "knnshap/game.hpp"
#include "knnshap/neighbors.hpp"
#include "test_util.hpp"

namespace knnshap {
namespace {

TEST(DatasetTest, RejectsBadShapes) {
  EXPECT_THROW(Dataset({}, 1, {}, Task::classification), DataError);
  EXPECT_THROW(Dataset({1.0, 2.0, 3.0}, 2, {0.0}, Task::classification), DataError);
  EXPECT_THROW(Dataset({1.0}, 1, {0.5}, Task::classification), DataError);
  EXPECT_THROW(Dataset({std::nan("")}, 1, {0.0}, Task::regression), DataError);
  EXPECT_NO_THROW(Dataset({1.0}, 1, {0.5}, Task::regression));
}

TEST(SellerMapTest, RequiresEverySeller) {
  EXPECT_THROW(SellerMap({0, 2}), DataError);
  SellerMap map({1, 0, 1});
  EXPECT_EQ(map.seller_count(), 2u);
  EXPECT_EQ(map.points_of(1), (std::vector<std::size_t>{0, 2}));
}

TEST(RankTest, ScalarSort) {
  Dataset ds({3.0, 1.0, 2.0}, 1, {0, 0, 0}, Task::classification);
  const double q = 0.0;
  auto ranked = rank_by_distance(ds, std::span(&q, 1));
  EXPECT_EQ(ranked.order, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_DOUBLE_EQ(ranked.distances[0], 1.0);
}

TEST(RankTest, TiesKeepIndexOrder) {
  std::vector<double> x(9 * 2, 5.0);
  x[4 * 2] = 1.0;
  x[4 * 2 + 1] = 1.0;
  x[7 * 2] = 1.0;
  x[7 * 2 + 1] = 1.0;
  Dataset ds(x, 2, std::vector<double>(9, 0.0), Task::classification);
  std::vector<double> q{0.0, 0.0};
  auto ranked = rank_by_distance(ds, q);
  EXPECT_EQ(ranked.order[0], 4u);
  EXPECT_EQ(ranked.order[1], 7u);
}

TEST(RankTest, DimensionMismatch) {
  Dataset ds({1.0, 2.0}, 2, {0.0}, Task::classification);
  std::vector<double> q{0.0};
  EXPECT_THROW(rank_by_distance(ds, q), DataError);
}

TEST(RankTest, RandomPermutationProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto ds = testing::random_dataset(rng, 40, 3, Task::classification);
    auto qs = testing::random_queries(rng, 1, 3, Task::classification);
    auto ranked = rank_by_distance(ds, qs.row(0));
    auto sorted = ranked.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> ids(40);
    std::iota(ids.begin(), ids.end(), 0);
    EXPECT_EQ(sorted, ids);
    EXPECT_TRUE(std::is_sorted(ranked.distances.begin(), ranked.distances.end()));
  }
}

TEST(RankTest, QueryOnStoredPoint) {
  std::mt19937_64 rng(5);
  auto ds = testing::random_dataset(rng, 20, 4, Task::classification);
  auto ranked = rank_by_distance(ds, ds.row(11));
  EXPECT_EQ(ranked.order[0], 11u);
  EXPECT_EQ(ranked.distances[0], 0.0);
}

TEST(UtilityTest, SpecExamples) {
  auto ds = testing::line_dataset({1, 0, 1}, Task::classification);
  Query q{std::span<const double>(), 1.0};
  std::vector<double> origin{0.0};
  q.x = origin;
  GameSpec k1{Task::classification, 1};
  std::vector<std::size_t> first{0};
  EXPECT_DOUBLE_EQ(utility(ds, first, q, k1), 1.0);

  GameSpec k2{Task::classification, 2};
  std::vector<std::size_t> all{2, 0, 1};
  EXPECT_DOUBLE_EQ(utility(ds, all, q, k2), 0.5);
  EXPECT_DOUBLE_EQ(utility(ds, {}, q, k2), 0.0);

  auto reg = testing::line_dataset({3.0}, Task::regression);
  Query rq{origin, 2.0};
  GameSpec r1{Task::regression, 1};
  EXPECT_DOUBLE_EQ(utility(reg, first, rq, r1), -1.0);
  EXPECT_DOUBLE_EQ(utility(reg, {}, rq, r1), 0.0);
}

TEST(UtilityTest, OrderInvariantAndFarPointIgnored) {
  std::mt19937_64 rng(9);
  for (Task task : {Task::classification, Task::regression}) {
    for (int trial = 0; trial < 30; ++trial) {
      auto ds = testing::random_dataset(rng, 12, 2, task);
      auto qs = testing::random_queries(rng, 1, 2, task);
      auto q = query_at(qs, 0);
      GameSpec spec{task, 3};
      if (trial % 2) spec.weights = make_weight_rule("inverse");
      std::vector<std::size_t> s{0, 3, 5, 7, 9};
      const double v = utility(ds, s, q, spec);
      std::vector<std::size_t> shuffled{9, 5, 0, 7, 3};
      EXPECT_DOUBLE_EQ(utility(ds, shuffled, q, spec), v);
      auto ranked = rank_by_distance(ds, q.x);
      // The farthest point never enters a set whose K nearest are closer.
      const std::size_t far = ranked.order.back();
      if (std::find(s.begin(), s.end(), far) == s.end()) {
        auto with_far = s;
        with_far.push_back(far);
        EXPECT_DOUBLE_EQ(utility(ds, with_far, q, spec), v);
      }
    }
  }
}

TEST(UtilityTest, UniformWeightsMatchUnweighted) {
  std::mt19937_64 rng(13);
  for (Task task : {Task::classification, Task::regression}) {
    auto ds = testing::random_dataset(rng, 10, 2, task);
    auto qs = testing::random_queries(rng, 1, 2, task);
    GameSpec plain{task, 3};
    GameSpec uniform{task, 3, make_weight_rule("uniform")};
    std::vector<std::size_t> s{1, 2, 4, 8};
    EXPECT_NEAR(utility(ds, s, query_at(qs, 0), plain),
                utility(ds, s, query_at(qs, 0), uniform), 1e-15);
  }
}

TEST(WeightTest, InverseDistanceNormalised) {
  InverseDistanceWeights rule;
  std::vector<double> d{1.0, 2.0, 4.0};
  std::vector<double> w(3);
  rule.weights(d, 3, w);
  EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-15);
  EXPECT_NEAR(w[0] / w[1], 2.0, 1e-12);
  std::vector<double> z{0.0, 0.0, 3.0};
  rule.weights(z, 3, w);
  EXPECT_EQ(w, (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_THROW(make_weight_rule("gaussian"), UsageError);
}

TEST(CompositeUtilityTest, NeedsAnalystAndData) {
  auto ds = testing::line_dataset({1, 0, 1}, Task::classification);
  std::vector<double> origin{0.0};
  Query q{origin, 1.0};
  GameSpec spec{Task::classification, 1};
  spec.composite = true;
  spec.sellers = SellerMap({0, 1, 1});
  EXPECT_EQ(composite_utility(ds, q, spec, {{}, true}), 0.0);
  EXPECT_EQ(composite_utility(ds, q, spec, {{0}, false}), 0.0);
  EXPECT_EQ(composite_utility(ds, q, spec, {{0}, true}), 1.0);
  EXPECT_EQ(composite_utility(ds, q, spec, {{1}, true}), 0.0);
  std::vector<std::size_t> all{0, 1, 2};
  GameSpec point_spec{Task::classification, 1};
  EXPECT_EQ(composite_utility(ds, q, spec, {{0, 1}, true}),
            utility(ds, all, q, point_spec));
}

TEST(AggregateTest, ColumnMean) {
  std::vector<std::vector<double>> one{{1.0, -2.0}};
  EXPECT_EQ(aggregate_over_queries(one), (std::vector<double>{1.0, -2.0}));
  std::vector<std::vector<double>> opposite{{1.0, -2.0}, {-1.0, 2.0}};
  EXPECT_EQ(aggregate_over_queries(opposite), (std::vector<double>{0.0, 0.0}));
  std::vector<std::vector<double>> unit{{1.0, 0.0}, {0.0, 1.0}};
  EXPECT_EQ(aggregate_over_queries(unit), (std::vector<double>{0.5, 0.5}));
}

TEST(GameSpecTest, Validation) {
  GameSpec spec{Task::classification, 0};
  EXPECT_THROW(spec.validate(3), UsageError);
  spec.k = 4;
  EXPECT_THROW(spec.validate(3), UsageError);
  spec.k = 2;
  spec.sellers = SellerMap({0, 1});
  EXPECT_THROW(spec.validate(3), UsageError);
  EXPECT_NO_THROW(spec.validate(2));
}

}  // namespace
}  // namespace knnshap
