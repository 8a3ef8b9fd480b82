#include <gtest/gtest.h>

#include <cmath>

#include "taskmix/model.hpp"
#include "taskmix/rng.hpp"

using namespace taskmix;

namespace {

constexpr std::uint32_t D = 64;

LinearModel two_task_model(bool trunk) {
  return LinearModel({{"a", {"x", "y", "z"}}, {"b", {"x", "y", "z"}}, {"c", {"p", "q"}}}, D, trunk);
}

void randomize(LinearModel& m, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t k = 0; k < m.num_matrices(); ++k)
    for (std::uint32_t f = 0; f < D; ++f) {
      double* col = m.matrix_mut(k).column_mut(f);
      for (std::size_t r = 0; r < m.matrix(k).rows(); ++r) col[r] = rng.uniform() - 0.5;
    }
}

}  // namespace

TEST(Model, TrunkSharedByIdenticalLabelSets) {
  const auto m = two_task_model(true);
  EXPECT_EQ(m.num_matrices(), 5u);  // three heads, two trunk blocks
  EXPECT_EQ(m.matrices_of(0).second, m.matrices_of(1).second);
  EXPECT_NE(m.matrices_of(0).second, m.matrices_of(2).second);
  EXPECT_EQ(two_task_model(false).num_matrices(), 3u);
}

TEST(Model, GradientCheck) {
  for (bool trunk : {false, true}) {
    auto m = two_task_model(trunk);
    randomize(m, 3);
    Rng rng(4);
    std::vector<FeatureVector> xs;
    for (int i = 0; i < 16; ++i) xs.push_back(featurize("w" + std::to_string(rng.below(30)) + " w" +
                                                        std::to_string(rng.below(30)) + " v", D));
    std::vector<Example> batch;
    for (std::size_t i = 0; i < xs.size(); ++i) batch.push_back({i % 3, &xs[i], i % 2});
    const double err = gradient_check(m, batch, 1e-2, 1e-5, 2000,
                                      [&](std::size_t n) { return static_cast<std::size_t>(rng.below(n)); });
    EXPECT_LT(err, 1e-4) << "trunk=" << trunk;
  }
}

TEST(Model, ClosedFormAtZero) {
  auto m = two_task_model(false);
  const auto x = featurize("alpha beta", D);
  const Example ex{0, &x, 1};
  const auto g = m.gradient(std::span(&ex, 1), 0.0);
  // Uniform softmax over 3 labels minus the one-hot target, times each feature.
  for (const auto& [f, v] : x.entries)
    for (std::size_t r = 0; r < 3; ++r) EXPECT_DOUBLE_EQ(g.get(0, f, r), ((r == 1 ? -2.0 : 1.0) / 3.0) * v);
  EXPECT_EQ(m.predict(0, x), 0u);  // ties resolve to the lowest index
}

TEST(Model, PerExampleContributionsAdd) {
  auto m = two_task_model(true);
  randomize(m, 8);
  const auto x = featurize("one two", D), y = featurize("three", D);
  const std::vector<Example> single = {{0, &x, 2}};
  const std::vector<Example> twice = {{0, &x, 2}, {0, &x, 2}};
  const auto g1 = m.gradient(single, 0.0);
  const auto g2 = m.gradient(twice, 0.0);
  // Summed over the batch a duplicate contributes exactly twice; after the
  // 1/|batch| mean the pair equals the single example bit for bit.
  EXPECT_EQ(g2.values, g1.values);
  const std::vector<Example> mixed = {{0, &x, 2}, {0, &x, 2}, {1, &y, 0}};
  const std::vector<Example> only_y = {{1, &y, 0}};
  const auto gm = m.gradient(mixed, 0.0), gy = m.gradient(only_y, 0.0);
  for (const auto& c : gm.columns)
    for (std::size_t r = 0; r < c.rows; ++r)
      EXPECT_NEAR(3.0 * gm.values[c.offset + r],
                  2.0 * g1.get(c.matrix, c.feature, r) + gy.get(c.matrix, c.feature, r), 1e-12);
}

TEST(Model, LazyColumnsAndApply) {
  auto m = two_task_model(false);
  EXPECT_EQ(m.matrix(0).allocated_columns(), 0u);
  const auto x = featurize("a", D);
  const Example ex{0, &x, 0};
  m.apply(m.gradient(std::span(&ex, 1), 0.0), 1.0);
  EXPECT_EQ(m.matrix(0).allocated_columns(), x.entries.size());
  EXPECT_EQ(m.predict(0, x), 0u);
  EXPECT_LT(m.loss(std::span(&ex, 1), 0.0), std::log(3.0));
}

TEST(Model, RejectsBadDimension) {
  EXPECT_THROW(LinearModel({{"a", {"x"}}}, 48, true), Error);
  EXPECT_THROW(LinearModel({{"a", {}}}, 64, true), Error);
}
