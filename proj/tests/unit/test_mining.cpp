#include <gtest/gtest.h>

#include <cmath>

#include "vtr/mining.hpp"
#include "vtr/numerics/tensor.hpp"

namespace rl = vtr::relevancy;
namespace mn = vtr::mining;

namespace {

rl::RelevancyMatrix triple() {
  std::vector<rl::Caption> c{{"", {"eat"}, {"banana"}}, {"", {"eat"}, {"apple"}}, {"", {"grab"}, {"banana"}}};
  return rl::build_relevancy_matrix(c, c);
}

rl::RelevancyMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<rl::Caption> c;
  for (std::size_t i = 0; i < n; ++i)
    c.push_back({"", {"v" + std::to_string(rng() % 4)}, {"n" + std::to_string(rng() % 5)}});
  return rl::build_relevancy_matrix(c, c);
}

}  // namespace

TEST(SamplePositive, ExactThresholdAndSingletons) {
  auto m = triple();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(mn::sample_positive(1, m, 1.0, rng), 1u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(mn::sample_positive(1, m, 0.6, rng), 1u);
}

TEST(SamplePositive, UniformOverPositiveSet) {
  auto m = triple();
  std::mt19937_64 rng(2);
  const int n = 10000;
  std::array<int, 3> counts{};
  for (int i = 0; i < n; ++i) ++counts[mn::sample_positive(0, m, 0.1, rng)];
  const double p = 1.0 / 3.0, sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_LT(std::abs(c - n * p), 3 * sigma);
}

TEST(SamplePositive, EmptySetFallsBackAndCounts) {
  rl::RelevancyMatrix m{2, 2, {0.0, 0.0, 0.0, 1.0}};
  std::mt19937_64 rng(3);
  mn::MiningStats stats;
  EXPECT_EQ(mn::sample_positive(0, m, 0.1, rng, &stats), 0u);
  EXPECT_EQ(stats.fallbacks, 1u);
}

TEST(Batch, SingleVideo) {
  auto m = triple();
  std::mt19937_64 rng(4);
  std::vector<std::size_t> v{2};
  auto b = mn::assemble_batch(v, m, 1.0, rng);
  EXPECT_EQ(b.relevancy, std::vector<double>{1.0});
}

TEST(Batch, DeterministicUnderSeed) {
  auto m = random_matrix(40, 5);
  std::vector<std::size_t> v{3, 7, 11, 20, 39};
  std::mt19937_64 r1(9), r2(9);
  auto a = mn::assemble_batch(v, m, 0.1, r1), b = mn::assemble_batch(v, m, 0.1, r2);
  EXPECT_EQ(a.narration, b.narration);
  EXPECT_EQ(a.relevancy, b.relevancy);
}

TEST(Batch, DiagonalAtLeastThresholdAndGatherConsistent) {
  auto m = random_matrix(60, 6);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto order = mn::epoch_order(60, 8, 100 + trial);
    auto b = mn::assemble_batch(order[0], m, 0.1, rng);
    for (std::size_t r = 0; r < b.size(); ++r) {
      EXPECT_GE(b.rel(r, r), 0.1);
      for (std::size_t c = 0; c < b.size(); ++c) EXPECT_EQ(b.rel(r, c), m.at(b.video[r], b.narration[c]));
    }
    EXPECT_TRUE(mn::batch_consistent(b, m));
  }
}

TEST(Batch, OffDiagonalKeepsTrueCorrelation) {
  auto m = triple();
  std::vector<std::size_t> v{0, 2};
  auto b = mn::exact_batch(v, m);
  // "eat banana" video against the "grab banana" narration.
  EXPECT_EQ(b.rel(0, 1), 0.5);
  EXPECT_EQ(b.rel(1, 0), 0.5);
}

TEST(Batch, RejectsDuplicates) {
  auto m = triple();
  std::mt19937_64 rng(8);
  std::vector<std::size_t> v{1, 1};
  EXPECT_THROW(mn::assemble_batch(v, m, 0.1, rng), vtr::numerics::InvalidInput);
}

TEST(EpochOrder, PartitionsAndIsReproducible) {
  auto a = mn::epoch_order(21, 5, 42), b = mn::epoch_order(21, 5, 42), c = mn::epoch_order(21, 5, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::vector<int> seen(21, 0);
  std::size_t total = 0;
  for (const auto& batch : a) {
    total += batch.size();
    for (auto i : batch) ++seen[i];
  }
  EXPECT_EQ(total, 20u);  // trailing singleton dropped
  for (int s : seen) EXPECT_LE(s, 1);
}
