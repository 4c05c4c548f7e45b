#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vtr/metrics.hpp"
#include "vtr/numerics/tensor.hpp"

namespace mt = vtr::metrics;
namespace rl = vtr::relevancy;

namespace oc = vtr::oracle;

TEST(AveragePrecision, HandCases) {
  EXPECT_EQ(*mt::average_precision(std::vector<double>{0.9, 0.1, 0.5}, {true, false, false}), 1.0);
  EXPECT_NEAR(*mt::average_precision(std::vector<double>{0.9, 0.1}, {false, true}), 0.5, 1e-9);
  EXPECT_EQ(*mt::average_precision(std::vector<double>{0.3, 0.1, 0.2}, {true, true, true}), 1.0);
  EXPECT_FALSE(mt::average_precision(std::vector<double>{0.3, 0.1}, {false, false}).has_value());
}

TEST(AveragePrecision, TiesKeepIndexOrder) {
  EXPECT_EQ(*mt::average_precision(std::vector<double>{0.5, 0.5}, {true, false}), 1.0);
  EXPECT_EQ(*mt::average_precision(std::vector<double>{0.5, 0.5}, {false, true}), 0.5);
}

TEST(Ndcg, HandCases) {
  EXPECT_EQ(*mt::ndcg(std::vector<double>{0.9, 0.1}, std::vector<double>{1.0, 0.5}), 1.0);
  const double want = (0.5 + 1.0 / std::log2(3.0)) / (1.0 + 0.5 / std::log2(3.0));
  EXPECT_NEAR(*mt::ndcg(std::vector<double>{0.1, 0.9}, std::vector<double>{1.0, 0.5}), want, 1e-15);
  EXPECT_NEAR(want, 0.8597, 1e-4);
  EXPECT_EQ(*mt::ndcg(std::vector<double>{0.3}, std::vector<double>{0.7}), 1.0);
  EXPECT_FALSE(mt::ndcg(std::vector<double>{0.3, 0.2}, std::vector<double>{0.0, 0.0}).has_value());
}

TEST(Evaluate, MatchesBruteForceExactly) {
  std::mt19937_64 rng(1);
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t nv = 1 + rng() % 6, nt = 1 + rng() % 6;
    mt::Scores s{nv, nt, std::vector<double>(nv * nt)};
    // Coarse grid so ties occur.
    for (auto& x : s.values) x = double(int(rng() % 9) - 4) / 4.0;
    rl::RelevancyMatrix rel{nv, nt, std::vector<double>(nv * nt)};
    for (auto& x : rel.values) x = double(rng() % 5) / 4.0 * (rng() % 2);
    auto rep = mt::evaluate_scores(s, rel, 0.0, 1);
    for (int dir = 0; dir < 2; ++dir) {
      const std::size_t nq = dir ? nt : nv, ni = dir ? nv : nt;
      const auto& d = dir ? rep.t2v : rep.v2t;
      double ap_sum = 0, nd_sum = 0;
      std::size_t ap_n = 0, nd_n = 0;
      for (std::size_t q = 0; q < nq; ++q) {
        std::vector<double> sc(ni), g(ni);
        for (std::size_t i = 0; i < ni; ++i) {
          sc[i] = dir ? s.values[i * nt + q] : s.values[q * nt + i];
          g[i] = dir ? rel.at(i, q) : rel.at(q, i);
        }
        auto ap = oc::average_precision(sc, g, 0.0);
        auto nd = oc::ndcg(sc, g);
        ASSERT_EQ(ap.has_value(), d.per_query[q].ap.has_value());
        ASSERT_EQ(nd.has_value(), d.per_query[q].ndcg.has_value());
        if (ap) {
          ASSERT_EQ(*ap, *d.per_query[q].ap);
          ap_sum += *ap;
          ++ap_n;
        }
        if (nd) {
          ASSERT_EQ(*nd, *d.per_query[q].ndcg);
          nd_sum += *nd;
          ++nd_n;
        }
      }
      ASSERT_EQ(d.map, ap_n ? ap_sum / ap_n : 0.0);
      ASSERT_EQ(d.ndcg, nd_n ? nd_sum / nd_n : 0.0);
    }
    ASSERT_EQ(rep.map_avg, 0.5 * (rep.v2t.map + rep.t2v.map));
  }
}

TEST(Evaluate, OneHotEmbeddingsArePerfect) {
  const std::size_t n = 5;
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  rl::RelevancyMatrix rel{n, n, e};
  auto rep = mt::evaluate_retrieval(e, e, n, rel);
  EXPECT_EQ(rep.map_avg, 1.0);
  EXPECT_EQ(rep.ndcg_avg, 1.0);
}

TEST(Evaluate, RandomScoresSitNearClassPrior) {
  std::mt19937_64 rng(2);
  const std::size_t n = 1000, k = 4;
  std::vector<std::size_t> cls(n);
  for (auto& c : cls) c = rng() % k;
  rl::RelevancyMatrix rel{n, n, std::vector<double>(n * n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rel.values[i * n + j] = cls[i] == cls[j] ? 1.0 : 0.0;
  mt::Scores s{n, n, std::vector<double>(n * n)};
  std::normal_distribution<double> g;
  for (auto& x : s.values) x = g(rng);
  auto rep = mt::evaluate_scores(s, rel);
  EXPECT_NEAR(rep.map_avg, 1.0 / k, 0.05);
}

TEST(Evaluate, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(3);
  const std::size_t n = 30;
  mt::Scores s{n, n, std::vector<double>(n * n)};
  for (auto& x : s.values) x = double(rng() % 50) / 50.0;
  rl::RelevancyMatrix rel{n, n, std::vector<double>(n * n)};
  for (auto& x : rel.values) x = double(rng() % 3) / 2.0;
  auto t = s;
  for (auto& x : t.values) x = std::exp(3.0 * x) - 7.0;
  auto a = mt::evaluate_scores(s, rel), b = mt::evaluate_scores(t, rel);
  EXPECT_EQ(a.map_avg, b.map_avg);
  EXPECT_EQ(a.ndcg_avg, b.ndcg_avg);
}

TEST(Evaluate, ThreadCountDoesNotChangeReport) {
  std::mt19937_64 rng(4);
  const std::size_t n = 40;
  mt::Scores s{n, n, std::vector<double>(n * n)};
  for (auto& x : s.values) x = double(rng() % 1000) / 1000.0;
  rl::RelevancyMatrix rel{n, n, std::vector<double>(n * n)};
  for (auto& x : rel.values) x = double(rng() % 3) / 2.0;
  EXPECT_EQ(mt::evaluate_scores(s, rel, 0.0, 1).to_json().dump(), mt::evaluate_scores(s, rel, 0.0, 3).to_json().dump());
}

TEST(Evaluate, ExcludesQueriesWithoutRelevantItems) {
  mt::Scores s{2, 2, {0.9, 0.1, 0.2, 0.8}};
  rl::RelevancyMatrix rel{2, 2, {1.0, 0.0, 0.0, 0.0}};
  auto rep = mt::evaluate_scores(s, rel);
  EXPECT_EQ(rep.v2t.ap_excluded, 1u);
  EXPECT_EQ(rep.v2t.map, 1.0);
}

TEST(Evaluate, RejectsMisalignment) {
  mt::Scores s{2, 2, {0, 0, 0, 0}};
  rl::RelevancyMatrix rel{3, 2, std::vector<double>(6)};
  EXPECT_THROW(mt::evaluate_scores(s, rel), vtr::numerics::InvalidInput);
}

TEST(Report, JsonAndCsv) {
  mt::Scores s{1, 1, {1.0}};
  rl::RelevancyMatrix rel{1, 1, {1.0}};
  auto rep = mt::evaluate_scores(s, rel);
  EXPECT_EQ(rep.to_json()["avg"]["mAP"], 1.0);
  EXPECT_NE(rep.to_csv().find("avg,1,1"), std::string::npos);
}
