#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtr/relevancy.hpp"

namespace vtr::metrics {

/// Item indices sorted by descending score; equal scores keep index order.
std::vector<std::size_t> rank_order(std::span<const double> scores);

/// Mean over relevant items of precision at their rank. nullopt when nothing
/// is relevant.
std::optional<double> average_precision(std::span<const double> scores, const std::vector<bool>& relevant);

/// DCG with linear gains and 1/log2(rank + 1) discount over the ideal DCG.
/// nullopt when every gain is zero.
std::optional<double> ndcg(std::span<const double> scores, std::span<const double> gains);

struct QueryResult {
  std::optional<double> ap;
  std::optional<double> ndcg;
};

struct DirectionReport {
  double map = 0.0;
  double ndcg = 0.0;
  std::size_t queries = 0;
  std::size_t ap_excluded = 0;
  std::size_t ndcg_excluded = 0;
  std::vector<QueryResult> per_query;
};

struct RetrievalReport {
  DirectionReport v2t, t2v;
  double map_avg = 0.0;
  double ndcg_avg = 0.0;

  nlohmann::json to_json(bool per_query = false) const;
  std::string to_csv() const;
};

/// Row-major rows x cols similarity table.
struct Scores {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;
};

/// Cosine similarities of row-major embedding tables sharing a width.
Scores similarity(std::span<const double> video, std::span<const double> text, std::size_t width);

/// Metrics in both directions. Relevance for AP is rel > threshold; nDCG uses
/// the raw relevancy as gain. threads = 0 reads VTR_THREADS (default 1).
RetrievalReport evaluate_scores(const Scores& s, const relevancy::RelevancyMatrix& rel, double threshold = 0.0,
                                std::size_t threads = 0);

RetrievalReport evaluate_retrieval(std::span<const double> video, std::span<const double> text, std::size_t width,
                                   const relevancy::RelevancyMatrix& rel, double threshold = 0.0,
                                   std::size_t threads = 0);

/// Thread count from VTR_THREADS; 1 when unset or malformed.
std::size_t env_threads();

}  // namespace vtr::metrics
