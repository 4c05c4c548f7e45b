#include "vtr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "vtr/numerics/tensor.hpp"

namespace vtr::metrics {

using numerics::InvalidInput;

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::optional<double> average_precision(std::span<const double> scores, const std::vector<bool>& relevant) {
  if (scores.size() != relevant.size()) throw InvalidInput("average_precision: size mismatch");
  const auto order = rank_order(scores);
  std::size_t hits = 0;
  double total = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!relevant[order[r]]) continue;
    ++hits;
    total += double(hits) / double(r + 1);
  }
  if (hits == 0) return std::nullopt;
  return total / double(hits);
}

std::optional<double> ndcg(std::span<const double> scores, std::span<const double> gains) {
  if (scores.size() != gains.size()) throw InvalidInput("ndcg: size mismatch");
  const auto order = rank_order(scores);
  double dcg = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) dcg += gains[order[r]] / std::log2(double(r + 2));
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal.size(); ++r) idcg += ideal[r] / std::log2(double(r + 2));
  if (!(idcg > 0.0)) return std::nullopt;
  return dcg / idcg;
}

std::size_t env_threads() {
  const char* v = std::getenv("VTR_THREADS");
  if (v == nullptr) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  return (end != v && *end == '\0' && n > 0) ? std::size_t(n) : 1;
}

Scores similarity(std::span<const double> video, std::span<const double> text, std::size_t width) {
  if (width == 0 || video.size() % width != 0 || text.size() % width != 0) {
    throw InvalidInput("similarity: embedding tables do not share width " + std::to_string(width));
  }
  Scores s{video.size() / width, text.size() / width, {}};
  s.values.resize(s.rows * s.cols);
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      double acc = 0.0;
      for (std::size_t d = 0; d < width; ++d) acc += video[r * width + d] * text[c * width + d];
      s.values[r * s.cols + c] = acc;
    }
  }
  return s;
}

namespace {

// queries x items view over a row-major table, optionally transposed.
DirectionReport run_direction(const Scores& s, const relevancy::RelevancyMatrix& rel, bool transpose,
                              double threshold, std::size_t threads) {
  const std::size_t nq = transpose ? s.cols : s.rows;
  const std::size_t ni = transpose ? s.rows : s.cols;
  DirectionReport rep;
  rep.queries = nq;
  rep.per_query.resize(nq);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> sc(ni), gain(ni);
    std::vector<bool> relevant(ni);
    for (std::size_t q = begin; q < end; ++q) {
      for (std::size_t i = 0; i < ni; ++i) {
        const std::size_t r = transpose ? i : q, c = transpose ? q : i;
        sc[i] = s.values[r * s.cols + c];
        gain[i] = rel.at(r, c);
        relevant[i] = gain[i] > threshold;
      }
      rep.per_query[q] = {average_precision(sc, relevant), ndcg(sc, gain)};
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, nq));
  if (threads == 1) {
    work(0, nq);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (nq + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(nq, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  double ap_sum = 0.0, nd_sum = 0.0;
  std::size_t ap_n = 0, nd_n = 0;
  for (const auto& q : rep.per_query) {
    if (q.ap) {
      ap_sum += *q.ap;
      ++ap_n;
    } else {
      ++rep.ap_excluded;
    }
    if (q.ndcg) {
      nd_sum += *q.ndcg;
      ++nd_n;
    } else {
      ++rep.ndcg_excluded;
    }
  }
  rep.map = ap_n ? ap_sum / double(ap_n) : 0.0;
  rep.ndcg = nd_n ? nd_sum / double(nd_n) : 0.0;
  return rep;
}

nlohmann::json direction_json(const DirectionReport& d, bool per_query) {
  nlohmann::json j{{"mAP", d.map},
                   {"nDCG", d.ndcg},
                   {"queries", d.queries},
                   {"ap_excluded", d.ap_excluded},
                   {"ndcg_excluded", d.ndcg_excluded}};
  if (per_query) {
    auto arr = nlohmann::json::array();
    for (const auto& q : d.per_query) {
      arr.push_back({{"ap", q.ap ? nlohmann::json(*q.ap) : nlohmann::json(nullptr)},
                     {"ndcg", q.ndcg ? nlohmann::json(*q.ndcg) : nlohmann::json(nullptr)}});
    }
    j["per_query"] = arr;
  }
  return j;
}

}  // namespace

RetrievalReport evaluate_scores(const Scores& s, const relevancy::RelevancyMatrix& rel, double threshold,
                                std::size_t threads) {
  if (s.rows != rel.rows || s.cols != rel.cols || s.values.size() != s.rows * s.cols) {
    throw InvalidInput("evaluate: similarity table " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                       " is not aligned with relevancy " + std::to_string(rel.rows) + "x" + std::to_string(rel.cols));
  }
  if (threads == 0) threads = env_threads();
  RetrievalReport r;
  r.v2t = run_direction(s, rel, false, threshold, threads);
  r.t2v = run_direction(s, rel, true, threshold, threads);
  r.map_avg = 0.5 * (r.v2t.map + r.t2v.map);
  r.ndcg_avg = 0.5 * (r.v2t.ndcg + r.t2v.ndcg);
  return r;
}

RetrievalReport evaluate_retrieval(std::span<const double> video, std::span<const double> text, std::size_t width,
                                   const relevancy::RelevancyMatrix& rel, double threshold, std::size_t threads) {
  return evaluate_scores(similarity(video, text, width), rel, threshold, threads);
}

nlohmann::json RetrievalReport::to_json(bool per_query) const {
  return {{"v2t", direction_json(v2t, per_query)},
          {"t2v", direction_json(t2v, per_query)},
          {"avg", {{"mAP", map_avg}, {"nDCG", ndcg_avg}}}};
}

std::string RetrievalReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "direction,mAP,nDCG\n";
  os << "v2t," << v2t.map << ',' << v2t.ndcg << '\n';
  os << "t2v," << t2v.map << ',' << t2v.ndcg << '\n';
  os << "avg," << map_avg << ',' << ndcg_avg << '\n';
  return os.str();
}

}  // namespace vtr::metrics
