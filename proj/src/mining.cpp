#include "vtr/mining.hpp"

#include <algorithm>
#include <unordered_set>

#include "vtr/numerics/tensor.hpp"

namespace vtr::mining {

using numerics::InvalidInput;

std::size_t sample_positive(std::size_t i, const relevancy::RelevancyMatrix& m, double epsilon,
                            std::mt19937_64& rng, MiningStats* stats) {
  const auto pos = relevancy::positive_set(i, m, epsilon);
  if (pos.empty()) {
    if (stats) ++stats->fallbacks;
    return i;
  }
  if (pos.size() == 1) return pos.front();
  return pos[rng() % pos.size()];
}

std::vector<double> rebuild_batch_relevancy(std::span<const std::size_t> video, std::span<const std::size_t> narration,
                                            const relevancy::RelevancyMatrix& m) {
  if (video.size() != narration.size()) throw InvalidInput("batch: video and narration counts differ");
  const std::size_t b = video.size();
  std::vector<double> out(b * b);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t c = 0; c < b; ++c) {
      if (video[r] >= m.rows || narration[c] >= m.cols) throw InvalidInput("batch: index outside relevancy matrix");
      out[r * b + c] = m.at(video[r], narration[c]);
    }
  }
  return out;
}

namespace {

void check_distinct(std::span<const std::size_t> video) {
  if (video.empty()) throw InvalidInput("batch: no videos");
  std::unordered_set<std::size_t> seen;
  for (auto v : video)
    if (!seen.insert(v).second) throw InvalidInput("batch: duplicate video index " + std::to_string(v));
}

}  // namespace

Batch assemble_batch(std::span<const std::size_t> video, const relevancy::RelevancyMatrix& m, double epsilon,
                     std::mt19937_64& rng, MiningStats* stats) {
  check_distinct(video);
  Batch b;
  b.video.assign(video.begin(), video.end());
  for (auto v : video) b.narration.push_back(sample_positive(v, m, epsilon, rng, stats));
  b.relevancy = rebuild_batch_relevancy(b.video, b.narration, m);
  return b;
}

Batch exact_batch(std::span<const std::size_t> video, const relevancy::RelevancyMatrix& m) {
  check_distinct(video);
  Batch b;
  b.video.assign(video.begin(), video.end());
  b.narration = b.video;
  b.relevancy = rebuild_batch_relevancy(b.video, b.narration, m);
  return b;
}

std::vector<std::vector<std::size_t>> epoch_order(std::size_t n, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw InvalidInput("epoch_order: batch size must be >= 1");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch_size) {
    const std::size_t e = std::min(n, s + batch_size);
    if (e - s < 2 && !out.empty()) break;
    out.emplace_back(idx.begin() + s, idx.begin() + e);
  }
  return out;
}

bool batch_consistent(const Batch& b, const relevancy::RelevancyMatrix& m) {
  return rebuild_batch_relevancy(b.video, b.narration, m) == b.relevancy;
}

}  // namespace vtr::mining
