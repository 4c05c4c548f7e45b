#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vtr/relevancy.hpp"

namespace vtr::mining {

/// Counts rows whose positive set was empty and fell back to the exact pair.
struct MiningStats {
  std::size_t fallbacks = 0;
};

/// One hard-mined batch: row r pairs video[r] with narration[r]; relevancy is
/// the B x B gather of the full matrix at (video[r], narration[c]).
struct Batch {
  std::vector<std::size_t> video;
  std::vector<std::size_t> narration;
  std::vector<double> relevancy;
  std::uint64_t seed = 0;

  std::size_t size() const { return video.size(); }
  double rel(std::size_t r, std::size_t c) const { return relevancy[r * video.size() + c]; }
};

/// Uniform draw from positive_set(i). Empty sets return i (the exact pair,
/// which only exists when the matrix is square) and bump stats->fallbacks.
std::size_t sample_positive(std::size_t i, const relevancy::RelevancyMatrix& m, double epsilon,
                            std::mt19937_64& rng, MiningStats* stats = nullptr);

std::vector<double> rebuild_batch_relevancy(std::span<const std::size_t> video,
                                            std::span<const std::size_t> narration,
                                            const relevancy::RelevancyMatrix& m);

/// Samples one positive per video. Duplicate video indices are rejected.
Batch assemble_batch(std::span<const std::size_t> video, const relevancy::RelevancyMatrix& m, double epsilon,
                     std::mt19937_64& rng, MiningStats* stats = nullptr);

/// Exact pairs only (narration[r] = video[r]); the InfoNCE phase uses this.
Batch exact_batch(std::span<const std::size_t> video, const relevancy::RelevancyMatrix& m);

/// Shuffled partition of [0, n) into batches of `batch_size`; a trailing
/// remainder smaller than 2 is dropped. Depends only on (n, seed).
std::vector<std::vector<std::size_t>> epoch_order(std::size_t n, std::size_t batch_size, std::uint64_t seed);

/// True when the batch table equals the full-matrix gather exactly.
bool batch_consistent(const Batch& b, const relevancy::RelevancyMatrix& m);

}  // namespace vtr::mining
