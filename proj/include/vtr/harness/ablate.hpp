#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vtr/harness/train.hpp"

namespace vtr::harness {

/// Ways of telling the video tower about time.
///   a        learnable temporal embedding, spatial-only rotary
///   b        no temporal embedding, spatiotemporal rotary
///   c        both
///   d        learnable temporal embedding, split 3D rotary
///   control  neither (order blind)
struct RopeVariant {
  std::string name;
  bool temporal_pe;
  video::RopeMode rope;
};

const std::vector<RopeVariant>& rope_variants();
const RopeVariant& rope_variant(const std::string& name);
TrainConfig with_variant(TrainConfig cfg, const RopeVariant& v);

struct AblationRow {
  std::string variant;
  std::uint64_t seed = 0;
  EvalRecord best;
  EvalRecord last;  // final evaluation of the run
  EvalOutcome eval;  // of the best checkpoint
  double seconds = 0.0;
};

/// Trains every (variant, seed) pair on one corpus under identical budgets;
/// each run gets its own sub-directory and table.csv summarises them.
std::vector<AblationRow> run_ablation(const TrainConfig& base, const Corpus& corpus,
                                      const std::vector<std::string>& variants,
                                      const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                      bool verbose = false);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace vtr::harness
