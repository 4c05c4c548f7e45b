#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtr/harness/dataset.hpp"
#include "vtr/harness/model.hpp"
#include "vtr/losses.hpp"
#include "vtr/metrics.hpp"
#include "vtr/numerics/parameter_set.hpp"

namespace vtr::harness {

/// Raised when a loss or gradient goes non-finite; the CLI maps it to exit 2.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhaseConfig {
  std::size_t epochs = 0;
  losses::LossConfig loss;
  /// Pair each video with a sampled positive instead of its own caption.
  bool hard_mining = false;
};

void to_json(nlohmann::json& j, const PhaseConfig& c);
void from_json(const nlohmann::json& j, PhaseConfig& c);

struct TrainConfig {
  /// Corpus directory; when empty the corpus is generated from data_spec.
  std::string data;
  MotionGridSpec data_spec;
  std::uint64_t seed = 1;
  video::VideoEncoderConfig video;
  text::TextEncoderConfig text;
  numerics::AdamW<float>::Options optimizer;
  std::size_t batch_size = 32;
  PhaseConfig phase1, phase2;
  double positive_epsilon = 0.1;
  std::size_t eval_every = 1;
  std::string precision = "float32";  // or "float64"

  TrainConfig();
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Loads cfg.data or generates from cfg.data_spec.
Corpus resolve_corpus(const TrainConfig& cfg);

/// Accuracy at telling a directional clip's caption from its reversal's,
/// with the exact two-sided binomial p-value against chance.
struct DirectionAccuracy {
  std::size_t trials = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;
  double accuracy = 0.0;
  double p_value = 1.0;
};

/// Exact two-sided binomial test of k successes in n at p = 1/2.
double binomial_two_sided(std::size_t k, std::size_t n);

struct InvariantReport {
  std::size_t checked = 0;
  std::vector<std::string> failed;
  std::size_t failures() const { return failed.size(); }
};

struct EvalOutcome {
  metrics::RetrievalReport report;
  DirectionAccuracy direction;
  /// Video-to-text mAP over queries whose verb has a reversal twin.
  double motion_map = 0.0;
  InvariantReport invariants;

  nlohmann::json to_json(bool per_query = false) const;
};

template <typename T>
DirectionAccuracy direction_accuracy(const DualEncoder<T>& model, const Split& split);

template <typename T>
InvariantReport check_invariants(const DualEncoder<T>& model, const Corpus& corpus, const Split& split,
                                 const std::vector<double>& video_emb, const std::vector<double>& text_emb,
                                 const metrics::RetrievalReport& report, double epsilon);

template <typename T>
EvalOutcome evaluate_model(const DualEncoder<T>& model, const Corpus& corpus, const std::string& split,
                           double epsilon = 0.1);

struct EvalRecord {
  int phase = 0;
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double loss = 0.0;
  double v2t_map = 0.0, t2v_map = 0.0, map_avg = 0.0, ndcg_avg = 0.0;
  double motion_map = 0.0;
  double direction = 0.0;
  std::size_t invariant_failures = 0;
  std::size_t fallbacks = 0;
};

struct TrainResult {
  std::vector<EvalRecord> history;
  EvalOutcome best;
  EvalRecord best_record;
  std::filesystem::path checkpoint;
  double seconds = 0.0;
};

/// Header shared by every checkpoint written by train().
nlohmann::json checkpoint_header(const TrainConfig& cfg, const ModelConfig& model, const EvalRecord& at);

/// Two-phase training. Writes train_log.csv, best.ckpt and summary.json into
/// out_dir; wall-clock timings go to timing.json so the other files are
/// reproducible byte for byte.
TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir, bool verbose = false);
TrainResult train(const TrainConfig& cfg, const Corpus& corpus, const std::filesystem::path& out_dir,
                  bool verbose = false);

/// Continues from a phase-1 checkpoint (same config) straight into phase 2.
TrainResult train_from(const TrainConfig& cfg, const Corpus& corpus, const std::filesystem::path& init_checkpoint,
                       const std::filesystem::path& out_dir, bool verbose = false);

/// Loads the checkpoint and its corpus and evaluates one split. The corpus
/// comes from `data` when given, else from the checkpoint's own record.
EvalOutcome evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::string& split,
                                const std::string& data = "");

}  // namespace vtr::harness
