#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtr/numerics/tensor.hpp"

namespace vtr::losses {

enum class LossKind { kInfoNce, kMiMm, kAdaptiveMiMm, kMultiSimilarity, kSms, kSmsHard };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

/// How summed triplet terms are reduced.
enum class Reduction { kSum, kBatchMean };

struct LossConfig {
  LossKind kind = LossKind::kSms;
  double gamma = 0.6;
  double tau = 0.1;
  double lambda = 0.1;
  double alpha = 2.0;   // multi-similarity positive scale
  double beta = 50.0;   // multi-similarity negative scale
  double temperature = 0.05;
  double gamma_hard = 0.3;
  double ms_epsilon = 0.1;  // relevancy threshold splitting MS positives from negatives
  Reduction reduction = Reduction::kBatchMean;

  void validate() const;
};

void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);

/// Row-major square table handed to the losses as a constant.
struct Table {
  std::size_t n = 0;
  std::vector<double> v;
  double at(std::size_t r, std::size_t c) const { return v[r * n + c]; }
  Table transposed() const;
  static Table identity(std::size_t n);
};

/// S = V Tᵀ for row-normalised embeddings; rows are videos.
template <typename T>
numerics::Tensor<T> similarity_matrix(const numerics::Tensor<T>& video, const numerics::Tensor<T>& text);

/// Mean of the row-wise and column-wise cross-entropies of S / temperature
/// with diagonal targets.
template <typename T>
numerics::Tensor<T> infonce_bidirectional(const numerics::Tensor<T>& s, double temperature);

/// Σ_i Σ_{k≠i} [γ − S_ii + S_ik]₊ over both directions.
template <typename T>
numerics::Tensor<T> mi_mm(const numerics::Tensor<T>& s, double gamma, Reduction r = Reduction::kBatchMean);

/// mi_mm with the margin of anchor i scaled by c_ii.
template <typename T>
numerics::Tensor<T> adaptive_mi_mm(const numerics::Tensor<T>& s, const Table& c, double gamma,
                                   Reduction r = Reduction::kBatchMean);

/// Multi-similarity over both directions. pos/neg mark, per row of S (and per
/// column for the reverse direction), which entries are positives and which
/// are negatives; the masks are transposed for the column pass.
template <typename T>
numerics::Tensor<T> multi_similarity(const numerics::Tensor<T>& s, const Table& pos, const Table& neg, double alpha,
                                     double beta, double gamma, Reduction r = Reduction::kBatchMean);

/// Piecewise symmetric loss over both directions, j the batch diagonal.
template <typename T>
numerics::Tensor<T> sms(const numerics::Tensor<T>& s, const Table& c, double gamma, double tau, double lambda,
                        Reduction r = Reduction::kBatchMean);

/// Hard-label variant. labels is rows(S) x cols(S) binary; every positive j
/// of row i is paired with every other column k. Pairs of two positives are
/// visited once.
template <typename T>
numerics::Tensor<T> sms_hard_label(const numerics::Tensor<T>& s, const std::vector<double>& labels, double gamma_h,
                                   double tau, Reduction r = Reduction::kBatchMean);

/// Dispatch on cfg.kind. c is the batch relevancy (labels for kSmsHard).
template <typename T>
numerics::Tensor<T> compute_loss(const numerics::Tensor<T>& s, const Table& c, const LossConfig& cfg);

// Scalar per-term forms, written directly from the case definitions.

double mi_mm_term(double gamma, double s_ij, double s_ik);
double sms_term(double r, double s_ij, double s_ik, double gamma, double tau, double lambda);
double sms_hard_term(double r, double s_ij, double s_ik, double gamma_h, double tau);
/// (1/α)·log(1 + exp(−α(s − γ)))
double ms_positive_term(double s, double gamma, double alpha);
/// (1/β)·log(1 + exp(β(s − γ)))
double ms_negative_term(double s, double gamma, double beta);

/// Per-triplet values for anchor i and column k≠i, direction 0 = rows of S,
/// 1 = rows of Sᵀ. Entry [d][i * n + k]; diagonal entries are 0.
struct TripletTerms {
  std::size_t n = 0;
  std::vector<double> term[2];
};
TripletTerms sms_terms(const Table& s, const Table& c, double gamma, double tau, double lambda);
TripletTerms adaptive_mi_mm_terms(const Table& s, const Table& c, double gamma);

}  // namespace vtr::losses
