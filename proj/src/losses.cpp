#include "vtr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "vtr/numerics/ops.hpp"

namespace vtr::losses {

namespace nm = vtr::numerics;
using nm::InvalidInput;
using nm::Tensor;

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "infonce") return LossKind::kInfoNce;
  if (name == "mimm") return LossKind::kMiMm;
  if (name == "adaptive_mimm") return LossKind::kAdaptiveMiMm;
  if (name == "ms") return LossKind::kMultiSimilarity;
  if (name == "sms") return LossKind::kSms;
  if (name == "sms_hard") return LossKind::kSmsHard;
  throw InvalidInput("unknown loss kind '" + name + "'");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kInfoNce: return "infonce";
    case LossKind::kMiMm: return "mimm";
    case LossKind::kAdaptiveMiMm: return "adaptive_mimm";
    case LossKind::kMultiSimilarity: return "ms";
    case LossKind::kSms: return "sms";
    case LossKind::kSmsHard: return "sms_hard";
  }
  return "sms";
}

void LossConfig::validate() const {
  if (!(gamma > 0)) throw InvalidInput("loss.gamma must be > 0");
  if (!(tau >= 0)) throw InvalidInput("loss.tau must be >= 0");
  if (!(lambda >= 0)) throw InvalidInput("loss.lambda must be >= 0");
  if (!(temperature > 0)) throw InvalidInput("loss.temperature must be > 0");
  if (!(alpha > 0) || !(beta > 0)) throw InvalidInput("loss.alpha and loss.beta must be > 0");
  if (!(gamma_hard > 0)) throw InvalidInput("loss.gamma_hard must be > 0");
}

void to_json(nlohmann::json& j, const LossConfig& c) {
  j = nlohmann::json{{"kind", to_string(c.kind)},       {"gamma", c.gamma},
                     {"tau", c.tau},                    {"lambda", c.lambda},
                     {"alpha", c.alpha},                {"beta", c.beta},
                     {"temperature", c.temperature},    {"gamma_hard", c.gamma_hard},
                     {"ms_epsilon", c.ms_epsilon},
                     {"reduction", c.reduction == Reduction::kSum ? "sum" : "batch_mean"}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  LossConfig d;
  c.kind = loss_kind_from_string(j.value("kind", to_string(d.kind)));
  c.gamma = j.value("gamma", d.gamma);
  c.tau = j.value("tau", d.tau);
  c.lambda = j.value("lambda", d.lambda);
  c.alpha = j.value("alpha", d.alpha);
  c.beta = j.value("beta", d.beta);
  c.temperature = j.value("temperature", d.temperature);
  c.gamma_hard = j.value("gamma_hard", d.gamma_hard);
  c.ms_epsilon = j.value("ms_epsilon", d.ms_epsilon);
  const std::string red = j.value("reduction", std::string("batch_mean"));
  if (red == "sum") {
    c.reduction = Reduction::kSum;
  } else if (red == "batch_mean") {
    c.reduction = Reduction::kBatchMean;
  } else {
    throw InvalidInput("loss.reduction must be 'sum' or 'batch_mean'");
  }
  c.validate();
}

Table Table::transposed() const {
  Table t{n, std::vector<double>(v.size())};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) t.v[c * n + r] = v[r * n + c];
  return t;
}

Table Table::identity(std::size_t n) {
  Table t{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) t.v[i * n + i] = 1.0;
  return t;
}

namespace {

template <typename T>
void check_square(const Tensor<T>& s, const char* who) {
  if (s.shape().size() != 2 || s.rows() != s.cols() || s.rows() == 0) {
    throw InvalidInput(std::string(who) + ": similarity matrix must be square and non-empty, got " +
                       nm::shape_str(s.shape()));
  }
}

void check_table(const Table& c, std::size_t n, const char* who) {
  if (c.n != n || c.v.size() != n * n) {
    throw InvalidInput(std::string(who) + ": relevancy table is " + std::to_string(c.n) + "x" +
                       std::to_string(c.n) + " for a " + std::to_string(n) + "x" + std::to_string(n) + " batch");
  }
}

template <typename T>
Tensor<T> constant(std::size_t rows, std::size_t cols, const std::vector<double>& v) {
  return Tensor<T>::constant({rows, cols}, std::vector<T>(v.begin(), v.end()));
}

template <typename T>
Tensor<T> reduce(const Tensor<T>& total, std::size_t b, Reduction r) {
  return r == Reduction::kSum ? total : nm::scale(total, T(1) / T(b));
}

// G(i, k) = S_ik − S_ii: negative of the positive-minus-negative gap.
template <typename T>
Tensor<T> gap_from_diagonal(const Tensor<T>& s) {
  return nm::add_col(s, nm::scale(nm::diag(s), T(-1)));
}

std::vector<double> off_diagonal(std::size_t n) {
  std::vector<double> m(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 0.0;
  return m;
}

// Σ_{i,k≠i} [margin_i + G_ik]₊ for one direction.
template <typename T>
Tensor<T> hinge_direction(const Tensor<T>& s, const std::vector<double>& margin) {
  const std::size_t n = s.rows();
  auto h = nm::relu(nm::add_col(gap_from_diagonal(s), constant<T>(n, 1, margin)));
  return nm::sum(nm::mul(h, constant<T>(n, n, off_diagonal(n))));
}

template <typename T>
Tensor<T> sms_direction(const Tensor<T>& s, const Table& c, double gamma, double tau, double lambda) {
  const std::size_t n = s.rows();
  std::vector<double> up(n * n, 0.0), down(n * n, 0.0), mid(n * n, 0.0), rg(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double r = c.at(i, i) - c.at(i, k);
      rg[i * n + k] = r * gamma;
      if (r >= lambda) {
        up[i * n + k] = 1.0;
      } else if (r <= -lambda) {
        down[i * n + k] = 1.0;
      } else {
        mid[i * n + k] = 1.0;
      }
    }
  }
  auto g = gap_from_diagonal(s);
  auto shifted = nm::add(g, constant<T>(n, n, rg));  // Rγ − S_ij + S_ik
  auto total = nm::add(nm::sum(nm::mul(nm::relu(shifted), constant<T>(n, n, up))),
                       nm::sum(nm::mul(nm::relu(nm::scale(shifted, T(-1))), constant<T>(n, n, down))));
  auto relaxed = nm::relu(nm::add_scalar(nm::abs(g), T(-tau)));
  return nm::add(total, nm::sum(nm::mul(relaxed, constant<T>(n, n, mid))));
}

template <typename T>
Tensor<T> ms_direction(const Tensor<T>& s, const Table& pos, const Table& neg, double alpha, double beta,
                       double gamma) {
  const std::vector<T> pmask(pos.v.begin(), pos.v.end()), nmask(neg.v.begin(), neg.v.end());
  auto centred = nm::add_scalar(s, T(-gamma));
  auto p = nm::log1p_sum_exp_rows(nm::scale(centred, T(-alpha)), std::span<const T>(pmask));
  auto q = nm::log1p_sum_exp_rows(nm::scale(centred, T(beta)), std::span<const T>(nmask));
  return nm::add(nm::scale(nm::sum(p), T(1.0 / alpha)), nm::scale(nm::sum(q), T(1.0 / beta)));
}

}  // namespace

template <typename T>
Tensor<T> similarity_matrix(const Tensor<T>& video, const Tensor<T>& text) {
  if (video.cols() != text.cols()) {
    throw InvalidInput("similarity_matrix: embedding widths differ (" + std::to_string(video.cols()) + " vs " +
                       std::to_string(text.cols()) + ")");
  }
  return nm::matmul(video, nm::transpose(text));
}

template <typename T>
Tensor<T> infonce_bidirectional(const Tensor<T>& s, double temperature) {
  check_square(s, "infonce");
  if (!(temperature > 0)) throw InvalidInput("infonce: temperature must be > 0");
  auto logits = nm::scale(s, T(1.0 / temperature));
  auto v2t = nm::sum(nm::diag(nm::log_softmax_lastdim(logits)));
  auto t2v = nm::sum(nm::diag(nm::log_softmax_lastdim(nm::transpose(logits))));
  return nm::scale(nm::add(v2t, t2v), T(-0.5 / double(s.rows())));
}

template <typename T>
Tensor<T> mi_mm(const Tensor<T>& s, double gamma, Reduction r) {
  check_square(s, "mi_mm");
  const std::vector<double> margin(s.rows(), gamma);
  return reduce(nm::add(hinge_direction(s, margin), hinge_direction(nm::transpose(s), margin)), s.rows(), r);
}

template <typename T>
Tensor<T> adaptive_mi_mm(const Tensor<T>& s, const Table& c, double gamma, Reduction r) {
  check_square(s, "adaptive_mi_mm");
  check_table(c, s.rows(), "adaptive_mi_mm");
  std::vector<double> margin(s.rows());
  for (std::size_t i = 0; i < margin.size(); ++i) margin[i] = c.at(i, i) * gamma;
  return reduce(nm::add(hinge_direction(s, margin), hinge_direction(nm::transpose(s), margin)), s.rows(), r);
}

template <typename T>
Tensor<T> multi_similarity(const Tensor<T>& s, const Table& pos, const Table& neg, double alpha, double beta,
                           double gamma, Reduction r) {
  check_square(s, "multi_similarity");
  check_table(pos, s.rows(), "multi_similarity");
  check_table(neg, s.rows(), "multi_similarity");
  if (!(alpha > 0) || !(beta > 0)) throw InvalidInput("multi_similarity: alpha and beta must be > 0");
  auto fwd = ms_direction(s, pos, neg, alpha, beta, gamma);
  auto bwd = ms_direction(nm::transpose(s), pos.transposed(), neg.transposed(), alpha, beta, gamma);
  return reduce(nm::add(fwd, bwd), s.rows(), r);
}

template <typename T>
Tensor<T> sms(const Tensor<T>& s, const Table& c, double gamma, double tau, double lambda, Reduction r) {
  check_square(s, "sms");
  check_table(c, s.rows(), "sms");
  auto fwd = sms_direction(s, c, gamma, tau, lambda);
  auto bwd = sms_direction(nm::transpose(s), c.transposed(), gamma, tau, lambda);
  return reduce(nm::add(fwd, bwd), s.rows(), r);
}

template <typename T>
Tensor<T> sms_hard_label(const Tensor<T>& s, const std::vector<double>& labels, double gamma_h, double tau,
                         Reduction r) {
  const std::size_t rows = s.rows(), cols = s.cols();
  if (rows == 0 || labels.size() != rows * cols) throw InvalidInput("sms_hard_label: label shape mismatch");
  for (double l : labels)
    if (l != 0.0 && l != 1.0) throw InvalidInput("sms_hard_label: labels must be 0 or 1");
  std::vector<Tensor<T>> parts;
  for (std::size_t i = 0; i < rows; ++i) {
    // d(j, k) = S_ik − S_ij for the row's scores.
    auto d = nm::pairwise_diff(nm::slice_rows(s, i, 1));
    std::vector<double> pos(cols * cols, 0.0), same(cols * cols, 0.0);
    bool any = false;
    for (std::size_t j = 0; j < cols; ++j) {
      if (labels[i * cols + j] != 1.0) continue;
      for (std::size_t k = 0; k < cols; ++k) {
        if (k == j) continue;
        if (labels[i * cols + k] == 0.0) {
          pos[j * cols + k] = 1.0;
          any = true;
        } else if (k > j) {
          same[j * cols + k] = 1.0;
          any = true;
        }
      }
    }
    if (!any) continue;
    auto hinge = nm::mul(nm::relu(nm::add_scalar(d, T(gamma_h))), constant<T>(cols, cols, pos));
    auto relax = nm::mul(nm::relu(nm::add_scalar(nm::abs(d), T(-tau))), constant<T>(cols, cols, same));
    parts.push_back(nm::add(nm::sum(hinge), nm::sum(relax)));
  }
  Tensor<T> total = Tensor<T>::scalar(T(0));
  for (const auto& p : parts) total = nm::add(total, p);
  return reduce(total, rows, r);
}

template <typename T>
Tensor<T> compute_loss(const Tensor<T>& s, const Table& c, const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::kInfoNce: return infonce_bidirectional(s, cfg.temperature);
    case LossKind::kMiMm: return mi_mm(s, cfg.gamma, cfg.reduction);
    case LossKind::kAdaptiveMiMm: return adaptive_mi_mm(s, c, cfg.gamma, cfg.reduction);
    case LossKind::kMultiSimilarity: {
      Table pos{c.n, std::vector<double>(c.v.size())}, neg{c.n, std::vector<double>(c.v.size())};
      for (std::size_t i = 0; i < c.v.size(); ++i) {
        pos.v[i] = c.v[i] >= cfg.ms_epsilon ? 1.0 : 0.0;
        neg.v[i] = 1.0 - pos.v[i];
      }
      return multi_similarity(s, pos, neg, cfg.alpha, cfg.beta, cfg.gamma, cfg.reduction);
    }
    case LossKind::kSms: return sms(s, c, cfg.gamma, cfg.tau, cfg.lambda, cfg.reduction);
    case LossKind::kSmsHard: return sms_hard_label(s, c.v, cfg.gamma_hard, cfg.tau, cfg.reduction);
  }
  throw InvalidInput("unknown loss kind");
}

double mi_mm_term(double gamma, double s_ij, double s_ik) { return std::max(0.0, gamma - s_ij + s_ik); }

double sms_term(double r, double s_ij, double s_ik, double gamma, double tau, double lambda) {
  const double d = s_ij - s_ik;
  if (r >= lambda) return std::max(0.0, r * gamma - d);
  if (r <= -lambda) return std::max(0.0, -r * gamma + d);
  return std::max(0.0, std::abs(d) - tau);
}

double sms_hard_term(double r, double s_ij, double s_ik, double gamma_h, double tau) {
  if (r == 1.0) return std::max(0.0, r * gamma_h - s_ij + s_ik);
  if (r == 0.0) return std::max(0.0, std::abs(s_ij - s_ik) - tau);
  throw InvalidInput("sms_hard_term: R must be 0 or 1 for ordered positive-first pairs");
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

double ms_positive_term(double s, double gamma, double alpha) {
  return softplus(-alpha * (s - gamma)) / alpha;
}

double ms_negative_term(double s, double gamma, double beta) {
  return softplus(beta * (s - gamma)) / beta;
}

namespace {

TripletTerms build_terms(const Table& s, const Table& c, const std::function<double(double, double, double)>& f) {
  if (s.n != c.n) throw InvalidInput("triplet terms: table sizes differ");
  const std::size_t n = s.n;
  TripletTerms out{n, {std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)}};
  const Table st = s.transposed(), ct = c.transposed();
  for (int d = 0; d < 2; ++d) {
    const Table& sd = d == 0 ? s : st;
    const Table& cd = d == 0 ? c : ct;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (k != i) out.term[d][i * n + k] = f(cd.at(i, i) - cd.at(i, k), sd.at(i, i), sd.at(i, k));
  }
  return out;
}

}  // namespace

TripletTerms sms_terms(const Table& s, const Table& c, double gamma, double tau, double lambda) {
  return build_terms(s, c, [&](double r, double sij, double sik) { return sms_term(r, sij, sik, gamma, tau, lambda); });
}

TripletTerms adaptive_mi_mm_terms(const Table& s, const Table& c, double gamma) {
  // The margin needs c_ii, not R; recover it per anchor.
  if (s.n != c.n) throw InvalidInput("triplet terms: table sizes differ");
  const std::size_t n = s.n;
  TripletTerms out{n, {std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)}};
  const Table st = s.transposed();
  for (int d = 0; d < 2; ++d) {
    const Table& sd = d == 0 ? s : st;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (k != i) out.term[d][i * n + k] = mi_mm_term(c.at(i, i) * gamma, sd.at(i, i), sd.at(i, k));
  }
  return out;
}

#define VTR_INSTANTIATE_LOSSES(T)                                                                              \
  template Tensor<T> similarity_matrix(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> infonce_bidirectional(const Tensor<T>&, double);                                          \
  template Tensor<T> mi_mm(const Tensor<T>&, double, Reduction);                                               \
  template Tensor<T> adaptive_mi_mm(const Tensor<T>&, const Table&, double, Reduction);                        \
  template Tensor<T> multi_similarity(const Tensor<T>&, const Table&, const Table&, double, double, double,    \
                                      Reduction);                                                              \
  template Tensor<T> sms(const Tensor<T>&, const Table&, double, double, double, Reduction);                   \
  template Tensor<T> sms_hard_label(const Tensor<T>&, const std::vector<double>&, double, double, Reduction);  \
  template Tensor<T> compute_loss(const Tensor<T>&, const Table&, const LossConfig&);

VTR_INSTANTIATE_LOSSES(float)
VTR_INSTANTIATE_LOSSES(double)

}  // namespace vtr::losses
