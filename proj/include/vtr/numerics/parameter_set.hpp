#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vtr/numerics/tensor.hpp"

namespace vtr::numerics {

/// Named trainable leaves in registration order.
template <typename T>
class ParameterSet {
 public:
  /// Registers a new leaf; throws on duplicate names.
  Tensor<T>& add(const std::string& name, Shape shape, std::vector<T> values);
  Tensor<T>& add_normal(const std::string& name, Shape shape, double stddev, std::mt19937_64& rng);
  Tensor<T>& add_constant(const std::string& name, Shape shape, T value);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t total_values() const;

  const std::deque<std::pair<std::string, Tensor<T>>>& entries() const { return entries_; }
  std::deque<std::pair<std::string, Tensor<T>>>& entries() { return entries_; }

  void zero_grad();

  /// Deep copy at another precision; gradients are not carried over.
  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& [name, t] : entries_) {
      std::vector<U> v(t.values().begin(), t.values().end());
      out.add(name, t.shape(), std::move(v));
    }
    return out;
  }

  /// Overwrites values from another set with the same names and shapes.
  template <typename U>
  void assign_from(const ParameterSet<U>& other) {
    for (auto& [name, t] : entries_) {
      const auto& src = other.at(name);
      if (src.shape() != t.shape()) throw InvalidInput("assign_from: shape mismatch for " + name);
      auto dst = t.mutable_values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(src.values()[i]);
    }
  }

 private:
  std::deque<std::pair<std::string, Tensor<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Decoupled weight-decay Adam. Decay applies only to leaves whose name ends
/// in "weight".
template <typename T>
class AdamW {
 public:
  struct Options {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  explicit AdamW(Options opts) : opts_(opts) {}
  void step(ParameterSet<T>& params);
  std::int64_t steps() const { return t_; }

 private:
  Options opts_;
  std::int64_t t_ = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> state_;
};

/// Central-difference gradient oracle.
///
/// Fills every leaf's gradient via backward() on `f`, then estimates each
/// coordinate with the five-point stencil at ±eps, ±2eps and compares. The returned error for one coordinate is
/// |fd - analytic| / max(|fd|, |analytic|, floor).
template <typename T>
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

template <typename T>
GradCheckResult<T> finite_diff_check(const std::function<Tensor<T>()>& f, ParameterSet<T>& params,
                                     double eps = 1e-5, double floor = 1e-4,
                                     std::size_t max_coords_per_param = 0);

}  // namespace vtr::numerics
