#include "vtr/numerics/parameter_set.hpp"

#include <algorithm>
#include <cmath>

namespace vtr::numerics {

template <typename T>
Tensor<T>& ParameterSet<T>::add(const std::string& name, Shape shape, std::vector<T> values) {
  if (contains(name)) throw InvalidInput("parameter '" + name + "' registered twice");
  index_[name] = entries_.size();
  entries_.emplace_back(name, Tensor<T>::parameter(std::move(shape), std::move(values)));
  return entries_.back().second;
}

template <typename T>
Tensor<T>& ParameterSet<T>::add_normal(const std::string& name, Shape shape, double stddev,
                                       std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(dist(rng));
  return add(name, std::move(shape), std::move(v));
}

template <typename T>
Tensor<T>& ParameterSet<T>::add_constant(const std::string& name, Shape shape, T value) {
  auto n = shape_numel(shape);
  return add(name, std::move(shape), std::vector<T>(n, value));
}

template <typename T>
Tensor<T>& ParameterSet<T>::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

template <typename T>
const Tensor<T>& ParameterSet<T>::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

template <typename T>
std::size_t ParameterSet<T>::total_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

template <typename T>
void AdamW<T>::step(ParameterSet<T>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, double(t_));
  for (auto& [name, p] : params.entries()) {
    auto& [m, v] = state_[name];
    auto values = p.mutable_values();
    auto grad = p.grad();
    if (m.empty()) {
      m.assign(values.size(), 0.0);
      v.assign(values.size(), 0.0);
    }
    const bool decay = name.size() >= 6 && name.compare(name.size() - 6, 6, "weight") == 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g;
      v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g * g;
      double x = values[i];
      if (decay) x -= opts_.lr * opts_.weight_decay * x;
      x -= opts_.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + opts_.eps);
      values[i] = static_cast<T>(x);
    }
  }
}

template <typename T>
GradCheckResult<T> finite_diff_check(const std::function<Tensor<T>()>& f, ParameterSet<T>& params,
                                     double eps, double floor, std::size_t max_coords_per_param) {
  if (!(eps > 0.0)) throw InvalidInput("finite_diff_check: eps must be positive");
  GradCheckResult<T> result;
  params.zero_grad();
  {
    Tensor<T> loss = f();
    backward(loss);
  }
  NoGradGuard no_grad;
  for (auto& [name, p] : params.entries()) {
    std::vector<T> analytic(p.grad().begin(), p.grad().end());
    auto values = p.mutable_values();
    const std::size_t n = values.size();
    std::size_t stride = 1;
    if (max_coords_per_param != 0 && n > max_coords_per_param) {
      stride = (n + max_coords_per_param - 1) / max_coords_per_param;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const T saved = values[i];
      auto at = [&](double offset) {
        values[i] = static_cast<T>(saved + offset);
        return double(f().item());
      };
      const double numeric = (8.0 * (at(eps) - at(-eps)) - (at(2 * eps) - at(-2 * eps))) / (12.0 * eps);
      values[i] = saved;
      const double a = analytic[i];
      const double denom = std::max({std::abs(numeric), std::abs(a), floor});
      const double err = std::abs(numeric - a) / denom;
      ++result.coordinates;
      if (result.worst_param.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class AdamW<float>;
template class AdamW<double>;
template GradCheckResult<float> finite_diff_check(const std::function<Tensor<float>()>&,
                                                  ParameterSet<float>&, double, double, std::size_t);
template GradCheckResult<double> finite_diff_check(const std::function<Tensor<double>()>&,
                                                   ParameterSet<double>&, double, double, std::size_t);

}  // namespace vtr::numerics
