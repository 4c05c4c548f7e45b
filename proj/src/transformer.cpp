#include "vtr/transformer.hpp"

#include <cmath>

#include "vtr/numerics/ops.hpp"

namespace vtr::video {

namespace nm = vtr::numerics;

template <typename T>
void init_block(nm::ParameterSet<T>& params, const std::string& prefix, std::size_t width,
                std::size_t mlp_ratio, std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(double(width));
  const std::size_t hidden = width * mlp_ratio;
  params.add_constant(prefix + ".ln1.gain", {1, width}, T(1));
  params.add_constant(prefix + ".ln1.bias", {1, width}, T(0));
  for (const char* name : {"q", "k", "v", "out"}) {
    params.add_normal(prefix + "." + name + ".weight", {width, width}, s, rng);
    params.add_constant(prefix + "." + name + ".bias", {1, width}, T(0));
  }
  params.add_constant(prefix + ".ln2.gain", {1, width}, T(1));
  params.add_constant(prefix + ".ln2.bias", {1, width}, T(0));
  params.add_normal(prefix + ".fc1.weight", {width, hidden}, s, rng);
  params.add_constant(prefix + ".fc1.bias", {1, hidden}, T(0));
  params.add_normal(prefix + ".fc2.weight", {hidden, width}, 1.0 / std::sqrt(double(hidden)), rng);
  params.add_constant(prefix + ".fc2.bias", {1, width}, T(0));
}

template <typename T>
BlockParams<T> bind_block(nm::ParameterSet<T>& params, const std::string& prefix) {
  auto at = [&](const char* name) { return params.at(prefix + "." + name); };
  return BlockParams<T>{at("ln1.gain"),   at("ln1.bias"),   at("q.weight"),   at("q.bias"),
                        at("k.weight"),   at("k.bias"),     at("v.weight"),   at("v.bias"),
                        at("out.weight"), at("out.bias"),   at("ln2.gain"),   at("ln2.bias"),
                        at("fc1.weight"), at("fc1.bias"),   at("fc2.weight"), at("fc2.bias")};
}

template <typename T>
nm::Tensor<T> joint_st_attention_block(const nm::Tensor<T>& z, const BlockParams<T>& p,
                                       const rope::RotationTable* table, std::size_t heads,
                                       std::size_t seq_len, rope::Pairing pairing) {
  if (table != nullptr && table->n_tokens != seq_len) {
    throw nm::InvalidInput("attention block: rotary table has " + std::to_string(table->n_tokens) +
                           " tokens for sequences of " + std::to_string(seq_len));
  }
  auto linear = [](const nm::Tensor<T>& x, const nm::Tensor<T>& w, const nm::Tensor<T>& b) {
    return nm::add_row(nm::matmul(x, w), b);
  };
  auto h = nm::layer_norm_rows(z, p.ln1_gain, p.ln1_bias);
  auto q = linear(h, p.q_weight, p.q_bias);
  auto k = linear(h, p.k_weight, p.k_bias);
  auto v = linear(h, p.v_weight, p.v_bias);
  if (table != nullptr) {
    q = rope::apply_rope(q, *table, heads, pairing);
    k = rope::apply_rope(k, *table, heads, pairing);
  }
  auto attn = nm::scaled_dot_product_attention(q, k, v, heads, seq_len);
  auto x = nm::add(z, linear(attn, p.out_weight, p.out_bias));
  auto m = nm::layer_norm_rows(x, p.ln2_gain, p.ln2_bias);
  m = linear(nm::gelu(linear(m, p.fc1_weight, p.fc1_bias)), p.fc2_weight, p.fc2_bias);
  return nm::add(x, m);
}

template void init_block(nm::ParameterSet<float>&, const std::string&, std::size_t, std::size_t,
                         std::mt19937_64&);
template void init_block(nm::ParameterSet<double>&, const std::string&, std::size_t, std::size_t,
                         std::mt19937_64&);
template BlockParams<float> bind_block(nm::ParameterSet<float>&, const std::string&);
template BlockParams<double> bind_block(nm::ParameterSet<double>&, const std::string&);
template nm::Tensor<float> joint_st_attention_block(const nm::Tensor<float>&, const BlockParams<float>&,
                                                    const rope::RotationTable*, std::size_t, std::size_t,
                                                    rope::Pairing);
template nm::Tensor<double> joint_st_attention_block(const nm::Tensor<double>&, const BlockParams<double>&,
                                                     const rope::RotationTable*, std::size_t, std::size_t,
                                                     rope::Pairing);

}  // namespace vtr::video
