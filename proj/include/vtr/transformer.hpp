#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "vtr/numerics/parameter_set.hpp"
#include "vtr/numerics/tensor.hpp"
#include "vtr/rope.hpp"

namespace vtr::video {

/// Handles to one pre-norm block's leaves.
template <typename T>
struct BlockParams {
  numerics::Tensor<T> ln1_gain, ln1_bias;
  numerics::Tensor<T> q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, out_weight, out_bias;
  numerics::Tensor<T> ln2_gain, ln2_bias;
  numerics::Tensor<T> fc1_weight, fc1_bias, fc2_weight, fc2_bias;
};

/// Registers `<prefix>.*` leaves for one block. Projections draw from
/// N(0, 1/fan_in); norms start at identity; biases at zero.
template <typename T>
void init_block(numerics::ParameterSet<T>& params, const std::string& prefix, std::size_t width,
                std::size_t mlp_ratio, std::mt19937_64& rng);

template <typename T>
BlockParams<T> bind_block(numerics::ParameterSet<T>& params, const std::string& prefix);

/// One pre-norm transformer block with global attention inside each
/// sequence of `seq_len` rows:
///   z + Wo·Attn(R·Wq·LN(z), R·Wk·LN(z), Wv·LN(z)),  then  + MLP(LN(·)).
/// R is the rotary table applied per head; values are not rotated. A null
/// table skips rotation.
template <typename T>
numerics::Tensor<T> joint_st_attention_block(const numerics::Tensor<T>& z, const BlockParams<T>& p,
                                              const rope::RotationTable* table, std::size_t heads,
                                              std::size_t seq_len,
                                              rope::Pairing pairing = rope::Pairing::kInterleaved);

}  // namespace vtr::video
