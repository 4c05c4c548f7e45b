#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vtr/numerics/tensor.hpp"

// Differentiable operations. Every function treats its inputs as matrices
// (see Tensor) and returns a new tensor; none broadcast implicitly.
namespace vtr::numerics {

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> transpose(const Tensor<T>& a);

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
/// a + 1·row, `row` is 1 x cols(a).
template <typename T> Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& row);
/// a + col·1ᵀ, `col` is rows(a) x 1.
template <typename T> Tensor<T> add_col(const Tensor<T>& a, const Tensor<T>& col);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T s);

template <typename T> Tensor<T> relu(const Tensor<T>& a);
/// Subgradient 0 at the origin.
template <typename T> Tensor<T> abs(const Tensor<T>& a);
template <typename T> Tensor<T> exp(const Tensor<T>& a);
template <typename T> Tensor<T> log(const Tensor<T>& a);
/// Exact (erf) GELU.
template <typename T> Tensor<T> gelu(const Tensor<T>& a);

/// Row softmax, stabilised by max subtraction.
template <typename T> Tensor<T> softmax_lastdim(const Tensor<T>& a);
template <typename T> Tensor<T> log_softmax_lastdim(const Tensor<T>& a);
/// log(1 + Σ_j mask_ij · exp(a_ij)) per row, computed stably; rows x 1.
/// `mask` entries must be 0 or 1 and is treated as a constant.
template <typename T>
Tensor<T> log1p_sum_exp_rows(const Tensor<T>& a, std::span<const T> mask);

template <typename T>
Tensor<T> layer_norm_rows(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                          T eps = T(1e-6));

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);
/// rows x 1.
template <typename T> Tensor<T> row_sum(const Tensor<T>& a);
/// Mean over consecutive groups of `segment` rows: (rows/segment) x cols.
template <typename T> Tensor<T> mean_pool_rows(const Tensor<T>& a, std::size_t segment);
/// Diagonal of a square matrix as n x 1.
template <typename T> Tensor<T> diag(const Tensor<T>& a);
/// 1 x n -> n x n with out(j, k) = v(k) - v(j).
template <typename T> Tensor<T> pairwise_diff(const Tensor<T>& v);

template <typename T> Tensor<T> slice_rows(const Tensor<T>& a, std::size_t start, std::size_t count);
template <typename T> Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts);
/// Embedding lookup: out row i = table row ids[i].
template <typename T> Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::size_t> ids);

template <typename T>
struct NormalizedRows {
  Tensor<T> value;
  /// Indices of rows (or columns, for axis 0) that had zero norm and were
  /// passed through unchanged.
  std::vector<std::size_t> zero_norm;
};

/// Unit-normalises along `axis` (1: each row, 0: each column).
template <typename T> NormalizedRows<T> l2_normalize(const Tensor<T>& x, int axis = 1);

/// Multi-head scaled dot-product attention over independent sequences.
///
/// q, k, v are (n_seq·seq_len) x width; each of `heads` heads owns a
/// contiguous width/heads column block. Attention never crosses sequence
/// boundaries.
template <typename T>
Tensor<T> scaled_dot_product_attention(const Tensor<T>& q, const Tensor<T>& k,
                                       const Tensor<T>& v, std::size_t heads,
                                       std::size_t seq_len);

}  // namespace vtr::numerics
