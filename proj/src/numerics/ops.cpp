#include "vtr/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vtr::numerics {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapC = Eigen::Map<const RowMat<T>>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;
template <typename T>
using StridedC = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using Strided = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                       shape_str(b.shape()));
  }
}

template <typename T>
Shape matrix_shape(std::size_t r, std::size_t c) {
  return {r, c};
}

// Accumulates g into the parent's gradient slot when that parent wants one.
template <typename T, typename F>
void accumulate(Node<T>& self, std::size_t parent, F&& f) {
  auto& p = *self.parents[parent];
  if (!p.requires_grad) return;
  f(p.ensure_grad());
}

template <typename T, typename F>
Tensor<T> unary(const Tensor<T>& a, F&& forward, auto derivative) {
  Buffer<T> out(a.numel());
  auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(in[i]);
  return make_result<T>(a.shape(), std::move(out), {a}, [derivative](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      const auto& x = self.parents[0]->value;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * derivative(x[i], self.value[i]);
    });
  });
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const auto m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw InvalidInput("matmul: inner extents differ " + shape_str(a.shape()) + " x " +
                       shape_str(b.shape()));
  }
  Buffer<T> out(m * n, T(0));
  if (k > 0 && m > 0 && n > 0) {
    Map<T>(out.data(), m, n).noalias() =
        MapC<T>(a.values().data(), m, k) * MapC<T>(b.values().data(), k, n);
  }
  return make_result<T>(matrix_shape<T>(m, n), std::move(out), {a, b}, [m, k, n](Node<T>& self) {
    if (m == 0 || n == 0 || k == 0) return;
    MapC<T> g(self.grad.data(), m, n);
    accumulate(self, 0, [&](std::span<T> ga) {
      Map<T>(ga.data(), m, k).noalias() += g * MapC<T>(self.parents[1]->value.data(), k, n).transpose();
    });
    accumulate(self, 1, [&](std::span<T> gb) {
      Map<T>(gb.data(), k, n).noalias() += MapC<T>(self.parents[0]->value.data(), m, k).transpose() * g;
    });
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  const auto m = a.rows(), n = a.cols();
  Buffer<T> out(m * n);
  auto in = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
  return make_result<T>(matrix_shape<T>(n, m), std::move(out), {a}, [m, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
    });
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Buffer<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      accumulate(self, p, [&](std::span<T> g) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      });
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Buffer<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    accumulate(self, 1, [&](std::span<T> g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    });
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  Buffer<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      accumulate(self, p, [&](std::span<T> g) {
        const auto& other = self.parents[1 - p]->value;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * other[i];
      });
    }
  });
}

template <typename T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& row) {
  const auto m = a.rows(), n = a.cols();
  if (row.numel() != n) {
    throw InvalidInput("add_row: row of " + std::to_string(row.numel()) + " values for " +
                       std::to_string(n) + " columns");
  }
  Buffer<T> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += row.values()[j];
  return make_result<T>(a.shape(), std::move(out), {a, row}, [m, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    accumulate(self, 1, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    });
  });
}

template <typename T>
Tensor<T> add_col(const Tensor<T>& a, const Tensor<T>& col) {
  const auto m = a.rows(), n = a.cols();
  if (col.numel() != m) {
    throw InvalidInput("add_col: column of " + std::to_string(col.numel()) + " values for " +
                       std::to_string(m) + " rows");
  }
  Buffer<T> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += col.values()[i];
  return make_result<T>(a.shape(), std::move(out), {a, col}, [m, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    accumulate(self, 1, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i] += self.grad[i * n + j];
    });
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return unary(a, [s](T x) { return s * x; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return unary(a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(a, [](T x) { return x > T(0) ? x : T(0); },
               [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
  return unary(a, [](T x) { return std::abs(x); },
               [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  return unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& a) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
  return unary(
      a, [](T x) { return T(0.5) * x * (T(1) + std::erf(x * kInvSqrt2)); },
      [](T x, T) {
        return T(0.5) * (T(1) + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(T(-0.5) * x * x);
      });
}

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& a) {
  const auto m = a.rows(), n = a.cols();
  if (n == 0) throw InvalidInput("softmax_lastdim: last extent must be >= 1");
  Buffer<T> out(m * n);
  auto in = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    const T* x = in.data() + i * n;
    T* y = out.data() + i * n;
    T mx = *std::max_element(x, x + n);
    T z = 0;
    for (std::size_t j = 0; j < n; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < n; ++j) y[j] /= z;
  }
  return make_result<T>(a.shape(), std::move(out), {a}, [m, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i) {
        const T* y = self.value.data() + i * n;
        const T* gy = self.grad.data() + i * n;
        T dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += y[j] * (gy[j] - dot);
      }
    });
  });
}

template <typename T>
Tensor<T> log_softmax_lastdim(const Tensor<T>& a) {
  const auto m = a.rows(), n = a.cols();
  if (n == 0) throw InvalidInput("log_softmax_lastdim: last extent must be >= 1");
  Buffer<T> out(m * n);
  auto in = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    const T* x = in.data() + i * n;
    const std::size_t am = std::size_t(std::max_element(x, x + n) - x);
    const T mx = x[am];
    // log Σ exp(x - mx) = log1p(Σ_{j≠am} ...) keeps tiny tails exact.
    T rest = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != am) rest += std::exp(x[j] - mx);
    const T lz = std::log1p(rest);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = (x[j] - mx) - lz;
  }
  return make_result<T>(a.shape(), std::move(out), {a}, [m, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i) {
        const T* y = self.value.data() + i * n;
        const T* gy = self.grad.data() + i * n;
        T total = 0;
        for (std::size_t j = 0; j < n; ++j) total += gy[j];
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += gy[j] - std::exp(y[j]) * total;
      }
    });
  });
}

template <typename T>
Tensor<T> log1p_sum_exp_rows(const Tensor<T>& a, std::span<const T> mask) {
  const auto m = a.rows(), n = a.cols();
  if (mask.size() != m * n) throw InvalidInput("log1p_sum_exp_rows: mask size mismatch");
  Buffer<T> out(m);
  // Softmax weights over {0} ∪ masked entries, kept for the backward pass.
  auto weights = std::make_shared<Buffer<T>>(m * n, T(0));
  auto in = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    T mx = 0;  // the implicit "1" term is exp(0)
    std::size_t am = n;  // n marks the implicit term as the largest
    for (std::size_t j = 0; j < n; ++j)
      if (mask[i * n + j] != T(0) && in[i * n + j] > mx) mx = in[i * n + j], am = j;
    // z = 1 + rest, where the 1 is the largest term after shifting by mx.
    T rest = am == n ? T(0) : std::exp(-mx);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[i * n + j] == T(0)) continue;
      const T e = ((*weights)[i * n + j] = std::exp(in[i * n + j] - mx));
      if (j != am) rest += e;
    }
    const T z = T(1) + rest;
    for (std::size_t j = 0; j < n; ++j) (*weights)[i * n + j] /= z;
    out[i] = mx + std::log1p(rest);
  }
  return make_result<T>(matrix_shape<T>(m, 1), std::move(out), {a}, [m, n, weights](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i] * (*weights)[i * n + j];
    });
  });
}

template <typename T>
Tensor<T> layer_norm_rows(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  const auto m = x.rows(), n = x.cols();
  if (gain.numel() != n || bias.numel() != n) throw InvalidInput("layer_norm_rows: affine size mismatch");
  Buffer<T> out(m * n);
  auto xhat = std::make_shared<Buffer<T>>(m * n);
  auto inv_std = std::make_shared<Buffer<T>>(m);
  auto in = x.values();
  auto gv = gain.values();
  auto bv = bias.values();
  for (std::size_t i = 0; i < m; ++i) {
    const T* r = in.data() + i * n;
    T mu = 0;
    for (std::size_t j = 0; j < n; ++j) mu += r[j];
    mu /= T(n);
    T var = 0;
    for (std::size_t j = 0; j < n; ++j) var += (r[j] - mu) * (r[j] - mu);
    var /= T(n);
    T is = T(1) / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < n; ++j) {
      T h = (r[j] - mu) * is;
      (*xhat)[i * n + j] = h;
      out[i * n + j] = h * gv[j] + bv[j];
    }
  }
  return make_result<T>(x.shape(), std::move(out), {x, gain, bias}, [m, n, xhat, inv_std](Node<T>& self) {
    const auto& gv = self.parents[1]->value;
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i) {
        const T* dy = self.grad.data() + i * n;
        const T* h = xhat->data() + i * n;
        T s1 = 0, s2 = 0;
        for (std::size_t j = 0; j < n; ++j) {
          T dh = dy[j] * gv[j];
          s1 += dh;
          s2 += dh * h[j];
        }
        T is = (*inv_std)[i] / T(n);
        for (std::size_t j = 0; j < n; ++j)
          g[i * n + j] += is * (T(n) * dy[j] * gv[j] - s1 - h[j] * s2);
      }
    });
    accumulate(self, 1, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j] * (*xhat)[i * n + j];
    });
    accumulate(self, 2, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    });
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T s = 0;
  for (T v : a.values()) s += v;
  return make_result<T>({1}, Buffer<T>{s}, {a}, [](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (auto& v : g) v += self.grad[0];
    });
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  if (a.numel() == 0) throw InvalidInput("mean: empty tensor");
  return scale(sum(a), T(1) / T(a.numel()));
}

template <typename T>
Tensor<T> row_sum(const Tensor<T>& a) {
  const auto m = a.rows(), n = a.cols();
  Buffer<T> out(m, T(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += a.values()[i * n + j];
  return make_result<T>(matrix_shape<T>(m, 1), std::move(out), {a}, [m, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i];
    });
  });
}

template <typename T>
Tensor<T> mean_pool_rows(const Tensor<T>& a, std::size_t segment) {
  const auto m = a.rows(), n = a.cols();
  if (segment == 0 || m % segment != 0) {
    throw InvalidInput("mean_pool_rows: " + std::to_string(m) + " rows not divisible into segments of " +
                       std::to_string(segment));
  }
  const auto groups = m / segment;
  Buffer<T> out(groups * n, T(0));
  const T inv = T(1) / T(segment);
  for (std::size_t s = 0; s < groups; ++s) {
    T* o = out.data() + s * n;
    for (std::size_t r = 0; r < segment; ++r) {
      const T* x = a.values().data() + (s * segment + r) * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += x[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] *= inv;
  }
  return make_result<T>(matrix_shape<T>(groups, n), std::move(out), {a},
                        [groups, segment, n, inv](Node<T>& self) {
                          accumulate(self, 0, [&](std::span<T> g) {
                            for (std::size_t s = 0; s < groups; ++s)
                              for (std::size_t r = 0; r < segment; ++r)
                                for (std::size_t j = 0; j < n; ++j)
                                  g[(s * segment + r) * n + j] += self.grad[s * n + j] * inv;
                          });
                        });
}

template <typename T>
Tensor<T> diag(const Tensor<T>& a) {
  const auto n = a.rows();
  if (a.cols() != n) throw InvalidInput("diag: matrix is not square " + shape_str(a.shape()));
  Buffer<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i * n + i];
  return make_result<T>(matrix_shape<T>(n, 1), std::move(out), {a}, [n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < n; ++i) g[i * n + i] += self.grad[i];
    });
  });
}

template <typename T>
Tensor<T> pairwise_diff(const Tensor<T>& v) {
  const auto n = v.numel();
  Buffer<T> out(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) out[j * n + k] = v.values()[k] - v.values()[j];
  return make_result<T>(matrix_shape<T>(n, n), std::move(out), {v}, [n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          g[k] += self.grad[j * n + k];
          g[j] -= self.grad[j * n + k];
        }
    });
  });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& a, std::size_t start, std::size_t count) {
  const auto n = a.cols();
  if (start + count > a.rows()) throw InvalidInput("slice_rows: range out of bounds");
  Buffer<T> out(a.values().begin() + start * n, a.values().begin() + (start + count) * n);
  return make_result<T>(matrix_shape<T>(count, n), std::move(out), {a}, [start, n](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[start * n + i] += self.grad[i];
    });
  });
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: no inputs");
  const auto n = parts.front().cols();
  std::size_t m = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) throw InvalidInput("concat_rows: column mismatch");
    m += p.rows();
  }
  Buffer<T> out;
  out.reserve(m * n);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_result<T>(matrix_shape<T>(m, n), std::move(out), parts, [](Node<T>& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      const auto len = self.parents[p]->value.size();
      accumulate(self, p, [&](std::span<T> g) {
        for (std::size_t i = 0; i < len; ++i) g[i] += self.grad[offset + i];
      });
      offset += len;
    }
  });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::size_t> ids) {
  const auto n = table.cols();
  Buffer<T> out(ids.size() * n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.rows()) throw InvalidInput("gather_rows: index out of range");
    std::copy_n(table.values().begin() + ids[i] * n, n, out.begin() + i * n);
  }
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  return make_result<T>(matrix_shape<T>(ids.size(), n), std::move(out), {table},
                        [idx = std::move(idx), n](Node<T>& self) {
                          accumulate(self, 0, [&](std::span<T> g) {
                            for (std::size_t i = 0; i < idx.size(); ++i)
                              for (std::size_t j = 0; j < n; ++j) g[idx[i] * n + j] += self.grad[i * n + j];
                          });
                        });
}

template <typename T>
NormalizedRows<T> l2_normalize(const Tensor<T>& x, int axis) {
  if (axis == 0) {
    auto r = l2_normalize(transpose(x), 1);
    return {transpose(r.value), std::move(r.zero_norm)};
  }
  if (axis != 1) throw InvalidInput("l2_normalize: axis must be 0 or 1");
  const auto m = x.rows(), n = x.cols();
  Buffer<T> out(x.values().begin(), x.values().end());
  auto inv_norm = std::make_shared<Buffer<T>>(m, T(0));
  std::vector<std::size_t> zero;
  for (std::size_t i = 0; i < m; ++i) {
    T ss = 0;
    for (std::size_t j = 0; j < n; ++j) ss += out[i * n + j] * out[i * n + j];
    if (ss == T(0)) {
      zero.push_back(i);
      continue;
    }
    T inv = T(1) / std::sqrt(ss);
    (*inv_norm)[i] = inv;
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= inv;
  }
  auto t = make_result<T>(x.shape(), std::move(out), {x}, [m, n, inv_norm](Node<T>& self) {
    accumulate(self, 0, [&](std::span<T> g) {
      for (std::size_t i = 0; i < m; ++i) {
        const T inv = (*inv_norm)[i];
        if (inv == T(0)) continue;  // zero rows pass through with zero gradient
        const T* y = self.value.data() + i * n;
        const T* gy = self.grad.data() + i * n;
        T dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += inv * (gy[j] - y[j] * dot);
      }
    });
  });
  return {std::move(t), std::move(zero)};
}

template <typename T>
Tensor<T> scaled_dot_product_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                                       std::size_t heads, std::size_t seq_len) {
  require_same_shape(q, k, "attention");
  require_same_shape(q, v, "attention");
  const auto rows = q.rows(), width = q.cols();
  if (heads == 0 || width % heads != 0) throw InvalidInput("attention: width not divisible by heads");
  if (seq_len == 0 || rows % seq_len != 0) throw InvalidInput("attention: rows not divisible by seq_len");
  const auto n_seq = rows / seq_len, dh = width / heads, L = seq_len;
  const T inv_scale = T(1) / std::sqrt(T(dh));

  Buffer<T> out(rows * width, T(0));
  auto probs = std::make_shared<Buffer<T>>(n_seq * heads * L * L);
  for (std::size_t s = 0; s < n_seq; ++s) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = s * L * width + h * dh;
      StridedC<T> Q(q.values().data() + off, L, dh, Eigen::OuterStride<>(width));
      StridedC<T> K(k.values().data() + off, L, dh, Eigen::OuterStride<>(width));
      StridedC<T> V(v.values().data() + off, L, dh, Eigen::OuterStride<>(width));
      Map<T> P(probs->data() + (s * heads + h) * L * L, L, L);
      P.noalias() = (Q * K.transpose()) * inv_scale;
      for (std::size_t i = 0; i < L; ++i) {
        T mx = P.row(i).maxCoeff();
        P.row(i) = (P.row(i).array() - mx).exp();
        P.row(i) /= P.row(i).sum();
      }
      Strided<T>(out.data() + off, L, dh, Eigen::OuterStride<>(width)).noalias() = P * V;
    }
  }
  return make_result<T>(
      q.shape(), std::move(out), {q, k, v},
      [=](Node<T>& self) {
        auto& nq = *self.parents[0];
        auto& nk = *self.parents[1];
        auto& nv = *self.parents[2];
        std::span<T> gq = nq.requires_grad ? nq.ensure_grad() : std::span<T>();
        std::span<T> gk = nk.requires_grad ? nk.ensure_grad() : std::span<T>();
        std::span<T> gv = nv.requires_grad ? nv.ensure_grad() : std::span<T>();
        RowMat<T> dP(L, L), dS(L, L);
        for (std::size_t s = 0; s < n_seq; ++s) {
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = s * L * width + h * dh;
            const Eigen::OuterStride<> stride(width);
            StridedC<T> Q(nq.value.data() + off, L, dh, stride);
            StridedC<T> K(nk.value.data() + off, L, dh, stride);
            StridedC<T> V(nv.value.data() + off, L, dh, stride);
            StridedC<T> dO(self.grad.data() + off, L, dh, stride);
            MapC<T> P(probs->data() + (s * heads + h) * L * L, L, L);
            if (!gv.empty()) Strided<T>(gv.data() + off, L, dh, stride).noalias() += P.transpose() * dO;
            if (gq.empty() && gk.empty()) continue;
            dP.noalias() = dO * V.transpose();
            for (std::size_t i = 0; i < L; ++i) {
              T dot = P.row(i).dot(dP.row(i));
              dS.row(i) = (P.row(i).array() * (dP.row(i).array() - dot)).matrix() * inv_scale;
            }
            if (!gq.empty()) Strided<T>(gq.data() + off, L, dh, stride).noalias() += dS * K;
            if (!gk.empty()) Strided<T>(gk.data() + off, L, dh, stride).noalias() += dS.transpose() * Q;
          }
        }
      });
}

#define VTR_INSTANTIATE_OPS(T)                                                                     \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> transpose(const Tensor<T>&);                                                  \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> add_row(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> add_col(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> scale(const Tensor<T>&, T);                                                   \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                              \
  template Tensor<T> relu(const Tensor<T>&);                                                       \
  template Tensor<T> abs(const Tensor<T>&);                                                        \
  template Tensor<T> exp(const Tensor<T>&);                                                        \
  template Tensor<T> log(const Tensor<T>&);                                                        \
  template Tensor<T> gelu(const Tensor<T>&);                                                       \
  template Tensor<T> softmax_lastdim(const Tensor<T>&);                                            \
  template Tensor<T> log_softmax_lastdim(const Tensor<T>&);                                        \
  template Tensor<T> log1p_sum_exp_rows(const Tensor<T>&, std::span<const T>);                     \
  template Tensor<T> layer_norm_rows(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);     \
  template Tensor<T> sum(const Tensor<T>&);                                                        \
  template Tensor<T> mean(const Tensor<T>&);                                                       \
  template Tensor<T> row_sum(const Tensor<T>&);                                                    \
  template Tensor<T> mean_pool_rows(const Tensor<T>&, std::size_t);                                \
  template Tensor<T> diag(const Tensor<T>&);                                                       \
  template Tensor<T> pairwise_diff(const Tensor<T>&);                                              \
  template Tensor<T> slice_rows(const Tensor<T>&, std::size_t, std::size_t);                       \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                                   \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const std::size_t>);                  \
  template NormalizedRows<T> l2_normalize(const Tensor<T>&, int);                                  \
  template Tensor<T> scaled_dot_product_attention(const Tensor<T>&, const Tensor<T>&,              \
                                                  const Tensor<T>&, std::size_t, std::size_t);

VTR_INSTANTIATE_OPS(float)
VTR_INSTANTIATE_OPS(double)

}  // namespace vtr::numerics
