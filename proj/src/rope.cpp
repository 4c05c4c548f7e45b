#include "vtr/rope.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

namespace vtr::rope {

using numerics::InvalidInput;

std::string to_string(AxisTag tag) {
  switch (tag) {
    case AxisTag::kTemporal: return "temporal";
    case AxisTag::kSpatial2d: return "spatial2d";
    case AxisTag::kSpatiotemporal: return "spatiotemporal";
    case AxisTag::kSplit3d: return "split3d";
    case AxisTag::kExternal: return "external";
  }
  return "external";
}

Pairing pairing_from_string(const std::string& name) {
  if (name == "interleaved") return Pairing::kInterleaved;
  if (name == "half_split") return Pairing::kHalfSplit;
  throw InvalidInput("unknown rope pairing '" + name + "'");
}

std::string to_string(Pairing p) {
  return p == Pairing::kInterleaved ? "interleaved" : "half_split";
}

FrequencyTable FrequencyTable::make(std::size_t dim, double base) {
  if (dim == 0 || dim % 2 != 0) throw InvalidInput("frequency table: dim must be even and positive");
  if (!(base > 0.0)) throw InvalidInput("frequency table: base must be positive");
  FrequencyTable f{dim, base, std::vector<double>(dim / 2)};
  for (std::size_t k = 0; k < dim / 2; ++k) f.theta[k] = std::pow(base, -2.0 * double(k) / double(dim));
  return f;
}

RotationTable RotationTable::identity(std::size_t n_tokens, std::size_t dim, AxisTag axis) {
  if (dim % 2 != 0) throw InvalidInput("rotation table: dim must be even");
  RotationTable t{n_tokens, dim, std::vector<double>(n_tokens * dim / 2, 1.0),
                  std::vector<double>(n_tokens * dim / 2, 0.0), axis};
  return t;
}

namespace {

void set_angle(RotationTable& t, std::size_t token, std::size_t pair, double angle) {
  t.cos[token * t.pairs() + pair] = std::cos(angle);
  t.sin[token * t.pairs() + pair] = std::sin(angle);
}

}  // namespace

RotationTable build_temporal_rope(std::size_t frames, std::size_t dim, double base) {
  if (frames == 0) throw InvalidInput("temporal rope: need at least one frame");
  if (dim % 2 != 0) throw InvalidInput("temporal rope: dim " + std::to_string(dim) + " is odd");
  const auto freq = FrequencyTable::make(dim, base);
  auto table = RotationTable::identity(frames, dim, AxisTag::kTemporal);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t k = 0; k < dim / 2; ++k) set_angle(table, t, k, double(t) * freq.theta[k]);
  return table;
}

RotationTable build_spatial_rope(std::size_t grid_rows, std::size_t grid_cols, std::size_t dim,
                                 double base) {
  if (dim == 0 || dim % 4 != 0) {
    throw InvalidInput("spatial rope: dim " + std::to_string(dim) + " is not divisible by 4");
  }
  if (grid_rows == 0 || grid_cols == 0) throw InvalidInput("spatial rope: empty grid");
  const auto freq = FrequencyTable::make(dim / 2, base);
  const std::size_t quarter = dim / 4;
  auto table = RotationTable::identity(grid_rows * grid_cols, dim, AxisTag::kSpatial2d);
  for (std::size_t r = 0; r < grid_rows; ++r) {
    for (std::size_t c = 0; c < grid_cols; ++c) {
      const std::size_t token = r * grid_cols + c;
      for (std::size_t k = 0; k < quarter; ++k) {
        set_angle(table, token, k, double(r) * freq.theta[k]);
        set_angle(table, token, quarter + k, double(c) * freq.theta[k]);
      }
    }
  }
  return table;
}

RotationTable compose_st_rope(const RotationTable& spatial, const RotationTable& temporal) {
  if (spatial.dim != temporal.dim) {
    throw InvalidInput("compose_st_rope: dim mismatch " + std::to_string(spatial.dim) + " vs " +
                       std::to_string(temporal.dim));
  }
  const std::size_t patches = spatial.n_tokens, frames = temporal.n_tokens, pairs = spatial.pairs();
  RotationTable out = RotationTable::identity(frames * patches, spatial.dim, AxisTag::kSpatiotemporal);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t s = 0; s < patches; ++s) {
      const std::size_t token = t * patches + s;
      for (std::size_t k = 0; k < pairs; ++k) {
        const double cs = spatial.cos_at(s, k), ss = spatial.sin_at(s, k);
        const double ct = temporal.cos_at(t, k), st = temporal.sin_at(t, k);
        out.cos[token * pairs + k] = cs * ct - ss * st;
        out.sin[token * pairs + k] = ss * ct + cs * st;
      }
    }
  }
  return out;
}

RotationTable build_split_3d_rope(std::size_t frames, std::size_t grid_rows, std::size_t grid_cols,
                                  std::size_t dim, std::array<double, 3> fractions, double base) {
  static constexpr const char* kAxis[3] = {"row", "col", "time"};
  std::array<std::size_t, 3> widths{};
  std::size_t total = 0;
  for (int a = 0; a < 3; ++a) {
    const double w = double(dim) * fractions[a];
    const double rounded = std::round(w);
    if (std::abs(w - rounded) > 1e-9 || rounded < 2 || std::fmod(rounded, 2.0) != 0.0) {
      std::ostringstream os;
      os << "split 3d rope: dim " << dim << " * " << fractions[a] << " = " << w << " for the "
         << kAxis[a] << " axis is not a positive even number of dimensions, so the width cannot be "
         << "split into rotation pairs";
      throw InvalidInput(os.str());
    }
    widths[a] = static_cast<std::size_t>(rounded);
    total += widths[a];
  }
  if (total != dim) {
    throw InvalidInput("split 3d rope: slices sum to " + std::to_string(total) + ", not " +
                       std::to_string(dim));
  }
  if (frames == 0 || grid_rows == 0 || grid_cols == 0) throw InvalidInput("split 3d rope: empty grid");

  std::array<FrequencyTable, 3> freq{FrequencyTable::make(widths[0], base),
                                     FrequencyTable::make(widths[1], base),
                                     FrequencyTable::make(widths[2], base)};
  const std::size_t patches = grid_rows * grid_cols;
  auto table = RotationTable::identity(frames * patches, dim, AxisTag::kSplit3d);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t r = 0; r < grid_rows; ++r) {
      for (std::size_t c = 0; c < grid_cols; ++c) {
        const std::size_t token = t * patches + r * grid_cols + c;
        const std::array<double, 3> pos{double(r), double(c), double(t)};
        std::size_t pair = 0;
        for (int a = 0; a < 3; ++a)
          for (std::size_t k = 0; k < widths[a] / 2; ++k) set_angle(table, token, pair++, pos[a] * freq[a].theta[k]);
      }
    }
  }
  return table;
}

namespace {

// Index of the two coordinates forming pair k within a dim-wide block.
inline std::pair<std::size_t, std::size_t> pair_index(std::size_t k, std::size_t dim, Pairing p) {
  return p == Pairing::kInterleaved ? std::pair{2 * k, 2 * k + 1} : std::pair{k, k + dim / 2};
}

}  // namespace

std::vector<double> rotate(std::span<const double> x, const RotationTable& table, std::size_t token,
                           Pairing pairing) {
  if (x.size() != table.dim) throw InvalidInput("rotate: vector width does not match table");
  if (token >= table.n_tokens) throw InvalidInput("rotate: token out of range");
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t k = 0; k < table.pairs(); ++k) {
    auto [a, b] = pair_index(k, table.dim, pairing);
    const double c = table.cos_at(token, k), s = table.sin_at(token, k);
    out[a] = x[a] * c - x[b] * s;
    out[b] = x[a] * s + x[b] * c;
  }
  return out;
}

namespace {

// Rotates every head block of every row; direction -1 applies the inverse.
template <typename T>
void rotate_rows(std::span<const T> in, std::span<T> out, const RotationTable& table, std::size_t heads,
                 Pairing pairing, T direction, bool accumulate) {
  const std::size_t width = heads * table.dim;
  const std::size_t rows = in.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t token = r % table.n_tokens;
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t base = r * width + h * table.dim;
      for (std::size_t k = 0; k < table.pairs(); ++k) {
        auto [a, b] = pair_index(k, table.dim, pairing);
        const T c = static_cast<T>(table.cos_at(token, k));
        const T s = direction * static_cast<T>(table.sin_at(token, k));
        const T xa = in[base + a], xb = in[base + b];
        if (accumulate) {
          out[base + a] += xa * c - xb * s;
          out[base + b] += xa * s + xb * c;
        } else {
          out[base + a] = xa * c - xb * s;
          out[base + b] = xa * s + xb * c;
        }
      }
    }
  }
}

}  // namespace

template <typename T>
numerics::Tensor<T> apply_rope(const numerics::Tensor<T>& seq, const RotationTable& table,
                               std::size_t heads, Pairing pairing) {
  if (table.dim == 0 || heads == 0 || seq.cols() != heads * table.dim) {
    throw InvalidInput("apply_rope: sequence width " + std::to_string(seq.cols()) + " != " +
                       std::to_string(heads) + " heads x table dim " + std::to_string(table.dim));
  }
  if (table.n_tokens == 0 || seq.rows() % table.n_tokens != 0) {
    throw InvalidInput("apply_rope: " + std::to_string(seq.rows()) + " tokens do not match a table of " +
                       std::to_string(table.n_tokens));
  }
  std::vector<T> out(seq.numel());
  rotate_rows<T>(seq.values(), out, table, heads, pairing, T(1), false);
  auto tp = std::make_shared<const RotationTable>(table);
  return numerics::make_result<T>(seq.shape(), std::move(out), {seq},
                                  [tp, heads, pairing](numerics::Node<T>& self) {
                                    auto& p = *self.parents[0];
                                    rotate_rows<T>(self.grad, p.ensure_grad(), *tp, heads, pairing, T(-1), true);
                                  });
}

template numerics::Tensor<float> apply_rope(const numerics::Tensor<float>&, const RotationTable&,
                                            std::size_t, Pairing);
template numerics::Tensor<double> apply_rope(const numerics::Tensor<double>&, const RotationTable&,
                                             std::size_t, Pairing);

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("rotation table: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_table(std::ostream& os, const RotationTable& table) {
  put_u64(os, table.n_tokens);
  put_u64(os, table.dim);
  for (double v : table.cos) put_u64(os, std::bit_cast<std::uint64_t>(v));
  for (double v : table.sin) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

RotationTable read_table(std::istream& is) {
  RotationTable t;
  t.n_tokens = get_u64(is);
  t.dim = get_u64(is);
  if (t.dim % 2 != 0) throw InvalidInput("rotation table: odd dim in stream");
  const std::size_t n = t.n_tokens * t.pairs();
  t.cos.resize(n);
  t.sin.resize(n);
  for (auto& v : t.cos) v = std::bit_cast<double>(get_u64(is));
  for (auto& v : t.sin) v = std::bit_cast<double>(get_u64(is));
  t.axis = AxisTag::kExternal;
  return t;
}

}  // namespace vtr::rope
