#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vtr/numerics/tensor.hpp"

// Rotary positional tables for video tokens.
//
// Tokens are ordered frame-major, then row-major over the patch grid: token
// index = t * (rows * cols) + row * cols + col. A table stores, for every token
// and every dimension pair, the cosine and sine of that pair's rotation angle.
namespace vtr::rope {

enum class AxisTag { kTemporal, kSpatial2d, kSpatiotemporal, kSplit3d, kExternal };

/// Which coordinates form a rotated pair. Interleaved: (x[2k], x[2k+1]).
/// Half-split: (x[k], x[k + dim/2]).
enum class Pairing { kInterleaved, kHalfSplit };

std::string to_string(AxisTag tag);
Pairing pairing_from_string(const std::string& name);
std::string to_string(Pairing p);

struct FrequencyTable {
  std::size_t dim = 0;
  double base = 10000.0;
  std::vector<double> theta;  // dim/2 entries, theta[k] = base^(-2k/dim)

  static FrequencyTable make(std::size_t dim, double base = 10000.0);
};

struct RotationTable {
  std::size_t n_tokens = 0;
  std::size_t dim = 0;
  std::vector<double> cos;  // n_tokens x dim/2
  std::vector<double> sin;
  AxisTag axis = AxisTag::kExternal;

  std::size_t pairs() const { return dim / 2; }
  double cos_at(std::size_t token, std::size_t pair) const { return cos[token * pairs() + pair]; }
  double sin_at(std::size_t token, std::size_t pair) const { return sin[token * pairs() + pair]; }

  static RotationTable identity(std::size_t n_tokens, std::size_t dim, AxisTag axis);
  bool operator==(const RotationTable&) const = default;
};

/// Pair k of frame t rotates by t·theta_k over the full width.
RotationTable build_temporal_rope(std::size_t frames, std::size_t dim, double base = 10000.0);

/// First dim/4 pairs rotate by row·theta, the last dim/4 by col·theta, with
/// theta taken from a dim/2-wide frequency table.
RotationTable build_spatial_rope(std::size_t grid_rows, std::size_t grid_cols, std::size_t dim,
                                 double base = 10000.0);

/// Replicates the spatial table over frames and the temporal table over
/// patches, then adds angles through the angle-sum identities. The result has
/// frames * spatial.n_tokens tokens.
RotationTable compose_st_rope(const RotationTable& spatial, const RotationTable& temporal);

/// Disjoint row/col/time slices, each an independent 1D table over its own
/// axis. Throws when a slice is not a whole even number of dimensions.
RotationTable build_split_3d_rope(std::size_t frames, std::size_t grid_rows, std::size_t grid_cols,
                                  std::size_t dim,
                                  std::array<double, 3> fractions = {3.0 / 8.0, 3.0 / 8.0, 1.0 / 4.0},
                                  double base = 10000.0);

/// Rotates one dim-wide vector as token `token` of `table`.
std::vector<double> rotate(std::span<const double> x, const RotationTable& table, std::size_t token,
                           Pairing pairing = Pairing::kInterleaved);

/// Differentiable rotation of a token sequence.
///
/// `seq` has n_seq * table.n_tokens rows (sequences stacked) and
/// heads * table.dim columns; each head block is rotated independently.
template <typename T>
numerics::Tensor<T> apply_rope(const numerics::Tensor<T>& seq, const RotationTable& table,
                               std::size_t heads = 1, Pairing pairing = Pairing::kInterleaved);

/// Flat little-endian export: u64 n_tokens, u64 dim, then the cos table and
/// the sin table as row-major f64.
void write_table(std::ostream& os, const RotationTable& table);
RotationTable read_table(std::istream& is);

}  // namespace vtr::rope
