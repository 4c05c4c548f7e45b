#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtr/numerics/parameter_set.hpp"
#include "vtr/numerics/tensor.hpp"
#include "vtr/rope.hpp"
#include "vtr/transformer.hpp"

namespace vtr::video {

/// Raw clip, channels x frames x height x width, values in [0, 1].
struct VideoTensor {
  std::size_t channels = 0, frames = 0, height = 0, width = 0;
  std::vector<float> pixels;

  float at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) const {
    return pixels[((c * frames + t) * height + y) * width + x];
  }
  float& at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) {
    return pixels[((c * frames + t) * height + y) * width + x];
  }
  static VideoTensor zeros(std::size_t c, std::size_t t, std::size_t h, std::size_t w) {
    return {c, t, h, w, std::vector<float>(c * t * h * w, 0.0f)};
  }
  bool operator==(const VideoTensor&) const = default;
};

/// How rotary angles are built for the video tokens.
enum class RopeMode {
  kNone,            // no rotation
  kSpatial,         // 2D spatial table replicated over frames
  kSpatiotemporal,  // spatial + temporal angles over the full width
  kSplit3d,         // disjoint row/col/time slices
};

RopeMode rope_mode_from_string(const std::string& name);
std::string to_string(RopeMode mode);

struct VideoEncoderConfig {
  std::size_t channels = 3;
  std::size_t frames = 4;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t patch = 8;
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t blocks = 4;
  std::size_t mlp_ratio = 4;
  std::size_t embed_dim = 256;
  bool temporal_pe = true;
  bool spatial_pe = true;
  RopeMode rope = RopeMode::kSpatiotemporal;
  double rope_base = 10000.0;
  rope::Pairing pairing = rope::Pairing::kInterleaved;
  std::array<double, 3> split_fractions{3.0 / 8.0, 3.0 / 8.0, 1.0 / 4.0};
  double pe_stddev = 0.02;

  std::size_t grid_rows() const { return height / patch; }
  std::size_t grid_cols() const { return width / patch; }
  std::size_t patches_per_frame() const { return grid_rows() * grid_cols(); }
  std::size_t tokens() const { return frames * patches_per_frame(); }
  std::size_t head_dim() const { return dim / heads; }
  std::size_t patch_values() const { return channels * patch * patch; }

  /// Throws InvalidInput describing the first violated constraint.
  void validate() const;
};

void to_json(nlohmann::json& j, const VideoEncoderConfig& c);
void from_json(const nlohmann::json& j, VideoEncoderConfig& c);

/// Rearranges one clip into a tokens x (C·p·p) matrix of raw patches, token
/// order frame-major then row-major. Each row holds one p x p patch of one
/// frame, channel-major.
std::vector<float> extract_patches(const VideoTensor& video, std::size_t patch);

/// Rotary table used by an encoder of this configuration (null for kNone).
rope::RotationTable build_video_table(const VideoEncoderConfig& cfg);

template <typename T>
class VideoEncoder {
 public:
  /// Registers all `<prefix>*` leaves with fresh initial values.
  static void init_parameters(const VideoEncoderConfig& cfg, numerics::ParameterSet<T>& params,
                              std::mt19937_64& rng, const std::string& prefix = "video.");

  /// Binds to leaves previously registered under `prefix`.
  VideoEncoder(VideoEncoderConfig cfg, numerics::ParameterSet<T>& params,
               const std::string& prefix = "video.");

  const VideoEncoderConfig& config() const { return cfg_; }
  const rope::RotationTable& table() const { return table_; }

  /// Tube convolution with kernel 1 x p x p, stride p: an affine map of every
  /// patch. Clips are stacked; result is (n · tokens) x dim.
  numerics::Tensor<T> patchify(std::span<const VideoTensor> videos) const;

  /// Adds P_t[t] + P_xy[s] to token (t, s) of each stacked clip.
  numerics::Tensor<T> add_positional(const numerics::Tensor<T>& z0) const;

  numerics::Tensor<T> block(const numerics::Tensor<T>& z, std::size_t index) const;

  /// Final norm, mean pool over tokens, projection, unit normalisation;
  /// n x embed_dim.
  numerics::Tensor<T> head(const numerics::Tensor<T>& z) const;

  /// Full pipeline for a batch of clips; n x embed_dim, unit rows.
  numerics::Tensor<T> encode(std::span<const VideoTensor> videos) const;

  /// Single-frame image path: spatial embeddings and the spatial table only,
  /// no temporal components. Inputs must have exactly one frame.
  numerics::Tensor<T> encode_image(std::span<const VideoTensor> images) const;

 private:
  numerics::Tensor<T> run(const numerics::Tensor<T>& z0, const rope::RotationTable* table,
                          std::size_t seq_len) const;
  numerics::Tensor<T> head_with(const numerics::Tensor<T>& z, std::size_t seq_len) const;
  void check_input(const VideoTensor& v, std::size_t frames) const;

  VideoEncoderConfig cfg_;
  rope::RotationTable table_;
  rope::RotationTable spatial_table_;
  numerics::Tensor<T> patch_weight_, patch_bias_;
  numerics::Tensor<T> pos_temporal_, pos_spatial_;  // undefined when disabled
  std::vector<BlockParams<T>> blocks_;
  numerics::Tensor<T> norm_gain_, norm_bias_, proj_weight_, proj_bias_;
};

}  // namespace vtr::video
