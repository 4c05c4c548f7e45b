#include "vtr/video_encoder.hpp"

#include <cmath>

#include "vtr/numerics/ops.hpp"

namespace vtr::video {

namespace nm = vtr::numerics;

RopeMode rope_mode_from_string(const std::string& name) {
  if (name == "none") return RopeMode::kNone;
  if (name == "spatial") return RopeMode::kSpatial;
  if (name == "spatiotemporal") return RopeMode::kSpatiotemporal;
  if (name == "split3d") return RopeMode::kSplit3d;
  throw nm::InvalidInput("unknown rope mode '" + name + "'");
}

std::string to_string(RopeMode mode) {
  switch (mode) {
    case RopeMode::kNone: return "none";
    case RopeMode::kSpatial: return "spatial";
    case RopeMode::kSpatiotemporal: return "spatiotemporal";
    case RopeMode::kSplit3d: return "split3d";
  }
  return "none";
}

void VideoEncoderConfig::validate() const {
  auto fail = [](const std::string& msg) { throw nm::InvalidInput("video encoder config: " + msg); };
  if (patch == 0) fail("patch size must be >= 1");
  if (height % patch != 0 || width % patch != 0) {
    fail(std::to_string(height) + "x" + std::to_string(width) + " frames are not divisible by patch " +
         std::to_string(patch));
  }
  if (channels == 0 || frames == 0 || height == 0 || width == 0) fail("empty clip shape");
  if (dim == 0 || dim % 2 != 0) fail("width must be even");
  if (heads == 0 || dim % heads != 0) fail("width not divisible by heads");
  if (head_dim() % 2 != 0) fail("head width must be even");
  if ((rope == RopeMode::kSpatial || rope == RopeMode::kSpatiotemporal) && head_dim() % 4 != 0) {
    fail("2D rotary tables need a head width divisible by 4");
  }
  if (blocks == 0 || mlp_ratio == 0 || embed_dim == 0) fail("blocks, mlp_ratio and embed_dim must be >= 1");
}

void to_json(nlohmann::json& j, const VideoEncoderConfig& c) {
  j = nlohmann::json{{"channels", c.channels},
                     {"frames", c.frames},
                     {"height", c.height},
                     {"width", c.width},
                     {"patch", c.patch},
                     {"dim", c.dim},
                     {"heads", c.heads},
                     {"blocks", c.blocks},
                     {"mlp_ratio", c.mlp_ratio},
                     {"embed_dim", c.embed_dim},
                     {"temporal_pe", c.temporal_pe},
                     {"spatial_pe", c.spatial_pe},
                     {"rope", to_string(c.rope)},
                     {"rope_base", c.rope_base},
                     {"pairing", rope::to_string(c.pairing)},
                     {"split_fractions", c.split_fractions},
                     {"pe_stddev", c.pe_stddev}};
}

void from_json(const nlohmann::json& j, VideoEncoderConfig& c) {
  VideoEncoderConfig d;
  c.channels = j.value("channels", d.channels);
  c.frames = j.value("frames", d.frames);
  c.height = j.value("height", d.height);
  c.width = j.value("width", d.width);
  c.patch = j.value("patch", d.patch);
  c.dim = j.value("dim", d.dim);
  c.heads = j.value("heads", d.heads);
  c.blocks = j.value("blocks", d.blocks);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.temporal_pe = j.value("temporal_pe", d.temporal_pe);
  c.spatial_pe = j.value("spatial_pe", d.spatial_pe);
  c.rope = rope_mode_from_string(j.value("rope", to_string(d.rope)));
  c.rope_base = j.value("rope_base", d.rope_base);
  c.pairing = rope::pairing_from_string(j.value("pairing", rope::to_string(d.pairing)));
  c.split_fractions = j.value("split_fractions", d.split_fractions);
  c.pe_stddev = j.value("pe_stddev", d.pe_stddev);
}

std::vector<float> extract_patches(const VideoTensor& v, std::size_t p) {
  if (p == 0 || v.height % p != 0 || v.width % p != 0) {
    throw nm::InvalidInput("patchify: " + std::to_string(v.height) + "x" + std::to_string(v.width) +
                           " frames are not divisible by patch " + std::to_string(p));
  }
  const std::size_t rows = v.height / p, cols = v.width / p, per = v.channels * p * p;
  std::vector<float> out(v.frames * rows * cols * per);
  std::size_t o = 0;
  for (std::size_t t = 0; t < v.frames; ++t)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t ch = 0; ch < v.channels; ++ch)
          for (std::size_t y = 0; y < p; ++y)
            for (std::size_t x = 0; x < p; ++x) out[o++] = v.at(ch, t, r * p + y, c * p + x);
  return out;
}

rope::RotationTable build_video_table(const VideoEncoderConfig& cfg) {
  const std::size_t hd = cfg.head_dim();
  switch (cfg.rope) {
    case RopeMode::kNone:
      return rope::RotationTable::identity(cfg.tokens(), hd, rope::AxisTag::kExternal);
    case RopeMode::kSpatial:
      return rope::compose_st_rope(
          rope::build_spatial_rope(cfg.grid_rows(), cfg.grid_cols(), hd, cfg.rope_base),
          rope::RotationTable::identity(cfg.frames, hd, rope::AxisTag::kTemporal));
    case RopeMode::kSpatiotemporal:
      return rope::compose_st_rope(
          rope::build_spatial_rope(cfg.grid_rows(), cfg.grid_cols(), hd, cfg.rope_base),
          rope::build_temporal_rope(cfg.frames, hd, cfg.rope_base));
    case RopeMode::kSplit3d:
      return rope::build_split_3d_rope(cfg.frames, cfg.grid_rows(), cfg.grid_cols(), hd,
                                       cfg.split_fractions, cfg.rope_base);
  }
  throw nm::InvalidInput("unknown rope mode");
}

template <typename T>
void VideoEncoder<T>::init_parameters(const VideoEncoderConfig& cfg, nm::ParameterSet<T>& params,
                                      std::mt19937_64& rng, const std::string& prefix) {
  cfg.validate();
  const std::size_t in = cfg.patch_values(), d = cfg.dim;
  params.add_normal(prefix + "patch.weight", {in, d}, 1.0 / std::sqrt(double(in)), rng);
  params.add_constant(prefix + "patch.bias", {1, d}, T(0));
  if (cfg.temporal_pe) params.add_normal(prefix + "pos.temporal", {cfg.frames, d}, cfg.pe_stddev, rng);
  if (cfg.spatial_pe) params.add_normal(prefix + "pos.spatial", {cfg.patches_per_frame(), d}, cfg.pe_stddev, rng);
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    init_block(params, prefix + "block" + std::to_string(b), d, cfg.mlp_ratio, rng);
  }
  params.add_constant(prefix + "norm.gain", {1, d}, T(1));
  params.add_constant(prefix + "norm.bias", {1, d}, T(0));
  params.add_normal(prefix + "proj.weight", {d, cfg.embed_dim}, 1.0 / std::sqrt(double(d)), rng);
  params.add_constant(prefix + "proj.bias", {1, cfg.embed_dim}, T(0));
}

template <typename T>
VideoEncoder<T>::VideoEncoder(VideoEncoderConfig cfg, nm::ParameterSet<T>& params, const std::string& prefix)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  table_ = build_video_table(cfg_);
  if (cfg_.head_dim() % 4 == 0) {
    spatial_table_ = rope::build_spatial_rope(cfg_.grid_rows(), cfg_.grid_cols(), cfg_.head_dim(), cfg_.rope_base);
  }
  patch_weight_ = params.at(prefix + "patch.weight");
  patch_bias_ = params.at(prefix + "patch.bias");
  if (cfg_.temporal_pe) pos_temporal_ = params.at(prefix + "pos.temporal");
  if (cfg_.spatial_pe) pos_spatial_ = params.at(prefix + "pos.spatial");
  for (std::size_t b = 0; b < cfg_.blocks; ++b) blocks_.push_back(bind_block(params, prefix + "block" + std::to_string(b)));
  norm_gain_ = params.at(prefix + "norm.gain");
  norm_bias_ = params.at(prefix + "norm.bias");
  proj_weight_ = params.at(prefix + "proj.weight");
  proj_bias_ = params.at(prefix + "proj.bias");
}

template <typename T>
void VideoEncoder<T>::check_input(const VideoTensor& v, std::size_t frames) const {
  if (v.channels != cfg_.channels || v.frames != frames || v.height != cfg_.height || v.width != cfg_.width) {
    throw nm::InvalidInput("video encoder: clip " + std::to_string(v.channels) + "x" + std::to_string(v.frames) +
                           "x" + std::to_string(v.height) + "x" + std::to_string(v.width) +
                           " does not match the configured shape");
  }
  if (v.pixels.size() != v.channels * v.frames * v.height * v.width) {
    throw nm::InvalidInput("video encoder: pixel buffer size mismatch");
  }
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::patchify(std::span<const VideoTensor> videos) const {
  if (videos.empty()) throw nm::InvalidInput("patchify: empty batch");
  const std::size_t per = cfg_.patch_values();
  std::vector<T> raw;
  std::size_t rows = 0;
  for (const auto& v : videos) {
    if (v.channels != cfg_.channels || v.height != cfg_.height || v.width != cfg_.width ||
        v.frames != videos.front().frames) {
      throw nm::InvalidInput("patchify: clip shape does not match the configured shape");
    }
    auto p = extract_patches(v, cfg_.patch);
    raw.insert(raw.end(), p.begin(), p.end());
    rows += p.size() / per;
  }
  auto x = nm::Tensor<T>::constant({rows, per}, std::move(raw));
  return nm::add_row(nm::matmul(x, patch_weight_), patch_bias_);
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::add_positional(const nm::Tensor<T>& z0) const {
  const std::size_t patches = cfg_.patches_per_frame();
  const std::size_t seq = cfg_.tokens();
  if (z0.cols() != cfg_.dim || z0.rows() % seq != 0) {
    throw nm::InvalidInput("add_positional: latent shape " + nm::shape_str(z0.shape()) +
                           " does not match tokens x dim");
  }
  nm::Tensor<T> z = z0;
  const std::size_t n = z0.rows();
  if (pos_temporal_.defined()) {
    std::vector<std::size_t> ids(n);
    for (std::size_t r = 0; r < n; ++r) ids[r] = (r % seq) / patches;
    z = nm::add(z, nm::gather_rows(pos_temporal_, std::span<const std::size_t>(ids)));
  }
  if (pos_spatial_.defined()) {
    std::vector<std::size_t> ids(n);
    for (std::size_t r = 0; r < n; ++r) ids[r] = r % patches;
    z = nm::add(z, nm::gather_rows(pos_spatial_, std::span<const std::size_t>(ids)));
  }
  return z;
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::block(const nm::Tensor<T>& z, std::size_t index) const {
  const rope::RotationTable* table = cfg_.rope == RopeMode::kNone ? nullptr : &table_;
  return joint_st_attention_block(z, blocks_.at(index), table, cfg_.heads, cfg_.tokens(), cfg_.pairing);
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::head(const nm::Tensor<T>& z) const {
  return head_with(z, cfg_.tokens());
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::head_with(const nm::Tensor<T>& z, std::size_t seq_len) const {
  auto h = nm::layer_norm_rows(z, norm_gain_, norm_bias_);
  h = nm::mean_pool_rows(h, seq_len);
  h = nm::add_row(nm::matmul(h, proj_weight_), proj_bias_);
  return nm::l2_normalize(h, 1).value;
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::run(const nm::Tensor<T>& z0, const rope::RotationTable* table,
                                   std::size_t seq_len) const {
  nm::Tensor<T> z = z0;
  for (const auto& b : blocks_) z = joint_st_attention_block(z, b, table, cfg_.heads, seq_len, cfg_.pairing);
  return head_with(z, seq_len);
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::encode(std::span<const VideoTensor> videos) const {
  for (const auto& v : videos) check_input(v, cfg_.frames);
  const rope::RotationTable* table = cfg_.rope == RopeMode::kNone ? nullptr : &table_;
  return run(add_positional(patchify(videos)), table, cfg_.tokens());
}

template <typename T>
nm::Tensor<T> VideoEncoder<T>::encode_image(std::span<const VideoTensor> images) const {
  for (const auto& v : images) check_input(v, 1);
  const std::size_t patches = cfg_.patches_per_frame();
  nm::Tensor<T> z = patchify(images);
  if (pos_spatial_.defined()) {
    std::vector<std::size_t> ids(z.rows());
    for (std::size_t r = 0; r < ids.size(); ++r) ids[r] = r % patches;
    z = nm::add(z, nm::gather_rows(pos_spatial_, std::span<const std::size_t>(ids)));
  }
  const rope::RotationTable* table = spatial_table_.n_tokens ? &spatial_table_ : nullptr;
  if (cfg_.rope == RopeMode::kNone) table = nullptr;
  return run(z, table, patches);
}

template class VideoEncoder<float>;
template class VideoEncoder<double>;

}  // namespace vtr::video
