#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"
#include "vtr/relevancy.hpp"
#include "vtr/text_encoder.hpp"
#include "vtr/video_encoder.hpp"

namespace vtr::harness {

struct ModelConfig {
  video::VideoEncoderConfig video;
  text::TextEncoderConfig text;
  text::Vocabulary vocab;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Video and text towers over one parameter set.
template <typename T>
class DualEncoder {
 public:
  /// Fresh parameters drawn from `seed`; the text vocabulary size is taken
  /// from cfg.vocab.
  DualEncoder(ModelConfig cfg, std::uint64_t seed);
  /// Binds to existing parameters (e.g. from a checkpoint).
  DualEncoder(ModelConfig cfg, numerics::ParameterSet<T> params);

  DualEncoder(const DualEncoder&) = delete;
  DualEncoder& operator=(const DualEncoder&) = delete;

  const ModelConfig& config() const { return cfg_; }
  numerics::ParameterSet<T>& params() { return params_; }
  const numerics::ParameterSet<T>& params() const { return params_; }

  numerics::Tensor<T> encode_videos(std::span<const video::VideoTensor> videos) const;
  numerics::Tensor<T> encode_texts(std::span<const relevancy::Caption> captions) const;

  /// No-grad encoding in chunks, returned as a row-major double table.
  std::vector<double> embed_videos(std::span<const video::VideoTensor> videos, std::size_t chunk = 64) const;
  std::vector<double> embed_texts(std::span<const relevancy::Caption> captions, std::size_t chunk = 256) const;

  std::size_t embed_dim() const { return cfg_.video.embed_dim; }

 private:
  void bind();

  ModelConfig cfg_;
  numerics::ParameterSet<T> params_;
  std::unique_ptr<video::VideoEncoder<T>> video_;
  std::unique_ptr<text::TextEncoder<T>> text_;
};

}  // namespace vtr::harness
