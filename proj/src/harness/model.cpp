#include "vtr/harness/model.hpp"

#include <random>

namespace vtr::harness {

using numerics::InvalidInput;

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"video", c.video}, {"text", c.text}, {"vocab", c.vocab}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.video = j.at("video").get<video::VideoEncoderConfig>();
  c.text = j.at("text").get<text::TextEncoderConfig>();
  c.vocab = j.at("vocab").get<text::Vocabulary>();
  if (c.text.vocab_size != c.vocab.size()) throw InvalidInput("model: text.vocab_size does not match vocabulary");
  if (c.text.embed_dim != c.video.embed_dim) throw InvalidInput("model: video and text embed_dim differ");
}

template <typename T>
DualEncoder<T>::DualEncoder(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.text.vocab_size = cfg_.vocab.size();
  if (cfg_.text.embed_dim != cfg_.video.embed_dim) throw InvalidInput("model: video and text embed_dim differ");
  std::mt19937_64 rng(seed);
  video::VideoEncoder<T>::init_parameters(cfg_.video, params_, rng);
  text::TextEncoder<T>::init_parameters(cfg_.text, params_, rng);
  bind();
}

template <typename T>
DualEncoder<T>::DualEncoder(ModelConfig cfg, numerics::ParameterSet<T> params)
    : cfg_(std::move(cfg)), params_(std::move(params)) {
  bind();
}

template <typename T>
void DualEncoder<T>::bind() {
  video_ = std::make_unique<video::VideoEncoder<T>>(cfg_.video, params_);
  text_ = std::make_unique<text::TextEncoder<T>>(cfg_.text, params_);
}

template <typename T>
numerics::Tensor<T> DualEncoder<T>::encode_videos(std::span<const video::VideoTensor> videos) const {
  return video_->encode(videos);
}

template <typename T>
numerics::Tensor<T> DualEncoder<T>::encode_texts(std::span<const relevancy::Caption> captions) const {
  std::vector<text::TokenSequence> seqs;
  seqs.reserve(captions.size());
  for (const auto& c : captions) seqs.push_back(text::tokenize(c.text, cfg_.vocab, cfg_.text.max_len));
  return text_->encode(seqs);
}

template <typename T>
std::vector<double> DualEncoder<T>::embed_videos(std::span<const video::VideoTensor> videos, std::size_t chunk) const {
  numerics::NoGradGuard guard;
  std::vector<double> out;
  out.reserve(videos.size() * embed_dim());
  for (std::size_t i = 0; i < videos.size(); i += chunk) {
    const auto e = encode_videos(videos.subspan(i, std::min(chunk, videos.size() - i)));
    out.insert(out.end(), e.values().begin(), e.values().end());
  }
  return out;
}

template <typename T>
std::vector<double> DualEncoder<T>::embed_texts(std::span<const relevancy::Caption> captions, std::size_t chunk) const {
  numerics::NoGradGuard guard;
  std::vector<double> out;
  out.reserve(captions.size() * embed_dim());
  for (std::size_t i = 0; i < captions.size(); i += chunk) {
    const auto e = encode_texts(captions.subspan(i, std::min(chunk, captions.size() - i)));
    out.insert(out.end(), e.values().begin(), e.values().end());
  }
  return out;
}

template class DualEncoder<float>;
template class DualEncoder<double>;

}  // namespace vtr::harness
