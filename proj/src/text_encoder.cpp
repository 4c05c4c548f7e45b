#include "vtr/text_encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "vtr/numerics/ops.hpp"
#include "vtr/rope.hpp"

namespace vtr::text {

namespace nm = vtr::numerics;
using nm::InvalidInput;

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  words_ = {"<pad>", "<unk>"};
  for (const auto& w : words) {
    std::string lw = w;
    std::transform(lw.begin(), lw.end(), lw.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (lw == "<pad>" || lw == "<unk>") continue;
    if (std::find(words_.begin(), words_.end(), lw) == words_.end()) words_.push_back(lw);
  }
  for (std::size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = i;
}

std::size_t Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

void to_json(nlohmann::json& j, const Vocabulary& v) {
  j = std::vector<std::string>(v.words().begin() + 2, v.words().end());
}

void from_json(const nlohmann::json& j, Vocabulary& v) { v = Vocabulary(j.get<std::vector<std::string>>()); }

TokenSequence tokenize(const std::string& caption, const Vocabulary& vocab, std::size_t max_len) {
  TokenSequence seq{std::vector<std::size_t>(max_len, Vocabulary::kPad), 0};
  std::istringstream is(caption);
  std::string w;
  while (is >> w && seq.length < max_len) {
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    seq.ids[seq.length++] = vocab.id(w);
  }
  return seq;
}

void TextEncoderConfig::validate() const {
  if (vocab_size < 2) throw InvalidInput("text encoder: vocabulary needs at least pad and unknown");
  if (max_len == 0) throw InvalidInput("text encoder: max_len must be >= 1");
  if (dim == 0 || heads == 0 || dim % heads != 0 || head_dim() % 2 != 0) {
    throw InvalidInput("text encoder: width must split into heads of even width");
  }
  if (blocks == 0 || mlp_ratio == 0 || embed_dim == 0) throw InvalidInput("text encoder: empty architecture");
}

void to_json(nlohmann::json& j, const TextEncoderConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size}, {"max_len", c.max_len},     {"dim", c.dim},
                     {"heads", c.heads},           {"blocks", c.blocks},       {"mlp_ratio", c.mlp_ratio},
                     {"embed_dim", c.embed_dim},   {"rope_base", c.rope_base}, {"embed_stddev", c.embed_stddev}};
}

void from_json(const nlohmann::json& j, TextEncoderConfig& c) {
  TextEncoderConfig d;
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.max_len = j.value("max_len", d.max_len);
  c.dim = j.value("dim", d.dim);
  c.heads = j.value("heads", d.heads);
  c.blocks = j.value("blocks", d.blocks);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.rope_base = j.value("rope_base", d.rope_base);
  c.embed_stddev = j.value("embed_stddev", d.embed_stddev);
}

template <typename T>
void TextEncoder<T>::init_parameters(const TextEncoderConfig& cfg, nm::ParameterSet<T>& params, std::mt19937_64& rng,
                                     const std::string& prefix) {
  cfg.validate();
  params.add_normal(prefix + "embed.weight", {cfg.vocab_size, cfg.dim}, cfg.embed_stddev, rng);
  for (std::size_t b = 0; b < cfg.blocks; ++b)
    video::init_block(params, prefix + "block" + std::to_string(b), cfg.dim, cfg.mlp_ratio, rng);
  params.add_constant(prefix + "norm.gain", {1, cfg.dim}, T(1));
  params.add_constant(prefix + "norm.bias", {1, cfg.dim}, T(0));
  params.add_normal(prefix + "proj.weight", {cfg.dim, cfg.embed_dim}, 1.0 / std::sqrt(double(cfg.dim)), rng);
  params.add_constant(prefix + "proj.bias", {1, cfg.embed_dim}, T(0));
}

template <typename T>
TextEncoder<T>::TextEncoder(TextEncoderConfig cfg, nm::ParameterSet<T>& params, const std::string& prefix)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  embedding_ = params.at(prefix + "embed.weight");
  for (std::size_t b = 0; b < cfg_.blocks; ++b)
    blocks_.push_back(video::bind_block(params, prefix + "block" + std::to_string(b)));
  norm_gain_ = params.at(prefix + "norm.gain");
  norm_bias_ = params.at(prefix + "norm.bias");
  proj_weight_ = params.at(prefix + "proj.weight");
  proj_bias_ = params.at(prefix + "proj.bias");
}

template <typename T>
nm::Tensor<T> TextEncoder<T>::encode(std::span<const TokenSequence> captions) const {
  if (captions.empty()) throw InvalidInput("text encoder: empty batch");
  // Captions of equal length share one batched pass.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    const auto& c = captions[i];
    if (c.length > c.ids.size()) throw InvalidInput("text encoder: length exceeds sequence");
    for (std::size_t t = 0; t < c.length; ++t)
      if (c.ids[t] >= cfg_.vocab_size) {
        throw InvalidInput("text encoder: token id " + std::to_string(c.ids[t]) + " outside vocabulary of " +
                           std::to_string(cfg_.vocab_size));
      }
    by_length[std::max<std::size_t>(1, c.length)].push_back(i);
  }
  std::vector<nm::Tensor<T>> pooled;
  std::vector<std::size_t> slot(captions.size());
  std::size_t next = 0;
  for (const auto& [len, members] : by_length) {
    std::vector<std::size_t> ids;
    for (auto i : members) {
      const auto& c = captions[i];
      for (std::size_t t = 0; t < len; ++t) ids.push_back(c.length == 0 ? Vocabulary::kPad : c.ids[t]);
      slot[i] = next++;
    }
    auto z = nm::gather_rows(embedding_, std::span<const std::size_t>(ids));
    const auto table = rope::build_temporal_rope(len, cfg_.head_dim(), cfg_.rope_base);
    for (const auto& b : blocks_) z = video::joint_st_attention_block(z, b, &table, cfg_.heads, len);
    z = nm::layer_norm_rows(z, norm_gain_, norm_bias_);
    pooled.push_back(nm::mean_pool_rows(z, len));
  }
  auto h = pooled.size() == 1 ? pooled.front() : nm::concat_rows(pooled);
  h = nm::gather_rows(h, std::span<const std::size_t>(slot));
  h = nm::add_row(nm::matmul(h, proj_weight_), proj_bias_);
  return nm::l2_normalize(h, 1).value;
}

template class TextEncoder<float>;
template class TextEncoder<double>;

}  // namespace vtr::text
