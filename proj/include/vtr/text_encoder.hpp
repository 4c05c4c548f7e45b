#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtr/numerics/parameter_set.hpp"
#include "vtr/numerics/tensor.hpp"
#include "vtr/transformer.hpp"

namespace vtr::text {

/// Closed vocabulary. Id 0 is padding, id 1 is unknown.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t id(const std::string& word) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, std::size_t> index_;
};

void to_json(nlohmann::json& j, const Vocabulary& v);
void from_json(const nlohmann::json& j, Vocabulary& v);

/// Ids padded to max_len; `length` counts the real tokens.
struct TokenSequence {
  std::vector<std::size_t> ids;
  std::size_t length = 0;
  bool operator==(const TokenSequence&) const = default;
};

/// Lowercases, splits on whitespace, maps unseen words to kUnk and truncates
/// to max_len.
TokenSequence tokenize(const std::string& caption, const Vocabulary& vocab, std::size_t max_len);

struct TextEncoderConfig {
  std::size_t vocab_size = 2;
  std::size_t max_len = 4;
  std::size_t dim = 32;
  std::size_t heads = 2;
  std::size_t blocks = 2;
  std::size_t mlp_ratio = 4;
  std::size_t embed_dim = 256;
  double rope_base = 10000.0;
  double embed_stddev = 1.0;

  std::size_t head_dim() const { return dim / heads; }
  void validate() const;
};

void to_json(nlohmann::json& j, const TextEncoderConfig& c);
void from_json(const nlohmann::json& j, TextEncoderConfig& c);

template <typename T>
class TextEncoder {
 public:
  static void init_parameters(const TextEncoderConfig& cfg, numerics::ParameterSet<T>& params, std::mt19937_64& rng,
                              const std::string& prefix = "text.");
  TextEncoder(TextEncoderConfig cfg, numerics::ParameterSet<T>& params, const std::string& prefix = "text.");

  const TextEncoderConfig& config() const { return cfg_; }

  /// Token embedding, blocks with 1D rotary positions over the unpadded
  /// tokens, mean pool, projection, unit normalisation. An empty sequence is
  /// encoded as a single padding token. n x embed_dim.
  numerics::Tensor<T> encode(std::span<const TokenSequence> captions) const;

 private:
  TextEncoderConfig cfg_;
  numerics::Tensor<T> embedding_;
  std::vector<video::BlockParams<T>> blocks_;
  numerics::Tensor<T> norm_gain_, norm_bias_, proj_weight_, proj_bias_;
};

}  // namespace vtr::text
