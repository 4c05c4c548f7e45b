#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtr/relevancy.hpp"
#include "vtr/video_encoder.hpp"

namespace vtr::harness {

/// Synthetic corpus of moving shapes. Every noun is a fixed shape and colour;
/// every verb is a motion program. Reversal twins (left/right, up/down,
/// grow/shrink) are rendered from one trajectory, one played backwards, so
/// their frame sets are identical and only order tells them apart.
struct MotionGridSpec {
  std::vector<std::string> verbs{"move_left", "move_right", "move_up", "move_down", "grow", "shrink", "hold"};
  std::vector<std::string> nouns{"square", "circle", "triangle", "cross", "diamond", "ring", "hbar", "vbar"};
  std::size_t frames = 4;
  std::size_t height = 32;
  std::size_t width = 32;
  double noise = 0.03;
  std::size_t train = 2000;
  std::size_t val = 400;
  std::uint64_t seed = 7;
  /// Fraction of training captions with the verb or the noun swapped.
  double caption_noise = 0.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const MotionGridSpec& s);
void from_json(const nlohmann::json& j, MotionGridSpec& s);

/// Every verb and noun the renderer knows.
const std::vector<std::string>& known_verbs();
const std::vector<std::string>& known_nouns();
/// The verb whose clips are the time reversal of this one's ("" if none).
std::string opposite_verb(const std::string& verb);

struct Clip {
  std::string id;
  relevancy::Caption caption;  // as shown to the model (possibly noisy)
  std::string verb, noun;      // ground truth of the rendered clip
  std::int64_t twin = -1;      // index of the reversed clip within the split
  video::VideoTensor video;
};

struct Split {
  std::string name;
  std::vector<Clip> clips;

  std::vector<relevancy::Caption> captions() const;
  relevancy::RelevancyMatrix relevancy(const relevancy::RelevancyConfig& cfg = {}) const;
};

struct Corpus {
  MotionGridSpec spec;
  Split train, val;

  const Split& split(const std::string& name) const;
  /// Sorted union of every verb and noun, for the text vocabulary.
  std::vector<std::string> words() const;
};

Corpus generate_dataset(const MotionGridSpec& spec);

/// spec.json, <split>.jsonl and <split>.videos (uint8 pixels) under dir.
void write_corpus(const Corpus& c, const std::filesystem::path& dir, bool export_relevancy = false);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace vtr::harness
