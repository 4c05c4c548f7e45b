#include "vtr/harness/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "vtr/harness/random.hpp"
#include "vtr/numerics/tensor.hpp"

namespace vtr::harness {

using numerics::InvalidInput;
using video::VideoTensor;

namespace {

struct Shape {
  const char* name;
  std::array<float, 3> colour;
  std::function<bool(double, double)> inside;  // unit box coordinates in [-1, 1]
};

const std::vector<Shape>& shapes() {
  static const std::vector<Shape> s{
      {"square", {0.90f, 0.15f, 0.15f}, [](double u, double v) { return std::abs(u) <= 0.8 && std::abs(v) <= 0.8; }},
      {"circle", {0.20f, 0.85f, 0.20f}, [](double u, double v) { return u * u + v * v <= 1.0; }},
      {"triangle", {0.20f, 0.35f, 0.95f}, [](double u, double v) { return v >= -1.0 && v <= 1.0 && std::abs(u) <= (v + 1.0) / 2.0; }},
      {"cross", {0.95f, 0.90f, 0.20f},
       [](double u, double v) {
         return (std::abs(u) <= 0.3 && std::abs(v) <= 1.0) || (std::abs(v) <= 0.3 && std::abs(u) <= 1.0);
       }},
      {"diamond", {0.90f, 0.20f, 0.90f}, [](double u, double v) { return std::abs(u) + std::abs(v) <= 1.0; }},
      {"ring", {0.20f, 0.90f, 0.90f},
       [](double u, double v) {
         const double r = u * u + v * v;
         return r <= 1.0 && r >= 0.3;
       }},
      {"hbar", {1.00f, 0.55f, 0.10f}, [](double u, double v) { return std::abs(u) <= 1.0 && std::abs(v) <= 0.35; }},
      {"vbar", {0.95f, 0.95f, 0.95f}, [](double u, double v) { return std::abs(u) <= 0.35 && std::abs(v) <= 1.0; }},
  };
  return s;
}

const Shape& shape_for(const std::string& noun) {
  for (const auto& s : shapes())
    if (noun == s.name) return s;
  throw InvalidInput("unknown noun '" + noun + "'");
}

enum class Motion { kHorizontal, kVertical, kScale, kStatic };

struct VerbInfo {
  const char* name;
  Motion motion;
  bool reversed;
  const char* opposite;
};

const std::vector<VerbInfo>& verb_table() {
  static const std::vector<VerbInfo> v{
      {"move_right", Motion::kHorizontal, false, "move_left"}, {"move_left", Motion::kHorizontal, true, "move_right"},
      {"move_down", Motion::kVertical, false, "move_up"},      {"move_up", Motion::kVertical, true, "move_down"},
      {"grow", Motion::kScale, false, "shrink"},               {"shrink", Motion::kScale, true, "grow"},
      {"hold", Motion::kStatic, false, ""},
  };
  return v;
}

const VerbInfo& verb_info(const std::string& verb) {
  for (const auto& v : verb_table())
    if (verb == v.name) return v;
  throw InvalidInput("unknown verb '" + verb + "'");
}

constexpr double kMinSize = 6.0, kMaxSize = 10.0;
constexpr double kMaxSpeed = 4.0, kMinSpeed = 0.5;
constexpr float kBackground = 0.1f;

double max_speed(const MotionGridSpec& s) {
  if (s.frames < 2) return kMaxSpeed;
  const double room = double(std::min(s.height, s.width)) - kMaxSize - 2.0;
  return std::min(kMaxSpeed, room / double(s.frames - 1));
}

/// Object state at trajectory step k.
struct State {
  double cx, cy, size;
};

struct Trajectory {
  Motion motion;
  double x0, y0, size0, rate;

  State at(std::size_t k) const {
    const double d = rate * double(k);
    switch (motion) {
      case Motion::kHorizontal: return {x0 + d, y0, size0};
      case Motion::kVertical: return {x0, y0 + d, size0};
      case Motion::kScale: return {x0, y0, size0 + d};
      case Motion::kStatic: break;
    }
    return {x0, y0, size0};
  }
};

Trajectory sample_trajectory(Motion motion, const MotionGridSpec& spec, std::mt19937_64& rng) {
  const double W = double(spec.width), H = double(spec.height);
  const double steps = spec.frames > 1 ? double(spec.frames - 1) : 0.0;
  Trajectory t{motion, 0, 0, 0, 0};
  if (motion == Motion::kScale) {
    const double cap = std::min(W, H) - 2.0;
    t.size0 = uniform(rng, kMinSize - 2.0, kMinSize);
    const double max_rate = steps > 0 ? std::min(3.0, (cap - t.size0) / steps) : 0.0;
    t.rate = uniform(rng, std::max(0.5, 0.6 * max_rate), max_rate);
    const double half = (t.size0 + t.rate * steps) / 2.0;
    t.x0 = uniform(rng, half + 1.0, W - half - 1.0);
    t.y0 = uniform(rng, half + 1.0, H - half - 1.0);
    return t;
  }
  t.size0 = uniform(rng, kMinSize, kMaxSize);
  const double half = t.size0 / 2.0;
  if (motion == Motion::kStatic) {
    t.x0 = uniform(rng, half + 1.0, W - half - 1.0);
    t.y0 = uniform(rng, half + 1.0, H - half - 1.0);
    return t;
  }
  const double vmax = max_speed(spec);
  t.rate = uniform(rng, std::max(kMinSpeed, 0.6 * vmax), vmax);
  const double travel = t.rate * steps;
  const double along = motion == Motion::kHorizontal ? W : H;
  const double across = motion == Motion::kHorizontal ? H : W;
  const double a0 = uniform(rng, half + 1.0, std::max(half + 1.0, along - half - 1.0 - travel));
  const double b0 = uniform(rng, half + 1.0, across - half - 1.0);
  if (motion == Motion::kHorizontal) {
    t.x0 = a0;
    t.y0 = b0;
  } else {
    t.x0 = b0;
    t.y0 = a0;
  }
  return t;
}

/// One frame at trajectory step k into frame slot t, 2x2 supersampled.
void render_frame(VideoTensor& v, std::size_t t, const Shape& shape, const State& st, double noise,
                  std::uint64_t noise_seed) {
  std::mt19937_64 rng(noise_seed);
  const double inv = 2.0 / st.size;
  for (std::size_t y = 0; y < v.height; ++y)
    for (std::size_t x = 0; x < v.width; ++x) {
      int hits = 0;
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
          const double px = double(x) + 0.25 + 0.5 * sx, py = double(y) + 0.25 + 0.5 * sy;
          hits += shape.inside((px - st.cx) * inv, (py - st.cy) * inv) ? 1 : 0;
        }
      const float cover = float(hits) / 4.0f;
      for (std::size_t c = 0; c < v.channels; ++c) {
        double val = kBackground + cover * (shape.colour[c] - kBackground) + noise * gaussian(rng);
        val = std::clamp(val, 0.0, 1.0);
        v.at(c, t, y, x) = float(std::lround(val * 255.0)) / 255.0f;
      }
    }
}

VideoTensor render_clip(const MotionGridSpec& spec, const Shape& shape, const Trajectory& traj, bool reversed,
                        std::uint64_t noise_root) {
  auto v = VideoTensor::zeros(3, spec.frames, spec.height, spec.width);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const std::size_t k = reversed ? spec.frames - 1 - t : t;
    render_frame(v, t, shape, traj.at(k), spec.noise, derive_seed(noise_root, {k}));
  }
  return v;
}

/// Verbs without a twin first, then each twin pair adjacently, so truncating
/// a group keeps pairs whole where possible.
std::vector<std::string> group_order(const std::vector<std::string>& verbs) {
  std::vector<std::string> out;
  auto has = [&](const std::string& v) { return std::find(verbs.begin(), verbs.end(), v) != verbs.end(); };
  for (const auto& v : verbs)
    if (opposite_verb(v).empty() || !has(opposite_verb(v))) out.push_back(v);
  for (const auto& v : verbs) {
    const auto opp = opposite_verb(v);
    if (opp.empty() || !has(opp) || std::find(out.begin(), out.end(), v) != out.end()) continue;
    out.push_back(v);
    out.push_back(opp);
  }
  return out;
}

relevancy::Caption make_caption(const std::string& verb, const std::string& noun) {
  return relevancy::Caption(verb + " " + noun, {verb}, {noun});
}

Split generate_split(const MotionGridSpec& spec, const std::string& name, std::uint64_t split_id,
                     std::size_t count, double caption_noise) {
  Split out{name, {}};
  out.clips.reserve(count);
  const auto order = group_order(spec.verbs);
  for (std::size_t g = 0; out.clips.size() < count; ++g) {
    const std::string& noun = spec.nouns[g % spec.nouns.size()];
    const Shape& shape = shape_for(noun);
    std::map<Motion, std::pair<Trajectory, std::uint64_t>> per_motion;  // twins share these
    const std::size_t base = out.clips.size();
    for (const auto& verb : order) {
      if (out.clips.size() >= count) break;
      const VerbInfo& info = verb_info(verb);
      auto it = per_motion.find(info.motion);
      if (it == per_motion.end()) {
        std::mt19937_64 rng(derive_seed(spec.seed, {split_id, g, std::uint64_t(info.motion), 1}));
        auto traj = sample_trajectory(info.motion, spec, rng);
        it = per_motion.emplace(info.motion, std::make_pair(traj, derive_seed(spec.seed, {split_id, g, std::uint64_t(info.motion), 2}))).first;
      }
      Clip c;
      c.verb = verb;
      c.noun = noun;
      c.video = render_clip(spec, shape, it->second.first, info.reversed, it->second.second);
      std::ostringstream id;
      id << name << '-' << std::setw(5) << std::setfill('0') << out.clips.size();
      c.id = id.str();
      out.clips.push_back(std::move(c));
    }
    for (std::size_t i = base; i < out.clips.size(); ++i) {
      const auto opp = opposite_verb(out.clips[i].verb);
      for (std::size_t j = base; j < out.clips.size(); ++j)
        if (!opp.empty() && out.clips[j].verb == opp) out.clips[i].twin = std::int64_t(j);
    }
  }
  for (std::size_t i = 0; i < out.clips.size(); ++i) {
    auto& c = out.clips[i];
    std::string verb = c.verb, noun = c.noun;
    std::mt19937_64 rng(derive_seed(spec.seed, {split_id, i, 3}));
    if (caption_noise > 0.0 && uniform01(rng) < caption_noise) {
      // A partial match: exactly one of verb or noun is replaced.
      const bool swap_verb = spec.nouns.size() < 2 || (spec.verbs.size() >= 2 && (rng() & 1));
      if (swap_verb) {
        std::string v;
        do v = spec.verbs[below(rng, spec.verbs.size())];
        while (v == c.verb);
        verb = v;
      } else {
        std::string n;
        do n = spec.nouns[below(rng, spec.nouns.size())];
        while (n == c.noun);
        noun = n;
      }
    }
    c.caption = make_caption(verb, noun);
  }
  return out;
}

constexpr char kVideoMagic[8] = {'V', 'T', 'R', 'V', 'I', 'D', '0', '1'};

void write_videos(const Split& s, const MotionGridSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kVideoMagic, 8);
  const std::uint64_t hdr[5] = {s.clips.size(), 3, spec.frames, spec.height, spec.width};
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  std::vector<unsigned char> buf;
  for (const auto& c : s.clips) {
    buf.resize(c.video.pixels.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<unsigned char>(std::lround(c.video.pixels[i] * 255.0f));
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<VideoTensor> read_videos(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[8];
  std::uint64_t hdr[5];
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  if (!in || std::memcmp(magic, kVideoMagic, 8) != 0) throw InvalidInput(path.string() + ": not a video file");
  std::vector<VideoTensor> out;
  std::vector<unsigned char> buf(hdr[1] * hdr[2] * hdr[3] * hdr[4]);
  for (std::uint64_t i = 0; i < hdr[0]; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) throw InvalidInput(path.string() + ": truncated");
    auto v = VideoTensor::zeros(hdr[1], hdr[2], hdr[3], hdr[4]);
    for (std::size_t k = 0; k < buf.size(); ++k) v.pixels[k] = float(buf[k]) / 255.0f;
    out.push_back(std::move(v));
  }
  return out;
}

void write_split(const Split& s, const MotionGridSpec& spec, const std::filesystem::path& dir) {
  std::ofstream out(dir / (s.name + ".jsonl"));
  if (!out) throw std::runtime_error("cannot write " + (dir / (s.name + ".jsonl")).string());
  for (std::size_t i = 0; i < s.clips.size(); ++i) {
    const auto& c = s.clips[i];
    nlohmann::json j{{"id", c.id},     {"text", c.caption.text}, {"verbs", c.caption.verbs},
                     {"nouns", c.caption.nouns}, {"verb", c.verb}, {"noun", c.noun},
                     {"twin", c.twin}, {"video", i}};
    out << j.dump() << '\n';
  }
  write_videos(s, spec, dir / (s.name + ".videos"));
}

Split read_split(const std::string& name, const std::filesystem::path& dir) {
  Split s{name, {}};
  auto videos = read_videos(dir / (name + ".videos"));
  std::ifstream in(dir / (name + ".jsonl"));
  if (!in) throw std::runtime_error("cannot read " + (dir / (name + ".jsonl")).string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Clip c;
    c.id = j.at("id").get<std::string>();
    c.caption = relevancy::Caption(j.at("text").get<std::string>(), j.at("verbs").get<std::vector<std::string>>(),
                                   j.at("nouns").get<std::vector<std::string>>());
    c.verb = j.at("verb").get<std::string>();
    c.noun = j.at("noun").get<std::string>();
    c.twin = j.at("twin").get<std::int64_t>();
    const auto vi = j.at("video").get<std::size_t>();
    if (vi >= videos.size()) throw InvalidInput(name + ": video index out of range");
    c.video = videos[vi];
    s.clips.push_back(std::move(c));
  }
  return s;
}

}  // namespace

void MotionGridSpec::validate() const {
  if (verbs.empty() || nouns.empty()) throw InvalidInput("spec: verbs and nouns must be non-empty");
  for (const auto& v : verbs) verb_info(v);
  for (const auto& n : nouns) shape_for(n);
  if (std::set<std::string>(verbs.begin(), verbs.end()).size() != verbs.size()) throw InvalidInput("spec: duplicate verb");
  if (std::set<std::string>(nouns.begin(), nouns.end()).size() != nouns.size()) throw InvalidInput("spec: duplicate noun");
  if (frames == 0) throw InvalidInput("spec: frames must be positive");
  if (height < kMaxSize + 4 || width < kMaxSize + 4)
    throw InvalidInput("spec: canvas must be at least " + std::to_string(int(kMaxSize) + 4) + " pixels per side");
  if (frames > 1 && max_speed(*this) < kMinSpeed)
    throw InvalidInput("spec: canvas too small for " + std::to_string(frames) + " frames of visible motion");
  if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidInput("spec: noise must be in [0, 1]");
  if (!(caption_noise >= 0.0 && caption_noise <= 1.0)) throw InvalidInput("spec: caption_noise must be in [0, 1]");
  if (caption_noise > 0.0 && verbs.size() < 2 && nouns.size() < 2)
    throw InvalidInput("spec: caption noise needs two verbs or two nouns");
  if (train == 0) throw InvalidInput("spec: train split must be non-empty");
}

void to_json(nlohmann::json& j, const MotionGridSpec& s) {
  j = {{"verbs", s.verbs},   {"nouns", s.nouns}, {"frames", s.frames}, {"height", s.height},
       {"width", s.width},   {"noise", s.noise}, {"train", s.train},   {"val", s.val},
       {"seed", s.seed},     {"caption_noise", s.caption_noise}};
}

void from_json(const nlohmann::json& j, MotionGridSpec& s) {
  static const std::set<std::string> known{"verbs", "nouns", "frames", "height", "width",
                                           "noise", "train", "val",    "seed",   "caption_noise"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw InvalidInput("spec: unknown key '" + k + "'");
  MotionGridSpec d;
  s.verbs = j.value("verbs", d.verbs);
  s.nouns = j.value("nouns", d.nouns);
  s.frames = j.value("frames", d.frames);
  s.height = j.value("height", d.height);
  s.width = j.value("width", d.width);
  s.noise = j.value("noise", d.noise);
  s.train = j.value("train", d.train);
  s.val = j.value("val", d.val);
  s.seed = j.value("seed", d.seed);
  s.caption_noise = j.value("caption_noise", d.caption_noise);
  s.validate();
}

const std::vector<std::string>& known_verbs() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (const auto& i : verb_table()) out.push_back(i.name);
    return out;
  }();
  return v;
}

const std::vector<std::string>& known_nouns() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (const auto& s : shapes()) out.push_back(s.name);
    return out;
  }();
  return v;
}

std::string opposite_verb(const std::string& verb) { return verb_info(verb).opposite; }

std::vector<relevancy::Caption> Split::captions() const {
  std::vector<relevancy::Caption> out;
  out.reserve(clips.size());
  for (const auto& c : clips) out.push_back(c.caption);
  return out;
}

relevancy::RelevancyMatrix Split::relevancy(const relevancy::RelevancyConfig& cfg) const {
  const auto caps = captions();
  return relevancy::build_relevancy_matrix(caps, caps, cfg);
}

const Split& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  throw InvalidInput("unknown split '" + name + "'");
}

std::vector<std::string> Corpus::words() const {
  std::set<std::string> w(spec.verbs.begin(), spec.verbs.end());
  w.insert(spec.nouns.begin(), spec.nouns.end());
  return {w.begin(), w.end()};
}

Corpus generate_dataset(const MotionGridSpec& spec) {
  spec.validate();
  Corpus c;
  c.spec = spec;
  c.train = generate_split(spec, "train", 0, spec.train, spec.caption_noise);
  c.val = generate_split(spec, "val", 1, spec.val, 0.0);
  return c;
}

void write_corpus(const Corpus& c, const std::filesystem::path& dir, bool export_relevancy) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "spec.json");
    out << nlohmann::json(c.spec).dump(2) << '\n';
  }
  for (const Split* s : {&c.train, &c.val}) {
    write_split(*s, c.spec, dir);
    if (export_relevancy) {
      std::ofstream out(dir / (s->name + "_relevancy.csv"));
      out << s->relevancy().to_csv();
    }
  }
}

Corpus load_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "spec.json");
  if (!in) throw std::runtime_error("no corpus at " + dir.string() + " (spec.json missing)");
  Corpus c;
  c.spec = nlohmann::json::parse(in).get<MotionGridSpec>();
  c.train = read_split("train", dir);
  c.val = read_split("val", dir);
  return c;
}

}  // namespace vtr::harness
