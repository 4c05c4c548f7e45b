#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "vtr/harness/ablate.hpp"
#include "vtr/harness/checkpoint.hpp"
#include "vtr/harness/dataset.hpp"
#include "vtr/harness/grad_check.hpp"
#include "vtr/harness/train.hpp"

namespace h = vtr::harness;
namespace fs = std::filesystem;
using vtr::numerics::InvalidInput;

namespace {

h::MotionGridSpec small_spec() {
  h::MotionGridSpec s;
  s.train = 70;
  s.val = 35;
  s.seed = 3;
  return s;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("vtr_test_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Frame t of one channel as a flat vector.
std::vector<float> frame(const vtr::video::VideoTensor& v, std::size_t c, std::size_t t) {
  const std::size_t n = v.height * v.width;
  auto it = v.pixels.begin() + std::ptrdiff_t((c * v.frames + t) * n);
  return {it, it + std::ptrdiff_t(n)};
}

h::TrainConfig tiny_config() {
  h::TrainConfig c;
  c.data_spec = small_spec();
  c.video.dim = 16;
  c.video.heads = 2;
  c.video.blocks = 1;
  c.video.embed_dim = 16;
  c.text.dim = 16;
  c.text.heads = 2;
  c.text.blocks = 1;
  c.text.embed_dim = 16;
  c.batch_size = 16;
  c.phase1.epochs = 1;
  c.phase2.epochs = 2;
  return c;
}

}  // namespace

TEST(Dataset, GenerationIsDeterministic) {
  const auto a = h::generate_dataset(small_spec()), b = h::generate_dataset(small_spec());
  ASSERT_EQ(a.train.clips.size(), 70u);
  ASSERT_EQ(a.val.clips.size(), 35u);
  for (std::size_t i = 0; i < a.train.clips.size(); ++i) {
    EXPECT_EQ(a.train.clips[i].video, b.train.clips[i].video);
    EXPECT_EQ(a.train.clips[i].caption, b.train.clips[i].caption);
  }
}

TEST(Dataset, TwinsHaveTheSameFramesInReverse) {
  const auto c = h::generate_dataset(small_spec());
  std::size_t pairs = 0;
  for (const auto& clip : c.train.clips) {
    if (clip.twin < 0) continue;
    const auto& twin = c.train.clips[std::size_t(clip.twin)];
    EXPECT_EQ(twin.twin, std::int64_t(&clip - c.train.clips.data()));
    EXPECT_EQ(twin.verb, h::opposite_verb(clip.verb));
    EXPECT_EQ(twin.noun, clip.noun);
    const auto T = clip.video.frames;
    std::vector<std::vector<float>> fa, fb;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t ch = 0; ch < 3; ++ch) EXPECT_EQ(frame(clip.video, ch, t), frame(twin.video, ch, T - 1 - t));
      fa.push_back(frame(clip.video, 0, t));
      fb.push_back(frame(twin.video, 0, t));
    }
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    EXPECT_EQ(fa, fb);  // identical as unordered sets
    EXPECT_NE(clip.video, twin.video);
    ++pairs;
  }
  EXPECT_EQ(pairs, 60u);  // 10 groups of 7 with 3 twin pairs each
}

TEST(Dataset, TwinCaptionsArePartialMatches) {
  const auto c = h::generate_dataset(small_spec());
  const auto& a = c.train.clips[1];
  const auto& b = c.train.clips[std::size_t(a.twin)];
  EXPECT_EQ(vtr::relevancy::pos_relevancy(a.caption, b.caption), 0.5);
}

TEST(Dataset, MotionIsVisible) {
  // The object centroid moves the advertised way between first and last frame.
  const auto c = h::generate_dataset(small_spec());
  auto centroid = [](const vtr::video::VideoTensor& v, std::size_t t) {
    double sx = 0, sy = 0, w = 0;
    for (std::size_t y = 0; y < v.height; ++y)
      for (std::size_t x = 0; x < v.width; ++x) {
        double m = 0;
        for (std::size_t ch = 0; ch < 3; ++ch) m = std::max(m, double(v.at(ch, t, y, x)));
        if (m < 0.4) continue;
        sx += x;
        sy += y;
        w += 1;
      }
    return std::array<double, 3>{sx / w, sy / w, w};
  };
  for (const auto& clip : c.train.clips) {
    const auto a = centroid(clip.video, 0), b = centroid(clip.video, clip.video.frames - 1);
    if (clip.verb == "move_right") EXPECT_GT(b[0], a[0] + 3);
    if (clip.verb == "move_left") EXPECT_LT(b[0], a[0] - 3);
    if (clip.verb == "move_down") EXPECT_GT(b[1], a[1] + 3);
    if (clip.verb == "move_up") EXPECT_LT(b[1], a[1] - 3);
    if (clip.verb == "grow") EXPECT_GT(b[2], a[2]);
    if (clip.verb == "shrink") EXPECT_LT(b[2], a[2]);
  }
}

TEST(Dataset, CaptionNoiseSwapsExactlyOnePart) {
  auto s = small_spec();
  s.train = 700;
  s.caption_noise = 0.2;
  const auto c = h::generate_dataset(s);
  std::size_t noisy = 0;
  for (const auto& clip : c.train.clips) {
    const vtr::relevancy::Caption truth(clip.verb + " " + clip.noun, {clip.verb}, {clip.noun});
    const double r = vtr::relevancy::pos_relevancy(truth, clip.caption);
    EXPECT_TRUE(r == 1.0 || r == 0.5);
    noisy += r == 0.5;
  }
  EXPECT_NEAR(double(noisy) / 700.0, 0.2, 0.05);
  for (const auto& clip : c.val.clips) EXPECT_EQ(clip.caption.text, clip.verb + " " + clip.noun);
}

TEST(Dataset, RejectsUnrenderableSpecs) {
  auto s = small_spec();
  s.verbs.push_back("jump");
  EXPECT_THROW(h::generate_dataset(s), InvalidInput);
  s = small_spec();
  s.nouns = {"blob"};
  EXPECT_THROW(h::generate_dataset(s), InvalidInput);
  s = small_spec();
  s.height = s.width = 8;
  EXPECT_THROW(h::generate_dataset(s), InvalidInput);
  s = small_spec();
  s.frames = 64;
  EXPECT_THROW(h::generate_dataset(s), InvalidInput);
  EXPECT_THROW((nlohmann::json{{"colour", 1}}.get<h::MotionGridSpec>()), InvalidInput);
}

TEST(Dataset, SingleFrameCorpusRenders) {
  auto s = small_spec();
  s.frames = 1;
  const auto c = h::generate_dataset(s);
  for (const auto& clip : c.train.clips)
    if (clip.twin >= 0) EXPECT_EQ(clip.video, c.train.clips[std::size_t(clip.twin)].video);
}

TEST(Dataset, DiskRoundTrip) {
  const auto dir = scratch("corpus");
  const auto a = h::generate_dataset(small_spec());
  h::write_corpus(a, dir, true);
  const auto b = h::load_corpus(dir);
  ASSERT_EQ(a.val.clips.size(), b.val.clips.size());
  for (std::size_t i = 0; i < a.val.clips.size(); ++i) {
    EXPECT_EQ(a.val.clips[i].video, b.val.clips[i].video);
    EXPECT_EQ(a.val.clips[i].caption, b.val.clips[i].caption);
    EXPECT_EQ(a.val.clips[i].twin, b.val.clips[i].twin);
  }
  EXPECT_TRUE(fs::exists(dir / "train_relevancy.csv"));
  fs::remove_all(dir);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const auto dir = scratch("ckpt");
  vtr::numerics::ParameterSet<float> ps;
  std::mt19937_64 rng(1);
  ps.add_normal("a.weight", {3, 4}, 1.0, rng);
  ps.add_constant("a.bias", {1, 4}, 0.5f);
  const nlohmann::json header{{"hello", "world"}};
  h::save_checkpoint(dir / "x.ckpt", header, ps);
  const auto ck = h::load_checkpoint(dir / "x.ckpt");
  EXPECT_EQ(ck.header, header);
  ASSERT_EQ(ck.params.size(), 2u);
  for (const auto& [name, t] : ps.entries()) {
    const auto& u = ck.params.at(name);
    EXPECT_EQ(u.shape(), t.shape());
    EXPECT_TRUE(std::equal(t.values().begin(), t.values().end(), u.values().begin()));
  }
  auto bytes = slurp(dir / "x.ckpt");
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << flipped;
  EXPECT_THROW(h::load_checkpoint(dir / "bad.ckpt"), h::CorruptCheckpoint);
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 20);
  EXPECT_THROW(h::load_checkpoint(dir / "short.ckpt"), h::CorruptCheckpoint);
  std::ofstream(dir / "junk.ckpt", std::ios::binary) << "not a checkpoint at all, really";
  EXPECT_THROW(h::load_checkpoint(dir / "junk.ckpt"), h::CorruptCheckpoint);
  fs::remove_all(dir);
}

TEST(Checkpoint, Fnv1aKnownValues) {
  EXPECT_EQ(h::fnv1a64("", 0), 0xcbf29ce484222325ULL);
  EXPECT_EQ(h::fnv1a64("a", 1), 0xaf63dc4c8601ec8cULL);
}

TEST(Binomial, TwoSidedExact) {
  EXPECT_DOUBLE_EQ(h::binomial_two_sided(5, 10), 1.0);
  EXPECT_NEAR(h::binomial_two_sided(0, 10), 2.0 / 1024.0, 1e-15);
  EXPECT_NEAR(h::binomial_two_sided(10, 10), 2.0 / 1024.0, 1e-15);
  EXPECT_NEAR(h::binomial_two_sided(2, 10), 2.0 * (1 + 10 + 45) / 1024.0, 1e-14);
  EXPECT_EQ(h::binomial_two_sided(0, 0), 1.0);
}

TEST(Config, JsonRoundTripAndValidation) {
  auto c = tiny_config();
  c.phase2.loss.kind = vtr::losses::LossKind::kAdaptiveMiMm;
  const nlohmann::json j = c;
  const auto back = j.get<h::TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  auto bad = j;
  bad["learning_rate"] = 1;
  EXPECT_THROW(bad.get<h::TrainConfig>(), InvalidInput);
  bad = j;
  bad["batch_size"] = 1;
  EXPECT_THROW(bad.get<h::TrainConfig>(), InvalidInput);
  bad = j;
  bad["precision"] = "float16";
  EXPECT_THROW(bad.get<h::TrainConfig>(), InvalidInput);
}

TEST(Direction, OrderBlindModelIsExactlyAtChance) {
  // Untrained, but the argument does not depend on training: twins embed
  // identically, so each pair contributes one hit and one miss.
  const auto corpus = h::generate_dataset(small_spec());
  auto cfg = h::with_variant(tiny_config(), h::rope_variant("control"));
  h::ModelConfig mc{cfg.video, cfg.text, vtr::text::Vocabulary(corpus.words())};
  h::DualEncoder<double> model(mc, 11);
  const auto d = h::direction_accuracy(model, corpus.val);
  EXPECT_EQ(d.trials, 30u);
  EXPECT_DOUBLE_EQ(d.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(d.p_value, 1.0);
}

TEST(Variants, TemporalMachineryIsInertOnSingleFrames) {
  auto s = small_spec();
  s.frames = 1;
  const auto corpus = h::generate_dataset(s);
  std::vector<vtr::video::VideoTensor> clips;
  for (std::size_t i = 0; i < 5; ++i) clips.push_back(corpus.val.clips[i].video);
  auto embed = [&](const std::string& variant) {
    auto cfg = h::with_variant(tiny_config(), h::rope_variant(variant));
    cfg.video.frames = 1;
    h::ModelConfig mc{cfg.video, cfg.text, vtr::text::Vocabulary(corpus.words())};
    h::DualEncoder<double> model(mc, 21);
    return model.embed_videos(clips);
  };
  EXPECT_EQ(embed("b"), embed("control"));
  EXPECT_EQ(embed("c"), embed("a"));
}

TEST(Variants, Table) {
  ASSERT_EQ(h::rope_variants().size(), 5u);
  EXPECT_TRUE(h::rope_variant("c").temporal_pe);
  EXPECT_EQ(h::rope_variant("c").rope, vtr::video::RopeMode::kSpatiotemporal);
  EXPECT_EQ(h::rope_variant("d").rope, vtr::video::RopeMode::kSplit3d);
  EXPECT_FALSE(h::rope_variant("control").temporal_pe);
  EXPECT_THROW(h::rope_variant("e"), InvalidInput);
}

TEST(Training, RepeatRunsAreByteIdentical) {
  const auto a = scratch("run_a"), b = scratch("run_b");
  const auto cfg = tiny_config();
  const auto ra = h::train(cfg, a), rb = h::train(cfg, b);
  EXPECT_EQ(ra.history.size(), 3u);
  EXPECT_EQ(slurp(a / "train_log.csv"), slurp(b / "train_log.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  EXPECT_EQ(slurp(a / "best.ckpt"), slurp(b / "best.ckpt"));
  for (const auto& r : ra.history) EXPECT_EQ(r.invariant_failures, 0u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Training, ResumingPhaseTwoMatchesStraightRun) {
  const auto a = scratch("straight"), b = scratch("resumed");
  const auto cfg = tiny_config();
  const auto corpus = h::resolve_corpus(cfg);
  const auto full = h::train(cfg, corpus, a);
  const auto resumed = h::train_from(cfg, corpus, a / "phase1.ckpt", b);
  ASSERT_EQ(resumed.history.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(resumed.history[i].loss, full.history[i + 1].loss);
    EXPECT_EQ(resumed.history[i].map_avg, full.history[i + 1].map_avg);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Training, CheckpointEvaluatesToLoggedMetrics) {
  const auto dir = scratch("evalck");
  const auto r = h::train(tiny_config(), dir);
  const auto e = h::evaluate_checkpoint(r.checkpoint, "val");
  EXPECT_EQ(e.report.map_avg, r.best.report.map_avg);
  EXPECT_EQ(e.direction.accuracy, r.best.direction.accuracy);
  fs::remove_all(dir);
}

TEST(Training, NonFiniteParametersAbort) {
  const auto dir = scratch("nan");
  const auto cfg = tiny_config();
  const auto corpus = h::resolve_corpus(cfg);
  h::ModelConfig mc{cfg.video, cfg.text, vtr::text::Vocabulary(corpus.words())};
  mc.text.vocab_size = mc.vocab.size();
  h::DualEncoder<float> model(mc, 1);
  model.params().at("video.proj.bias").mutable_values()[0] = std::numeric_limits<float>::quiet_NaN();
  h::save_checkpoint(dir / "nan.ckpt", nlohmann::json::object(), model.params());
  EXPECT_THROW(h::train_from(cfg, corpus, dir / "nan.ckpt", dir / "run"), h::NumericalFailure);
  fs::remove_all(dir);
}

TEST(Training, GeometryMismatchIsRejected) {
  auto cfg = tiny_config();
  cfg.video.frames = 8;
  EXPECT_THROW(h::train(cfg, scratch("geom")), InvalidInput);
}

TEST(GradCheck, PassesAndCatchesAWrongBackward) {
  const auto ok = h::run_grad_check();
  EXPECT_TRUE(ok.passed());
  EXPECT_EQ(ok.entries.size(), 10u);
  h::GradCheckOptions o;
  o.corrupt_fixture = true;
  const auto bad = h::run_grad_check(o);
  EXPECT_FALSE(bad.passed());
  EXPECT_FALSE(bad.entries.back().passed);
  EXPECT_NEAR(bad.entries.back().max_rel_error, 0.5, 1e-6);
}

TEST(GradCheck, EmptySetIsVacuousWithWarning) {
  h::GradCheckOptions o;
  o.empty = true;
  const auto r = h::run_grad_check(o);
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.entries.empty());
  EXPECT_EQ(r.warnings.size(), 1u);
}
