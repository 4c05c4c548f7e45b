#include "vtr/harness/grad_check.hpp"

#include <algorithm>
#include <random>

#include "vtr/losses.hpp"
#include "vtr/numerics/ops.hpp"
#include "vtr/numerics/parameter_set.hpp"
#include "vtr/text_encoder.hpp"
#include "vtr/video_encoder.hpp"

namespace vtr::harness {

namespace nm = vtr::numerics;
using TD = nm::Tensor<double>;

namespace {

std::vector<double> uniform_values(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

GradCheckEntry check(const std::string& name, const std::function<TD()>& f, nm::ParameterSet<double>& ps,
                     double threshold, std::size_t max_coords = 0) {
  const auto r = nm::finite_diff_check<double>(f, ps, 1e-4, 1e-4, max_coords);
  return {name, r.max_rel_error, r.coordinates, r.max_rel_error < threshold};
}

void loss_entries(GradCheckReport& rep, double threshold) {
  using losses::LossKind;
  std::mt19937_64 rng(101);
  const std::size_t n = 5;
  losses::Table c{n, uniform_values(n * n, rng, 0.0, 1.0)};
  for (std::size_t i = 0; i < n; ++i) c.v[i * n + i] = 1.0;
  c.v[1] = 0.0;  // a few exact zeros and ones for the hard-label and MS branches
  c.v[7] = 1.0;
  losses::Table hard{n, c.v};
  for (auto& x : hard.v) x = x >= 0.5 ? 1.0 : 0.0;
  for (auto kind : {LossKind::kInfoNce, LossKind::kMiMm, LossKind::kAdaptiveMiMm, LossKind::kMultiSimilarity,
                    LossKind::kSms, LossKind::kSmsHard}) {
    nm::ParameterSet<double> ps;
    auto& s = ps.add("s", {n, n}, uniform_values(n * n, rng, -0.9, 0.9));
    losses::LossConfig cfg;
    cfg.kind = kind;
    const auto& table = kind == LossKind::kSmsHard ? hard : c;
    rep.entries.push_back(
        check("loss." + losses::to_string(kind), [&] { return losses::compute_loss(s, table, cfg); }, ps, threshold));
  }
}

void video_entries(GradCheckReport& rep, double threshold) {
  for (auto mode : {video::RopeMode::kSpatial, video::RopeMode::kSpatiotemporal, video::RopeMode::kSplit3d}) {
    video::VideoEncoderConfig c;
    c.channels = 1;
    c.frames = 2;
    c.height = c.width = 8;
    c.patch = 4;
    c.dim = 32;  // head width 16 so the split table gets 6/6/4
    c.heads = 2;
    c.blocks = 1;
    c.mlp_ratio = 2;
    c.embed_dim = 8;
    c.rope = mode;
    c.pe_stddev = 0.5;
    nm::ParameterSet<double> ps;
    std::mt19937_64 rng(202);
    video::VideoEncoder<double>::init_parameters(c, ps, rng);
    video::VideoEncoder<double> enc(c, ps);
    std::vector<video::VideoTensor> clips;
    for (int k = 0; k < 2; ++k) {
      auto v = video::VideoTensor::zeros(1, 2, 8, 8);
      for (auto& p : v.pixels) p = float(std::uniform_real_distribution<double>(0, 1)(rng));
      clips.push_back(v);
    }
    auto w = TD::constant({2, c.embed_dim}, uniform_values(2 * c.embed_dim, rng, -1, 1));
    rep.entries.push_back(check("video_encoder." + video::to_string(mode),
                                [&] { return nm::sum(nm::mul(enc.encode(clips), w)); }, ps, threshold, 6));
  }
}

void text_entries(GradCheckReport& rep, double threshold) {
  text::TextEncoderConfig c;
  c.vocab_size = 6;
  c.max_len = 3;
  c.dim = 8;
  c.heads = 2;
  c.blocks = 1;
  c.mlp_ratio = 2;
  c.embed_dim = 8;
  nm::ParameterSet<double> ps;
  std::mt19937_64 rng(303);
  text::TextEncoder<double>::init_parameters(c, ps, rng);
  text::TextEncoder<double> enc(c, ps);
  std::vector<text::TokenSequence> seqs{{{2, 3, 0}, 2}, {{4, 5, 2}, 3}, {{5, 0, 0}, 1}};
  auto w = TD::constant({3, c.embed_dim}, uniform_values(3 * c.embed_dim, rng, -1, 1));
  rep.entries.push_back(check("text_encoder", [&] { return nm::sum(nm::mul(enc.encode(seqs), w)); }, ps, threshold, 6));
}

}  // namespace

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

GradCheckReport run_grad_check(const GradCheckOptions& opts) {
  GradCheckReport rep;
  if (opts.empty) {
    rep.warnings.push_back("empty parameter set: nothing to check, the pass is vacuous");
    return rep;
  }
  loss_entries(rep, opts.threshold);
  video_entries(rep, opts.threshold);
  text_entries(rep, opts.threshold);
  if (opts.corrupt_fixture) {
    // f = sum(x * stop_grad(x)): the tape sees gradient x, the true one is 2x.
    nm::ParameterSet<double> ps;
    std::mt19937_64 rng(404);
    auto& x = ps.add("x", {2, 3}, uniform_values(6, rng, 0.5, 1.5));
    rep.entries.push_back(
        check("fixture.corrupt", [&] { return nm::sum(nm::mul(x, x.detach())); }, ps, opts.threshold));
  }
  return rep;
}

}  // namespace vtr::harness
