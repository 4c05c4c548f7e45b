#include "vtr/harness/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "vtr/harness/checkpoint.hpp"
#include "vtr/harness/random.hpp"
#include "vtr/mining.hpp"

namespace vtr::harness {

using numerics::InvalidInput;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename T>
typename numerics::AdamW<T>::Options optimizer_options(const numerics::AdamW<float>::Options& o) {
  return {o.lr, o.beta1, o.beta2, o.eps, o.weight_decay};
}

ModelConfig model_config(const TrainConfig& cfg, const Corpus& corpus) {
  ModelConfig m{cfg.video, cfg.text, text::Vocabulary(corpus.words())};
  m.text.vocab_size = m.vocab.size();
  const auto& s = corpus.spec;
  if (m.video.frames != s.frames || m.video.height != s.height || m.video.width != s.width || m.video.channels != 3)
    throw InvalidInput("train: video encoder geometry does not match the corpus (" + std::to_string(s.frames) + "x" +
                       std::to_string(s.height) + "x" + std::to_string(s.width) + ")");
  return m;
}

std::vector<video::VideoTensor> gather_videos(const Split& s, std::span<const std::size_t> idx) {
  std::vector<video::VideoTensor> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(s.clips[i].video);
  return out;
}

std::vector<relevancy::Caption> gather_captions(const Split& s, std::span<const std::size_t> idx) {
  std::vector<relevancy::Caption> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(s.clips[i].caption);
  return out;
}

std::vector<video::VideoTensor> split_videos(const Split& s) {
  std::vector<video::VideoTensor> out;
  out.reserve(s.clips.size());
  for (const auto& c : s.clips) out.push_back(c.video);
  return out;
}

bool can_tell_frame_order(const video::VideoEncoderConfig& v) {
  return v.temporal_pe || v.rope == video::RopeMode::kSpatiotemporal || v.rope == video::RopeMode::kSplit3d;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

DirectionAccuracy direction_from_embeddings(const Split& split, const std::vector<double>& video_emb,
                                            const std::vector<double>& caption_emb,
                                            const std::map<std::string, std::size_t>& caption_row, std::size_t width) {
  DirectionAccuracy d;
  for (std::size_t i = 0; i < split.clips.size(); ++i) {
    const auto& c = split.clips[i];
    if (c.twin < 0) continue;
    const auto opp = opposite_verb(c.verb);
    const double* v = video_emb.data() + i * width;
    const double s_true = dot(v, caption_emb.data() + caption_row.at(c.verb + " " + c.noun) * width, width);
    const double s_opp = dot(v, caption_emb.data() + caption_row.at(opp + " " + c.noun) * width, width);
    ++d.trials;
    if (s_true > s_opp) ++d.correct;
    else if (s_true == s_opp) ++d.ties;
  }
  if (d.trials > 0) {
    d.accuracy = (double(d.correct) + 0.5 * double(d.ties)) / double(d.trials);
    d.p_value = binomial_two_sided(d.correct + d.ties / 2, d.trials);
  }
  return d;
}

template <typename T>
DirectionAccuracy direction_with(const DualEncoder<T>& model, const Split& split, const std::vector<double>& video_emb) {
  std::vector<relevancy::Caption> caps;
  std::map<std::string, std::size_t> row;
  auto want = [&](const std::string& verb, const std::string& noun) {
    const std::string text = verb + " " + noun;
    if (row.emplace(text, caps.size()).second) caps.emplace_back(text, std::vector<std::string>{verb}, std::vector<std::string>{noun});
  };
  for (const auto& c : split.clips)
    if (c.twin >= 0) {
      want(c.verb, c.noun);
      want(opposite_verb(c.verb), c.noun);
    }
  if (caps.empty()) return {};
  const auto emb = model.embed_texts(caps);
  return direction_from_embeddings(split, video_emb, emb, row, model.embed_dim());
}

std::string log_header() {
  return "phase,epoch,steps,loss,v2t_map,t2v_map,map_avg,ndcg_avg,motion_map,direction_acc,invariant_failures,"
         "fallbacks\n";
}

std::string log_row(const EvalRecord& r) {
  return std::to_string(r.phase) + "," + std::to_string(r.epoch) + "," + std::to_string(r.steps) + "," + fmt(r.loss) +
         "," + fmt(r.v2t_map) + "," + fmt(r.t2v_map) + "," + fmt(r.map_avg) + "," + fmt(r.ndcg_avg) + "," +
         fmt(r.motion_map) + "," + fmt(r.direction) + "," + std::to_string(r.invariant_failures) + "," +
         std::to_string(r.fallbacks) + "\n";
}

nlohmann::json record_json(const EvalRecord& r) {
  return {{"phase", r.phase},         {"epoch", r.epoch},           {"steps", r.steps},
          {"loss", r.loss},           {"v2t_map", r.v2t_map},       {"t2v_map", r.t2v_map},
          {"map_avg", r.map_avg},     {"ndcg_avg", r.ndcg_avg},     {"motion_map", r.motion_map},
          {"direction_acc", r.direction}, {"invariant_failures", r.invariant_failures}, {"fallbacks", r.fallbacks}};
}

template <typename T>
TrainResult run_training(const TrainConfig& cfg, const Corpus& corpus, DualEncoder<T>& model, int first_phase,
                         const std::filesystem::path& out_dir, bool verbose) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "train_log.csv", std::ios::trunc);
  log << log_header();

  const Split& train = corpus.train;
  const std::string eval_split = corpus.val.clips.empty() ? "train" : "val";
  const auto rel = train.relevancy({0.5, 0.5, cfg.positive_epsilon});

  TrainResult result;
  result.checkpoint = out_dir / "best.ckpt";
  double best_map = -1.0;
  std::size_t steps = 0;
  nlohmann::json epoch_seconds = nlohmann::json::array();

  for (int phase = first_phase; phase <= 2; ++phase) {
    const PhaseConfig& pc = phase == 1 ? cfg.phase1 : cfg.phase2;
    // Fresh optimiser state per phase, so resuming from a phase-1 checkpoint
    // reproduces a straight-through run.
    numerics::AdamW<T> opt(optimizer_options<T>(cfg.optimizer));
    for (std::size_t epoch = 1; epoch <= pc.epochs; ++epoch) {
      const auto te = Clock::now();
      const auto batches = mining::epoch_order(train.clips.size(), cfg.batch_size,
                                               derive_seed(cfg.seed, {std::uint64_t(phase), epoch, 11}));
      mining::MiningStats stats;
      double loss_sum = 0.0;
      for (std::size_t b = 0; b < batches.size(); ++b) {
        mining::Batch batch;
        if (pc.hard_mining) {
          std::mt19937_64 rng(derive_seed(cfg.seed, {std::uint64_t(phase), epoch, b, 12}));
          batch = mining::assemble_batch(batches[b], rel, cfg.positive_epsilon, rng, &stats);
        } else {
          batch = mining::exact_batch(batches[b], rel);
        }
        const auto vids = gather_videos(train, batch.video);
        const auto caps = gather_captions(train, batch.narration);
        const auto s = losses::similarity_matrix(model.encode_videos(vids), model.encode_texts(caps));
        const auto loss = losses::compute_loss(s, losses::Table{batch.size(), batch.relevancy}, pc.loss);
        const double lv = double(loss.item());
        if (!std::isfinite(lv))
          throw NumericalFailure("non-finite loss in phase " + std::to_string(phase) + " epoch " +
                                 std::to_string(epoch) + " batch " + std::to_string(b));
        model.params().zero_grad();
        numerics::backward(loss);
        for (const auto& [name, p] : model.params().entries())
          for (auto g : p.grad())
            if (!std::isfinite(double(g))) throw NumericalFailure("non-finite gradient for " + name);
        opt.step(model.params());
        loss_sum += lv;
        ++steps;
      }
      epoch_seconds.push_back(std::chrono::duration<double>(Clock::now() - te).count());

      if (epoch % cfg.eval_every != 0 && epoch != pc.epochs) continue;
      const auto ev = evaluate_model(model, corpus, eval_split, cfg.positive_epsilon);
      EvalRecord r{phase, epoch, steps, batches.empty() ? 0.0 : loss_sum / double(batches.size()),
                   ev.report.v2t.map, ev.report.t2v.map, ev.report.map_avg, ev.report.ndcg_avg, ev.motion_map,
                   ev.direction.accuracy, ev.invariants.failures(), stats.fallbacks};
      result.history.push_back(r);
      log << log_row(r) << std::flush;
      if (verbose) std::cerr << "phase " << phase << " epoch " << epoch << " loss " << fmt(r.loss) << " mAP "
                             << fmt(r.map_avg) << " nDCG " << fmt(r.ndcg_avg) << " dir " << fmt(r.direction) << "\n";
      if (r.map_avg > best_map) {
        best_map = r.map_avg;
        result.best = ev;
        result.best_record = r;
        save_checkpoint(result.checkpoint, checkpoint_header(cfg, model.config(), r), model.params());
      }
    }
    if (phase == 1) {
      EvalRecord at;
      at.phase = 1;
      at.epoch = pc.epochs;
      at.steps = steps;
      save_checkpoint(out_dir / "phase1.ckpt", checkpoint_header(cfg, model.config(), at), model.params());
    }
  }
  if (best_map < 0.0) {
    // No epochs at all: evaluate and save the initial model.
    result.best = evaluate_model(model, corpus, eval_split, cfg.positive_epsilon);
    result.best_record.map_avg = result.best.report.map_avg;
    save_checkpoint(result.checkpoint, checkpoint_header(cfg, model.config(), result.best_record), model.params());
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  nlohmann::json summary{{"best", record_json(result.best_record)}, {"eval", result.best.to_json()}};
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
  std::ofstream(out_dir / "timing.json") << nlohmann::json{{"seconds", result.seconds}, {"epoch_seconds", epoch_seconds}}.dump(2)
                                         << '\n';
  return result;
}

template <typename T>
TrainResult train_typed(const TrainConfig& cfg, const Corpus& corpus, const std::filesystem::path* init,
                        const std::filesystem::path& out_dir, bool verbose) {
  const auto mc = model_config(cfg, corpus);
  if (init == nullptr) {
    DualEncoder<T> model(mc, derive_seed(cfg.seed, {0}));
    return run_training(cfg, corpus, model, 1, out_dir, verbose);
  }
  auto ck = load_checkpoint(*init);
  DualEncoder<T> model(mc, ck.params.template cast<T>());
  return run_training(cfg, corpus, model, 2, out_dir, verbose);
}

}  // namespace

void to_json(nlohmann::json& j, const PhaseConfig& c) {
  j = {{"epochs", c.epochs}, {"loss", c.loss}, {"hard_mining", c.hard_mining}};
}

void from_json(const nlohmann::json& j, PhaseConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  if (j.contains("loss")) c.loss = j.at("loss").get<losses::LossConfig>();
  c.hard_mining = j.value("hard_mining", c.hard_mining);
}

TrainConfig::TrainConfig() {
  phase1.epochs = 30;
  phase1.loss.kind = losses::LossKind::kInfoNce;
  phase2.epochs = 30;
  phase2.loss.kind = losses::LossKind::kSms;
  phase2.hard_mining = true;
}

void TrainConfig::validate() const {
  if (data.empty()) data_spec.validate();
  video.validate();
  text.validate();
  if (text.embed_dim != video.embed_dim) throw InvalidInput("config: video and text embed_dim differ");
  if (batch_size < 2) throw InvalidInput("config: batch_size must be >= 2");
  if (eval_every == 0) throw InvalidInput("config: eval_every must be >= 1");
  if (precision != "float32" && precision != "float64") throw InvalidInput("config: precision must be float32 or float64");
  if (!(optimizer.lr > 0.0)) throw InvalidInput("config: optimizer.lr must be positive");
  if (!(positive_epsilon > 0.0 && positive_epsilon <= 1.0)) throw InvalidInput("config: positive_epsilon must be in (0, 1]");
  phase1.loss.validate();
  phase2.loss.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"data", c.data},
       {"data_spec", c.data_spec},
       {"seed", c.seed},
       {"video", c.video},
       {"text", c.text},
       {"optimizer",
        {{"lr", c.optimizer.lr},
         {"beta1", c.optimizer.beta1},
         {"beta2", c.optimizer.beta2},
         {"eps", c.optimizer.eps},
         {"weight_decay", c.optimizer.weight_decay}}},
       {"batch_size", c.batch_size},
       {"phase1", c.phase1},
       {"phase2", c.phase2},
       {"positive_epsilon", c.positive_epsilon},
       {"eval_every", c.eval_every},
       {"precision", c.precision}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const std::set<std::string> known{"data",       "data_spec", "seed",   "video",            "text",
                                           "optimizer",  "batch_size", "phase1", "phase2", "positive_epsilon",
                                           "eval_every", "precision"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw InvalidInput("config: unknown key '" + k + "'");
  TrainConfig d;
  c = d;
  c.data = j.value("data", d.data);
  if (j.contains("data_spec")) c.data_spec = j.at("data_spec").get<MotionGridSpec>();
  c.seed = j.value("seed", d.seed);
  if (j.contains("video")) c.video = j.at("video").get<video::VideoEncoderConfig>();
  if (j.contains("text")) c.text = j.at("text").get<text::TextEncoderConfig>();
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    c.optimizer.lr = o.value("lr", d.optimizer.lr);
    c.optimizer.beta1 = o.value("beta1", d.optimizer.beta1);
    c.optimizer.beta2 = o.value("beta2", d.optimizer.beta2);
    c.optimizer.eps = o.value("eps", d.optimizer.eps);
    c.optimizer.weight_decay = o.value("weight_decay", d.optimizer.weight_decay);
  }
  c.batch_size = j.value("batch_size", d.batch_size);
  if (j.contains("phase1")) {
    c.phase1 = d.phase1;
    from_json(j.at("phase1"), c.phase1);
  }
  if (j.contains("phase2")) {
    c.phase2 = d.phase2;
    from_json(j.at("phase2"), c.phase2);
  }
  c.positive_epsilon = j.value("positive_epsilon", d.positive_epsilon);
  c.eval_every = j.value("eval_every", d.eval_every);
  c.precision = j.value("precision", d.precision);
  c.validate();
}

Corpus resolve_corpus(const TrainConfig& cfg) {
  return cfg.data.empty() ? generate_dataset(cfg.data_spec) : load_corpus(cfg.data);
}

double binomial_two_sided(std::size_t k, std::size_t n) {
  if (n == 0) return 1.0;
  auto logp = [n](std::size_t i) {
    return std::lgamma(double(n) + 1) - std::lgamma(double(i) + 1) - std::lgamma(double(n - i) + 1) -
           double(n) * std::log(2.0);
  };
  const double lk = logp(std::min(k, n));
  double p = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double li = logp(i);
    if (li <= lk + 1e-9) p += std::exp(li);
  }
  return std::min(1.0, p);
}

nlohmann::json EvalOutcome::to_json(bool per_query) const {
  return {{"retrieval", report.to_json(per_query)},
          {"motion_map", motion_map},
          {"direction",
           {{"trials", direction.trials},
            {"correct", direction.correct},
            {"ties", direction.ties},
            {"accuracy", direction.accuracy},
            {"p_value", direction.p_value}}},
          {"invariants", {{"checked", invariants.checked}, {"failed", invariants.failed}}}};
}

template <typename T>
DirectionAccuracy direction_accuracy(const DualEncoder<T>& model, const Split& split) {
  const auto vids = split_videos(split);
  return direction_with(model, split, model.embed_videos(vids));
}

template <typename T>
InvariantReport check_invariants(const DualEncoder<T>& model, const Corpus& corpus, const Split& split,
                                 const std::vector<double>& video_emb, const std::vector<double>& text_emb,
                                 const metrics::RetrievalReport& report, double epsilon) {
  InvariantReport r;
  const std::size_t w = model.embed_dim();
  const double tol = std::is_same_v<T, float> ? 1e-4 : 1e-10;
  auto check = [&](const std::string& name, bool ok) {
    ++r.checked;
    if (!ok) r.failed.push_back(name);
  };
  auto unit_rows = [&](const std::vector<double>& e) {
    for (std::size_t i = 0; i * w < e.size(); ++i)
      if (std::abs(std::sqrt(dot(&e[i * w], &e[i * w], w)) - 1.0) > tol) return false;
    return true;
  };
  auto finite = [](const std::vector<double>& e) {
    return std::all_of(e.begin(), e.end(), [](double x) { return std::isfinite(x); });
  };
  check("embeddings_finite", finite(video_emb) && finite(text_emb));
  check("video_unit_norm", unit_rows(video_emb));
  check("text_unit_norm", unit_rows(text_emb));

  bool in_range = true;
  const std::size_t nv = video_emb.size() / w, nt = text_emb.size() / w;
  for (std::size_t i = 0; i < std::min<std::size_t>(nv, 32); ++i)
    for (std::size_t j = 0; j < nt; ++j)
      in_range = in_range && std::abs(dot(&video_emb[i * w], &text_emb[j * w], w)) <= 1.0 + tol;
  check("similarity_in_range", in_range);

  // Same chunk as embed_videos' first, so the comparison can be bitwise.
  const std::size_t probe = std::min<std::size_t>(64, split.clips.size());
  std::vector<std::size_t> first(probe);
  for (std::size_t i = 0; i < probe; ++i) first[i] = i;
  const auto again = model.embed_videos(gather_videos(split, first));
  check("encoding_deterministic", std::equal(again.begin(), again.end(), video_emb.begin()));

  const auto rel = split.relevancy({0.5, 0.5, epsilon});
  bool sym = true;
  for (std::size_t i = 0; i < rel.rows; ++i) {
    sym = sym && rel.at(i, i) == 1.0;
    for (std::size_t j = 0; j < i; ++j) sym = sym && rel.at(i, j) == rel.at(j, i);
  }
  check("relevancy_symmetric_unit_diagonal", sym);

  if (corpus.train.clips.size() >= 2) {
    const auto train_rel = corpus.train.relevancy({0.5, 0.5, epsilon});
    const auto order = mining::epoch_order(corpus.train.clips.size(), std::min<std::size_t>(16, corpus.train.clips.size()), 5);
    std::mt19937_64 rng(17);
    const auto b = mining::assemble_batch(order.front(), train_rel, epsilon, rng);
    check("batch_relevancy_consistent", mining::batch_consistent(b, train_rel));
  }

  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  check("metrics_in_range", in_unit(report.v2t.map) && in_unit(report.t2v.map) && in_unit(report.v2t.ndcg) &&
                                in_unit(report.t2v.ndcg));

  bool twins = true;
  for (std::size_t i = 0, seen = 0; i < split.clips.size() && seen < 8; ++i) {
    const auto& c = split.clips[i];
    if (c.twin < 0) continue;
    ++seen;
    const auto& a = c.video;
    const auto& b = split.clips[std::size_t(c.twin)].video;
    const std::size_t frame = a.height * a.width;
    for (std::size_t ch = 0; ch < a.channels && twins; ++ch)
      for (std::size_t t = 0; t < a.frames && twins; ++t)
        twins = std::equal(a.pixels.begin() + std::ptrdiff_t((ch * a.frames + t) * frame),
                           a.pixels.begin() + std::ptrdiff_t((ch * a.frames + t + 1) * frame),
                           b.pixels.begin() + std::ptrdiff_t((ch * a.frames + (a.frames - 1 - t)) * frame));
  }
  check("twins_are_reversals", twins);

  if (!can_tell_frame_order(model.config().video) && !split.clips.empty()) {
    auto v = split.clips.front().video;
    auto rev = v;
    const std::size_t frame = v.height * v.width;
    for (std::size_t ch = 0; ch < v.channels; ++ch)
      for (std::size_t t = 0; t < v.frames; ++t)
        std::copy_n(v.pixels.begin() + std::ptrdiff_t((ch * v.frames + t) * frame), frame,
                    rev.pixels.begin() + std::ptrdiff_t((ch * v.frames + (v.frames - 1 - t)) * frame));
    const std::vector<video::VideoTensor> pair{v, rev};
    const auto e = model.embed_videos(pair);
    bool same = true;
    for (std::size_t k = 0; k < w; ++k) same = same && std::abs(e[k] - e[w + k]) <= tol;
    check("order_blind_model_is_order_invariant", same);
  }
  return r;
}

template <typename T>
EvalOutcome evaluate_model(const DualEncoder<T>& model, const Corpus& corpus, const std::string& split_name,
                           double epsilon) {
  const Split& split = corpus.split(split_name);
  if (split.clips.empty()) throw InvalidInput("evaluate: split '" + split_name + "' is empty");
  const auto vids = split_videos(split);
  const auto caps = split.captions();
  const auto ve = model.embed_videos(vids);
  const auto te = model.embed_texts(caps);
  const auto rel = split.relevancy({0.5, 0.5, epsilon});

  EvalOutcome out;
  out.report = metrics::evaluate_retrieval(ve, te, model.embed_dim(), rel);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < split.clips.size(); ++i) {
    const auto& ap = out.report.v2t.per_query[i].ap;
    if (split.clips[i].twin >= 0 && ap) {
      sum += *ap;
      ++n;
    }
  }
  out.motion_map = n ? sum / double(n) : 0.0;
  out.direction = direction_with(model, split, ve);
  out.invariants = check_invariants(model, corpus, split, ve, te, out.report, epsilon);
  return out;
}

nlohmann::json checkpoint_header(const TrainConfig& cfg, const ModelConfig& model, const EvalRecord& at) {
  return {{"format", "vtr-checkpoint"},
          {"version", 1},
          {"model", model},
          {"train_config", cfg},
          {"at", record_json(at)}};
}

TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir, bool verbose) {
  cfg.validate();
  return train(cfg, resolve_corpus(cfg), out_dir, verbose);
}

TrainResult train(const TrainConfig& cfg, const Corpus& corpus, const std::filesystem::path& out_dir, bool verbose) {
  cfg.validate();
  if (cfg.precision == "float64") return train_typed<double>(cfg, corpus, nullptr, out_dir, verbose);
  return train_typed<float>(cfg, corpus, nullptr, out_dir, verbose);
}

TrainResult train_from(const TrainConfig& cfg, const Corpus& corpus, const std::filesystem::path& init_checkpoint,
                       const std::filesystem::path& out_dir, bool verbose) {
  cfg.validate();
  if (cfg.precision == "float64") return train_typed<double>(cfg, corpus, &init_checkpoint, out_dir, verbose);
  return train_typed<float>(cfg, corpus, &init_checkpoint, out_dir, verbose);
}

EvalOutcome evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::string& split,
                                const std::string& data) {
  auto ck = load_checkpoint(checkpoint);
  const auto mc = ck.header.at("model").get<ModelConfig>();
  const auto cfg = ck.header.at("train_config").get<TrainConfig>();
  Corpus corpus;
  if (!data.empty()) corpus = load_corpus(data);
  else corpus = resolve_corpus(cfg);
  DualEncoder<float> model(mc, std::move(ck.params));
  return evaluate_model(model, corpus, split, cfg.positive_epsilon);
}

template DirectionAccuracy direction_accuracy(const DualEncoder<float>&, const Split&);
template DirectionAccuracy direction_accuracy(const DualEncoder<double>&, const Split&);
template EvalOutcome evaluate_model(const DualEncoder<float>&, const Corpus&, const std::string&, double);
template EvalOutcome evaluate_model(const DualEncoder<double>&, const Corpus&, const std::string&, double);

}  // namespace vtr::harness
