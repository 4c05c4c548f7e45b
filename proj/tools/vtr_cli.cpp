// vtr: data generation, training, evaluation and checks for the
// video-text retrieval harness.
//
// Exit codes: 0 success, 1 usage or invalid input, 2 numerical failure
// (non-finite loss, failed gradient check).

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vtr/harness/ablate.hpp"
#include "vtr/harness/checkpoint.hpp"
#include "vtr/harness/dataset.hpp"
#include "vtr/harness/grad_check.hpp"
#include "vtr/harness/train.hpp"

namespace h = vtr::harness;

namespace {

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vtr::numerics::InvalidInput("cannot read " + path);
  return nlohmann::json::parse(in);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_eval(const h::EvalOutcome& e) {
  const auto& r = e.report;
  std::cout << "v2t mAP " << r.v2t.map << "  nDCG " << r.v2t.ndcg << "\n"
            << "t2v mAP " << r.t2v.map << "  nDCG " << r.t2v.ndcg << "\n"
            << "avg mAP " << r.map_avg << "  nDCG " << r.ndcg_avg << "\n"
            << "motion-verb mAP " << e.motion_map << "\n"
            << "direction accuracy " << e.direction.accuracy << " over " << e.direction.trials
            << " clips (binomial p " << e.direction.p_value << ")\n"
            << "invariants " << e.invariants.checked - e.invariants.failures() << "/" << e.invariants.checked
            << " hold\n";
  for (const auto& f : e.invariants.failed) std::cout << "  failed: " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video-text retrieval with spatiotemporal rotary encodings and soft multi-similarity losses"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Render the synthetic motion-grid corpus");
  std::string spec_path, gen_out;
  bool export_rel = false;
  h::MotionGridSpec spec;
  gen->add_option("--spec", spec_path, "JSON corpus spec (flags below override it)");
  gen->add_option("--out", gen_out, "Output directory")->required();
  auto* o_train = gen->add_option("--train", spec.train, "Training clips");
  auto* o_val = gen->add_option("--val", spec.val, "Validation clips");
  auto* o_frames = gen->add_option("--frames", spec.frames, "Frames per clip");
  auto* o_seed = gen->add_option("--seed", spec.seed, "Generator seed");
  auto* o_cnoise = gen->add_option("--caption-noise", spec.caption_noise, "Fraction of partial-match training captions");
  auto* o_noise = gen->add_option("--noise", spec.noise, "Pixel noise standard deviation");
  gen->add_flag("--export-relevancy", export_rel, "Also write <split>_relevancy.csv");

  // train
  auto* tr = app.add_subcommand("train", "Two-phase training");
  std::string cfg_path, tr_out, tr_data, tr_init;
  std::uint64_t tr_seed = 0;
  bool quiet = false;
  tr->add_option("--config", cfg_path, "Training config JSON")->required();
  tr->add_option("--out", tr_out, "Run directory")->required();
  tr->add_option("--data", tr_data, "Corpus directory (overrides config)");
  auto* o_trseed = tr->add_option("--seed", tr_seed, "Seed (overrides config)");
  tr->add_option("--init", tr_init, "Phase-1 checkpoint; runs phase 2 only");
  tr->add_flag("--quiet", quiet, "No per-epoch progress on stderr");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ck_path, ev_split = "val", ev_data, ev_out;
  bool per_query = false;
  ev->add_option("--checkpoint", ck_path, "Checkpoint file")->required();
  ev->add_option("--split", ev_split, "train or val")->check(CLI::IsMember({"train", "val"}));
  ev->add_option("--data", ev_data, "Corpus directory (default: the one recorded in the checkpoint)");
  ev->add_option("--out", ev_out, "Write eval.json and eval.csv here");
  ev->add_flag("--per-query", per_query, "Include per-query metrics in eval.json");

  // ablate-rope
  auto* ab = app.add_subcommand("ablate-rope", "Compare temporal encodings under one budget");
  std::string ab_cfg, ab_out, ab_variants = "a,b,c,d,control", ab_seeds = "1";
  ab->add_option("--config", ab_cfg, "Base training config JSON")->required();
  ab->add_option("--out", ab_out, "Output directory")->required();
  ab->add_option("--variants", ab_variants, "Comma list from a,b,c,d,control");
  ab->add_option("--seeds", ab_seeds, "Comma list of seeds");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Finite-difference gradient audit");
  h::GradCheckOptions gopts;
  gc->add_option("--threshold", gopts.threshold, "Maximum relative error");
  gc->add_flag("--corrupt-fixture", gopts.corrupt_fixture, "Include a fixture with a wrong backward pass");
  gc->add_flag("--empty", gopts.empty, "Check an empty parameter set");

  auto* dc = app.add_subcommand("default-config", "Print the default training config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) {
      if (!spec_path.empty()) {
        const auto base = read_json(spec_path).get<h::MotionGridSpec>();
        h::MotionGridSpec merged = base;
        if (*o_train) merged.train = spec.train;
        if (*o_val) merged.val = spec.val;
        if (*o_frames) merged.frames = spec.frames;
        if (*o_seed) merged.seed = spec.seed;
        if (*o_cnoise) merged.caption_noise = spec.caption_noise;
        if (*o_noise) merged.noise = spec.noise;
        spec = merged;
      }
      const auto corpus = h::generate_dataset(spec);
      h::write_corpus(corpus, gen_out, export_rel);
      std::cout << "wrote " << corpus.train.clips.size() << " train and " << corpus.val.clips.size()
                << " val clips to " << gen_out << "\n";
    } else if (*tr) {
      auto cfg = read_json(cfg_path).get<h::TrainConfig>();
      if (!tr_data.empty()) cfg.data = tr_data;
      if (*o_trseed) cfg.seed = tr_seed;
      const auto corpus = h::resolve_corpus(cfg);
      const auto r = tr_init.empty() ? h::train(cfg, corpus, tr_out, !quiet)
                                     : h::train_from(cfg, corpus, tr_init, tr_out, !quiet);
      std::cout << "best epoch " << r.best_record.epoch << " of phase " << r.best_record.phase << " -> "
                << r.checkpoint.string() << " (" << r.seconds << " s)\n";
      print_eval(r.best);
    } else if (*ev) {
      const auto e = h::evaluate_checkpoint(ck_path, ev_split, ev_data);
      print_eval(e);
      if (!ev_out.empty()) {
        std::filesystem::create_directories(ev_out);
        std::ofstream(std::filesystem::path(ev_out) / "eval.json") << e.to_json(per_query).dump(2) << "\n";
        std::ofstream(std::filesystem::path(ev_out) / "eval.csv") << e.report.to_csv();
      }
    } else if (*ab) {
      const auto cfg = read_json(ab_cfg).get<h::TrainConfig>();
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(ab_seeds)) seeds.push_back(std::stoull(s));
      const auto variants = split_list(ab_variants);
      for (const auto& v : variants) h::rope_variant(v);
      const auto rows = h::run_ablation(cfg, h::resolve_corpus(cfg), variants, seeds, ab_out, true);
      std::cout << h::ablation_csv(rows);
    } else if (*gc) {
      const auto rep = h::run_grad_check(gopts);
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& e : rep.entries)
        std::cout << (e.passed ? "ok   " : "FAIL ") << e.name << "  max rel error " << e.max_rel_error << " over "
                  << e.coordinates << " coordinates\n";
      if (!rep.passed()) {
        std::cerr << "gradient check failed\n";
        return kNumerical;
      }
    } else if (*dc) {
      std::cout << nlohmann::json(h::TrainConfig{}).dump(2) << "\n";
    }
  } catch (const h::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const h::CorruptCheckpoint& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const vtr::numerics::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid JSON: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return 0;
}
