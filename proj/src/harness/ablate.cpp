#include "vtr/harness/ablate.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace vtr::harness {

const std::vector<RopeVariant>& rope_variants() {
  using video::RopeMode;
  static const std::vector<RopeVariant> v{
      {"a", true, RopeMode::kSpatial},
      {"b", false, RopeMode::kSpatiotemporal},
      {"c", true, RopeMode::kSpatiotemporal},
      {"d", true, RopeMode::kSplit3d},
      {"control", false, RopeMode::kSpatial},
  };
  return v;
}

const RopeVariant& rope_variant(const std::string& name) {
  for (const auto& v : rope_variants())
    if (v.name == name) return v;
  throw numerics::InvalidInput("unknown ablation variant '" + name + "' (expected a, b, c, d or control)");
}

TrainConfig with_variant(TrainConfig cfg, const RopeVariant& v) {
  cfg.video.temporal_pe = v.temporal_pe;
  cfg.video.rope = v.rope;
  return cfg;
}

std::vector<AblationRow> run_ablation(const TrainConfig& base, const Corpus& corpus,
                                      const std::vector<std::string>& variants,
                                      const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                      bool verbose) {
  std::vector<AblationRow> rows;
  for (const auto& name : variants) {
    const auto& v = rope_variant(name);
    for (auto seed : seeds) {
      auto cfg = with_variant(base, v);
      cfg.seed = seed;
      if (verbose) std::cerr << "ablation: variant " << name << " seed " << seed << "\n";
      const auto r = train(cfg, corpus, out_dir / (name + "_seed" + std::to_string(seed)), verbose);
      rows.push_back({name, seed, r.best_record, r.history.empty() ? r.best_record : r.history.back(), r.best, r.seconds});
    }
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream(out_dir / "table.csv") << ablation_csv(rows);
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,seed,map_avg,ndcg_avg,motion_map,direction_acc,direction_p,final_map_avg,final_direction_acc\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%.6f,%.6f,%.3g,%.6f,%.6f\n", r.variant.c_str(),
                  static_cast<unsigned long long>(r.seed), r.eval.report.map_avg, r.eval.report.ndcg_avg,
                  r.eval.motion_map, r.eval.direction.accuracy, r.eval.direction.p_value, r.last.map_avg, r.last.direction);
    out += buf;
  }
  return out;
}

}  // namespace vtr::harness
