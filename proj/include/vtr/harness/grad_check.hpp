#pragma once

#include <string>
#include <vector>

namespace vtr::harness {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  std::vector<std::string> warnings;
  bool passed() const;
};

struct GradCheckOptions {
  double threshold = 1e-6;
  /// Add a fixture whose backward pass is deliberately wrong.
  bool corrupt_fixture = false;
  /// Check an empty parameter set only (vacuous, with a warning).
  bool empty = false;
};

/// Central differences in float64 against every loss and both towers.
GradCheckReport run_grad_check(const GradCheckOptions& opts = {});

}  // namespace vtr::harness
