#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vtr::relevancy {

/// A caption with pre-tagged word sets. Tags are kept sorted and unique.
struct Caption {
  std::string text;
  std::vector<std::string> verbs;
  std::vector<std::string> nouns;

  Caption() = default;
  Caption(std::string text, std::vector<std::string> verbs, std::vector<std::string> nouns);
  bool operator==(const Caption&) const = default;
};

struct RelevancyConfig {
  double verb_weight = 0.5;
  double noun_weight = 0.5;
  double epsilon = 0.1;  // positive-set threshold

  void validate() const;
};

/// Intersection over union of two sorted unique word sets; both empty gives 1.
double set_iou(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Weighted verb/noun IoU in [0, 1].
double pos_relevancy(const Caption& a, const Caption& b, const RelevancyConfig& cfg = {});

/// Row-major rows x cols table of relevancies between videos and narrations.
struct RelevancyMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::string to_csv() const;
};

RelevancyMatrix build_relevancy_matrix(const std::vector<Caption>& videos,
                                       const std::vector<Caption>& narrations,
                                       const RelevancyConfig& cfg = {});

/// Columns j with m(i, j) >= epsilon, ascending. May be empty for corpora
/// that are not self-paired; callers decide how to handle that.
std::vector<std::size_t> positive_set(std::size_t i, const RelevancyMatrix& m, double epsilon);

}  // namespace vtr::relevancy
