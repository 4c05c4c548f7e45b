#include "vtr/relevancy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <sstream>

#include "vtr/numerics/tensor.hpp"

namespace vtr::relevancy {

using numerics::InvalidInput;

namespace {

std::vector<std::string> normalized(std::vector<std::string> words) {
  for (auto& w : words)
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return char(std::tolower(ch)); });
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

}  // namespace

Caption::Caption(std::string t, std::vector<std::string> v, std::vector<std::string> n)
    : text(std::move(t)), verbs(normalized(std::move(v))), nouns(normalized(std::move(n))) {}

void RelevancyConfig::validate() const {
  if (verb_weight < 0 || noun_weight < 0 || std::abs(verb_weight + noun_weight - 1.0) > 1e-12) {
    throw InvalidInput("relevancy weights must be nonnegative and sum to 1");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidInput("relevancy threshold must lie in (0, 1]");
}

double set_iou(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter, ++i, ++j;
    }
  }
  return double(inter) / double(a.size() + b.size() - inter);
}

double pos_relevancy(const Caption& a, const Caption& b, const RelevancyConfig& cfg) {
  return cfg.verb_weight * set_iou(a.verbs, b.verbs) + cfg.noun_weight * set_iou(a.nouns, b.nouns);
}

std::string RelevancyMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) os << (c ? "," : "") << at(r, c);
    os << '\n';
  }
  return os.str();
}

RelevancyMatrix build_relevancy_matrix(const std::vector<Caption>& videos, const std::vector<Caption>& narrations,
                                       const RelevancyConfig& cfg) {
  cfg.validate();
  RelevancyMatrix m{videos.size(), narrations.size(), std::vector<double>(videos.size() * narrations.size())};
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m.values[r * m.cols + c] = pos_relevancy(videos[r], narrations[c], cfg);
  return m;
}

std::vector<std::size_t> positive_set(std::size_t i, const RelevancyMatrix& m, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidInput("positive_set: threshold must lie in (0, 1]");
  if (i >= m.rows) throw InvalidInput("positive_set: row " + std::to_string(i) + " out of range");
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < m.cols; ++c)
    if (m.at(i, c) >= epsilon) out.push_back(c);
  return out;
}

}  // namespace vtr::relevancy
