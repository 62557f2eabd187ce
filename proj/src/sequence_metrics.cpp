#include "ragig/sequence_metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace ragig {

ImageSequence::ImageSequence(std::vector<std::int64_t> indices) : indices_(std::move(indices)) {
  std::unordered_set<std::int64_t> seen;
  for (auto k : indices_) {
    if (k < 1) throw std::invalid_argument("image index " + std::to_string(k) + " is below 1");
    if (!seen.insert(k).second) throw std::invalid_argument("duplicate image index " + std::to_string(k));
  }
}

std::size_t levenshtein(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  // Single-row DP; prev[j] holds dp(i-1, j).
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t subst = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, subst});
      diag = up;
    }
  }
  return row[b.size()];
}

double edit_distance_score(const ImageSequence& generated, const ImageSequence& ground_truth) {
  const auto longest = std::max(generated.size(), ground_truth.size());
  if (longest == 0) return 1.0;
  const auto dist = levenshtein(generated.indices(), ground_truth.indices());
  return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

CorrectSubsequence correct_subsequence(const ImageSequence& generated, const ImageSequence& ground_truth) {
  std::unordered_map<std::int64_t, std::size_t> gt_pos;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) gt_pos.emplace(ground_truth.indices()[i], i);

  CorrectSubsequence out;
  for (auto k : generated.indices()) {
    if (auto it = gt_pos.find(k); it != gt_pos.end()) {
      out.indices.push_back(k);
      out.gt_positions.push_back(it->second);
    }
  }
  return out;
}

double kendall_score(const ImageSequence& generated, const ImageSequence& ground_truth) {
  const auto longest = std::max(generated.size(), ground_truth.size());
  if (longest == 0) return 1.0;

  const auto correct = correct_subsequence(generated, ground_truth);
  const auto o = correct.size();
  if (o <= 1) return static_cast<double>(o) / static_cast<double>(longest);

  std::size_t concordant = 0;
  for (std::size_t i = 0; i < o; ++i) {
    for (std::size_t j = i + 1; j < o; ++j) {
      if (correct.gt_positions[i] < correct.gt_positions[j]) ++concordant;
    }
  }
  const double pairs = static_cast<double>(o) * static_cast<double>(o - 1) / 2.0;
  return static_cast<double>(concordant) / pairs;
}

}  // namespace ragig
