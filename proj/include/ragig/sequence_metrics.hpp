#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace ragig {

/// Ordered, duplicate-free list of image indices, all >= 1.
class ImageSequence {
 public:
  ImageSequence() = default;
  /// Throws std::invalid_argument on duplicates or indices below 1.
  explicit ImageSequence(std::vector<std::int64_t> indices);
  ImageSequence(std::initializer_list<std::int64_t> indices)
      : ImageSequence(std::vector<std::int64_t>(indices)) {}

  const std::vector<std::int64_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }

  bool operator==(const ImageSequence&) const = default;

 private:
  std::vector<std::int64_t> indices_;
};

/// Images shared by both sequences, in generated order, with their 0-based
/// positions in the ground truth.
struct CorrectSubsequence {
  std::vector<std::int64_t> indices;
  std::vector<std::size_t> gt_positions;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Unit-cost Levenshtein distance (insert, delete, substitute).
std::size_t levenshtein(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b);

/// 1 - lev(generated, gt) / max(m, n); 1.0 when both are empty.
double edit_distance_score(const ImageSequence& generated, const ImageSequence& ground_truth);

CorrectSubsequence correct_subsequence(const ImageSequence& generated, const ImageSequence& ground_truth);

/// Fraction of concordant pairs among shared images when more than one image
/// is shared; otherwise shared / max(m, n). 1.0 when both are empty.
double kendall_score(const ImageSequence& generated, const ImageSequence& ground_truth);

}  // namespace ragig
