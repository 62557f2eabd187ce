#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ragig/answer_parser.hpp"
#include "ragig/corpus.hpp"
#include "ragig/provider.hpp"
#include "ragig/sequence_metrics.hpp"

namespace ragig {

/// Throws DimensionMismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Maps a similarity in [-1, 1] onto the 0-100 report scale: 100 * max(0, sim).
double similarity_to_score(double sim) noexcept;

struct PerImageConsistency {
  std::int64_t image_index = 0;
  std::optional<double> alignment_sim;  // set for images in the correct subsequence
  std::optional<double> clip_sim;       // set for every in-range generated image
};

struct ConsistencyScores {
  double alignment = 0.0;  // [0, 100]
  double clip = 0.0;       // [0, 100]
  std::vector<PerImageConsistency> per_image;
};

struct AlignmentDetail {
  double score = 0.0;
  std::vector<std::pair<std::int64_t, double>> similarities;  // correct order
};

/// Context similarity of each shared image between the generated answer and
/// the ground truth, averaged on the 0-100 scale. 0 when nothing is shared.
/// Contexts are looked up by first occurrence. Throws MissingContext.
AlignmentDetail alignment_detail(const std::vector<ImageContext>& gen_contexts,
                                 const std::vector<ImageContext>& gt_contexts, const CorrectSubsequence& correct,
                                 const ScoringProvider& provider);

double alignment_score(const std::vector<ImageContext>& gen_contexts, const std::vector<ImageContext>& gt_contexts,
                       const CorrectSubsequence& correct, const ScoringProvider& provider);

struct ClipDetail {
  double score = 0.0;
  std::vector<std::pair<std::int64_t, double>> similarities;  // generated order, deduplicated
};

/// Text paired with an image: alt text followed by its local context,
/// truncated to `max_text_len` code points.
std::string clip_pair_text(const std::string& alt_text, const ImageContext& ctx, std::size_t max_text_len);

/// Image-to-local-text similarity averaged over distinct in-range generated
/// images, on the 0-100 scale. 0 when there are none.
/// Throws MissingAsset, MissingContext.
ClipDetail clip_detail(const ParsedAnswer& parsed, const std::vector<ImageContext>& contexts,
                       const std::map<std::int64_t, ImageAsset>& assets, const ScoringProvider& provider);

double clip_score(const ParsedAnswer& parsed, const std::vector<ImageContext>& contexts,
                  const std::map<std::int64_t, ImageAsset>& assets, const ScoringProvider& provider);

}  // namespace ragig
