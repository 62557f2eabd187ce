#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragig/evaluator.hpp"

namespace ragig {

/// Sample Pearson correlation. Throws DegenerateInput on length mismatch,
/// fewer than two points, or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct HumanScores {
  double image_quality = 0.0;
  double consistency = 0.0;
  double overall = 0.0;
};

/// Human scores JSONL: {"id", "image_quality", "consistency", "overall"}.
std::map<std::string, HumanScores> load_human_scores(const std::filesystem::path& path);
std::map<std::string, HumanScores> parse_human_scores(std::string_view jsonl);

struct CorrelationRow {
  std::string dimension;  // image_quality | consistency | overall
  std::size_t paired = 0;
  std::size_t dropped = 0;  // report samples without a human score and vice versa
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::string error;  // set when the dimension is degenerate
};

/// Correlates automated metrics with human judgements:
///   image_quality <- mean(edit_distance, kendall)
///   consistency   <- mean(alignment, clip)
///   overall       <- mean
/// A degenerate dimension is reported in its row and does not affect others.
std::vector<CorrelationRow> correlate_with_human(const CorpusReport& report,
                                                 const std::map<std::string, HumanScores>& human);

}  // namespace ragig
