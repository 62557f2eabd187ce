#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ragig/corpus.hpp"
#include "ragig/evaluator.hpp"
#include "ragig/provider.hpp"

namespace ragig {

/// Weights over (rouge1, edit_distance, kendall, alignment, clip).
class RewardConfig {
 public:
  /// Uniform weights, gating on.
  RewardConfig();
  /// Throws std::invalid_argument unless weights are >= 0 and sum to 1 (±1e-9).
  explicit RewardConfig(std::array<double, 5> weights, bool gate_invalid_format = true);

  /// Parses "w1,w2,w3,w4,w5".
  static RewardConfig from_string(std::string_view csv, bool gate_invalid_format = true);

  const std::array<double, 5>& weights() const noexcept { return weights_; }
  bool gate_invalid_format() const noexcept { return gate_invalid_format_; }

  EvalConfig eval;

 private:
  std::array<double, 5> weights_;
  bool gate_invalid_format_;
};

/// Weighted sum of the five scores divided by 100, clamped to [0, 1].
double reward_from_report(const SampleReport& report, const RewardConfig& config);

double compute_reward(const EvalSample& sample, std::string_view answer_markdown, const ScoringProvider& provider,
                      const RewardConfig& config = {});

/// Batch protocol used by trainers:
///   request  {"samples": [sample_id...], "answers": [str...]}
///   response {"rewards": [real...]}          (order-aligned)
///   error    {"error": str}
class RewardService {
 public:
  RewardService(const std::vector<EvalSample>& corpus, const ScoringProvider& provider, RewardConfig config);

  /// Throws DataError on a malformed request or unknown sample id.
  nlohmann::json handle(const nlohmann::json& request) const;

 private:
  std::unordered_map<std::string, const EvalSample*> by_id_;
  const ScoringProvider& provider_;
  RewardConfig config_;
};

}  // namespace ragig
