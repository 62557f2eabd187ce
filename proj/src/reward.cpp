#include "ragig/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ragig/errors.hpp"
#include "ragig/text_util.hpp"

namespace ragig {

using json = nlohmann::json;

RewardConfig::RewardConfig() : RewardConfig({0.2, 0.2, 0.2, 0.2, 0.2}) {}

RewardConfig::RewardConfig(std::array<double, 5> weights, bool gate_invalid_format)
    : weights_(weights), gate_invalid_format_(gate_invalid_format) {
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("reward weights must be finite and non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("reward weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

RewardConfig RewardConfig::from_string(std::string_view csv, bool gate_invalid_format) {
  std::array<double, 5> w{};
  std::size_t count = 0;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto field = trim(csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (count == w.size()) throw std::invalid_argument("expected exactly 5 reward weights");
    try {
      std::size_t used = 0;
      w[count] = std::stod(std::string(field), &used);
      if (used != field.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid reward weight '" + std::string(field) + "'");
    }
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != w.size()) throw std::invalid_argument("expected exactly 5 reward weights");
  return RewardConfig(w, gate_invalid_format);
}

double reward_from_report(const SampleReport& report, const RewardConfig& config) {
  if (config.gate_invalid_format() && report.flags.invalid_format) return 0.0;
  const auto& s = report.scores;
  const std::array<double, 5> scores{s.rouge1, s.edit_distance, s.kendall, s.alignment, s.clip};
  double r = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) r += config.weights()[i] * scores[i] / 100.0;
  return std::clamp(r, 0.0, 1.0);
}

double compute_reward(const EvalSample& sample, std::string_view answer_markdown, const ScoringProvider& provider,
                      const RewardConfig& config) {
  return reward_from_report(evaluate_sample(sample, answer_markdown, provider, config.eval), config);
}

RewardService::RewardService(const std::vector<EvalSample>& corpus, const ScoringProvider& provider,
                             RewardConfig config)
    : provider_(provider), config_(std::move(config)) {
  for (const auto& s : corpus) by_id_.emplace(s.id, &s);
}

json RewardService::handle(const json& request) const {
  if (!request.is_object()) throw DataError("reward request must be a JSON object");
  auto ids = request.find("samples");
  auto answers = request.find("answers");
  if (ids == request.end() || !ids->is_array() || answers == request.end() || !answers->is_array()) {
    throw DataError("reward request needs 'samples' and 'answers' arrays");
  }
  if (ids->size() != answers->size()) {
    throw DataError("reward request has " + std::to_string(ids->size()) + " samples but " +
                    std::to_string(answers->size()) + " answers");
  }

  std::vector<std::pair<const EvalSample*, std::string>> jobs;
  for (std::size_t i = 0; i < ids->size(); ++i) {
    const auto& id = (*ids)[i];
    const auto& answer = (*answers)[i];
    if (!id.is_string() || !answer.is_string()) throw DataError("sample ids and answers must be strings");
    auto it = by_id_.find(id.get<std::string>());
    if (it == by_id_.end()) throw DataError("unknown sample id '" + id.get<std::string>() + "'");
    jobs.emplace_back(it->second, answer.get<std::string>());
  }

  std::vector<double> rewards(jobs.size());
  parallel_for(jobs.size(), config_.eval.workers, [&](std::size_t i) {
    rewards[i] = compute_reward(*jobs[i].first, jobs[i].second, provider_, config_);
  });
  return {{"rewards", rewards}};
}

}  // namespace ragig
