#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ragig/answer_parser.hpp"
#include "ragig/corpus.hpp"
#include "ragig/provider.hpp"

namespace ragig {

struct EvalConfig {
  std::size_t context_window_cap = kDefaultContextWindow;
  std::size_t workers = 1;
};

/// Five metrics and their mean, all on the 0-100 scale.
struct MetricScores {
  double rouge1 = 0.0;
  double edit_distance = 0.0;
  double kendall = 0.0;
  double alignment = 0.0;
  double clip = 0.0;
  double mean = 0.0;

  bool operator==(const MetricScores&) const = default;
};

/// Unweighted average of the five metric columns.
double five_metric_mean(double rouge1, double edit_distance, double kendall, double alignment, double clip) noexcept;

struct SampleReport {
  std::string sample_id;
  MetricScores scores;
  FailureFlags flags;

  bool operator==(const SampleReport&) const = default;
};

struct CorpusReport {
  std::vector<SampleReport> per_sample;
  MetricScores aggregates;
  std::size_t invalid_format_count = 0;
  std::size_t hallucination_count = 0;

  bool operator==(const CorpusReport&) const = default;
};

SampleReport evaluate_sample(const EvalSample& sample, std::string_view answer_markdown,
                             const ScoringProvider& provider, const EvalConfig& config = {});

/// Column means over samples; the Mean column is the mean of per-sample means.
/// Throws EmptyCorpus.
CorpusReport aggregate(const std::vector<SampleReport>& reports);

struct AnswerRecord {
  std::string id;
  std::string answer;
};

/// Answers JSONL: {"id": str, "answer": str} per line. Throws IOFailure, SchemaError.
std::vector<AnswerRecord> load_answers(const std::filesystem::path& path);
std::vector<AnswerRecord> parse_answers(std::string_view jsonl);

/// Pairs answers with corpus samples in corpus order. Throws InvariantError
/// for answers whose id is unknown or repeated.
std::vector<std::pair<const EvalSample*, const AnswerRecord*>> match_answers(
    const std::vector<EvalSample>& corpus, const std::vector<AnswerRecord>& answers);

/// Runs `fn(i)` for i in [0, count) on up to `workers` threads. The first
/// exception stops remaining work and is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn);

/// Scores every answered sample on `config.workers` threads; the result is in
/// corpus order whatever the completion order.
CorpusReport evaluate_corpus(const std::vector<EvalSample>& corpus, const std::vector<AnswerRecord>& answers,
                             const ScoringProvider& provider, const EvalConfig& config = {});

enum class ReportFormat { kJson, kCsv };

/// Decimal rendering with two places, halves rounded up, applied to the
/// shortest round-trip representation of `value`.
std::string format_fixed2(double value);

nlohmann::json report_to_json(const CorpusReport& report);
/// Throws SchemaError.
CorpusReport report_from_json(const nlohmann::json& doc);
std::string report_to_csv(const CorpusReport& report);

/// Throws IOFailure.
void emit_report(const CorpusReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace ragig

#include "ragig/detail/parallel_for.hpp"
