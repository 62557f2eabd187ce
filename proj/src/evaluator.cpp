#include "ragig/evaluator.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ragig/consistency_metrics.hpp"
#include "ragig/errors.hpp"
#include "ragig/sequence_metrics.hpp"
#include "ragig/text_metrics.hpp"
#include "ragig/text_util.hpp"

namespace ragig {

using json = nlohmann::json;

double five_metric_mean(double rouge1, double edit_distance, double kendall, double alignment, double clip) noexcept {
  return (rouge1 + edit_distance + kendall + alignment + clip) / 5.0;
}

SampleReport evaluate_sample(const EvalSample& sample, std::string_view answer_markdown,
                             const ScoringProvider& provider, const EvalConfig& config) {
  const auto n = sample.image_count();
  const auto answer = parse_answer(answer_markdown, n);
  const auto truth = parse_answer(sample.ground_truth, n);

  SampleReport report;
  report.sample_id = sample.id;
  report.flags = answer.flags;

  auto& s = report.scores;
  s.rouge1 = 100.0 * rouge(tokenize(strip_markdown(answer), SourceKind::kCandidate),
                           tokenize(strip_markdown(truth), SourceKind::kReference), RougeVariant::kRouge1)
                         .f1;

  if (!answer.flags.invalid_format) {
    const auto generated = extract_image_sequence(answer);
    const auto reference = extract_image_sequence(truth);
    s.edit_distance = 100.0 * edit_distance_score(generated, reference);
    s.kendall = 100.0 * kendall_score(generated, reference);

    const auto gen_contexts = extract_contexts(answer, config.context_window_cap);
    const auto gt_contexts = extract_contexts(truth, config.context_window_cap);
    s.alignment = alignment_score(gen_contexts, gt_contexts, correct_subsequence(generated, reference), provider);

    std::map<std::int64_t, ImageAsset> assets;
    for (auto& a : sample.assets()) assets.emplace(a.index, std::move(a));
    s.clip = clip_score(answer, gen_contexts, assets, provider);
  }
  s.mean = five_metric_mean(s.rouge1, s.edit_distance, s.kendall, s.alignment, s.clip);
  return report;
}

CorpusReport aggregate(const std::vector<SampleReport>& reports) {
  if (reports.empty()) throw EmptyCorpus("cannot aggregate an empty list of sample reports");
  CorpusReport out;
  out.per_sample = reports;
  MetricScores sum;
  for (const auto& r : reports) {
    sum.rouge1 += r.scores.rouge1;
    sum.edit_distance += r.scores.edit_distance;
    sum.kendall += r.scores.kendall;
    sum.alignment += r.scores.alignment;
    sum.clip += r.scores.clip;
    sum.mean += r.scores.mean;
    if (r.flags.invalid_format) ++out.invalid_format_count;
    if (!r.flags.hallucinated_indices.empty()) ++out.hallucination_count;
  }
  const double count = static_cast<double>(reports.size());
  out.aggregates = {sum.rouge1 / count,    sum.edit_distance / count, sum.kendall / count,
                    sum.alignment / count, sum.clip / count,          sum.mean / count};
  return out;
}

std::vector<AnswerRecord> parse_answers(std::string_view jsonl) {
  std::vector<AnswerRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    const auto nl = jsonl.find('\n', start);
    const auto line = jsonl.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
    if (trim(line).empty()) continue;

    auto rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object()) throw SchemaError(line_no, "malformed JSON answer record");
    auto id = rec.find("id");
    auto answer = rec.find("answer");
    if (id == rec.end() || !id->is_string()) throw SchemaError(line_no, "answer record needs a string 'id'");
    if (answer == rec.end() || !answer->is_string()) throw SchemaError(line_no, "answer record needs a string 'answer'");
    out.push_back({id->get<std::string>(), answer->get<std::string>()});
  }
  return out;
}

std::vector<AnswerRecord> load_answers(const std::filesystem::path& path) { return parse_answers(read_file(path)); }

std::vector<std::pair<const EvalSample*, const AnswerRecord*>> match_answers(
    const std::vector<EvalSample>& corpus, const std::vector<AnswerRecord>& answers) {
  std::unordered_map<std::string_view, const AnswerRecord*> by_id;
  for (const auto& a : answers) {
    if (!by_id.emplace(a.id, &a).second) throw InvariantError(a.id, "more than one answer for this sample");
  }
  std::vector<std::pair<const EvalSample*, const AnswerRecord*>> out;
  for (const auto& s : corpus) {
    if (auto it = by_id.find(s.id); it != by_id.end()) {
      out.emplace_back(&s, it->second);
      by_id.erase(it);
    }
  }
  if (!by_id.empty()) {
    // Report the first unknown id in answers-file order.
    for (const auto& a : answers) {
      if (by_id.contains(a.id)) throw InvariantError(a.id, "answer refers to a sample that is not in the corpus");
    }
  }
  return out;
}

CorpusReport evaluate_corpus(const std::vector<EvalSample>& corpus, const std::vector<AnswerRecord>& answers,
                             const ScoringProvider& provider, const EvalConfig& config) {
  const auto jobs = match_answers(corpus, answers);
  std::vector<SampleReport> reports(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    reports[i] = evaluate_sample(*jobs[i].first, jobs[i].second->answer, provider, config);
  });
  return aggregate(reports);
}

std::string format_fixed2(double value) {
  if (!std::isfinite(value)) return value != value ? "nan" : (value > 0 ? "inf" : "-inf");

  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  std::string repr(buf, res.ptr);

  bool negative = false;
  if (!repr.empty() && repr[0] == '-') {
    negative = true;
    repr.erase(0, 1);
  }
  const auto dot = repr.find('.');
  std::string int_part = dot == std::string::npos ? repr : repr.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : repr.substr(dot + 1);
  const bool round_up = frac.size() > 2 && frac[2] >= '5';
  frac.resize(2, '0');

  // Decimal increment of int_part.frac by 0.01.
  std::string digits = int_part + frac;
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
      } else {
        ++digits[i];
        break;
      }
      if (i == 0) digits.insert(digits.begin(), '1');
    }
  }
  std::string out = digits.substr(0, digits.size() - 2) + "." + digits.substr(digits.size() - 2);
  if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

namespace {

json scores_to_json(const MetricScores& s) {
  return {{"rouge1", s.rouge1}, {"edit_distance", s.edit_distance}, {"kendall", s.kendall},
          {"alignment", s.alignment}, {"clip", s.clip}, {"mean", s.mean}};
}

MetricScores scores_from_json(const json& j) {
  return {j.at("rouge1").get<double>(),    j.at("edit_distance").get<double>(), j.at("kendall").get<double>(),
          j.at("alignment").get<double>(), j.at("clip").get<double>(),          j.at("mean").get<double>()};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_scores(const MetricScores& s) {
  return format_fixed2(s.rouge1) + "," + format_fixed2(s.edit_distance) + "," + format_fixed2(s.kendall) + "," +
         format_fixed2(s.alignment) + "," + format_fixed2(s.clip) + "," + format_fixed2(s.mean);
}

}  // namespace

json report_to_json(const CorpusReport& report) {
  json samples = json::array();
  for (const auto& r : report.per_sample) {
    json entry = scores_to_json(r.scores);
    entry["sample_id"] = r.sample_id;
    entry["flags"] = {{"invalid_format", r.flags.invalid_format},
                      {"hallucinated_indices", r.flags.hallucinated_indices}};
    samples.push_back(std::move(entry));
  }
  return {{"per_sample", std::move(samples)},
          {"aggregates", scores_to_json(report.aggregates)},
          {"invalid_format_count", report.invalid_format_count},
          {"hallucination_count", report.hallucination_count}};
}

CorpusReport report_from_json(const json& doc) {
  try {
    CorpusReport out;
    for (const auto& entry : doc.at("per_sample")) {
      SampleReport r;
      r.sample_id = entry.at("sample_id").get<std::string>();
      r.scores = scores_from_json(entry);
      const auto& flags = entry.at("flags");
      r.flags.invalid_format = flags.at("invalid_format").get<bool>();
      r.flags.hallucinated_indices = flags.at("hallucinated_indices").get<std::vector<std::int64_t>>();
      out.per_sample.push_back(std::move(r));
    }
    out.aggregates = scores_from_json(doc.at("aggregates"));
    out.invalid_format_count = doc.at("invalid_format_count").get<std::size_t>();
    out.hallucination_count = doc.at("hallucination_count").get<std::size_t>();
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(1, std::string("malformed report: ") + e.what());
  }
}

std::string report_to_csv(const CorpusReport& report) {
  std::string out = "sample_id,rouge1,edit_distance,kendall,alignment,clip,mean,invalid_format,hallucinated_indices\n";
  for (const auto& r : report.per_sample) {
    std::string halluc;
    for (std::size_t i = 0; i < r.flags.hallucinated_indices.size(); ++i) {
      if (i) halluc += ';';
      halluc += std::to_string(r.flags.hallucinated_indices[i]);
    }
    out += csv_field(r.sample_id) + "," + csv_scores(r.scores) + "," + (r.flags.invalid_format ? "1" : "0") + "," +
           halluc + "\n";
  }
  out += "aggregate," + csv_scores(report.aggregates) + "," + std::to_string(report.invalid_format_count) + "," +
         std::to_string(report.hallucination_count) + "\n";
  return out;
}

void emit_report(const CorpusReport& report, ReportFormat format, const std::filesystem::path& path) {
  const std::string body = format == ReportFormat::kJson ? report_to_json(report).dump(2) + "\n" : report_to_csv(report);
  write_file(path, body);
}

}  // namespace ragig
