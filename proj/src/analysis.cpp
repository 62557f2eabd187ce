#include "ragig/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "ragig/errors.hpp"
#include "ragig/text_util.hpp"

namespace ragig {

using json = nlohmann::json;

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DegenerateInput("length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw DegenerateInput("need at least two paired values");

  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("constant input has no correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DegenerateInput("length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::map<std::string, HumanScores> parse_human_scores(std::string_view jsonl) {
  std::map<std::string, HumanScores> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    const auto nl = jsonl.find('\n', start);
    const auto line = jsonl.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
    if (trim(line).empty()) continue;

    auto rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object()) throw SchemaError(line_no, "malformed human score record");
    try {
      HumanScores h{rec.at("image_quality").get<double>(), rec.at("consistency").get<double>(),
                    rec.at("overall").get<double>()};
      const auto id = rec.at("id").get<std::string>();
      if (!out.emplace(id, h).second) throw SchemaError(line_no, "duplicate id '" + id + "'");
    } catch (const json::exception& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return out;
}

std::map<std::string, HumanScores> load_human_scores(const std::filesystem::path& path) {
  return parse_human_scores(read_file(path));
}

std::vector<CorrelationRow> correlate_with_human(const CorpusReport& report,
                                                 const std::map<std::string, HumanScores>& human) {
  struct Dimension {
    const char* name;
    double (*metric)(const MetricScores&);
    double HumanScores::*human;
  };
  static constexpr Dimension kDimensions[] = {
      {"image_quality", [](const MetricScores& s) { return (s.edit_distance + s.kendall) / 2.0; },
       &HumanScores::image_quality},
      {"consistency", [](const MetricScores& s) { return (s.alignment + s.clip) / 2.0; }, &HumanScores::consistency},
      {"overall", [](const MetricScores& s) { return s.mean; }, &HumanScores::overall},
  };

  std::size_t paired = 0;
  for (const auto& r : report.per_sample) paired += human.contains(r.sample_id) ? 1 : 0;
  const std::size_t dropped = (report.per_sample.size() - paired) + (human.size() - paired);

  std::vector<CorrelationRow> rows;
  for (const auto& dim : kDimensions) {
    CorrelationRow row;
    row.dimension = dim.name;
    row.paired = paired;
    row.dropped = dropped;
    std::vector<double> metric, judged;
    for (const auto& r : report.per_sample) {
      auto it = human.find(r.sample_id);
      if (it == human.end()) continue;
      metric.push_back(dim.metric(r.scores));
      judged.push_back(it->second.*dim.human);
    }
    try {
      row.pearson = pearson(metric, judged);
      row.spearman = spearman(metric, judged);
    } catch (const DegenerateInput& e) {
      row.pearson.reset();
      row.spearman.reset();
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ragig
