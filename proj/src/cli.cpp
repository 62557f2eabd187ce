#include "ragig/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "ragig/analysis.hpp"
#include "ragig/answer_parser.hpp"
#include "ragig/corpus.hpp"
#include "ragig/errors.hpp"
#include "ragig/evaluator.hpp"
#include "ragig/provider.hpp"
#include "ragig/reward.hpp"
#include "ragig/text_util.hpp"

namespace ragig::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string corpus_path;
  std::string answers_path;
  std::string provider_endpoint;
  std::string mock_fixture_path;
  std::string out_path;
  std::string format = "json";
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t context_window_cap = kDefaultContextWindow;
  std::string reward_weights;
};

// Input files that cannot be opened are data errors, not environment errors.
void require_input(const std::string& path, const char* what) {
  std::error_code ec;
  if (path.empty()) throw DataError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path, ec)) throw DataError(std::string(what) + " '" + path + "' does not exist or is not a file");
  std::ifstream probe(path);
  if (!probe) throw DataError(std::string(what) + " '" + path + "' is not readable");
}

std::unique_ptr<ScoringProvider> make_provider(const RunConfig& cfg) {
  std::string endpoint = cfg.provider_endpoint;
  if (endpoint.empty() && cfg.mock_fixture_path.empty()) {
    if (const char* env = std::getenv(kProviderEndpointEnv)) endpoint = env;
  }
  if (!endpoint.empty() && !cfg.mock_fixture_path.empty()) {
    throw DataError("--provider-endpoint and --mock-fixture are mutually exclusive");
  }
  if (endpoint.empty() && cfg.mock_fixture_path.empty()) {
    throw DataError(std::string("one of --provider-endpoint, --mock-fixture or $") + kProviderEndpointEnv +
                    " is required");
  }
  if (!cfg.mock_fixture_path.empty()) {
    require_input(cfg.mock_fixture_path, "mock fixture");
    return std::make_unique<MockProvider>(MockProvider::from_file(cfg.mock_fixture_path));
  }
  HttpProviderOptions opts;
  opts.max_in_flight = static_cast<std::ptrdiff_t>(cfg.workers);
  return std::make_unique<HttpProvider>(endpoint, opts);
}

void write_output(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << body;
  } else {
    write_file(path, body);
  }
}

void add_provider_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--provider-endpoint", cfg.provider_endpoint, "Scoring provider base URL");
  cmd->add_option("--mock-fixture", cfg.mock_fixture_path, "Mock provider fixture JSON");
  cmd->add_option("--workers", cfg.workers, "Concurrent samples")->check(CLI::PositiveNumber);
  cmd->add_option("--context-window-cap", cfg.context_window_cap, "Context characters per side")
      ->check(CLI::PositiveNumber);
}

json parsed_to_json(const ParsedAnswer& p, std::size_t window_cap) {
  json refs = json::array();
  for (const auto& r : p.image_refs) {
    refs.push_back({{"index", r.index},
                    {"alt_text", r.alt_text},
                    {"char_span", {r.char_span.begin, r.char_span.end}},
                    {"in_range", p.in_range(r.index)}});
  }
  json contexts = json::array();
  for (const auto& c : extract_contexts(p, window_cap)) {
    contexts.push_back({{"image_index", c.image_index}, {"before_text", c.before_text}, {"after_text", c.after_text}});
  }
  return {{"image_count", p.image_count},
          {"image_refs", std::move(refs)},
          {"text_segments", p.text_segments},
          {"citations", p.citations},
          {"image_sequence", extract_image_sequence(p).indices()},
          {"contexts", std::move(contexts)},
          {"flags", {{"invalid_format", p.flags.invalid_format}, {"hallucinated_indices", p.flags.hallucinated_indices}}}};
}

std::string format_correlation(const std::vector<CorrelationRow>& rows) {
  std::string out = "dimension,paired,pearson,spearman,error\n";
  for (const auto& r : rows) {
    auto num = [](const std::optional<double>& v) {
      if (!v) return std::string();
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", *v);
      return std::string(buf);
    };
    out += r.dimension + "," + std::to_string(r.paired) + "," + num(r.pearson) + "," + num(r.spearman) + "," +
           r.error + "\n";
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-based scoring for interleaved image-text answers", "ragig"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto* evaluate = app.add_subcommand("evaluate", "Score answers against a corpus and write a report");
  evaluate->add_option("--corpus", cfg.corpus_path, "Corpus JSONL")->required();
  evaluate->add_option("--answers", cfg.answers_path, "Answers JSONL")->required();
  evaluate->add_option("--out", cfg.out_path, "Report path")->required();
  evaluate->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  add_provider_options(evaluate, cfg);

  std::string answer_file;
  std::size_t image_count = 0;
  auto* parse = app.add_subcommand("parse", "Dump the structure and failure flags of one answer");
  parse->add_option("--answer-file", answer_file, "Markdown answer or JSON envelope")->required();
  parse->add_option("--image-count", image_count, "Number of retrieved images N")->required();
  parse->add_option("--context-window-cap", cfg.context_window_cap)->check(CLI::PositiveNumber);
  parse->add_option("--out", cfg.out_path, "Output path (default stdout)");

  std::string report_path, human_path;
  auto* correlate = app.add_subcommand("correlate", "Correlate a JSON report with human scores");
  correlate->add_option("--report", report_path, "Report JSON from `evaluate`")->required();
  correlate->add_option("--human", human_path, "Human scores JSONL")->required();
  correlate->add_option("--out", cfg.out_path, "Output CSV (default stdout)");

  bool no_gate = false;
  auto* reward = app.add_subcommand("reward", "Compute rewards for answers");
  reward->add_option("--corpus", cfg.corpus_path, "Corpus JSONL")->required();
  reward->add_option("--answers", cfg.answers_path, "Answers JSONL")->required();
  reward->add_option("--out", cfg.out_path, "Rewards JSONL (default stdout)");
  reward->add_option("--reward-weights", cfg.reward_weights, "Five comma-separated weights summing to 1");
  reward->add_flag("--no-gate", no_gate, "Do not zero the reward of invalid-format answers");
  add_provider_options(reward, cfg);

  std::string url_map_path, sample_id;
  std::optional<std::size_t> render_count;
  auto* render = app.add_subcommand("render", "Substitute image URLs into an answer");
  render->add_option("--answer-file", answer_file, "Markdown answer")->required();
  render->add_option("--url-map", url_map_path, "JSON object {\"<k>\": \"<url>\"}");
  render->add_option("--corpus", cfg.corpus_path, "Corpus JSONL (with --sample-id)");
  render->add_option("--sample-id", sample_id, "Sample whose image locators are used");
  render->add_option("--image-count", render_count, "Number of retrieved images N");
  render->add_option("--out", cfg.out_path, "Output path (default stdout)");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve-reward", "Serve the batch reward protocol over HTTP (POST /reward)");
  serve->add_option("--corpus", cfg.corpus_path, "Corpus JSONL")->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--reward-weights", cfg.reward_weights);
  serve->add_flag("--no-gate", no_gate);
  add_provider_options(serve, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDataError;
  }

  try {
    if (evaluate->parsed()) {
      require_input(cfg.corpus_path, "corpus");
      require_input(cfg.answers_path, "answers");
      const auto corpus = load_corpus(cfg.corpus_path);
      const auto answers = load_answers(cfg.answers_path);
      const auto provider = make_provider(cfg);
      EvalConfig ec{cfg.context_window_cap, cfg.workers};
      const auto report = evaluate_corpus(corpus, answers, *provider, ec);
      emit_report(report, cfg.format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson, cfg.out_path);
      err << "evaluated " << report.per_sample.size() << " samples; mean " << format_fixed2(report.aggregates.mean)
          << "\n";
    } else if (parse->parsed()) {
      require_input(answer_file, "answer file");
      const auto envelope = extract_answer_envelope(read_file(answer_file));
      const auto parsed = parse_answer(envelope.answer, image_count);
      json dump = parsed_to_json(parsed, cfg.context_window_cap);
      dump["reason"] = envelope.reason;
      dump["category"] = envelope.category ? json(std::string(to_string(*envelope.category))) : json(nullptr);
      write_output(cfg.out_path, dump.dump(2) + "\n", out);
    } else if (correlate->parsed()) {
      require_input(report_path, "report");
      require_input(human_path, "human scores");
      auto doc = json::parse(read_file(report_path), nullptr, /*allow_exceptions=*/false);
      if (doc.is_discarded()) throw DataError("report '" + report_path + "' is not valid JSON");
      const auto report = report_from_json(doc);
      const auto human = load_human_scores(human_path);
      const auto rows = correlate_with_human(report, human);
      if (!rows.empty() && rows.front().dropped > 0) {
        err << "dropped " << rows.front().dropped << " samples without a counterpart\n";
      }
      write_output(cfg.out_path, format_correlation(rows), out);
    } else if (reward->parsed()) {
      require_input(cfg.corpus_path, "corpus");
      require_input(cfg.answers_path, "answers");
      const auto corpus = load_corpus(cfg.corpus_path);
      const auto answers = load_answers(cfg.answers_path);
      const auto provider = make_provider(cfg);
      RewardConfig rc = cfg.reward_weights.empty() ? RewardConfig({0.2, 0.2, 0.2, 0.2, 0.2}, !no_gate)
                                                   : RewardConfig::from_string(cfg.reward_weights, !no_gate);
      rc.eval = {cfg.context_window_cap, cfg.workers};

      const auto jobs = match_answers(corpus, answers);
      std::vector<double> rewards(jobs.size());
      parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
        rewards[i] = compute_reward(*jobs[i].first, jobs[i].second->answer, *provider, rc);
      });
      std::string body;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        body += json{{"id", jobs[i].first->id}, {"reward", rewards[i]}}.dump() + "\n";
      }
      write_output(cfg.out_path, body, out);
    } else if (render->parsed()) {
      require_input(answer_file, "answer file");
      UrlMap urls;
      if (!url_map_path.empty()) {
        require_input(url_map_path, "url map");
        auto doc = json::parse(read_file(url_map_path), nullptr, /*allow_exceptions=*/false);
        if (doc.is_discarded() || !doc.is_object()) throw DataError("url map must be a JSON object");
        for (const auto& [key, value] : doc.items()) {
          if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos || !value.is_string()) {
            throw DataError("url map entries must be \"<index>\": \"<url>\"");
          }
          urls[parse_index_saturating(key)] = value.get<std::string>();
        }
      } else if (!cfg.corpus_path.empty() && !sample_id.empty()) {
        require_input(cfg.corpus_path, "corpus");
        const auto corpus = load_corpus(cfg.corpus_path);
        auto it = std::find_if(corpus.begin(), corpus.end(), [&](const EvalSample& s) { return s.id == sample_id; });
        if (it == corpus.end()) throw InvariantError(sample_id, "not found in corpus");
        for (const auto& a : it->assets()) urls[a.index] = a.locator;
        if (!render_count) render_count = it->image_count();
      } else {
        throw DataError("render needs --url-map or --corpus with --sample-id");
      }
      const std::size_t n = render_count ? *render_count : (urls.empty() ? 0 : static_cast<std::size_t>(urls.rbegin()->first));
      const auto parsed = parse_answer(read_file(answer_file), n);
      write_output(cfg.out_path, render_with_urls(parsed, urls), out);
    } else if (serve->parsed()) {
      require_input(cfg.corpus_path, "corpus");
      const auto corpus = load_corpus(cfg.corpus_path);
      const auto provider = make_provider(cfg);
      RewardConfig rc = cfg.reward_weights.empty() ? RewardConfig({0.2, 0.2, 0.2, 0.2, 0.2}, !no_gate)
                                                   : RewardConfig::from_string(cfg.reward_weights, !no_gate);
      rc.eval = {cfg.context_window_cap, cfg.workers};
      RewardService service(corpus, *provider, rc);

      httplib::Server server;
      server.Post("/reward", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
        try {
          if (body.is_discarded()) throw DataError("request body is not JSON");
          res.set_content(service.handle(body).dump(), "application/json");
        } catch (const DataError& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        } catch (const std::exception& e) {
          res.status = 503;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
      });
      err << "serving rewards for " << corpus.size() << " samples on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw IOFailure("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const EnvironmentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironmentError;
  }
  return kExitOk;
}

}  // namespace ragig::cli
