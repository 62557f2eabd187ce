// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// the number of failing criteria, so ctest reports the run red if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "../test_support.hpp"
#include "ragig/analysis.hpp"
#include "ragig/answer_parser.hpp"
#include "ragig/cli.hpp"
#include "ragig/consistency_metrics.hpp"
#include "ragig/evaluator.hpp"
#include "ragig/reward.hpp"
#include "ragig/sequence_metrics.hpp"
#include "ragig/text_metrics.hpp"
#include "ragig/text_util.hpp"

namespace {

using namespace ragig;
using Clock = std::chrono::steady_clock;
using Ids = std::vector<std::int64_t>;

// Tolerances and budgets.
constexpr double kMeanTolerance = 0.005;
constexpr double kRougeTolerance = 1e-9;
constexpr double kCorrelationTolerance = 1e-9;
constexpr double kMetricTolerance = 1e-9;
constexpr double kTableBudgetSeconds = 1.0;
constexpr double kEditBudgetSeconds = 10.0;
constexpr double kKendallBudgetSeconds = 5.0;
constexpr int kKendallPairs = 1000;
constexpr std::size_t kKendallMaxLen = 8;
constexpr int kRougeIdentityLists = 100;
constexpr int kWellFormedAnswers = 50;
constexpr std::size_t kDeterminismSamples = 20;

/// Accumulates failure notes for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && notes_.size() < 8) notes_.push_back(what);
    failed_ = failed_ || !ok;
  }
  bool ok() const { return !failed_; }
  std::string notes() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    return out;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> notes_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<Ids> duplicate_free_sequences(std::int64_t alphabet, std::size_t max_len) {
  std::vector<Ids> out{{}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == max_len) continue;
    for (std::int64_t s = 1; s <= alphabet; ++s) {
      if (std::find(out[i].begin(), out[i].end(), s) != out[i].end()) continue;
      auto next = out[i];
      next.push_back(s);
      out.push_back(std::move(next));
    }
  }
  return out;
}

Ids random_sequence(std::mt19937& rng, std::size_t max_len, std::int64_t alphabet) {
  Ids pool;
  for (std::int64_t k = 1; k <= alphabet; ++k) pool.push_back(k);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::uniform_int_distribution<std::size_t>(0, max_len)(rng));
  return pool;
}

// ---------------------------------------------------------------------------

Check table_mean_rows() {
  struct Row {
    const char* model;
    double cols[5];
    double printed_mean;
  };
  static const Row kRows[] = {
      {"GPT4o", {57.42, 51.28, 46.50, 38.81, 36.04}, 46.01},
      {"Claude3.5-sonnet", {35.98, 29.98, 21.91, 30.68, 35.56}, 30.81},
      {"Gemini-1.5-pro", {46.35, 42.22, 34.57, 35.07, 34.85}, 38.61},
      {"QwenVL-Max", {49.24, 44.66, 38.02, 34.55, 38.28}, 40.95},
      {"Qwen2VL-7B", {43.21, 22.23, 18.93, 18.77, 27.84}, 26.20},
      {"Qwen2VL-72B", {49.49, 36.66, 31.40, 26.49, 32.69}, 35.34},
      {"Llava Onevision 72B", {42.89, 24.77, 19.66, 18.20, 27.19}, 26.54},
      {"InternVL2.5 8B", {41.98, 24.53, 19.20, 21.94, 28.53}, 27.24},
      {"InternVL2.5 78B", {50.71, 36.86, 27.10, 35.68, 33.23}, 36.71},
      {"NVLM-D-72B", {38.43, 13.97, 11.87, 8.57, 13.82}, 17.33},
      {"InternVL2-Llama3-76B", {43.91, 25.18, 18.15, 25.38, 27.66}, 28.08},
      {"Qwen2.5VL-7B", {44.79, 24.56, 19.75, 19.87, 25.45}, 26.88},
      {"Qwen2.5VL-72B", {43.18, 40.38, 30.12, 35.26, 40.03}, 37.79},
  };
  Check check;
  const auto t0 = Clock::now();
  for (const auto& row : kRows) {
    const auto& c = row.cols;
    SampleReport s;
    s.sample_id = row.model;
    s.scores = {c[0], c[1], c[2], c[3], c[4], five_metric_mean(c[0], c[1], c[2], c[3], c[4])};
    const double mean = aggregate({s}).aggregates.mean;
    check.expect(std::abs(mean - row.printed_mean) <= kMeanTolerance,
                 std::string(row.model) + " " + fmt(mean, 3) + " vs " + fmt(row.printed_mean, 2));
  }
  const double elapsed = seconds_since(t0);
  check.expect(elapsed < kTableBudgetSeconds, "runtime " + fmt(elapsed) + "s");
  return check;
}

Check edit_distance_oracle() {
  Check check;
  const auto t0 = Clock::now();
  const auto seqs = duplicate_free_sequences(3, 4);
  std::size_t pairs = 0;
  for (const auto& a : seqs) {
    for (const auto& b : seqs) {
      ++pairs;
      const double expected = a.empty() && b.empty()
                                  ? 1.0
                                  : 1.0 - static_cast<double>(oracle::naive_edit_distance(a, b)) /
                                              static_cast<double>(std::max(a.size(), b.size()));
      const double got = edit_distance_score(ImageSequence(a), ImageSequence(b));
      check.expect(got == expected, "mismatch at pair " + std::to_string(pairs));
    }
  }
  const double elapsed = seconds_since(t0);
  check.expect(pairs == seqs.size() * seqs.size() && pairs > 0, "no pairs enumerated");
  check.expect(elapsed < kEditBudgetSeconds, "runtime " + fmt(elapsed) + "s");
  return check;
}

Check kendall_oracle() {
  Check check;
  std::mt19937 rng(20240601);
  const auto t0 = Clock::now();
  int low_overlap = 0;
  for (int i = 0; i < kKendallPairs; ++i) {
    const auto a = random_sequence(rng, kKendallMaxLen, 10);
    const auto b = random_sequence(rng, kKendallMaxLen, 10);
    const double got = kendall_score(ImageSequence(a), ImageSequence(b));
    const double expected = oracle::enumerate_kendall(a, b);
    check.expect(got == expected, "pair " + std::to_string(i) + ": " + fmt(got) + " vs " + fmt(expected));
    check.expect(got >= 0.0 && got <= 1.0, "out of bounds at pair " + std::to_string(i));
    if (correct_subsequence(ImageSequence(a), ImageSequence(b)).size() <= 1) ++low_overlap;
  }
  const double elapsed = seconds_since(t0);
  check.expect(low_overlap > 0, "o <= 1 branch never exercised");
  check.expect(elapsed < kKendallBudgetSeconds, "runtime " + fmt(elapsed) + "s");
  return check;
}

Check rouge_fixtures() {
  struct Fixture {
    const char* candidate;
    const char* reference;
    std::size_t cand_tokens;
    std::size_t ref_tokens;
    std::size_t overlap;  // clipped unigram matches, counted by hand
  };
  static const Fixture kFixtures[] = {
      {"the cat sat", "the cat sat on the mat", 3, 6, 3},
      {"北京大学", "北京大学", 4, 4, 4},
      {"北京大学", "南京大学", 4, 4, 3},
      {"GPU-accelerated 训练", "gpu 训练 fast", 4, 4, 3},
      {"a a a", "a b", 3, 2, 1},
      {"the the the the", "the cat the", 4, 3, 2},
      {"Hello, World!", "hello world", 2, 2, 2},
      {"", "x", 0, 1, 0},
      {"東京タワー", "京都タワー", 5, 5, 4},
      {"猫在垫子上", "猫坐在垫子上", 5, 6, 5},
      {"深度学习 deep learning", "deep 学习 models", 6, 4, 3},
      {"one two three", "four five six", 3, 3, 0},
      {"Fold the shirt. Then fold again.", "fold the shirt twice", 6, 4, 3},
      {"iPhone 15 发布会", "iphone 发布", 5, 3, 3},
      {"数据-驱动 (data-driven)", "data driven 数据", 6, 4, 4},
      {"A B C D E", "e d c b a", 5, 5, 5},
      {"repeat repeat", "repeat repeat repeat", 2, 3, 2},
      {"你好，世界！", "世界你好", 4, 4, 4},
      {"cats' toys", "cat toys", 2, 2, 1},
      {"3.14 is pi", "pi is 3 14", 4, 4, 4},
  };
  Check check;
  int index = 0;
  for (const auto& f : kFixtures) {
    ++index;
    const auto c = tokenize(f.candidate, SourceKind::kCandidate);
    const auto r = tokenize(f.reference, SourceKind::kReference);
    const std::string tag = "fixture " + std::to_string(index);
    check.expect(c.tokens.size() == f.cand_tokens && r.tokens.size() == f.ref_tokens, tag + " token counts");
    double p = 0, rec = 0, f1 = 0;
    if (f.cand_tokens && f.ref_tokens) {
      p = static_cast<double>(f.overlap) / static_cast<double>(f.cand_tokens);
      rec = static_cast<double>(f.overlap) / static_cast<double>(f.ref_tokens);
      f1 = p + rec == 0 ? 0.0 : 2 * p * rec / (p + rec);
    }
    const auto got = rouge(c, r, RougeVariant::kRouge1);
    const auto o = oracle::unigram_prf(c.tokens, r.tokens);
    check.expect(std::abs(got.precision - p) <= kRougeTolerance && std::abs(got.recall - rec) <= kRougeTolerance &&
                     std::abs(got.f1 - f1) <= kRougeTolerance,
                 tag + " hand values");
    check.expect(std::abs(got.precision - o.p) <= kRougeTolerance && std::abs(got.recall - o.r) <= kRougeTolerance &&
                     std::abs(got.f1 - o.f) <= kRougeTolerance,
                 tag + " oracle values");
  }

  std::mt19937 rng(77);
  const std::vector<std::string> vocab{"a", "b", "the", "猫", "学", "タ", "x1", "z"};
  for (int i = 0; i < kRougeIdentityLists; ++i) {
    TokenSequence t;
    const auto n = 1 + rng() % 12;
    for (std::size_t k = 0; k < n; ++k) t.tokens.push_back(vocab[rng() % vocab.size()]);
    for (auto v : {RougeVariant::kRouge1, RougeVariant::kRouge2, RougeVariant::kRougeL}) {
      check.expect(std::abs(rouge(t, t, v).f1 - 1.0) <= kRougeTolerance, "identity list " + std::to_string(i));
    }
  }
  return check;
}

Check parser_suite() {
  Check check;
  std::mt19937 rng(4242);
  const std::vector<std::string> prose{"Fold the sleeves", " 然后对折。", "\n\n## Step two\n", " press flat",
                                       "| col | col |\n", "see below:", " 東京タワー "};

  // Well-formed answers built from known parts: the parser must recover them exactly.
  std::vector<std::string> well_formed;
  for (int i = 0; i < kWellFormedAnswers; ++i) {
    const std::size_t n = 2 + rng() % 8;
    std::string md;
    Ids expected;
    std::vector<std::string> alts, segments{""};
    const int refs = static_cast<int>(rng() % 6);
    for (int k = 0; k < refs; ++k) {
      segments.back() += prose[rng() % prose.size()];
      if (rng() % 3 == 0) segments.back() += "<sup>[1](DOC#1)</sup>";
      const auto idx = static_cast<std::int64_t>(1 + rng() % n);
      const std::string alt = "alt " + std::to_string(k);
      const std::string pad(rng() % 3, ' ');
      md += segments.back() + "![" + alt + "](" + pad + "IMG#" + std::to_string(idx) + pad + ")";
      expected.push_back(idx);
      alts.push_back(alt);
      segments.emplace_back();
    }
    segments.back() += prose[rng() % prose.size()];
    md += segments.back();

    const auto p = parse_answer(md, n);
    const std::string tag = "well-formed " + std::to_string(i);
    check.expect(!p.flags.invalid_format, tag + " flagged invalid");
    check.expect(p.flags.hallucinated_indices.empty(), tag + " flagged hallucination");
    check.expect(extract_image_indices(p, false) == expected, tag + " indices");
    check.expect(p.text_segments == segments, tag + " segments");
    bool alts_ok = p.image_refs.size() == alts.size();
    for (std::size_t k = 0; alts_ok && k < alts.size(); ++k) alts_ok = p.image_refs[k].alt_text == alts[k];
    check.expect(alts_ok, tag + " alt text");
    UrlMap identity;
    for (std::size_t k = 1; k <= n; ++k) identity[static_cast<std::int64_t>(k)] = "IMG#" + std::to_string(k);
    check.expect(render_with_urls(p, identity) == md, tag + " round trip");
    well_formed.push_back(md);
  }

  struct Hallucination {
    const char* answer;
    std::size_t image_count;
    Ids expected;
  };
  static const Hallucination kHallucinations[] = {
      {"Step one ![a](IMG#1) step two ![b](IMG#15)", 13, {15}},
      {"![a](IMG#14)", 13, {14}},
      {"![a](IMG#13)", 13, {}},
      {"![a](IMG#0) ![b](IMG#2)", 2, {0}},
      {"![a](IMG#7) ![b](IMG#3) ![c](IMG#7) ![d](IMG#9)", 3, {7, 9}},
      {"no images at all", 5, {}},
  };
  for (const auto& h : kHallucinations) {
    const auto p = parse_answer(h.answer, h.image_count);
    check.expect(p.flags.hallucinated_indices == h.expected, std::string("hallucination fixture '") + h.answer + "'");
    check.expect(!p.flags.invalid_format, std::string("hallucination fixture invalid '") + h.answer + "'");
  }

  static const char* kMalformed[] = {
      "Fold here ![a](IMG#1",
      "Fold here IMG#1 then",
      "![a](IMG#)",
      "![a](IMG#x)",
      "![a(IMG#1)",
      "![a]\n(IMG#1)",
      "![a](image IMG#2)",
      "[a](IMG#1)",
      "![a](IMG#1 IMG#2)",
      "![multi\nline](IMG#1)",
      "![a](IMG#1] and more",
      "![a](IMG#1)IMG#2",
      "see (IMG#3)",
      "![a](IMG#2) fine then ![b](IMG#3",
      "<sup>[1](DOC#1)</sup> IMG#4",
  };
  for (const char* bad : kMalformed) {
    check.expect(parse_answer(bad, 4).flags.invalid_format, std::string("malformed not flagged '") + bad + "'");
  }
  for (const auto& md : well_formed) check.expect(!parse_answer(md, 9).flags.invalid_format, "false positive");
  return check;
}

Check consistency_offline() {
  Check check;
  const auto near = [](double a, double b) { return std::abs(a - b) <= kMetricTolerance; };

  MockProvider identical({{"shared context", {0.6, 0.8}}}, {});
  const std::vector<ImageContext> same{{1, "shared ", "context"}};
  const double identical_score = alignment_score(same, same, correct_subsequence({1}, {1}), identical);
  check.expect(near(identical_score, 100.0), "identical contexts " + fmt(identical_score));

  MockProvider orthogonal({{"gen", {1, 0}}, {"truth", {0, 1}}}, {});
  const double orthogonal_score =
      alignment_score({{1, "gen", ""}}, {{1, "truth", ""}}, correct_subsequence({1}, {1}), orthogonal);
  check.expect(near(orthogonal_score, 0.0), "orthogonal contexts " + fmt(orthogonal_score));

  MockProvider empty({}, {});
  const double no_overlap = alignment_score({{1, "a", ""}}, {{2, "b", ""}}, correct_subsequence({1}, {2}), empty);
  check.expect(near(no_overlap, 0.0), "o = 0 " + fmt(no_overlap));

  const double half = std::sqrt(3.0) / 2.0;
  MockProvider two({{"g1", {1, 0}}, {"t1", {1, 0}}, {"g2", {1, 0}}, {"t2", {0.5, half}}}, {});
  const double two_score = alignment_score({{1, "g1", ""}, {2, "g2", ""}}, {{1, "t1", ""}, {2, "t2", ""}},
                                           correct_subsequence({1, 2}, {1, 2}), two);
  check.expect(near(two_score, 75.0), "two-image fixture " + fmt(two_score));

  const auto parsed = parse_answer("a ![x](IMG#1) b", 1);
  MockProvider clip({}, {{{"loc1", "x a  b"}, 0.36}});
  const double clip36 =
      clip_score(parsed, extract_contexts(parsed, kDefaultContextWindow), {{1, {1, "loc1", std::nullopt}}}, clip);
  check.expect(near(clip36, 36.0), "clip fixture " + fmt(clip36));
  return check;
}

Check correlation_closed_form() {
  using V = std::vector<double>;
  Check check;
  const auto near = [](double a, double b) { return std::abs(a - b) <= kCorrelationTolerance; };
  check.expect(near(pearson(V{1, 2, 3}, V{1, 2, 3}), 1.0), "pearson identity");
  check.expect(near(pearson(V{1, 2, 3}, V{3, 2, 1}), -1.0), "pearson reversal");
  check.expect(near(pearson(V{1, 2, 3, 4, 5}, V{2, 1, 4, 3, 5}), 0.8), "pearson 0.8 fixture");
  check.expect(near(spearman(V{1, 2, 3}, V{1, 4, 9}), 1.0), "spearman monotone");
  check.expect(near(spearman(V{1, 2, 3}, V{9, 4, 1}), -1.0), "spearman reversal");
  // Hand-ranked tie case: ranks [1, 2.5, 2.5, 4] vs [1, 2, 3, 4] gives 4.5 / sqrt(4.5 * 5) = 3 / sqrt(10).
  const double tie = spearman(V{1, 2, 2, 3}, V{1, 2, 3, 4});
  check.expect(near(tie, 3.0 / std::sqrt(10.0)), "spearman tie " + fmt(tie, 6));
  check.expect(near(tie, oracle::closed_form_pearson({1, 2.5, 2.5, 4}, {1, 2, 3, 4})), "spearman tie oracle");
  return check;
}

Check reward_checks() {
  Check check;
  const auto sample = testing::make_sample("r", "how to fold", {2, 2},
                                           "Lay flat ![a](IMG#1) fold sleeves ![b](IMG#3) fold in half ![c](IMG#4)");
  const auto mock = testing::identity_fixture({{sample, sample.ground_truth}});
  const RewardConfig uniform;
  const double gt = compute_reward(sample, sample.ground_truth, mock, uniform);
  check.expect(gt == 1.0, "ground truth reward " + fmt(gt));
  const double invalid = compute_reward(sample, "Lay flat ![a](IMG#1 fold", mock, uniform);
  check.expect(invalid == 0.0, "gated reward " + fmt(invalid));

  SampleReport fixed;
  fixed.scores = {100, 50, 50, 0, 0, five_metric_mean(100, 50, 50, 0, 0)};
  const double weighted = reward_from_report(fixed, uniform);
  check.expect(std::abs(weighted - 0.4) <= 1e-12, "weighted fixture " + fmt(weighted));

  const std::string partial = "Lay flat ![a](IMG#3) fold in half ![c](IMG#1)";
  const auto partial_mock = testing::identity_fixture({{sample, sample.ground_truth}, {sample, partial}});
  const double first = compute_reward(sample, partial, partial_mock, uniform);
  for (int i = 0; i < 10; ++i) {
    check.expect(compute_reward(sample, partial, partial_mock, uniform) == first, "repeat call differs");
  }
  return check;
}

Check end_to_end_determinism() {
  Check check;
  testing::TempDir dir;
  std::mt19937 rng(99);
  std::vector<EvalSample> corpus;
  std::vector<std::pair<EvalSample, std::string>> cases;
  std::string answers_jsonl;
  const std::vector<std::string> words{"fold", "press", "the", "shirt", "然后", "sleeve", "collar", "flat"};
  auto phrase = [&] {
    std::string s;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 5); i < n; ++i) s += words[rng() % words.size()] + " ";
    return s;
  };
  for (std::size_t i = 0; i < kDeterminismSamples; ++i) {
    std::vector<std::size_t> docs{1 + rng() % 3, 1 + rng() % 3};
    const auto n = static_cast<std::int64_t>(docs[0] + docs[1]);
    std::string gt, answer;
    for (std::int64_t k = 1; k <= n; ++k) gt += phrase() + "![img](IMG#" + std::to_string(k) + ") ";
    gt += phrase();
    for (int k = 0, refs = static_cast<int>(rng() % 5); k < refs; ++k) {
      answer += phrase() + "![pic](IMG#" + std::to_string(1 + rng() % (n + 1)) + ") ";
    }
    answer += phrase();
    auto s = testing::make_sample("sample-" + std::to_string(i), "query " + std::to_string(i), docs, gt);
    cases.push_back({s, answer});
    answers_jsonl += nlohmann::json{{"id", s.id}, {"answer", answer}}.dump() + "\n";
    corpus.push_back(std::move(s));
  }
  const auto mock = testing::identity_fixture(cases, kDefaultContextWindow, [](const std::string& img, const std::string& t) {
    return static_cast<double>(std::hash<std::string>{}(img + "|" + t) % 2001) / 1000.0 - 1.0;
  });
  write_corpus(corpus, dir / "corpus.jsonl");
  write_file(dir / "answers.jsonl", answers_jsonl);
  write_file(dir / "fixture.json", mock.to_json().dump());

  std::vector<std::string> outputs;
  for (const char* workers : {"1", "4", "8"}) {
    for (const char* format : {"json", "csv"}) {
      const auto out = (dir / (std::string("report_") + workers + "." + format)).string();
      std::ostringstream sink;
      const int code = cli::run({"ragig", "evaluate", "--corpus", (dir / "corpus.jsonl").string(), "--answers",
                                 (dir / "answers.jsonl").string(), "--mock-fixture", (dir / "fixture.json").string(),
                                 "--workers", workers, "--format", format, "--out", out},
                                sink, sink);
      check.expect(code == cli::kExitOk, std::string("evaluate exit ") + std::to_string(code) + ": " + sink.str());
      outputs.push_back(code == cli::kExitOk ? read_file(out) : std::string());
    }
  }
  for (std::size_t i = 2; i < outputs.size(); ++i) {
    check.expect(!outputs[i].empty() && outputs[i] == outputs[i % 2], "report bytes differ across worker counts");
  }
  const auto doc = nlohmann::json::parse(outputs[0], nullptr, false);
  check.expect(!doc.is_discarded() && doc["per_sample"].size() == kDeterminismSamples, "report sample count");
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Check (*run)();
  };
  static const Criterion kCriteria[] = {
      {"table mean arithmetic (13 rows, +-0.005, <1s)", table_mean_rows},
      {"edit distance vs exhaustive oracle (len<=4 over {1,2,3}, <10s)", edit_distance_oracle},
      {"kendall vs pair enumeration (1000 random pairs, <5s)", kendall_oracle},
      {"rouge hand-counted fixtures and identity property", rouge_fixtures},
      {"parser round trip, hallucination and malformed corpora", parser_suite},
      {"consistency metrics offline with mock provider", consistency_offline},
      {"correlation closed-form fixtures", correlation_closed_form},
      {"reward identity, gating, weighted sum, determinism", reward_checks},
      {"evaluate byte-identical across workers 1/4/8", end_to_end_determinism},
  };
  int failures = 0;
  int number = 0;
  for (const auto& c : kCriteria) {
    ++number;
    Check result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.expect(false, std::string("threw: ") + e.what());
    }
    std::cout << (result.ok() ? "PASS" : "FAIL") << " [" << number << "] " << c.name;
    if (!result.ok()) std::cout << " -- " << result.notes();
    std::cout << "\n";
    failures += result.ok() ? 0 : 1;
  }
  std::cout << static_cast<int>(std::size(kCriteria)) - failures << "/" << std::size(kCriteria)
            << " criteria passed\n";
  return failures;
}
