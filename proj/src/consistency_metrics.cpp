#include "ragig/consistency_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ragig/errors.hpp"
#include "ragig/text_util.hpp"

namespace ragig {

namespace {

const ImageContext* find_context(const std::vector<ImageContext>& contexts, std::int64_t index) {
  auto it = std::find_if(contexts.begin(), contexts.end(), [&](const ImageContext& c) { return c.image_index == index; });
  return it == contexts.end() ? nullptr : &*it;
}

double mean(const std::vector<std::pair<std::int64_t, double>>& sims) {
  if (sims.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [_, s] : sims) total += similarity_to_score(s);
  return total / static_cast<double>(sims.size());
}

}  // namespace

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("cannot compare vectors of dimension " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  const auto& x = a.components();
  const auto& y = b.components();
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    na += x[i] * x[i];
    nb += y[i] * y[i];
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double similarity_to_score(double sim) noexcept { return 100.0 * std::max(0.0, sim); }

AlignmentDetail alignment_detail(const std::vector<ImageContext>& gen_contexts,
                                 const std::vector<ImageContext>& gt_contexts, const CorrectSubsequence& correct,
                                 const ScoringProvider& provider) {
  AlignmentDetail out;
  if (correct.size() == 0) return out;

  struct Job {
    std::int64_t index;
    std::string gen;
    std::string gt;
    std::optional<double> fixed;  // decided without the provider
  };
  std::vector<Job> jobs;
  std::vector<std::string> texts;
  for (auto k : correct.indices) {
    const auto* gen = find_context(gen_contexts, k);
    const auto* gt = find_context(gt_contexts, k);
    if (!gen || !gt) throw MissingContext("no context for IMG#" + std::to_string(k));
    Job job{k, gen->before_text + gen->after_text, gt->before_text + gt->after_text, std::nullopt};
    const bool gen_blank = trim(job.gen).empty();
    const bool gt_blank = trim(job.gt).empty();
    if (gen_blank || gt_blank) {
      // Blank text has no embedding: matching blank contexts agree fully.
      job.fixed = gen_blank && gt_blank ? 1.0 : 0.0;
    } else {
      texts.push_back(job.gen);
      texts.push_back(job.gt);
    }
    jobs.push_back(std::move(job));
  }

  std::vector<EmbeddingVector> vectors;
  if (!texts.empty()) vectors = embed_texts(provider, texts);

  std::size_t v = 0;
  for (const auto& job : jobs) {
    double sim;
    if (job.fixed) {
      sim = *job.fixed;
    } else {
      sim = cosine_similarity(vectors[v], vectors[v + 1]);
      v += 2;
    }
    out.similarities.emplace_back(job.index, sim);
  }
  out.score = mean(out.similarities);
  return out;
}

double alignment_score(const std::vector<ImageContext>& gen_contexts, const std::vector<ImageContext>& gt_contexts,
                       const CorrectSubsequence& correct, const ScoringProvider& provider) {
  return alignment_detail(gen_contexts, gt_contexts, correct, provider).score;
}

std::string clip_pair_text(const std::string& alt_text, const ImageContext& ctx, std::size_t max_text_len) {
  std::string text(trim(alt_text));
  const std::string local(trim(ctx.before_text + ctx.after_text));
  if (!text.empty() && !local.empty()) text += ' ';
  text += local;
  return utf8_head(text, max_text_len);
}

ClipDetail clip_detail(const ParsedAnswer& parsed, const std::vector<ImageContext>& contexts,
                       const std::map<std::int64_t, ImageAsset>& assets, const ScoringProvider& provider) {
  ClipDetail out;
  std::vector<std::int64_t> order;
  std::vector<ImageTextPair> pairs;
  std::vector<std::int64_t> blank;
  std::unordered_set<std::int64_t> seen;
  std::optional<std::size_t> max_len;

  for (const auto& ref : parsed.image_refs) {
    if (!parsed.in_range(ref.index) || !seen.insert(ref.index).second) continue;
    auto asset = assets.find(ref.index);
    if (asset == assets.end()) throw MissingAsset("no asset for IMG#" + std::to_string(ref.index));
    const auto* ctx = find_context(contexts, ref.index);
    if (!ctx) throw MissingContext("no context for IMG#" + std::to_string(ref.index));
    if (!max_len) max_len = provider.capabilities().max_text_len;

    order.push_back(ref.index);
    auto text = clip_pair_text(ref.alt_text, *ctx, *max_len);
    if (text.empty()) {
      blank.push_back(ref.index);
    } else {
      pairs.push_back({asset->second.locator, std::move(text)});
    }
  }
  if (order.empty()) return out;

  const auto scores = score_pairs(provider, pairs);
  std::size_t s = 0;
  for (auto k : order) {
    // An image with no surrounding text at all has nothing to agree with.
    const bool is_blank = std::find(blank.begin(), blank.end(), k) != blank.end();
    out.similarities.emplace_back(k, is_blank ? 0.0 : scores[s++]);
  }
  out.score = mean(out.similarities);
  return out;
}

double clip_score(const ParsedAnswer& parsed, const std::vector<ImageContext>& contexts,
                  const std::map<std::int64_t, ImageAsset>& assets, const ScoringProvider& provider) {
  return clip_detail(parsed, contexts, assets, provider).score;
}

}  // namespace ragig
