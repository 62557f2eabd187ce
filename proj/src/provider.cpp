#include "ragig/provider.hpp"

#include <algorithm>
#include <cmath>

#include "ragig/errors.hpp"
#include "ragig/text_util.hpp"

namespace ragig {

using json = nlohmann::json;

namespace {

// Tolerance for backends that return 1.0000001 after normalization.
constexpr double kScoreSlack = 1e-6;

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> components) : components_(std::move(components)) {
  if (std::all_of(components_.begin(), components_.end(), [](double x) { return x == 0.0; })) {
    throw ZeroVector("embedding vector is empty or all-zero");
  }
}

std::vector<EmbeddingVector> embed_texts(const ScoringProvider& provider, std::span<const std::string> texts) {
  if (texts.empty()) throw std::invalid_argument("embed_texts needs at least one text");
  for (const auto& t : texts) {
    if (trim(t).empty()) throw std::invalid_argument("embed_texts received a blank text");
  }
  const auto dim = provider.capabilities().embedding_dim;
  auto raw = provider.embed(texts);
  if (raw.size() != texts.size()) {
    throw ProviderContract("provider returned " + std::to_string(raw.size()) + " vectors for " +
                           std::to_string(texts.size()) + " texts");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (auto& v : raw) {
    if (v.size() != dim) {
      throw ProviderContract("provider returned a vector of dimension " + std::to_string(v.size()) +
                             ", expected " + std::to_string(dim));
    }
    if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) {
      throw ProviderContract("provider returned a non-finite vector component");
    }
    try {
      out.emplace_back(std::move(v));
    } catch (const ZeroVector&) {
      throw ProviderContract("provider returned an all-zero vector");
    }
  }
  return out;
}

std::vector<double> score_pairs(const ScoringProvider& provider, std::span<const ImageTextPair> pairs) {
  if (pairs.empty()) return {};
  if (!provider.capabilities().supports_image_text) {
    throw ProviderContract("provider does not support image-text scoring");
  }
  auto scores = provider.score_image_text(pairs);
  if (scores.size() != pairs.size()) {
    throw ProviderContract("provider returned " + std::to_string(scores.size()) + " scores for " +
                           std::to_string(pairs.size()) + " pairs");
  }
  for (double& s : scores) {
    if (!std::isfinite(s) || s < -1.0 - kScoreSlack || s > 1.0 + kScoreSlack) {
      throw ProviderContract("provider score " + std::to_string(s) + " outside [-1, 1]");
    }
    s = std::clamp(s, -1.0, 1.0);
  }
  return scores;
}

MockProvider::MockProvider(std::map<std::string, std::vector<double>> text_vectors,
                           std::map<std::pair<std::string, std::string>, double> pair_scores,
                           std::size_t max_text_len)
    : text_vectors_(std::move(text_vectors)), pair_scores_(std::move(pair_scores)), max_text_len_(max_text_len) {
  if (!text_vectors_.empty()) {
    dim_ = text_vectors_.begin()->second.size();
    for (const auto& [text, vec] : text_vectors_) {
      if (vec.size() != dim_) throw DataError("fixture vector for '" + text + "' has inconsistent dimension");
      if (dim_ == 0) throw DataError("fixture vectors must be non-empty");
    }
  }
  if (max_text_len_ == 0) throw DataError("fixture max_text_len must be positive");
}

MockProvider MockProvider::from_json(const json& fixture) {
  if (!fixture.is_object()) throw DataError("mock fixture must be a JSON object");
  std::map<std::string, std::vector<double>> vectors;
  std::map<std::pair<std::string, std::string>, double> scores;
  std::size_t max_len = kDefaultMaxTextLen;
  try {
    if (auto tv = fixture.find("text_vectors"); tv != fixture.end()) {
      for (const auto& [text, vec] : tv->items()) vectors.emplace(text, vec.get<std::vector<double>>());
    }
    if (auto ps = fixture.find("pair_scores"); ps != fixture.end()) {
      for (const auto& entry : *ps) {
        scores[{entry.at("image").get<std::string>(), entry.at("text").get<std::string>()}] =
            entry.at("score").get<double>();
      }
    }
    if (auto ml = fixture.find("max_text_len"); ml != fixture.end()) max_len = ml->get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed mock fixture: ") + e.what());
  }
  return MockProvider(std::move(vectors), std::move(scores), max_len);
}

MockProvider MockProvider::from_file(const std::filesystem::path& path) {
  auto doc = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw DataError("mock fixture '" + path.string() + "' is not valid JSON");
  return from_json(doc);
}

json MockProvider::to_json() const {
  json vectors = json::object();
  for (const auto& [text, vec] : text_vectors_) vectors[text] = vec;
  json pairs = json::array();
  for (const auto& [key, score] : pair_scores_) {
    pairs.push_back({{"image", key.first}, {"text", key.second}, {"score", score}});
  }
  return {{"text_vectors", std::move(vectors)}, {"pair_scores", std::move(pairs)}, {"max_text_len", max_text_len_}};
}

ProviderCapabilities MockProvider::capabilities() const { return {dim_, max_text_len_, true}; }

std::vector<std::vector<double>> MockProvider::embed(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = text_vectors_.find(t);
    if (it == text_vectors_.end()) throw ProviderContract("mock fixture has no vector for text '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> MockProvider::score_image_text(std::span<const ImageTextPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto it = pair_scores_.find({p.image, p.text});
    if (it == pair_scores_.end()) {
      throw ProviderContract("mock fixture has no score for image '" + p.image + "' and text '" + p.text + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace ragig
