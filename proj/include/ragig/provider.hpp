#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ragig {

struct ProviderCapabilities {
  std::size_t embedding_dim = 0;
  std::size_t max_text_len = 0;  // code points
  bool supports_image_text = false;
};

struct ImageTextPair {
  std::string image;  // asset locator or base64 payload
  std::string text;
};

/// Fixed-length, not-all-zero embedding.
class EmbeddingVector {
 public:
  /// Throws ZeroVector for an all-zero or empty input.
  explicit EmbeddingVector(std::vector<double> components);

  const std::vector<double>& components() const noexcept { return components_; }
  std::size_t dim() const noexcept { return components_.size(); }

 private:
  std::vector<double> components_;
};

/// Backend for text embeddings and image-text similarity. Implementations
/// must tolerate concurrent calls.
class ScoringProvider {
 public:
  virtual ~ScoringProvider() = default;

  virtual ProviderCapabilities capabilities() const = 0;
  /// One raw vector per text. Validation happens in embed_texts().
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) const = 0;
  virtual std::vector<double> score_image_text(std::span<const ImageTextPair> pairs) const = 0;
};

/// Calls the provider and enforces the wire contract: one vector per text,
/// each of capabilities().embedding_dim components. Texts must be non-blank.
std::vector<EmbeddingVector> embed_texts(const ScoringProvider& provider, std::span<const std::string> texts);

/// Calls the provider and enforces one score per pair, each within [-1, 1].
std::vector<double> score_pairs(const ScoringProvider& provider, std::span<const ImageTextPair> pairs);

/// Deterministic offline provider backed by a fixture table. Unknown texts
/// or pairs raise ProviderContract.
///
/// Fixture JSON: {"text_vectors": {text: [real...]},
///                "pair_scores": [{"image": str, "text": str, "score": real}],
///                "max_text_len": int (optional)}
class MockProvider final : public ScoringProvider {
 public:
  static constexpr std::size_t kDefaultMaxTextLen = 4096;

  MockProvider(std::map<std::string, std::vector<double>> text_vectors,
               std::map<std::pair<std::string, std::string>, double> pair_scores,
               std::size_t max_text_len = kDefaultMaxTextLen);

  /// Throws DataError on a malformed fixture.
  static MockProvider from_json(const nlohmann::json& fixture);
  static MockProvider from_file(const std::filesystem::path& path);

  nlohmann::json to_json() const;

  ProviderCapabilities capabilities() const override;
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) const override;
  std::vector<double> score_image_text(std::span<const ImageTextPair> pairs) const override;

 private:
  std::map<std::string, std::vector<double>> text_vectors_;
  std::map<std::pair<std::string, std::string>, double> pair_scores_;
  std::size_t dim_ = 1;
  std::size_t max_text_len_;
};

struct HttpProviderOptions {
  std::size_t max_batch = 32;
  std::ptrdiff_t max_in_flight = 4;
  int timeout_seconds = 60;
};

/// Client for the JSON wire protocol served at `endpoint`
/// (POST /capabilities, /embed_texts, /score_image_text).
class HttpProvider final : public ScoringProvider {
 public:
  explicit HttpProvider(std::string endpoint, HttpProviderOptions options = {});
  ~HttpProvider() override;

  ProviderCapabilities capabilities() const override;
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) const override;
  std::vector<double> score_image_text(std::span<const ImageTextPair> pairs) const override;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  std::string endpoint_;
  HttpProviderOptions options_;
  mutable std::counting_semaphore<> in_flight_;
  mutable std::mutex caps_mutex_;
  mutable std::optional<ProviderCapabilities> caps_;
};

/// Environment variable consulted when no endpoint is given on the command line.
inline constexpr const char* kProviderEndpointEnv = "RAGIG_PROVIDER_ENDPOINT";

}  // namespace ragig
