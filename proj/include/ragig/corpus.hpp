#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragig {

/// Query taxonomy used by the answer-generation prompt.
enum class Category { kWhatIs, kHowTo, kYesOrNo, kHeadToHead };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

struct ImageAsset {
  std::int64_t index = 0;  // 1-based, global within a sample
  std::string locator;
  std::optional<std::int64_t> width_px;

  bool operator==(const ImageAsset&) const = default;
};

struct RetrievedDocument {
  std::int64_t doc_index = 0;
  std::string text;
  std::vector<ImageAsset> images;

  bool operator==(const RetrievedDocument&) const = default;
};

inline constexpr std::size_t kMaxDocumentsPerSample = 3;

struct EvalSample {
  std::string id;
  std::string query;
  std::vector<RetrievedDocument> documents;
  std::string ground_truth;
  std::optional<Category> category;

  /// Total number of retrieved images N across all documents.
  std::size_t image_count() const;

  /// All assets in global order (document order, then within-document order).
  std::vector<ImageAsset> assets() const;

  bool operator==(const EvalSample&) const = default;
};

struct Violation {
  std::string invariant;
  std::string detail;
};

/// Checks every EvalSample invariant. Violations are data: the result is
/// empty iff the sample is valid.
std::vector<Violation> validate_sample(const EvalSample& sample);

/// Loads a JSONL corpus. Blank lines are skipped.
/// Throws IOFailure, SchemaError (with line number) or InvariantError.
std::vector<EvalSample> load_corpus(const std::filesystem::path& path);

/// Parses a corpus from an in-memory JSONL buffer.
std::vector<EvalSample> parse_corpus(std::string_view jsonl);

/// Canonical JSONL serialization; load_corpus(write) is the identity.
std::string serialize_corpus(const std::vector<EvalSample>& samples);
void write_corpus(const std::vector<EvalSample>& samples, const std::filesystem::path& path);

/// Prompt template with `{{query}}` and a `{{#docs}}...{{/docs}}` block that
/// holds `{{doc_text}}` and `{{doc_images}}`.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string body) : body_(std::move(body)) {}

  static PromptTemplate from_file(const std::filesystem::path& path);

  /// The answer-aggregation template shipped in data/prompt_template.txt.
  static PromptTemplate builtin();

  const std::string& body() const noexcept { return body_; }

 private:
  std::string body_;
};

/// Renders the generation prompt for one sample. Throws TemplateError when
/// a slot kind is missing from the template or a marker is left unresolved.
std::string build_prompt(const EvalSample& sample, const PromptTemplate& tmpl);

}  // namespace ragig
