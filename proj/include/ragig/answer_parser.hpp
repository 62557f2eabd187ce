#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragig/corpus.hpp"
#include "ragig/sequence_metrics.hpp"

namespace ragig {

/// Half-open byte range [begin, end) into the source markdown.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const ByteSpan&) const = default;
};

/// One well-formed `![alt](IMG#k)` placeholder.
struct ImageReference {
  std::int64_t index = 0;
  std::string alt_text;
  ByteSpan char_span;    // whole placeholder
  ByteSpan target_span;  // the `IMG#k` token only
};

struct FailureFlags {
  bool invalid_format = false;
  /// Distinct out-of-range indices, first-occurrence order.
  std::vector<std::int64_t> hallucinated_indices;

  bool operator==(const FailureFlags&) const = default;
};

struct ParsedAnswer {
  std::string source;
  std::size_t image_count = 0;
  std::vector<ImageReference> image_refs;
  /// Raw source text between placeholders; always image_refs.size() + 1 entries.
  std::vector<std::string> text_segments;
  /// DOC# numbers of `<sup>[n](DOC#n)</sup>` citations, document order.
  std::vector<std::int64_t> citations;
  FailureFlags flags;

  bool in_range(std::int64_t index) const noexcept {
    return index >= 1 && static_cast<std::size_t>(index) <= image_count;
  }
};

struct ImageContext {
  std::int64_t image_index = 0;
  std::string before_text;
  std::string after_text;

  bool operator==(const ImageContext&) const = default;
};

inline constexpr std::size_t kDefaultContextWindow = 500;

/// Total: every defect is reported through `flags`, nothing throws.
ParsedAnswer parse_answer(std::string_view markdown, std::size_t image_count);

/// In-range indices in document order. With `dedupe`, keeps first occurrences
/// only; without, the result may repeat indices and is returned as a raw list.
std::vector<std::int64_t> extract_image_indices(const ParsedAnswer& parsed, bool dedupe);

/// Deduplicated (keep-first) sequence of in-range indices.
ImageSequence extract_image_sequence(const ParsedAnswer& parsed);

/// One context per in-range reference (duplicates included), window measured
/// in code points. Citation markup is stripped before windowing.
std::vector<ImageContext> extract_contexts(const ParsedAnswer& parsed, std::size_t window_cap = kDefaultContextWindow);

/// Removes `<sup>[n](DOC#n)</sup>` citations.
std::string strip_citations(std::string_view text);

/// Prose used for text metrics: placeholders, stray IMG# tokens, citations,
/// heading markers and table pipes removed.
std::string strip_markdown(const ParsedAnswer& parsed);

struct AnswerEnvelope {
  std::string reason;
  std::optional<Category> category;
  std::string answer;
};

/// Accepts either the JSON output envelope (optionally inside a ```json fence)
/// or bare markdown, which passes through as the answer. Throws EnvelopeError
/// when an envelope carries a category outside the taxonomy.
AnswerEnvelope extract_answer_envelope(std::string_view raw);

using UrlMap = std::map<std::int64_t, std::string>;

/// Replaces each in-range `IMG#k` target with url_map[k] and deletes
/// hallucinated placeholders. Throws MissingUrl.
std::string render_with_urls(const ParsedAnswer& parsed, const UrlMap& url_map);

}  // namespace ragig
