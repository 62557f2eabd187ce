#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragig {

enum class SourceKind { kCandidate, kReference };

struct TokenSequence {
  std::vector<std::string> tokens;
  SourceKind source_kind = SourceKind::kCandidate;
};

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

enum class RougeVariant { kRouge1, kRouge2, kRougeL };

/// Lowercases Latin letters, splits on whitespace and punctuation, and emits
/// every CJK code point as its own token. Markdown must be stripped first.
TokenSequence tokenize(std::string_view text, SourceKind kind = SourceKind::kCandidate);

RougeScore rouge(const TokenSequence& candidate, const TokenSequence& reference,
                 RougeVariant variant = RougeVariant::kRouge1);

}  // namespace ragig
