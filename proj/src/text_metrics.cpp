#include "ragig/text_metrics.hpp"

#include <algorithm>
#include <map>

#include "ragig/text_util.hpp"

namespace ragig {

namespace {

enum class CharClass { kSeparator, kIdeograph, kWord };

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

CharClass classify(char32_t c) {
  if (c < 0x80) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return CharClass::kWord;
    return CharClass::kSeparator;
  }
  // Han, kana, hangul syllables: one token per code point.
  if (in(c, 0x4E00, 0x9FFF) || in(c, 0x3400, 0x4DBF) || in(c, 0x20000, 0x2FA1F) || in(c, 0xF900, 0xFAFF) ||
      in(c, 0x3040, 0x30FF) || in(c, 0x31F0, 0x31FF) || in(c, 0xAC00, 0xD7AF)) {
    return CharClass::kIdeograph;
  }
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return CharClass::kWord;
  if (in(c, 0x80, 0xBF) || c == 0xD7 || c == 0xF7) return CharClass::kSeparator;
  if (c == 0x1680 || in(c, 0x2000, 0x206F) || in(c, 0x2190, 0x2BFF) || in(c, 0x3000, 0x303F) ||
      in(c, 0xFE10, 0xFE1F) || in(c, 0xFE30, 0xFE4F) || c == 0xFEFF || in(c, 0xFF01, 0xFF0F) ||
      in(c, 0xFF1A, 0xFF20) || in(c, 0xFF3B, 0xFF40) || in(c, 0xFF5B, 0xFF65) || c == 0xFFFD ||
      in(c, 0x1F000, 0x1FAFF)) {
    return CharClass::kSeparator;
  }
  return CharClass::kWord;
}

char32_t to_lower_latin(char32_t c) {
  if (in(c, 'A', 'Z')) return c + 0x20;
  if (in(c, 0xC0, 0xDE) && c != 0xD7) return c + 0x20;
  if (in(c, 0xFF21, 0xFF3A)) return c + 0x20;  // fullwidth
  if (in(c, 0x100, 0x137) || in(c, 0x14A, 0x177)) return c | 1;
  if ((in(c, 0x139, 0x148) || in(c, 0x179, 0x17E)) && (c & 1)) return c + 1;
  if (c == 0x178) return 0xFF;
  return c;
}

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Gram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

RougeScore from_counts(double overlap, double candidate_total, double reference_total) {
  RougeScore s;
  if (candidate_total == 0 || reference_total == 0) return s;
  s.precision = overlap / candidate_total;
  s.recall = overlap / reference_total;
  if (s.precision + s.recall > 0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

}  // namespace

TokenSequence tokenize(std::string_view text, SourceKind kind) {
  TokenSequence out;
  out.source_kind = kind;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.tokens.push_back(std::move(current));
    current.clear();
  };
  for (char32_t c : decode_utf8(text)) {
    switch (classify(c)) {
      case CharClass::kSeparator:
        flush();
        break;
      case CharClass::kIdeograph: {
        flush();
        std::string single;
        append_utf8(single, c);
        out.tokens.push_back(std::move(single));
        break;
      }
      case CharClass::kWord:
        append_utf8(current, to_lower_latin(c));
        break;
    }
  }
  flush();
  return out;
}

RougeScore rouge(const TokenSequence& candidate, const TokenSequence& reference, RougeVariant variant) {
  const auto& c = candidate.tokens;
  const auto& r = reference.tokens;
  if (c.empty() || r.empty()) return {};

  if (variant == RougeVariant::kRougeL) {
    return from_counts(static_cast<double>(lcs_length(c, r)), static_cast<double>(c.size()),
                       static_cast<double>(r.size()));
  }

  const std::size_t n = variant == RougeVariant::kRouge1 ? 1 : 2;
  if (c.size() < n && r.size() < n) {
    // Both too short to hold an n-gram: compare as whole sequences.
    const double hit = c == r ? 1.0 : 0.0;
    return from_counts(hit, 1.0, 1.0);
  }

  const auto cand_counts = count_ngrams(c, n);
  const auto ref_counts = count_ngrams(r, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand_counts) {
    if (auto it = ref_counts.find(gram); it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  const auto total = [n](std::size_t len) { return len >= n ? len - n + 1 : 0; };
  return from_counts(static_cast<double>(overlap), static_cast<double>(total(c.size())),
                     static_cast<double>(total(r.size())));
}

}  // namespace ragig
