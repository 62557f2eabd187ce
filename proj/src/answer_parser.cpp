#include "ragig/answer_parser.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"
#include "ragig/errors.hpp"
#include "ragig/text_util.hpp"

namespace ragig {

namespace {

constexpr std::string_view kImgToken = "IMG#";

bool is_inline_space(char c) { return c == ' ' || c == '\t'; }

// Matches `![alt](<sp>IMG#<digits><sp>)` starting at `pos`.
std::optional<ImageReference> match_image_ref(std::string_view s, std::size_t pos) {
  if (s.substr(pos, 2) != "![") return std::nullopt;
  std::size_t i = pos + 2;
  const std::size_t alt_begin = i;
  while (i < s.size() && s[i] != ']' && s[i] != '\n') ++i;
  if (i >= s.size() || s[i] != ']') return std::nullopt;
  const std::size_t alt_end = i;
  if (s.substr(i, 2) != "](") return std::nullopt;
  i += 2;
  while (i < s.size() && is_inline_space(s[i])) ++i;
  if (s.substr(i, kImgToken.size()) != kImgToken) return std::nullopt;
  const std::size_t target_begin = i;
  i += kImgToken.size();
  const std::size_t digits_begin = i;
  while (i < s.size() && is_ascii_digit(s[i])) ++i;
  if (i == digits_begin) return std::nullopt;
  const std::size_t target_end = i;
  while (i < s.size() && is_inline_space(s[i])) ++i;
  if (i >= s.size() || s[i] != ')') return std::nullopt;

  ImageReference ref;
  ref.index = parse_index_saturating(s.substr(digits_begin, target_end - digits_begin));
  ref.alt_text = std::string(s.substr(alt_begin, alt_end - alt_begin));
  ref.char_span = {pos, i + 1};
  ref.target_span = {target_begin, target_end};
  return ref;
}

struct CitationMatch {
  std::size_t end;
  std::int64_t doc;
};

// Matches `<sup>[<digits>](DOC#<digits>)</sup>` starting at `pos`.
std::optional<CitationMatch> match_citation(std::string_view s, std::size_t pos) {
  auto expect = [&](std::size_t& i, std::string_view lit) {
    if (s.substr(i, lit.size()) != lit) return false;
    i += lit.size();
    return true;
  };
  auto digits = [&](std::size_t& i) -> std::optional<std::string_view> {
    const auto b = i;
    while (i < s.size() && is_ascii_digit(s[i])) ++i;
    if (i == b) return std::nullopt;
    return s.substr(b, i - b);
  };
  std::size_t i = pos;
  if (!expect(i, "<sup>[") || !digits(i) || !expect(i, "](DOC#")) return std::nullopt;
  auto doc = digits(i);
  if (!doc || !expect(i, ")</sup>")) return std::nullopt;
  return CitationMatch{i, parse_index_saturating(*doc)};
}

// Drops a run of '#' (plus following blanks) at the start of every line.
std::string strip_heading_markers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool line_start = true;
  std::size_t i = 0;
  while (i < text.size()) {
    if (line_start) {
      std::size_t j = i;
      while (j < text.size() && is_inline_space(text[j])) ++j;
      std::size_t k = j;
      while (k < text.size() && text[k] == '#') ++k;
      if (k > j && (k == text.size() || is_inline_space(text[k]) || text[k] == '\n')) {
        out.append(text.substr(i, j - i));
        i = k;
      }
      line_start = false;
      continue;
    }
    out += text[i];
    if (text[i] == '\n') line_start = true;
    ++i;
  }
  return out;
}

}  // namespace

ParsedAnswer parse_answer(std::string_view markdown, std::size_t image_count) {
  ParsedAnswer p;
  p.source = std::string(markdown);
  p.image_count = image_count;

  std::size_t pos = 0;
  while ((pos = markdown.find("![", pos)) != std::string_view::npos) {
    if (auto ref = match_image_ref(markdown, pos)) {
      pos = ref->char_span.end;
      p.image_refs.push_back(std::move(*ref));
    } else {
      ++pos;
    }
  }

  std::size_t prev = 0;
  for (const auto& ref : p.image_refs) {
    p.text_segments.emplace_back(markdown.substr(prev, ref.char_span.begin - prev));
    prev = ref.char_span.end;
  }
  p.text_segments.emplace_back(markdown.substr(prev));

  // Any IMG# token not serving as a placeholder target breaks the format.
  std::size_t next_ref = 0;
  for (std::size_t t = markdown.find(kImgToken); t != std::string_view::npos; t = markdown.find(kImgToken, t + 1)) {
    while (next_ref < p.image_refs.size() && p.image_refs[next_ref].target_span.begin < t) ++next_ref;
    const bool is_target = next_ref < p.image_refs.size() && p.image_refs[next_ref].target_span.begin == t;
    if (!is_target) {
      p.flags.invalid_format = true;
      break;
    }
  }

  std::unordered_set<std::int64_t> seen_bad;
  for (const auto& ref : p.image_refs) {
    if (!p.in_range(ref.index) && seen_bad.insert(ref.index).second) {
      p.flags.hallucinated_indices.push_back(ref.index);
    }
  }

  for (std::size_t c = markdown.find("<sup>["); c != std::string_view::npos; c = markdown.find("<sup>[", c + 1)) {
    if (auto m = match_citation(markdown, c)) p.citations.push_back(m->doc);
  }
  return p;
}

std::vector<std::int64_t> extract_image_indices(const ParsedAnswer& parsed, bool dedupe) {
  std::vector<std::int64_t> out;
  std::unordered_set<std::int64_t> seen;
  for (const auto& ref : parsed.image_refs) {
    if (!parsed.in_range(ref.index)) continue;
    if (dedupe && !seen.insert(ref.index).second) continue;
    out.push_back(ref.index);
  }
  return out;
}

ImageSequence extract_image_sequence(const ParsedAnswer& parsed) {
  return ImageSequence(extract_image_indices(parsed, /*dedupe=*/true));
}

std::string strip_citations(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      if (auto m = match_citation(text, i)) {
        i = m->end;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

std::vector<ImageContext> extract_contexts(const ParsedAnswer& parsed, std::size_t window_cap) {
  std::vector<ImageContext> out;
  for (std::size_t i = 0; i < parsed.image_refs.size(); ++i) {
    const auto& ref = parsed.image_refs[i];
    if (!parsed.in_range(ref.index)) continue;
    out.push_back({ref.index, utf8_tail(strip_citations(parsed.text_segments[i]), window_cap),
                   utf8_head(strip_citations(parsed.text_segments[i + 1]), window_cap)});
  }
  return out;
}

std::string strip_markdown(const ParsedAnswer& parsed) {
  std::string joined;
  for (std::size_t i = 0; i < parsed.text_segments.size(); ++i) {
    if (i) joined += ' ';
    joined += parsed.text_segments[i];
  }
  joined = strip_citations(joined);

  // Stray IMG# tokens survive only in invalid-format answers.
  std::string no_tokens;
  no_tokens.reserve(joined.size());
  std::size_t i = 0;
  while (i < joined.size()) {
    if (joined.compare(i, kImgToken.size(), kImgToken) == 0) {
      i += kImgToken.size();
      while (i < joined.size() && is_ascii_digit(joined[i])) ++i;
      no_tokens += ' ';
      continue;
    }
    no_tokens += joined[i++];
  }

  std::string out = strip_heading_markers(no_tokens);
  std::replace(out.begin(), out.end(), '|', ' ');
  return out;
}

AnswerEnvelope extract_answer_envelope(std::string_view raw) {
  AnswerEnvelope bare{"", std::nullopt, std::string(raw)};

  std::string_view body = trim(raw);
  if (body.starts_with("```")) {
    const auto first_nl = body.find('\n');
    const auto last_fence = body.rfind("```");
    if (first_nl != std::string_view::npos && last_fence > first_nl) {
      body = trim(body.substr(first_nl + 1, last_fence - first_nl - 1));
    }
  }
  if (!body.starts_with("{")) return bare;

  auto doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return bare;
  auto answer = doc.find("answer");
  if (answer == doc.end() || !answer->is_string()) return bare;

  AnswerEnvelope env;
  env.answer = answer->get<std::string>();
  if (auto reason = doc.find("reason"); reason != doc.end() && reason->is_string()) {
    env.reason = reason->get<std::string>();
  }
  if (auto cat = doc.find("category"); cat != doc.end() && !cat->is_null()) {
    if (!cat->is_string()) throw EnvelopeError("envelope category is not a string");
    env.category = parse_category(cat->get<std::string>());
    if (!env.category) throw EnvelopeError("envelope category '" + cat->get<std::string>() + "' is not one of " +
                                           "what-is, how-to, yes-or-no, head-to-head");
  }
  return env;
}

std::string render_with_urls(const ParsedAnswer& parsed, const UrlMap& url_map) {
  const std::string_view src = parsed.source;
  std::string out;
  out.reserve(src.size());
  std::size_t prev = 0;
  for (const auto& ref : parsed.image_refs) {
    out.append(src.substr(prev, ref.char_span.begin - prev));
    prev = ref.char_span.end;
    if (!parsed.in_range(ref.index)) continue;
    auto it = url_map.find(ref.index);
    if (it == url_map.end()) throw MissingUrl("no URL for IMG#" + std::to_string(ref.index));
    out.append(src.substr(ref.char_span.begin, ref.target_span.begin - ref.char_span.begin));
    out.append(it->second);
    out.append(src.substr(ref.target_span.end, ref.char_span.end - ref.target_span.end));
  }
  out.append(src.substr(prev));
  return out;
}

}  // namespace ragig
