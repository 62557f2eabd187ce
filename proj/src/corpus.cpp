#include "ragig/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "ragig/errors.hpp"
#include "ragig/text_util.hpp"

#include "prompt_template_data.hpp"

namespace ragig {

using json = nlohmann::json;

namespace {

constexpr std::string_view kCategoryNames[] = {"what-is", "how-to", "yes-or-no", "head-to-head"};

// Every `IMG#<digits>` occurrence in `text`, saturating on overflow.
std::vector<std::int64_t> placeholder_indices(std::string_view text) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while ((pos = text.find("IMG#", pos)) != std::string_view::npos) {
    pos += 4;
    std::size_t end = pos;
    while (end < text.size() && is_ascii_digit(text[end])) ++end;
    if (end > pos) out.push_back(parse_index_saturating(text.substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(line, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw SchemaError(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_int(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_number_integer()) throw SchemaError(line, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

EvalSample sample_from_json(const json& rec, std::size_t line) {
  if (!rec.is_object()) throw SchemaError(line, "record must be a JSON object");
  EvalSample s;
  s.id = require_string(rec, "id", line);
  s.query = require_string(rec, "query", line);
  s.ground_truth = require_string(rec, "ground_truth", line);

  const json& docs = require(rec, "documents", line);
  if (!docs.is_array()) throw SchemaError(line, "field 'documents' must be an array");
  for (const json& d : docs) {
    if (!d.is_object()) throw SchemaError(line, "document must be a JSON object");
    RetrievedDocument doc;
    doc.doc_index = require_int(d, "doc_index", line);
    doc.text = require_string(d, "text", line);
    const json& imgs = require(d, "images", line);
    if (!imgs.is_array()) throw SchemaError(line, "field 'images' must be an array");
    for (const json& im : imgs) {
      if (!im.is_object()) throw SchemaError(line, "image must be a JSON object");
      ImageAsset a;
      a.index = require_int(im, "index", line);
      a.locator = require_string(im, "locator", line);
      if (auto w = im.find("width_px"); w != im.end() && !w->is_null()) {
        if (!w->is_number_integer()) throw SchemaError(line, "field 'width_px' must be an integer");
        a.width_px = w->get<std::int64_t>();
      }
      doc.images.push_back(std::move(a));
    }
    s.documents.push_back(std::move(doc));
  }

  if (auto c = rec.find("category"); c != rec.end() && !c->is_null()) {
    if (!c->is_string()) throw SchemaError(line, "field 'category' must be a string");
    auto cat = parse_category(c->get<std::string>());
    if (!cat) throw SchemaError(line, "unknown category '" + c->get<std::string>() + "'");
    s.category = *cat;
  }
  return s;
}

json sample_to_json(const EvalSample& s) {
  json docs = json::array();
  for (const auto& d : s.documents) {
    json imgs = json::array();
    for (const auto& a : d.images) {
      json im = {{"index", a.index}, {"locator", a.locator}};
      if (a.width_px) im["width_px"] = *a.width_px;
      imgs.push_back(std::move(im));
    }
    docs.push_back({{"doc_index", d.doc_index}, {"text", d.text}, {"images", std::move(imgs)}});
  }
  json rec = {{"id", s.id}, {"query", s.query}, {"documents", std::move(docs)}, {"ground_truth", s.ground_truth}};
  if (s.category) rec["category"] = std::string(to_string(*s.category));
  return rec;
}

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<int>(c)]; }

std::optional<Category> parse_category(std::string_view s) {
  for (int i = 0; i < 4; ++i) {
    if (kCategoryNames[i] == s) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::size_t EvalSample::image_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.images.size();
  return n;
}

std::vector<ImageAsset> EvalSample::assets() const {
  std::vector<ImageAsset> out;
  for (const auto& d : documents) out.insert(out.end(), d.images.begin(), d.images.end());
  return out;
}

std::vector<Violation> validate_sample(const EvalSample& sample) {
  std::vector<Violation> v;
  if (sample.id.empty()) v.push_back({"empty id", "sample id must be non-empty"});
  if (sample.documents.size() > kMaxDocumentsPerSample) {
    v.push_back({"document limit exceeded", std::to_string(sample.documents.size()) + " documents (max " +
                                                std::to_string(kMaxDocumentsPerSample) + ")"});
  }

  std::set<std::int64_t> seen;
  std::set<std::int64_t> reported_dupes;
  for (std::size_t i = 0; i < sample.documents.size(); ++i) {
    const auto& d = sample.documents[i];
    if (d.doc_index != static_cast<std::int64_t>(i) + 1) {
      v.push_back({"document index out of sequence",
                   "document " + std::to_string(i + 1) + " has doc_index " + std::to_string(d.doc_index)});
    }
    if (trim(d.text).empty()) v.push_back({"empty document text", "DOC#" + std::to_string(d.doc_index)});
    for (const auto& a : d.images) {
      if (a.index < 1) {
        v.push_back({"image index below 1", "IMG#" + std::to_string(a.index)});
        continue;
      }
      if (!seen.insert(a.index).second && reported_dupes.insert(a.index).second) {
        v.push_back({"duplicate index", "IMG#" + std::to_string(a.index)});
      }
      if (a.locator.empty()) v.push_back({"empty locator", "IMG#" + std::to_string(a.index)});
      if (a.width_px && *a.width_px < 1) {
        v.push_back({"non-positive width", "IMG#" + std::to_string(a.index) + " width " + std::to_string(*a.width_px)});
      }
    }
  }

  if (sample.image_count() == 0) {
    v.push_back({"no images", "sample has no retrieved images"});
  } else if (!seen.empty()) {
    // `seen` is ordered; distinct indices must be exactly 1..|seen|.
    const auto max_index = *seen.rbegin();
    if (max_index != static_cast<std::int64_t>(seen.size())) {
      v.push_back({"non-contiguous indices",
                   "distinct indices do not cover 1.." + std::to_string(seen.size()) + " (max " +
                       std::to_string(max_index) + ")"});
    }
  }

  const std::int64_t n = seen.empty() ? 0 : *seen.rbegin();
  std::set<std::int64_t> bad_refs;
  for (auto k : placeholder_indices(sample.ground_truth)) {
    if ((k < 1 || k > n) && bad_refs.insert(k).second) {
      v.push_back({"ground truth reference out of range",
                   "IMG#" + std::to_string(k) + " with N=" + std::to_string(sample.image_count())});
    }
  }
  return v;
}

std::vector<EvalSample> parse_corpus(std::string_view jsonl) {
  std::vector<EvalSample> out;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    auto nl = jsonl.find('\n', start);
    std::string_view line = jsonl.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
    if (trim(line).empty()) continue;

    json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded()) throw SchemaError(line_no, "malformed JSON");
    EvalSample s = sample_from_json(rec, line_no);

    if (auto violations = validate_sample(s); !violations.empty()) {
      std::string msg;
      for (const auto& viol : violations) {
        if (!msg.empty()) msg += "; ";
        msg += viol.invariant + " (" + viol.detail + ")";
      }
      throw InvariantError(s.id, msg);
    }
    if (!ids.insert(s.id).second) throw InvariantError(s.id, "duplicate sample id");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<EvalSample> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

std::string serialize_corpus(const std::vector<EvalSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s).dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const std::vector<EvalSample>& samples, const std::filesystem::path& path) {
  write_file(path, serialize_corpus(samples));
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  return PromptTemplate(read_file(path));
}

PromptTemplate PromptTemplate::builtin() { return PromptTemplate(std::string(detail::kBuiltinPromptTemplate)); }

std::string build_prompt(const EvalSample& sample, const PromptTemplate& tmpl) {
  static constexpr std::string_view kQuery = "{{query}}";
  static constexpr std::string_view kOpen = "{{#docs}}";
  static constexpr std::string_view kClose = "{{/docs}}";
  static constexpr std::string_view kText = "{{doc_text}}";
  static constexpr std::string_view kImages = "{{doc_images}}";

  const std::string& body = tmpl.body();
  const auto open = body.find(kOpen);
  const auto close = body.find(kClose);
  if (body.find(kQuery) == std::string::npos) throw TemplateError("template has no {{query}} slot");
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw TemplateError("template has no {{#docs}}...{{/docs}} block");
  }
  const std::string block = body.substr(open + kOpen.size(), close - open - kOpen.size());
  if (block.find(kText) == std::string::npos) throw TemplateError("docs block has no {{doc_text}} slot");
  if (block.find(kImages) == std::string::npos) throw TemplateError("docs block has no {{doc_images}} slot");

  std::string docs;
  for (const auto& d : sample.documents) {
    std::vector<std::int64_t> idx;
    for (const auto& a : d.images) idx.push_back(a.index);
    std::sort(idx.begin(), idx.end());
    std::string images = "[";
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i) images += ", ";
      images += "IMG#" + std::to_string(idx[i]);
    }
    images += "]";

    std::string rendered = block;
    replace_all(rendered, kText, "DOC#" + std::to_string(d.doc_index) + "\n" + d.text);
    replace_all(rendered, kImages, images);
    docs += rendered;
  }

  std::string head = body.substr(0, open);
  std::string tail = body.substr(close + kClose.size());
  if (head.find(kQuery) == std::string::npos && tail.find(kQuery) == std::string::npos) {
    throw TemplateError("template has no {{query}} slot outside the docs block");
  }
  std::string probe = head + block + tail;
  for (auto marker : {kQuery, kText, kImages}) replace_all(probe, marker, "");
  if (auto m = probe.find("{{"); m != std::string::npos) {
    throw TemplateError("unresolved marker '" + probe.substr(m, std::min<std::size_t>(32, probe.size() - m)) + "'");
  }

  // The query goes in last so marker-like text inside documents is never re-expanded.
  replace_all(head, kQuery, sample.query);
  replace_all(tail, kQuery, sample.query);
  return head + docs + tail;
}

}  // namespace ragig
