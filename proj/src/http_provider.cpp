#include <algorithm>

#include "httplib.h"
#include "ragig/errors.hpp"
#include "ragig/provider.hpp"

namespace ragig {

using json = nlohmann::json;

namespace {

// Splits "http://host:port/prefix" into the scheme-host-port part and a path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  const auto path_start = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, path_start), prefix};
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

HttpProvider::HttpProvider(std::string endpoint, HttpProviderOptions options)
    : endpoint_(std::move(endpoint)), options_(options), in_flight_(std::max<std::ptrdiff_t>(1, options.max_in_flight)) {
  if (options_.max_batch == 0) options_.max_batch = 1;
}

HttpProvider::~HttpProvider() = default;

json HttpProvider::post(const std::string& path, const json& body) const {
  const auto [base, prefix] = split_endpoint(endpoint_);
  SemaphoreGuard guard(in_flight_);
  httplib::Client client(base);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  client.set_write_timeout(options_.timeout_seconds, 0);

  auto res = client.Post(prefix + path, body.dump(), "application/json");
  if (!res) {
    throw ProviderUnavailable("provider " + endpoint_ + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status >= 500) {
    throw ProviderUnavailable("provider " + endpoint_ + path + " returned HTTP " + std::to_string(res->status));
  }
  auto doc = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProviderContract("provider " + endpoint_ + path + " returned a non-JSON body");
  }
  if (res->status != 200 || doc.contains("error")) {
    throw ProviderContract("provider " + endpoint_ + path + " rejected the request: " +
                           (doc.contains("error") ? doc["error"].dump() : "HTTP " + std::to_string(res->status)));
  }
  return doc;
}

ProviderCapabilities HttpProvider::capabilities() const {
  std::lock_guard lock(caps_mutex_);
  if (!caps_) {
    const auto doc = post("/capabilities", json::object());
    try {
      ProviderCapabilities caps;
      caps.embedding_dim = doc.at("embedding_dim").get<std::size_t>();
      caps.max_text_len = doc.at("max_text_len").get<std::size_t>();
      caps.supports_image_text = doc.at("supports_image_text").get<bool>();
      if (caps.embedding_dim == 0 || caps.max_text_len == 0) {
        throw ProviderContract("provider reported zero embedding_dim or max_text_len");
      }
      caps_ = caps;
    } catch (const json::exception& e) {
      throw ProviderContract(std::string("malformed capabilities response: ") + e.what());
    }
  }
  return *caps_;
}

std::vector<std::vector<double>> HttpProvider::embed(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options_.max_batch) {
    const auto batch = texts.subspan(start, std::min(options_.max_batch, texts.size() - start));
    const auto doc = post("/embed_texts", {{"texts", std::vector<std::string>(batch.begin(), batch.end())}});
    try {
      auto vectors = doc.at("vectors").get<std::vector<std::vector<double>>>();
      if (vectors.size() != batch.size()) {
        throw ProviderContract("provider returned " + std::to_string(vectors.size()) + " vectors for a batch of " +
                               std::to_string(batch.size()));
      }
      if (auto dim = doc.find("dim"); dim != doc.end()) {
        const auto d = dim->get<std::size_t>();
        for (const auto& v : vectors) {
          if (v.size() != d) throw ProviderContract("vector length disagrees with reported dim");
        }
      }
      std::move(vectors.begin(), vectors.end(), std::back_inserter(out));
    } catch (const json::exception& e) {
      throw ProviderContract(std::string("malformed embed_texts response: ") + e.what());
    }
  }
  return out;
}

std::vector<double> HttpProvider::score_image_text(std::span<const ImageTextPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t start = 0; start < pairs.size(); start += options_.max_batch) {
    const auto batch = pairs.subspan(start, std::min(options_.max_batch, pairs.size() - start));
    json req = json::array();
    for (const auto& p : batch) req.push_back({{"image", p.image}, {"text", p.text}});
    const auto doc = post("/score_image_text", {{"pairs", std::move(req)}});
    try {
      auto scores = doc.at("scores").get<std::vector<double>>();
      if (scores.size() != batch.size()) {
        throw ProviderContract("provider returned " + std::to_string(scores.size()) + " scores for a batch of " +
                               std::to_string(batch.size()));
      }
      out.insert(out.end(), scores.begin(), scores.end());
    } catch (const json::exception& e) {
      throw ProviderContract(std::string("malformed score_image_text response: ") + e.what());
    }
  }
  return out;
}

}  // namespace ragig
