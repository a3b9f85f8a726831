#include "fetch/endpoints.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"

#include "fetch/common.hpp"

namespace fetch {

using nlohmann::json;

// ---- HttpJsonClient --------------------------------------------------------

HttpJsonClient::HttpJsonClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.max_retries < 0) throw ConfigError("max_retries", "must be >= 0");
  auto scheme = cfg_.url.find("://");
  if (cfg_.url.empty() || scheme == std::string::npos) {
    throw ConfigError("url", "endpoint url must look like http://host:port, got '" + cfg_.url + "'");
  }
  auto slash = cfg_.url.find('/', scheme + 3);
  host_ = cfg_.url.substr(0, slash);
  if (slash != std::string::npos) {
    path_prefix_ = cfg_.url.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

json HttpJsonClient::post(std::string_view path, const json& body) const {
  const std::string full_path = path_prefix_ + std::string(path);
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::duration<double>(cfg_.backoff_s * std::pow(2.0, attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client cli(host_);
    auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(cfg_.timeout_s));
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    auto res = cli.Post(full_path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      json out = json::parse(res->body, nullptr, false);
      if (out.is_discarded()) throw EndpointError(full_path + ": response is not JSON");
      return out;
    }
    last_error = "HTTP " + std::to_string(res->status);
    bool retryable = res->status >= 500 || res->status == 408 || res->status == 429;
    if (!retryable) break;
  }
  throw EndpointError(host_ + full_path + ": " + last_error);
}

// ---- embeddings --------------------------------------------------------------

MockEmbeddingProvider::MockEmbeddingProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim <= 0) throw ConfigError("dim", "must be positive");
}

std::string MockEmbeddingProvider::name() const {
  return "mock(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

std::vector<std::string> MockEmbeddingProvider::words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_ascii_word_char(c) || c >= 0x80) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void MockEmbeddingProvider::add_direction(std::string_view word, std::vector<float>& acc) const {
  std::uint64_t state = fnv1a64(word, 0xcbf29ce484222325ULL ^ (seed_ * 0x9e3779b97f4a7c15ULL));
  for (int i = 0; i < dim_; i += 2) {
    // Box-Muller pair from two uniforms: Gaussian rows make directions isotropic.
    double u1 = (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    acc[static_cast<std::size_t>(i)] += static_cast<float>(r * std::cos(2 * M_PI * u2));
    if (i + 1 < dim_) {
      acc[static_cast<std::size_t>(i + 1)] += static_cast<float>(r * std::sin(2 * M_PI * u2));
    }
  }
}

std::vector<std::vector<float>> MockEmbeddingProvider::embed(
    const std::vector<std::string>& texts) const {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<float> v(static_cast<std::size_t>(dim_), 0.f);
    auto ws = words(text);
    if (ws.empty()) {
      add_direction("\x01" + text, v);
    } else {
      for (const auto& w : ws) add_direction(w, v);
    }
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(EndpointConfig cfg, int dim)
    : client_(std::move(cfg)), dim_(dim) {
  if (dim <= 0) throw ConfigError("dim", "must be positive");
}

std::vector<std::vector<float>> HttpEmbeddingProvider::embed(
    const std::vector<std::string>& texts) const {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  const std::size_t batch = std::max<std::size_t>(1, client_.config().batch_size);
  for (std::size_t b = 0; b < texts.size(); b += batch) {
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(b),
                                   texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), b + batch)));
    json res = client_.post("/v1/embeddings", json{{"texts", chunk}});
    if (!res.contains("vectors") || !res["vectors"].is_array() ||
        res["vectors"].size() != chunk.size()) {
      throw EndpointError("/v1/embeddings: expected one vector per text");
    }
    if (res.contains("dim") && res["dim"].get<int>() != dim_) {
      throw Error("/v1/embeddings: endpoint dim " + std::to_string(res["dim"].get<int>()) +
                  " does not match configured dim " + std::to_string(dim_));
    }
    for (const auto& v : res["vectors"]) {
      auto vec = v.get<std::vector<float>>();
      if (static_cast<int>(vec.size()) != dim_) {
        throw Error("/v1/embeddings: vector of length " + std::to_string(vec.size()) +
                    " does not match configured dim " + std::to_string(dim_));
      }
      out.push_back(std::move(vec));
    }
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderConfig& cfg) {
  if (cfg.kind == EmbeddingProviderConfig::Kind::kMock) {
    return std::make_unique<MockEmbeddingProvider>(cfg.dim, cfg.seed);
  }
  return std::make_unique<HttpEmbeddingProvider>(cfg.endpoint, cfg.dim);
}

// ---- fill-mask ---------------------------------------------------------------

std::vector<Fill> HttpFillMask::fill(const std::string& text, std::size_t top_k) const {
  json res = client_.post("/v1/fill-mask", json{{"text", text}, {"top_k", top_k}});
  if (!res.contains("fills") || !res["fills"].is_array()) {
    throw EndpointError("/v1/fill-mask: response without \"fills\"");
  }
  std::vector<Fill> out;
  for (const auto& f : res["fills"]) {
    out.push_back({f.at("token").get<std::string>(), f.at("prob").get<double>()});
  }
  return out;
}

std::vector<double> HttpFillMask::score(const std::string& text,
                                        const std::vector<std::size_t>& positions) const {
  json res = client_.post("/v1/fill-mask", json{{"text", text}, {"score_positions", positions}});
  if (!res.contains("logprobs") || res["logprobs"].size() != positions.size()) {
    throw EndpointError("/v1/fill-mask: expected one logprob per score position");
  }
  return res["logprobs"].get<std::vector<double>>();
}

LexiconMockFillMask::LexiconMockFillMask(std::vector<std::string> lexicon)
    : lexicon_(std::move(lexicon)) {
  std::sort(lexicon_.begin(), lexicon_.end());
  lexicon_.erase(std::unique(lexicon_.begin(), lexicon_.end()), lexicon_.end());
  for (const auto& term : lexicon_) {
    for (auto& w : split_ws(term)) lexicon_words_.insert(ascii_lower(w));
  }
}

std::vector<Fill> LexiconMockFillMask::fill(const std::string& text, std::size_t top_k) const {
  std::vector<Fill> fills;
  double total = 0.0;
  for (const auto& term : lexicon_) {
    double w = 1.0 + static_cast<double>(fnv1a64(text + '\x1f' + term) % 1000);
    fills.push_back({term, w});
    total += w;
  }
  for (auto& f : fills) f.prob /= total;
  std::sort(fills.begin(), fills.end(), [](const Fill& a, const Fill& b) {
    return a.prob != b.prob ? a.prob > b.prob : a.token < b.token;
  });
  if (fills.size() > top_k) fills.resize(top_k);
  return fills;
}

std::vector<double> LexiconMockFillMask::score(const std::string& text,
                                               const std::vector<std::size_t>& positions) const {
  std::vector<double> out;
  for (std::size_t pos : positions) {
    std::size_t end = pos;
    while (end < text.size() && text[end] != ' ') ++end;
    std::string word = ascii_lower(text.substr(std::min(pos, text.size()), end - std::min(pos, text.size())));
    if (lexicon_words_.count(word)) {
      out.push_back(-0.05);
    } else {
      out.push_back(-1.0 - static_cast<double>(fnv1a64(text + '\x1f' + word) % 400) / 100.0);
    }
  }
  return out;
}

// ---- chat ------------------------------------------------------------------

std::string HttpChat::complete(const ChatRequest& req) const {
  json res = client_.post("/v1/chat", json{{"prompt", req.prompt},
                                           {"max_tokens", req.max_tokens},
                                           {"temperature", req.temperature}});
  if (!res.contains("text") || !res["text"].is_string()) {
    throw EndpointError("/v1/chat: response without string \"text\"");
  }
  return res["text"].get<std::string>();
}

OracleMockChat::OracleMockChat(std::vector<GlossaryEntry> lexicon)
    : lexicon_(std::move(lexicon)), matcher_(lexicon_) {}

std::string OracleMockChat::complete(const ChatRequest& req) const {
  auto hits = matcher_.entries_in(req.post_text);
  if (req.kind == PromptKind::kLlmPredict) return hits.empty() ? "No." : "Yes.";
  json terms = json::array();
  for (std::size_t i : hits) terms.push_back(lexicon_[i].root);
  return "Sure, here is the answer: " + json{{"dogwhistles", terms}}.dump() + " Hope this helps!";
}

// ---- classify --------------------------------------------------------------

std::vector<Classification> HttpClassify::classify(const std::vector<std::string>& texts) const {
  std::vector<Classification> out;
  const std::size_t batch = std::max<std::size_t>(1, client_.config().batch_size);
  for (std::size_t b = 0; b < texts.size(); b += batch) {
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(b),
                                   texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), b + batch)));
    json res = client_.post("/v1/classify", json{{"texts", chunk}});
    if (!res.contains("labels") || res["labels"].size() != chunk.size()) {
      throw EndpointError("/v1/classify: expected one label per text");
    }
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      double score = 0.0;
      if (res.contains("scores") && res["scores"].size() == chunk.size()) {
        score = res["scores"][i].get<double>();
      }
      out.push_back({res["labels"][i].get<std::string>(), score});
    }
  }
  return out;
}

OracleMockClassifier::OracleMockClassifier(std::vector<GlossaryEntry> lexicon,
                                           std::string positive_label, std::string negative_label)
    : lexicon_(std::move(lexicon)), matcher_(lexicon_), positive_(std::move(positive_label)),
      negative_(std::move(negative_label)) {}

std::vector<Classification> OracleMockClassifier::classify(
    const std::vector<std::string>& texts) const {
  std::vector<Classification> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    bool hit = matcher_.any(t);
    out.push_back({hit ? positive_ : negative_, hit ? 0.99 : 0.01});
  }
  return out;
}

}  // namespace fetch
