#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fetch/lexicon.hpp"

namespace fetch {

// Wire protocols (all JSON over HTTP POST):
//
//   /v1/embeddings  {"texts":[...]}                      -> {"vectors":[[...]...], "dim":d}
//   /v1/fill-mask   {"text":"..[MASK]..", "top_k":n}      -> {"fills":[{"token","prob"}...]}
//   /v1/fill-mask   {"text":"...", "score_positions":[..]} -> {"logprobs":[...]}
//   /v1/chat        {"prompt", "max_tokens", "temperature"} -> {"text":"..."}
//   /v1/classify    {"texts":[...]}                      -> {"labels":[...], "scores":[...]}
//
// score_positions are byte offsets into "text" of the words whose
// log-probabilities are requested; logprobs come back in the same order.

inline constexpr std::string_view kMaskSentinel = "[MASK]";

struct EndpointConfig {
  std::string url;  // "http://host:port" with an optional path prefix
  double timeout_s = 30.0;
  int max_retries = 3;
  double backoff_s = 0.2;  // doubled after each failed attempt
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
};

// POSTs JSON with retries. Transport errors, 5xx, 408 and 429 are retried;
// other statuses and malformed bodies fail immediately. Throws EndpointError.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(EndpointConfig cfg);
  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;
  const EndpointConfig& config() const { return cfg_; }

 private:
  EndpointConfig cfg_;
  std::string host_;         // scheme://host:port
  std::string path_prefix_;  // "" or "/prefix"
};

// ---- embeddings ----------------------------------------------------------

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  // One vector per text, order preserved. Need not be normalized.
  virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const = 0;
  virtual std::string name() const = 0;
};

// Seeded random projection of a hashed bag of words: each lowercase word
// selects a pseudo-random direction, the text vector is their count-weighted
// sum. Identical texts give identical vectors; different seeds give
// different projections.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  MockEmbeddingProvider(int dim, std::uint64_t seed);
  int dim() const override { return dim_; }
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const override;
  std::string name() const override;

  static std::vector<std::string> words(std::string_view text);

 private:
  void add_direction(std::string_view word, std::vector<float>& acc) const;

  int dim_;
  std::uint64_t seed_;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(EndpointConfig cfg, int dim);
  int dim() const override { return dim_; }
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const override;
  std::string name() const override { return "http:" + client_.config().url; }

 private:
  HttpJsonClient client_;
  int dim_;
};

struct EmbeddingProviderConfig {
  enum class Kind { kHttp, kMock } kind = Kind::kMock;
  EndpointConfig endpoint;
  int dim = 64;
  std::uint64_t seed = 1;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderConfig& cfg);

// ---- fill-mask -----------------------------------------------------------

struct Fill {
  std::string token;
  double prob = 0.0;
};

class FillMaskBackend {
 public:
  virtual ~FillMaskBackend() = default;
  // `text` contains exactly one kMaskSentinel.
  virtual std::vector<Fill> fill(const std::string& text, std::size_t top_k) const = 0;
  // log p(word at each byte offset | rest of text).
  virtual std::vector<double> score(const std::string& text,
                                    const std::vector<std::size_t>& positions) const = 0;
};

class HttpFillMask final : public FillMaskBackend {
 public:
  explicit HttpFillMask(EndpointConfig cfg) : client_(std::move(cfg)) {}
  std::vector<Fill> fill(const std::string& text, std::size_t top_k) const override;
  std::vector<double> score(const std::string& text,
                            const std::vector<std::size_t>& positions) const override;

 private:
  HttpJsonClient client_;
};

// Deterministic stand-in: fills are drawn from a term lexicon with
// hash-derived probabilities; scoring favors words belonging to lexicon terms.
class LexiconMockFillMask final : public FillMaskBackend {
 public:
  explicit LexiconMockFillMask(std::vector<std::string> lexicon);
  std::vector<Fill> fill(const std::string& text, std::size_t top_k) const override;
  std::vector<double> score(const std::string& text,
                            const std::vector<std::size_t>& positions) const override;

 private:
  std::vector<std::string> lexicon_;
  std::set<std::string> lexicon_words_;
};

// ---- chat ------------------------------------------------------------------

enum class PromptKind { kDirect, kLlmPredict };

struct ChatRequest {
  PromptKind kind = PromptKind::kDirect;
  std::string prompt;     // rendered from the prompt registry
  std::string post_text;  // the post substituted into the prompt
  int max_tokens = 256;
  double temperature = 0.0;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& req) const = 0;
};

class HttpChat final : public ChatBackend {
 public:
  explicit HttpChat(EndpointConfig cfg) : client_(std::move(cfg)) {}
  std::string complete(const ChatRequest& req) const override;

 private:
  HttpJsonClient client_;
};

// Answers from a known lexicon: DIRECT replies with the glossary roots found
// in the post (wrapped in chatter, to exercise JSON recovery); LLM-PREDICT
// replies "Yes." iff any lexicon surface occurs.
class OracleMockChat final : public ChatBackend {
 public:
  explicit OracleMockChat(std::vector<GlossaryEntry> lexicon);
  std::string complete(const ChatRequest& req) const override;

 private:
  std::vector<GlossaryEntry> lexicon_;
  SurfaceMatcher matcher_;
};

// ---- classify --------------------------------------------------------------

struct Classification {
  std::string label;
  double score = 0.0;
};

class ClassifyBackend {
 public:
  virtual ~ClassifyBackend() = default;
  virtual std::vector<Classification> classify(const std::vector<std::string>& texts) const = 0;
};

class HttpClassify final : public ClassifyBackend {
 public:
  explicit HttpClassify(EndpointConfig cfg) : client_(std::move(cfg)) {}
  std::vector<Classification> classify(const std::vector<std::string>& texts) const override;

 private:
  HttpJsonClient client_;
};

// Labels a post `positive_label` iff any lexicon surface occurs in it.
class OracleMockClassifier final : public ClassifyBackend {
 public:
  OracleMockClassifier(std::vector<GlossaryEntry> lexicon, std::string positive_label = "hate",
                       std::string negative_label = "nothate");
  std::vector<Classification> classify(const std::vector<std::string>& texts) const override;

 private:
  std::vector<GlossaryEntry> lexicon_;
  SurfaceMatcher matcher_;
  std::string positive_;
  std::string negative_;
};

}  // namespace fetch
