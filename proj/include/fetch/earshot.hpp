#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fetch/corpus.hpp"
#include "fetch/endpoints.hpp"
#include "fetch/keywords.hpp"
#include "fetch/lexicon.hpp"
#include "fetch/vectorstore.hpp"

namespace fetch {

// The two EarShot prompts, with "{POST}" as the post placeholder.
struct PromptRegistry {
  std::string direct;
  std::string llm_predict;

  static PromptRegistry builtin();
  // JSON object {"direct": "...", "llm-predict": "..."}.
  static PromptRegistry load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::string render(PromptKind kind, std::string_view post_text) const;
};

// First balanced {...} block that parses as JSON, skipping braces inside
// string literals. Later blocks are tried when an earlier one fails to parse.
std::optional<nlohmann::json> first_json_object(std::string_view text);

// The "dogwhistles" array of the first JSON object; nullopt when there is no
// object or it has no such array. Non-string elements are ignored.
std::optional<std::vector<std::string>> parse_direct_response(std::string_view text);

// Case-insensitive whole-word "yes".
bool says_yes(std::string_view response);

struct DirectStats {
  std::size_t posts = 0;
  std::size_t endpoint_failures = 0;
  std::size_t parse_failures = 0;
  nlohmann::json to_json() const;
};

// Candidates from DIRECT responses, deduplicated case-insensitively and ranked
// by extraction count, then first appearance. Score is the count.
CandidateList direct_extract(const std::vector<Post>& posts, const ChatBackend& chat,
                             const PromptRegistry& prompts, std::size_t max_in_flight = 4,
                             DirectStats* stats = nullptr);

enum class FilterStrategy { kLlmYesNo, kClassifier };

FilterStrategy parse_filter_strategy(std::string_view name);
std::string to_string(FilterStrategy s);

struct FilterDecision {
  std::string post_id;
  bool kept = false;
  FilterStrategy strategy = FilterStrategy::kLlmYesNo;
  std::string raw_response;
  std::optional<std::string> label;
  std::optional<double> score;
  bool endpoint_failed = false;

  nlohmann::json to_json() const;
};

struct FilterBackends {
  const ChatBackend* chat = nullptr;
  const ClassifyBackend* classifier = nullptr;
  std::set<std::string> positive_labels = {"hate"};
};

// One decision per post, in input order. Posts whose request fails are
// dropped (kept = false, endpoint_failed = true).
std::vector<FilterDecision> filter_posts(const std::vector<Post>& posts, FilterStrategy strategy,
                                         const FilterBackends& backends,
                                         const PromptRegistry& prompts,
                                         std::size_t max_in_flight = 4,
                                         std::size_t batch_size = 32);

struct EarshotConfig {
  std::size_t neighbors_per_seed = 1;
  FilterStrategy filter = FilterStrategy::kClassifier;
  KeywordMethod keyword_method = KeywordMethod::kTfidf;
  int max_ngram = 1;
  std::size_t k = 25600;
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 32;
};

struct EarshotResult {
  CandidateList candidates;
  std::vector<std::string> seed_post_ids;
  std::vector<std::string> neighbor_post_ids;
  std::vector<FilterDecision> decisions;  // PREDICT only
  nlohmann::json stats = nlohmann::json::object();
};

// Neighbor posts of the posts containing a train surface, in corpus order.
std::vector<Post> neighbor_posts(const std::vector<Post>& posts,
                                 const std::vector<GlossaryEntry>& train, const VectorIndex& index,
                                 std::size_t neighbors_per_seed, std::vector<std::string>* seed_ids,
                                 std::vector<std::string>* neighbor_ids);

EarshotResult run_direct(const std::vector<Post>& posts, const SeedSplit& split,
                         const VectorIndex& index, const ChatBackend& chat,
                         const PromptRegistry& prompts, const EarshotConfig& cfg);

EarshotResult run_predict(const std::vector<Post>& posts, const SeedSplit& split,
                          const VectorIndex& index, const FilterBackends& backends,
                          const PromptRegistry& prompts, const EarshotConfig& cfg,
                          const EmbeddingProvider* keyword_provider = nullptr);

}  // namespace fetch
