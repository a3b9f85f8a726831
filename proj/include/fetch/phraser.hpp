#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace fetch {

using TokenStream = std::vector<std::string>;
using TokenCorpus = std::vector<TokenStream>;

struct PhraserParams {
  std::uint64_t min_count = 5;
  double threshold = 10.0;
  std::string delimiter = "_";
};

// One collocation pass: counts plus the merge rule.
//
//   score(a, b) = (count(ab) - min_count) * total_tokens / (count(a) * count(b))
//
// and (a, b) merges into "a_b" iff score > threshold.
struct PhraseLayer {
  PhraserParams params;
  std::unordered_map<std::string, std::uint64_t> unigram_counts;
  std::unordered_map<std::string, std::uint64_t> bigram_counts;  // key: a + '\x1f' + b
  std::uint64_t total_tokens = 0;
  int max_components = 2;  // longest merged token, in original tokens

  static std::string pair_key(std::string_view a, std::string_view b);
  static PhraseLayer learn(const TokenCorpus& corpus, const PhraserParams& params,
                           int max_components);

  double score(std::string_view a, std::string_view b) const;
  bool should_merge(std::string_view a, std::string_view b) const;
  // Left-to-right greedy merge without overlap.
  TokenStream apply(const TokenStream& tokens) const;
  // Every adjacent pair type that this layer would merge.
  std::set<std::string> phrasegrams() const;
  int components(std::string_view token) const;
};

// passes = 1 yields up to 2-gram tokens, passes = 2 up to 3-gram tokens.
struct PhraserModel {
  std::vector<PhraseLayer> layers;

  static PhraserModel learn(const TokenCorpus& corpus, const PhraserParams& params, int passes);
  TokenStream apply(const TokenStream& tokens) const;
  nlohmann::json summary() const;
};

TokenCorpus merge_phrases(const TokenCorpus& corpus, const PhraserModel& model);

// "new_york" -> "new york"; ":emoji_alias:" tokens are left alone.
std::string phrase_token_to_surface(std::string_view token, std::string_view delimiter = "_");
// "New York" -> "new_york"
std::string surface_to_phrase_token(std::string_view surface, std::string_view delimiter = "_");

}  // namespace fetch
