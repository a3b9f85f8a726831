#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fetch/endpoints.hpp"

namespace fetch {

// One ranked candidate. `level` is the expansion depth for w2v-style
// pipelines and 0 elsewhere.
struct CandidateItem {
  std::string term;
  double score = 0.0;
  std::size_t rank = 0;
  std::string source;
  int level = 0;

  bool operator==(const CandidateItem&) const = default;
};

// Ranked, duplicate-free candidate terms. Ranks run 1..n and scores never
// increase down the list.
//
// File form: JSON Lines. An optional first line {"header": {...}} carries the
// run metadata; each following line is {"term","score","rank","source"[,"level"]}.
struct CandidateList {
  std::vector<CandidateItem> items;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  std::vector<std::string> terms() const;

  // Keeps `ordered` as given, drops repeated terms, assigns ranks.
  static CandidateList from_ordered(const std::vector<std::pair<std::string, double>>& ordered,
                                    const std::string& source);
  // Sorts by score descending then term ascending, keeps the first `k`.
  static CandidateList from_scores(std::vector<std::pair<std::string, double>> scored,
                                   const std::string& source,
                                   std::optional<std::size_t> k = std::nullopt);

  // Throws Error describing the first broken invariant.
  void validate() const;

  void save(const std::filesystem::path& path) const;
  static CandidateList load(const std::filesystem::path& path);
};

enum class KeywordMethod { kTfidf, kRake, kYake, kTextRank, kEmbedKeyword };

KeywordMethod parse_keyword_method(std::string_view name);
std::string to_string(KeywordMethod method);

struct KeywordRequest {
  KeywordMethod method = KeywordMethod::kTfidf;
  int max_ngram = 1;
  std::size_t k = 50;
  std::vector<std::string> documents;  // raw post texts, one document each
  std::set<std::string> stopwords;
  const EmbeddingProvider* provider = nullptr;  // embed-keyword only

  nlohmann::json to_json() const;
};

// A lowercased word with its original spelling and sentence number, as seen
// by the keyword extractors.
struct KeywordToken {
  std::string text;
  std::string original;
  std::size_t sentence = 0;
};

// Tokenizes a document for keyword extraction: URLs and mentions become the
// sentinels, '#' is stripped, case is folded (original kept), and the text is
// cut into chunks at punctuation. Sentences end at . ! ? and ellipses.
std::vector<std::vector<KeywordToken>> keyword_chunks(std::string_view text);

// Contiguous n-grams for n = 1..max_ngram (all unigrams first, then bigrams,
// ...), dropping those that start or end with a stop word or contain a
// sentinel token.
std::vector<std::string> candidate_ngrams(const std::vector<std::string>& tokens, int max_ngram,
                                          const std::set<std::string>& stopwords);

// Per-document scores pooled by max across documents, then the global top-k.
CandidateList extract_keywords(const KeywordRequest& req);

// Smoothed inverse document frequency used by the tfidf method.
double smoothed_idf(std::size_t n_docs, std::size_t df);

// TextRank vertex scores for an undirected unweighted graph given as
// adjacency sets. Damping 0.85; stops when no score moves by more than 1e-6,
// or after 100 iterations.
std::vector<double> textrank_scores(const std::vector<std::set<std::size_t>>& adjacency,
                                    double damping = 0.85, double tolerance = 1e-6,
                                    int max_iterations = 100);

}  // namespace fetch
