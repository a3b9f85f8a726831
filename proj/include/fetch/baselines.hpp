#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fetch/corpus.hpp"
#include "fetch/embedding.hpp"
#include "fetch/endpoints.hpp"
#include "fetch/keywords.hpp"
#include "fetch/lexicon.hpp"

namespace fetch {

// ---- Word2Vec / Phrase2Vec expansion -------------------------------------------

struct ExpansionTrace {
  // levels[i] holds level i+1: neighbors of the previous level (of the seeds
  // for level 1) not seen before, best cosine first, ties by token.
  std::vector<std::vector<Neighbor>> levels;
  std::size_t k_per_query = 10;
  std::vector<std::string> queried_seeds;  // seed tokens found in the vocabulary
  std::vector<std::string> skipped_seeds;  // seed tokens missing from it

  std::size_t size() const;
};

// Level 1 = union of the top-k neighbors of each in-vocabulary seed token;
// level i+1 = union of the top-k neighbors of the level-i tokens, minus seeds
// and every earlier level.
ExpansionTrace expand_seeds(const EmbeddingModel& model, const std::set<std::string>& seed_tokens,
                            std::size_t k = 10, std::size_t levels = 10);

// Model-space tokens for every surface of the entries: each surface is
// preprocessed and its tokens joined with the phrase delimiter, the way the
// phraser would merge them.
std::set<std::string> seed_tokens_for(const std::vector<GlossaryEntry>& entries,
                                      const PreprocessConfig& cfg, std::string_view delimiter = "_");

// Flattens a trace: ordered by level, then cosine, then token; score is
// 1/level. Phrase tokens are turned back into space-separated terms.
CandidateList trace_to_candidates(const ExpansionTrace& trace, const std::string& source,
                                  std::string_view delimiter = "_");

// ---- seed sentence sampling --------------------------------------------------

struct SeedSentence {
  std::size_t post = 0;  // index into the corpus
  SurfaceHit hit;        // first seed surface in the post's text
};

// Seeded reservoir sample (size min(n, available)) over posts containing a
// seed surface, returned in corpus order.
std::vector<SeedSentence> sample_seed_sentences(const std::vector<Post>& posts,
                                                const SurfaceMatcher& seeds, std::size_t n,
                                                std::uint64_t rng_seed);

// Text with the hit replaced by `replacement`.
std::string substitute(const std::string& text, const SurfaceHit& hit, std::string_view replacement);

// ---- MLM fill-mask ---------------------------------------------------------------

struct MlmParams {
  std::size_t sample_n = 2000;
  std::size_t k = 25600;
  std::size_t fill_top_k = 100;  // fills requested per masked sentence
  std::uint64_t rng_seed = 1;
  // Sensitivity variant: only each sentence's top-k fills are pooled.
  bool per_sentence_top_k = false;
  std::size_t max_in_flight = 4;
};

struct EndpointStats {
  std::size_t requested = 0;
  std::size_t failed = 0;
  nlohmann::json to_json() const { return {{"requested", requested}, {"failed", failed}}; }
};

// Masks the first seed surface of each sampled post and sums fill
// probabilities per token across posts. Seed surfaces are removed from the
// result. Throws EndpointError when more than half the requests fail.
CandidateList mlm_candidates(const std::vector<Post>& posts, const std::vector<GlossaryEntry>& seeds,
                             const FillMaskBackend& backend, const MlmParams& params,
                             EndpointStats* stats = nullptr);

// ---- EPD ---------------------------------------------------------------------------

struct PhraseMiningParams {
  std::size_t min_support = 10;
  double min_npmi = 0.5;
  int min_len = 2;
  int max_len = 4;
};

struct MinedPhrase {
  std::string phrase;
  std::size_t support = 0;
  double npmi = 0.0;
};

// Contiguous n-grams (min_len..max_len) with the keyword boundary rules, kept
// when support >= min_support and NPMI >= min_npmi. NPMI of an n-gram is the
// minimum over its binary splits of ln(p(xy)/(p(x)p(y))) / -ln p(xy), with
// probabilities taken as counts over total tokens. Sorted by phrase.
std::vector<MinedPhrase> mine_phrases(const std::vector<std::string>& texts,
                                      const std::set<std::string>& stopwords,
                                      const PhraseMiningParams& params = {});

struct EpdParams {
  std::size_t phrase_pool_size = 1000;
  std::size_t sample_n = 2000;
  std::size_t k = 25600;  // number of top (sentence, phrase) pairs kept
  std::uint64_t rng_seed = 1;
  PhraseMiningParams mining;
  std::size_t max_in_flight = 4;
};

// The phrase_pool_size mined phrases most similar to any seed under the
// unigram model (averaged member vectors, max over seeds).
std::vector<std::pair<std::string, double>> pool_phrases(
    const std::vector<MinedPhrase>& mined, const std::vector<GlossaryEntry>& seeds,
    const EmbeddingModel& unigram_model, const PreprocessConfig& cfg, std::size_t pool_size);

// Byte offsets of the whitespace-separated words of `phrase` once inserted at
// `at`.
std::vector<std::size_t> word_offsets(std::string_view phrase, std::size_t at);

// Substitutes each pooled phrase into each sampled seed sentence, scores the
// sentence by pseudo-log-likelihood over the inserted words, keeps the top-k
// pairs and returns their phrases deduplicated in rank order.
CandidateList epd_candidates(const std::vector<Post>& posts, const std::vector<GlossaryEntry>& seeds,
                             const FillMaskBackend& backend, const EmbeddingModel& unigram_model,
                             const PreprocessConfig& cfg, const EpdParams& params,
                             EndpointStats* stats = nullptr);

}  // namespace fetch
