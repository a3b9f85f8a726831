#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fetch/phraser.hpp"

namespace fetch {

struct Word2VecParams {
  int dim = 100;
  int window = 5;
  int epochs = 10;
  std::size_t max_vocab = 500'000;
  std::uint64_t min_count = 5;
  int negative = 5;
  double sample = 1e-3;  // frequent-word downsampling threshold; 0 disables
  double alpha = 0.025;
  double min_alpha = 0.0001;
  std::uint64_t seed = 1;
  // 1 = deterministic single-threaded training. >1 trains shards concurrently
  // with lock-free shared updates; results then depend on scheduling.
  int threads = 1;
};

struct Neighbor {
  std::string token;
  double cosine = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct SimilarResult {
  bool oov = false;
  std::vector<Neighbor> items;
};

// Static word/phrase vectors (skip-gram with negative sampling).
//
// Model file layout, little-endian:
//   u32 dim | u64 vocab_size | u64 seed | u32 epochs
//   vocab_size x ( u32 token_bytes | token bytes | dim x f32 )
// Records are in vocabulary order (descending training count, then token).
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(std::vector<std::string> tokens, std::vector<float> vectors, int dim,
                 std::uint64_t seed = 0, int epochs = 0);

  static EmbeddingModel train(const TokenCorpus& corpus, const Word2VecParams& params);

  // Vocabulary selection used by train(): tokens with count >= min_count,
  // most frequent first (ties by token), truncated to max_vocab.
  static std::vector<std::pair<std::string, std::uint64_t>> build_vocab(
      const TokenCorpus& corpus, std::uint64_t min_count, std::size_t max_vocab);

  std::size_t size() const { return tokens_.size(); }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  int trained_epochs() const { return epochs_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<std::size_t> index_of(std::string_view token) const;
  bool contains(std::string_view token) const { return index_of(token).has_value(); }
  std::span<const float> vector(std::size_t i) const;
  std::span<const float> unit_vector(std::size_t i) const;

  // Cosine of two in-vocabulary tokens; nullopt if either is unknown.
  std::optional<double> similarity(std::string_view a, std::string_view b) const;

  // Exact top-k by cosine, excluding the query; ties by token.
  SimilarResult most_similar(std::string_view query, std::size_t k) const;
  // Same ranking for an arbitrary (not necessarily unit) query vector.
  std::vector<Neighbor> nearest_to(std::span<const float> query, std::size_t k,
                                   std::optional<std::size_t> exclude = std::nullopt) const;

  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

 private:
  void rebuild_index();

  std::vector<std::string> tokens_;
  std::vector<float> vectors_;
  std::vector<float> unit_;
  std::unordered_map<std::string, std::size_t> index_;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  int epochs_ = 0;
};

}  // namespace fetch
