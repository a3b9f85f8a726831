#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fetch/corpus.hpp"
#include "fetch/endpoints.hpp"

namespace fetch {

// Embeds texts in provider-sized batches and unit-normalizes the results.
// Batches run concurrently (bounded by `max_in_flight`); results are placed by
// index, so output order always matches input order.
std::vector<std::vector<float>> embed_texts(const EmbeddingProvider& provider,
                                            const std::vector<std::string>& texts,
                                            std::size_t batch_size = 64,
                                            std::size_t max_in_flight = 1);

// Flat exact cosine index over unit-normalized post vectors.
//
// Index file layout, little-endian:
//   u32 dim | u64 count | count x ( u32 id_bytes | id bytes | dim x f32 )
class VectorIndex {
 public:
  explicit VectorIndex(int dim = 0) : dim_(dim) {}

  // Normalizes `vec` before storing. Throws on duplicate id or wrong dim.
  void add(std::string id, std::span<const float> vec);

  std::size_t size() const { return ids_.size(); }
  int dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> vector(std::size_t i) const;
  std::optional<std::size_t> position(const std::string& id) const;

  // For each seed, its `neighbors_per_seed` most similar entries with a
  // different id (ties by id); the union minus the seeds, sorted.
  std::set<std::string> nearest_posts(const std::set<std::string>& seed_ids,
                                      std::size_t neighbors_per_seed = 1) const;

  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  int dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> pos_;
};

// Embeds every post's raw text exactly once. Any provider failure aborts.
VectorIndex build_index(const std::vector<Post>& posts, const EmbeddingProvider& provider,
                        std::size_t batch_size = 64, std::size_t max_in_flight = 1);

}  // namespace fetch
