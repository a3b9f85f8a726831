#include "fetch/vectorstore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fetch/common.hpp"

namespace fetch {

namespace {

void normalize(std::vector<float>& v) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (float& x : v) x = static_cast<float>(x / norm);
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

// Single-precision dot with independent lanes so the compiler can vectorize
// it. For unit vectors its error against dot() stays well below kScreenSlack.
float dot_fast(const float* a, const float* b, std::size_t n) {
  float acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

constexpr double kScreenSlack = 1e-4;

}  // namespace

std::vector<std::vector<float>> embed_texts(const EmbeddingProvider& provider,
                                            const std::vector<std::string>& texts,
                                            std::size_t batch_size, std::size_t max_in_flight) {
  if (texts.empty()) throw Error("embed_texts: no texts");
  batch_size = std::max<std::size_t>(1, batch_size);
  const std::size_t n_batches = (texts.size() + batch_size - 1) / batch_size;
  std::vector<std::vector<float>> out(texts.size());
  parallel_for(n_batches, max_in_flight, [&](std::size_t b) {
    std::size_t lo = b * batch_size;
    std::size_t hi = std::min(texts.size(), lo + batch_size);
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(lo),
                                   texts.begin() + static_cast<std::ptrdiff_t>(hi));
    auto vecs = provider.embed(chunk);
    if (vecs.size() != chunk.size()) {
      throw Error("embedding provider returned " + std::to_string(vecs.size()) + " vectors for " +
                  std::to_string(chunk.size()) + " texts");
    }
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      if (static_cast<int>(vecs[i].size()) != provider.dim()) {
        throw Error("embedding dimension mismatch: got " + std::to_string(vecs[i].size()) +
                    ", expected " + std::to_string(provider.dim()));
      }
      normalize(vecs[i]);
      out[lo + i] = std::move(vecs[i]);
    }
  });
  return out;
}

void VectorIndex::add(std::string id, std::span<const float> vec) {
  if (dim_ == 0) dim_ = static_cast<int>(vec.size());
  if (static_cast<int>(vec.size()) != dim_) {
    throw Error("vector for '" + id + "' has dim " + std::to_string(vec.size()) + ", index dim is " +
                std::to_string(dim_));
  }
  if (pos_.count(id)) throw Error("duplicate post id in index: " + id);
  std::vector<float> v(vec.begin(), vec.end());
  normalize(v);
  pos_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), v.begin(), v.end());
}

std::span<const float> VectorIndex::vector(std::size_t i) const {
  return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::optional<std::size_t> VectorIndex::position(const std::string& id) const {
  auto it = pos_.find(id);
  if (it == pos_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> VectorIndex::nearest_posts(const std::set<std::string>& seed_ids,
                                                 std::size_t neighbors_per_seed) const {
  if (size() < 2) throw Error("nearest_posts needs an index with at least 2 entries");
  std::set<std::string> result;
  if (neighbors_per_seed == 0) return result;
  struct Cand {
    double cos;
    std::size_t idx;
  };
  auto better = [this](const Cand& a, const Cand& b) {
    return a.cos != b.cos ? a.cos > b.cos : ids_[a.idx] < ids_[b.idx];
  };
  std::vector<std::size_t> queries;
  for (const auto& seed : seed_ids) {
    auto sp = position(seed);
    if (!sp) throw Error("seed post id not in index: " + seed);
    queries.push_back(*sp);
  }
  const std::size_t n = std::min(neighbors_per_seed, size() - 1);

  // Seeds are scanned in blocks so each pass over the matrix serves several
  // queries; each seed keeps a sorted list of its best n so far. A cheap float
  // score screens entries, and only those that might enter a list are scored
  // exactly, so the result equals a double-precision scan.
  constexpr std::size_t kBlock = 32;
  std::vector<std::vector<Cand>> best(kBlock);
  for (std::size_t lo = 0; lo < queries.size(); lo += kBlock) {
    const std::size_t hi = std::min(queries.size(), lo + kBlock);
    for (auto& b : best) b.clear();
    for (std::size_t i = 0; i < size(); ++i) {
      auto v = vector(i);
      for (std::size_t q = lo; q < hi; ++q) {
        if (i == queries[q]) continue;
        auto& top = best[q - lo];
        auto qv = vector(queries[q]);
        if (top.size() == n &&
            dot_fast(qv.data(), v.data(), v.size()) < top.back().cos - kScreenSlack) {
          continue;
        }
        Cand c{dot(qv, v), i};
        if (top.size() == n && !better(c, top.back())) continue;
        top.insert(std::upper_bound(top.begin(), top.end(), c, better), c);
        if (top.size() > n) top.pop_back();
      }
    }
    for (std::size_t q = lo; q < hi; ++q) {
      for (const auto& c : best[q - lo]) result.insert(ids_[c.idx]);
    }
  }
  for (const auto& seed : seed_ids) result.erase(seed);
  return result;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write index " + path.string());
  write_u32(out, static_cast<std::uint32_t>(dim_));
  write_u64(out, ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    write_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
    out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
    write_f32s(out, data_.data() + i * static_cast<std::size_t>(dim_),
               static_cast<std::size_t>(dim_));
  }
  if (!out) throw Error("write failed for index " + path.string());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read index " + path.string());
  VectorIndex index(static_cast<int>(read_u32(in)));
  std::uint64_t count = read_u64(in);
  std::vector<float> v(static_cast<std::size_t>(index.dim_));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id(read_u32(in), '\0');
    in.read(id.data(), static_cast<std::streamsize>(id.size()));
    if (!in) throw Error("truncated index file " + path.string());
    read_f32s(in, v.data(), v.size());
    // Stored vectors are already unit length; append directly so a
    // save/load round trip reproduces the bytes.
    if (index.pos_.count(id)) throw Error("duplicate post id in index: " + id);
    index.pos_.emplace(id, index.ids_.size());
    index.ids_.push_back(std::move(id));
    index.data_.insert(index.data_.end(), v.begin(), v.end());
  }
  return index;
}

VectorIndex build_index(const std::vector<Post>& posts, const EmbeddingProvider& provider,
                        std::size_t batch_size, std::size_t max_in_flight) {
  VectorIndex index(provider.dim());
  if (posts.empty()) return index;
  std::vector<std::string> texts;
  texts.reserve(posts.size());
  for (const auto& p : posts) texts.push_back(p.text);
  auto vecs = embed_texts(provider, texts, batch_size, max_in_flight);
  for (std::size_t i = 0; i < posts.size(); ++i) index.add(posts[i].id, vecs[i]);
  return index;
}

}  // namespace fetch
