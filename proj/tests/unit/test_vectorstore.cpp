#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"

#include "fetch/common.hpp"
#include "fetch/endpoints.hpp"
#include "fetch/vectorstore.hpp"

using namespace fetch;

namespace {

double norm(const std::vector<float>& v) {
  double s = 0;
  for (float x : v) s += double(x) * x;
  return std::sqrt(s);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

VectorIndex random_index(std::size_t n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  VectorIndex idx(dim);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : v) x = static_cast<float>(rng.uniform() * 2 - 1);
    idx.add("id" + std::to_string(i), v);
  }
  return idx;
}

// Brute-force oracle computed from the raw stored vectors.
std::set<std::string> brute_nearest(const VectorIndex& idx, const std::set<std::string>& seeds,
                                    std::size_t per_seed) {
  std::set<std::string> out;
  for (const auto& s : seeds) {
    auto q = idx.vector(*idx.position(s));
    std::vector<std::pair<double, std::string>> scored;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx.ids()[i] == s) continue;
      auto v = idx.vector(i);
      double dot = 0;
      for (std::size_t d = 0; d < v.size(); ++d) dot += double(q[d]) * v[d];
      scored.emplace_back(-dot, idx.ids()[i]);
    }
    std::sort(scored.begin(), scored.end());
    for (std::size_t i = 0; i < per_seed && i < scored.size(); ++i) out.insert(scored[i].second);
  }
  for (const auto& s : seeds) out.erase(s);
  return out;
}

}  // namespace

TEST_CASE("mock embeddings are deterministic and unit length") {
  MockEmbeddingProvider p(64, 1);
  auto v = embed_texts(p, {"the milk is warm", "the milk is warm", "", "\xF0\x9F\xA5\x9B only"});
  REQUIRE(v.size() == 4);
  CHECK(v[0] == v[1]);
  for (const auto& x : v) {
    CHECK(x.size() == 64);
    CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("mock embedding seeds give different projections") {
  MockEmbeddingProvider a(64, 1), b(64, 2);
  CHECK(embed_texts(a, {"same text"})[0] != embed_texts(b, {"same text"})[0]);
}

TEST_CASE("mock embedding is a hashed bag of words") {
  MockEmbeddingProvider p(32, 5);
  auto v = embed_texts(p, {"Alpha beta", "beta ALPHA", "alpha gamma"});
  for (int d = 0; d < 32; ++d) CHECK(v[0][d] == doctest::Approx(v[1][d]).epsilon(1e-6));
  CHECK(v[0] != v[2]);
}

TEST_CASE("embed_texts preserves order across batches and workers") {
  MockEmbeddingProvider p(16, 3);
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back("text number " + std::to_string(i));
  auto serial = embed_texts(p, texts, 50, 1);
  auto batched = embed_texts(p, texts, 7, 4);
  CHECK(serial == batched);
  CHECK_THROWS(embed_texts(p, {}));
}

TEST_CASE("index holds every post once") {
  MockEmbeddingProvider p(16, 1);
  std::vector<Post> posts;
  for (int i = 0; i < 100; ++i) posts.push_back({"p" + std::to_string(i), "post " + std::to_string(i), {}});
  posts.push_back({"dupA", "same words here", {}});
  posts.push_back({"dupB", "same words here", {}});
  auto idx = build_index(posts, p, 16, 2);
  CHECK(idx.size() == 102);
  auto a = idx.vector(*idx.position("dupA"));
  auto b = idx.vector(*idx.position("dupB"));
  CHECK(std::equal(a.begin(), a.end(), b.begin()));
}

TEST_CASE("index rejects duplicates and wrong dimensions") {
  VectorIndex idx(2);
  std::vector<float> v = {1, 0};
  idx.add("a", v);
  CHECK_THROWS(idx.add("a", v));
  std::vector<float> w = {1, 0, 0};
  CHECK_THROWS(idx.add("b", w));
}

TEST_CASE("index file round trip is byte identical") {
  auto idx = random_index(40, 12, 9);
  auto dir = std::filesystem::temp_directory_path();
  idx.save(dir / "fetch_idx_a.bin");
  auto back = VectorIndex::load(dir / "fetch_idx_a.bin");
  back.save(dir / "fetch_idx_b.bin");
  CHECK(back.ids() == idx.ids());
  CHECK(slurp(dir / "fetch_idx_a.bin") == slurp(dir / "fetch_idx_b.bin"));
}

TEST_CASE("nearest excludes by id, not by vector") {
  VectorIndex two(2);
  two.add("A", std::vector<float>{1, 0});
  two.add("B", std::vector<float>{0, 1});
  CHECK(two.nearest_posts({"A"}) == std::set<std::string>{"B"});

  VectorIndex dup(2);
  dup.add("A", std::vector<float>{1, 0});
  dup.add("A2", std::vector<float>{1, 0});
  dup.add("C", std::vector<float>{0.6f, 0.8f});
  CHECK(dup.nearest_posts({"A"}) == std::set<std::string>{"A2"});
}

TEST_CASE("nearest errors") {
  VectorIndex one(2);
  one.add("A", std::vector<float>{1, 0});
  CHECK_THROWS(one.nearest_posts({"A"}));
  auto idx = random_index(5, 3, 1);
  CHECK_THROWS(idx.nearest_posts({"nope"}));
}

TEST_CASE("nearest matches a brute-force scan") {
  auto idx = random_index(1000, 64, 21);
  Rng rng(4);
  std::set<std::string> seeds;
  while (seeds.size() < 50) seeds.insert("id" + std::to_string(rng.below(1000)));
  for (std::size_t per : {1u, 3u}) {
    auto got = idx.nearest_posts(seeds, per);
    CHECK(got == brute_nearest(idx, seeds, per));
    for (const auto& s : seeds) CHECK_FALSE(got.count(s));
  }
}
