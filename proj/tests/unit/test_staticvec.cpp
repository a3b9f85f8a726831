#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "fetch/common.hpp"
#include "fetch/embedding.hpp"
#include "fetch/phraser.hpp"

using namespace fetch;

namespace {

TokenCorpus new_york_fixture() {
  // total = 100, count(new) = 5, count(york) = 4, count(new york) = 4
  TokenCorpus c(4, TokenStream{"new", "york"});
  c.push_back({"new"});
  TokenStream filler;
  for (int i = 0; i < 91; ++i) filler.push_back("f" + std::to_string(i));
  c.push_back(filler);
  return c;
}

double brute_cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  return dot / std::sqrt(na * nb);
}

EmbeddingModel random_model(std::size_t n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> toks;
  std::vector<float> vecs;
  for (std::size_t i = 0; i < n; ++i) {
    toks.push_back("t" + std::to_string(i));
    for (int d = 0; d < dim; ++d) vecs.push_back(static_cast<float>(rng.uniform() * 2 - 1));
  }
  return EmbeddingModel(toks, vecs, dim, seed, 0);
}

// Twenty topics with private context words; alpha and beta both live in topic 0.
TokenCorpus topic_corpus(std::uint64_t seed) {
  Rng rng(seed);
  TokenCorpus c;
  auto ctx = [](int topic, std::uint64_t j) { return "c" + std::to_string(topic) + "_" + std::to_string(j); };
  for (int rep = 0; rep < 200; ++rep) {
    for (const char* w : {"alpha", "beta"}) {
      TokenStream s;
      for (int j = 0; j < 3; ++j) s.push_back(ctx(0, rng.below(8)));
      s.push_back(w);
      for (int j = 0; j < 3; ++j) s.push_back(ctx(0, rng.below(8)));
      c.push_back(s);
    }
  }
  for (int topic = 1; topic < 20; ++topic) {
    for (int rep = 0; rep < 60; ++rep) {
      TokenStream s;
      for (int j = 0; j < 3; ++j) s.push_back(ctx(topic, rng.below(8)));
      s.push_back("w" + std::to_string(topic) + "_" + std::to_string(rng.below(3)));
      for (int j = 0; j < 3; ++j) s.push_back(ctx(topic, rng.below(8)));
      c.push_back(s);
    }
  }
  return c;
}

Word2VecParams small_params() {
  Word2VecParams p;
  p.dim = 32;
  p.epochs = 5;
  p.min_count = 1;
  p.seed = 7;
  return p;
}

}  // namespace

TEST_CASE("phraser merges the score-15 pair") {
  PhraserParams p;
  p.min_count = 1;
  p.threshold = 10;
  auto layer = PhraseLayer::learn(new_york_fixture(), p, 2);
  CHECK(layer.total_tokens == 100);
  CHECK(layer.score("new", "york") == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(layer.apply({"new", "york", "f1"}) == TokenStream{"new_york", "f1"});
  CHECK(layer.phrasegrams() == std::set<std::string>{"new_york"});
}

TEST_CASE("phraser refuses a pair seen fewer than min_count times") {
  PhraserParams p;  // min_count 5, threshold 10
  TokenCorpus c = {{"rare", "pair"}};
  for (int i = 0; i < 20; ++i) c.push_back({"x" + std::to_string(i)});
  auto layer = PhraseLayer::learn(c, p, 2);
  CHECK(layer.score("rare", "pair") <= 0.0);
  CHECK(layer.apply({"rare", "pair"}) == TokenStream{"rare", "pair"});
}

TEST_CASE("two passes reach a trigram") {
  PhraserParams p;
  p.min_count = 1;
  p.threshold = 1;
  TokenCorpus c(10, TokenStream{"new", "york", "city"});
  TokenStream filler;
  for (int i = 0; i < 90; ++i) filler.push_back("f" + std::to_string(i));
  c.push_back(filler);
  auto one = PhraserModel::learn(c, p, 1);
  CHECK(one.apply({"new", "york", "city"}) == TokenStream{"new_york", "city"});
  auto two = PhraserModel::learn(c, p, 2);
  CHECK(two.apply({"new", "york", "city"}) == TokenStream{"new_york_city"});
  CHECK(merge_phrases(c, two)[0] == TokenStream{"new_york_city"});
}

TEST_CASE("greedy merging does not overlap") {
  PhraserParams p;
  p.min_count = 1;
  p.threshold = 0.5;
  TokenCorpus c(10, TokenStream{"a", "b", "c"});
  auto layer = PhraseLayer::learn(c, p, 2);
  REQUIRE(layer.should_merge("a", "b"));
  REQUIRE(layer.should_merge("b", "c"));
  CHECK(layer.apply({"a", "b", "c"}) == TokenStream{"a_b", "c"});
}

TEST_CASE("raising the threshold never adds merged pairs") {
  Rng rng(3);
  TokenCorpus c;
  for (int s = 0; s < 300; ++s) {
    TokenStream t;
    for (int i = 0; i < 12; ++i) t.push_back("w" + std::to_string(rng.below(25)));
    c.push_back(t);
  }
  std::set<std::string> prev;
  bool first = true;
  for (double th : {-100.0, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    PhraserParams p;
    p.min_count = 1;
    p.threshold = th;
    auto grams = PhraseLayer::learn(c, p, 2).phrasegrams();
    if (!first) CHECK(std::includes(prev.begin(), prev.end(), grams.begin(), grams.end()));
    prev = grams;
    first = false;
  }
}

TEST_CASE("phrase token surfaces") {
  CHECK(phrase_token_to_surface("new_york") == "new york");
  CHECK(phrase_token_to_surface(":glass_of_milk:") == ":glass_of_milk:");
  CHECK(surface_to_phrase_token("New York") == "new_york");
}

TEST_CASE("embedding identity cosine and symmetry") {
  auto m = EmbeddingModel::train(topic_corpus(1), small_params());
  for (std::size_t i = 0; i < m.size(); i += 7) {
    const auto& t = m.tokens()[i];
    CHECK(*m.similarity(t, t) == doctest::Approx(1.0).epsilon(1e-6));
  }
  for (std::size_t i = 0; i + 1 < m.size(); i += 5) {
    const auto& a = m.tokens()[i];
    const auto& b = m.tokens()[i + 1];
    CHECK(std::abs(*m.similarity(a, b) - *m.similarity(b, a)) < 1e-9);
  }
}

TEST_CASE("tokens below min_count are dropped") {
  TokenCorpus c;
  for (int i = 0; i < 5; ++i) c.push_back({"often", "sometimes"});
  for (int i = 0; i < 4; ++i) c.push_back({"rare"});
  auto vocab = EmbeddingModel::build_vocab(c, 5, 100);
  std::set<std::string> got;
  for (const auto& [t, n] : vocab) got.insert(t);
  CHECK(got == std::set<std::string>{"often", "sometimes"});
  Word2VecParams p = small_params();
  p.min_count = 50;
  CHECK(EmbeddingModel::build_vocab(c, 50, 100).empty());
  CHECK_THROWS_AS(EmbeddingModel::train(c, p), Error);
}

TEST_CASE("vocabulary cap holds on a wide corpus") {
  TokenCorpus c;
  for (int i = 0; i < 400; ++i) c.push_back({"u" + std::to_string(i), "v" + std::to_string(i % 40)});
  auto vocab = EmbeddingModel::build_vocab(c, 1, 50);
  CHECK(vocab.size() == 50);
  // the 40 repeated tokens are the most frequent and must survive the cut
  for (std::size_t i = 0; i < 40; ++i) CHECK(vocab[i].first[0] == 'v');
  Word2VecParams p = small_params();
  p.max_vocab = 50;
  p.epochs = 1;
  CHECK(EmbeddingModel::train(c, p).size() <= 50);
}

TEST_CASE("shared contexts make alpha and beta close") {
  auto m = EmbeddingModel::train(topic_corpus(5), small_params());
  std::vector<double> all;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) all.push_back(brute_cosine(m.vector(i), m.vector(j)));
  }
  std::sort(all.begin(), all.end());
  double p95 = all[static_cast<std::size_t>(0.95 * (all.size() - 1))];
  double ab = brute_cosine(m.vector(*m.index_of("alpha")), m.vector(*m.index_of("beta")));
  CHECK(ab > p95);
}

TEST_CASE("single-threaded training is deterministic") {
  auto c = topic_corpus(9);
  auto a = EmbeddingModel::train(c, small_params());
  auto b = EmbeddingModel::train(c, small_params());
  REQUIRE(a.tokens() == b.tokens());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto va = a.vector(i), vb = b.vector(i);
    CHECK(std::equal(va.begin(), va.end(), vb.begin()));
  }
}

TEST_CASE("most_similar matches a brute-force scan") {
  auto m = random_model(500, 24, 11);
  for (std::size_t q : {0u, 17u, 250u, 499u}) {
    const auto& query = m.tokens()[q];
    std::vector<Neighbor> want;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i != q) want.push_back({m.tokens()[i], brute_cosine(m.vector(q), m.vector(i))});
    }
    std::sort(want.begin(), want.end(), [](const auto& x, const auto& y) {
      return x.cosine != y.cosine ? x.cosine > y.cosine : x.token < y.token;
    });
    auto got = m.most_similar(query, 10);
    CHECK_FALSE(got.oov);
    REQUIRE(got.items.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(got.items[i].token == want[i].token);
      CHECK(got.items[i].cosine == doctest::Approx(want[i].cosine).epsilon(1e-6));
    }
  }
}

TEST_CASE("most_similar small cases") {
  EmbeddingModel two({"a", "b"}, {1, 0, 0.5f, 0.5f}, 2);
  auto r = two.most_similar("a", 1);
  REQUIRE(r.items.size() == 1);
  CHECK(r.items[0].token == "b");
  auto oov = two.most_similar("zzz", 5);
  CHECK(oov.oov);
  CHECK(oov.items.empty());
  // exact ties resolve lexicographically
  EmbeddingModel ties({"q", "c", "b", "a"}, {1, 0, 0, 1, 0, 1, 0, 1}, 2);
  auto t = ties.most_similar("q", 3);
  REQUIRE(t.items.size() == 3);
  CHECK(t.items[0].token == "a");
  CHECK(t.items[1].token == "b");
  CHECK(t.items[2].token == "c");
}

TEST_CASE("model file round trip") {
  auto m = random_model(30, 8, 4);
  auto path = std::filesystem::temp_directory_path() / "fetch_test_model.bin";
  m.save(path);
  auto back = EmbeddingModel::load(path);
  CHECK(back.tokens() == m.tokens());
  CHECK(back.dim() == 8);
  CHECK(back.seed() == 4);
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto a = m.vector(i), b = back.vector(i);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
}
