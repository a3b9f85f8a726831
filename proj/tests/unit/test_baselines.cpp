#include <algorithm>
#include <atomic>
#include <map>

#include "doctest.h"

#include "fetch/baselines.hpp"
#include "fetch/common.hpp"
#include "fetch/eval.hpp"

using namespace fetch;

namespace {

class FixedFill final : public FillMaskBackend {
 public:
  std::vector<Fill> fill(const std::string& text, std::size_t top_k) const override {
    seen.push_back(text);
    std::vector<Fill> out = {{"dog", 0.6}, {"cat", 0.4}};
    if (out.size() > top_k) out.resize(top_k);
    return out;
  }
  std::vector<double> score(const std::string&, const std::vector<std::size_t>& pos) const override {
    return std::vector<double>(pos.size(), -1.0);
  }
  mutable std::vector<std::string> seen;
};

// Fails on every post whose text contains "fail".
class FlakyFill final : public FillMaskBackend {
 public:
  std::vector<Fill> fill(const std::string& text, std::size_t) const override {
    if (text.find("fail") != std::string::npos) throw EndpointError("boom");
    return {{"dog", 1.0}};
  }
  std::vector<double> score(const std::string&, const std::vector<std::size_t>& pos) const override {
    return std::vector<double>(pos.size(), 0.0);
  }
};

// log p = 0 for the words of one favored phrase, -10 for anything else.
class FavorPhrase final : public FillMaskBackend {
 public:
  explicit FavorPhrase(std::set<std::string> words) : words_(std::move(words)) {}
  std::vector<Fill> fill(const std::string&, std::size_t) const override { return {}; }
  std::vector<double> score(const std::string& text, const std::vector<std::size_t>& pos) const override {
    std::vector<double> out;
    for (auto p : pos) {
      auto end = text.find(' ', p);
      std::string w = text.substr(p, end == std::string::npos ? std::string::npos : end - p);
      out.push_back(words_.count(w) ? 0.0 : -10.0);
    }
    return out;
  }

 private:
  std::set<std::string> words_;
};

std::vector<Post> seed_posts(std::size_t n, const std::string& prefix = "the") {
  std::vector<Post> posts;
  for (std::size_t i = 0; i < n; ++i) {
    posts.push_back({"p" + std::to_string(i), prefix + " globalist number " + std::to_string(i), {}});
    posts.push_back({"q" + std::to_string(i), "unrelated chatter " + std::to_string(i), {}});
  }
  return posts;
}

// "zog" and "globalist" share one context family; other words have their own.
TokenCorpus zog_corpus() {
  Rng rng(17);
  TokenCorpus c;
  const std::vector<std::vector<std::string>> families = {
      {"bank", "media", "control", "secret", "plan", "elite"},
      {"rain", "cloud", "wind", "storm", "sun", "sky"},
      {"goal", "team", "match", "score", "coach", "fan"},
      {"bread", "soup", "salt", "cook", "meal", "dish"}};
  auto ctx = [&](std::size_t f) { return families[f][rng.below(families[f].size())]; };
  for (int rep = 0; rep < 300; ++rep) {
    for (const char* w : {"globalist", "zog"}) {
      c.push_back({ctx(0), ctx(0), w, ctx(0), ctx(0)});
    }
    for (std::size_t f = 1; f < families.size(); ++f) {
      c.push_back({ctx(f), ctx(f), "w" + std::to_string(f) + std::to_string(rng.below(3)), ctx(f), ctx(f)});
    }
  }
  return c;
}

}  // namespace

TEST_CASE("zero levels give an empty trace") {
  EmbeddingModel m({"a", "b"}, {1, 0, 0, 1}, 2);
  CHECK(expand_seeds(m, {"a"}, 10, 0).levels.empty());
}

TEST_CASE("seeds outside the vocabulary give an empty trace") {
  EmbeddingModel m({"a", "b"}, {1, 0, 0, 1}, 2);
  auto t = expand_seeds(m, {"zzz"}, 10, 3);
  CHECK(t.size() == 0);
  CHECK(t.skipped_seeds == std::vector<std::string>{"zzz"});
}

TEST_CASE("code word sharing contexts with a seed appears at level one") {
  Word2VecParams p;
  p.dim = 24;
  p.epochs = 5;
  p.min_count = 1;
  p.seed = 3;
  auto m = EmbeddingModel::train(zog_corpus(), p);
  auto trace = expand_seeds(m, {"globalist"}, 10, 10);
  REQUIRE_FALSE(trace.levels.empty());
  // level 1 is exactly the brute-force top-10 of the seed
  std::vector<std::pair<double, std::string>> all;
  for (const auto& t : m.tokens()) {
    if (t != "globalist") all.emplace_back(-*m.similarity("globalist", t), t);
  }
  std::sort(all.begin(), all.end());
  std::set<std::string> want, got;
  for (std::size_t i = 0; i < 10; ++i) want.insert(all[i].second);
  for (const auto& n : trace.levels[0]) got.insert(n.token);
  CHECK(got == want);
  CHECK(got.count("zog"));
}

TEST_CASE("expansion levels are disjoint and bounded") {
  Word2VecParams p;
  p.dim = 16;
  p.epochs = 2;
  p.min_count = 1;
  auto m = EmbeddingModel::train(zog_corpus(), p);
  for (std::size_t k : {1u, 3u, 10u}) {
    auto trace = expand_seeds(m, {"globalist", "bank"}, k, 10);
    std::set<std::string> seen = {"globalist", "bank"};
    std::size_t prev = 2;
    for (const auto& level : trace.levels) {
      CHECK(level.size() <= k * prev);
      for (const auto& n : level) CHECK(seen.insert(n.token).second);
      prev = level.size();
    }
  }
}

TEST_CASE("trace flattening keeps level order and surfaces phrases") {
  ExpansionTrace t;
  t.levels = {{{"new_york", 0.9}, {"zog", 0.8}}, {{"alpha", 0.99}}};
  auto list = trace_to_candidates(t, "w2v");
  CHECK(list.terms() == std::vector<std::string>{"new york", "zog", "alpha"});
  CHECK(list.items[2].level == 2);
  CHECK(list.items[2].score == doctest::Approx(0.5));
  CHECK_NOTHROW(list.validate());
}

TEST_CASE("seed tokens follow preprocessing and phrase joining") {
  PreprocessConfig cfg;
  auto toks = seed_tokens_for({make_entry("deep state", {"globalists"})}, cfg);
  CHECK(toks == std::set<std::string>{"deep_state", "globalist"});
}

TEST_CASE("seed sentence sampling") {
  SurfaceMatcher m({make_entry("globalist", {})});
  auto posts = seed_posts(30);
  auto all = sample_seed_sentences(posts, m, 2000, 1);
  CHECK(all.size() == 30);
  auto a = sample_seed_sentences(posts, m, 10, 5);
  auto b = sample_seed_sentences(posts, m, 10, 5);
  CHECK(a.size() == 10);
  std::vector<std::size_t> ia, ib;
  for (const auto& s : a) ia.push_back(s.post);
  for (const auto& s : b) ib.push_back(s.post);
  CHECK(ia == ib);
  CHECK(std::is_sorted(ia.begin(), ia.end()));
  for (auto i : ia) CHECK(posts[i].text.find("globalist") != std::string::npos);
  CHECK(substitute("the globalist x", a[0].hit, "[MASK]").find("[MASK]") != std::string::npos);
}

TEST_CASE("fixed fill distribution ranks dog above cat") {
  FixedFill fm;
  MlmParams p;
  p.k = 10;
  EndpointStats st;
  auto list = mlm_candidates(seed_posts(7), {make_entry("globalist", {})}, fm, p, &st);
  CHECK(list.terms() == std::vector<std::string>{"dog", "cat"});
  CHECK(list.items[0].score == doctest::Approx(0.6 * 7));
  CHECK(st.requested == 7);
  for (const auto& s : fm.seen) CHECK(s.find("[MASK]") != std::string::npos);
  CHECK(fm.seen[0] == "the [MASK] number 0");

  p.k = 0;
  CHECK(mlm_candidates(seed_posts(3), {make_entry("globalist", {})}, fm, p).empty());
}

TEST_CASE("mlm output never contains seed surfaces") {
  class EchoSeed final : public FillMaskBackend {
   public:
    std::vector<Fill> fill(const std::string&, std::size_t) const override {
      return {{"globalists", 0.5}, {"Globalist", 0.3}, {"zog", 0.2}};
    }
    std::vector<double> score(const std::string&, const std::vector<std::size_t>& p) const override {
      return std::vector<double>(p.size(), 0);
    }
  } fm;
  auto list = mlm_candidates(seed_posts(4), {make_entry("globalist", {"globalists"})}, fm, {});
  CHECK(list.terms() == std::vector<std::string>{"zog"});
}

TEST_CASE("mlm tolerates some endpoint failures but not most") {
  FlakyFill fm;
  auto posts = seed_posts(6);
  posts[0].text = "fail globalist";
  EndpointStats st;
  auto list = mlm_candidates(posts, {make_entry("globalist", {})}, fm, {}, &st);
  CHECK(st.failed == 1);
  CHECK(list.terms() == std::vector<std::string>{"dog"});
  for (std::size_t i = 0; i < 12; i += 2) posts[i].text = "fail globalist " + std::to_string(i);
  CHECK_THROWS_AS(mlm_candidates(posts, {make_entry("globalist", {})}, fm, {}), EndpointError);
}

TEST_CASE("phrase mining finds a frequent collocation") {
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back("the deep state is watching item" + std::to_string(i));
  for (int i = 0; i < 50; ++i) texts.push_back("a sunny day for item" + std::to_string(i));
  auto mined = mine_phrases(texts, english_stopwords());
  auto it = std::find_if(mined.begin(), mined.end(), [](const auto& m) { return m.phrase == "deep state"; });
  REQUIRE(it != mined.end());
  CHECK(it->support == 50);
  CHECK(it->npmi == doctest::Approx(1.0));
  for (const auto& m : mined) {
    CHECK(m.support >= 10);
    CHECK(m.npmi >= 0.5);
  }
  // below support: nothing
  texts.resize(9);
  CHECK(mine_phrases(texts, english_stopwords()).empty());
}

TEST_CASE("word offsets") {
  CHECK(word_offsets("blue  whale", 10) == std::vector<std::size_t>{10, 16});
}

TEST_CASE("epd pools everything when few phrases exist and follows the scorer") {
  std::vector<Post> posts;
  const std::vector<std::string> phrases = {"blue whale", "red fox", "green tree frog"};
  for (int i = 0; i < 12; ++i) {
    for (const auto& ph : phrases) posts.push_back({"x", "look at the " + ph + " now " + std::to_string(i), {}});
    posts.push_back({"s" + std::to_string(i), "the globalist hides " + std::to_string(i), {}});
  }
  for (std::size_t i = 0; i < posts.size(); ++i) posts[i].id = "p" + std::to_string(i);
  PreprocessConfig cfg;
  TokenCorpus toks;
  for (const auto& p : posts) toks.push_back(preprocess_text(p.text, cfg));
  Word2VecParams wp;
  wp.dim = 8;
  wp.epochs = 1;
  wp.min_count = 1;
  auto model = EmbeddingModel::train(toks, wp);
  std::vector<GlossaryEntry> seeds = {make_entry("globalist", {})};

  std::vector<std::string> texts;
  for (const auto& p : posts) texts.push_back(p.text);
  auto mined = mine_phrases(texts, cfg.stopwords);
  auto pool = pool_phrases(mined, seeds, model, cfg, 1000);
  CHECK(pool.size() == mined.size());

  FavorPhrase scorer({"red", "fox"});
  EpdParams ep;
  ep.k = 5;
  auto list = epd_candidates(posts, seeds, scorer, model, cfg, ep);
  REQUIRE_FALSE(list.empty());
  CHECK(list.items[0].term == "red fox");
  for (const auto& t : list.terms()) CHECK(normalize_term(t) != "globalist");

  ep.k = 0;
  CHECK(epd_candidates(posts, seeds, scorer, model, cfg, ep).empty());
}
