#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "doctest.h"

#include "fetch/common.hpp"
#include "fetch/lexicon.hpp"

using namespace fetch;
using nlohmann::json;

namespace {

std::vector<GlossaryEntry> balanced() { return load_glossary(FETCH_TEST_DATA "/balanced_roots.json"); }

std::set<std::string> roots(const std::vector<GlossaryEntry>& v) {
  std::set<std::string> out;
  for (const auto& e : v) out.insert(e.root);
  return out;
}

}  // namespace

TEST_CASE("root is always a surface") {
  auto g = parse_glossary(json::parse(R"([{"root":"cosmopolitan","surfaces":["cosmopolitans"]},
                                          {"root":"Deep  State","surfaces":[]}])"));
  REQUIRE(g.size() == 2);
  CHECK(g[0].surfaces == std::set<std::string>{"cosmopolitan", "cosmopolitans"});
  CHECK(g[1].root == "deep state");
  CHECK(g[1].surfaces == std::set<std::string>{"deep state"});
  CHECK(g[1].ngram_len == 2);
}

TEST_CASE("duplicate roots are fatal and named") {
  auto doc = json::parse(R"([{"root":"globalist"},{"root":"Globalist","surfaces":["x"]}])");
  try {
    parse_glossary(doc);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("globalist") != std::string::npos);
  }
}

TEST_CASE("balanced list loads") {
  auto g = balanced();
  CHECK(g.size() >= 170);
  for (const auto& e : g) {
    CHECK(e.surfaces.count(e.root));
    CHECK(e.ngram_len >= 1);
  }
}

TEST_CASE("emoji glossary phrases gain glyph and alias surfaces") {
  auto e = make_entry("milk emoji", {});
  CHECK(e.surfaces.count("milk emoji"));
  CHECK(e.surfaces.count("\xF0\x9F\xA5\x9B"));
  CHECK(e.surfaces.count(":glass_of_milk:"));
}

TEST_CASE("presence is token-bounded and case-insensitive") {
  std::vector<GlossaryEntry> g = {make_entry("deep state", {"deepstate"}), make_entry("milk", {}),
                                  make_entry("zog", {})};
  std::vector<Post> posts = {{"1", "I saw the Deep State at work", {}}};
  CHECK(find_present_roots(g, posts) == std::set<std::string>{"deep state"});
  posts = {{"1", "#deepstate wins", {}}};
  CHECK(find_present_roots(g, posts) == std::set<std::string>{"deep state"});
  posts = {{"1", "buttermilk and zogging", {}}};
  CHECK(find_present_roots(g, posts).empty());
  posts = {{"1", "#milk!", {}}, {"2", "(zog)", {}}};
  CHECK(find_present_roots(g, posts) == std::set<std::string>{"milk", "zog"});
}

TEST_CASE("presence counts exactly the planted roots") {
  // 340 invented roots; 77 of them planted once each among filler posts.
  std::vector<GlossaryEntry> g;
  for (int i = 0; i < 340; ++i) g.push_back(make_entry("term" + std::to_string(i) + "x", {}));
  std::vector<Post> posts;
  int planted = 0;
  for (int i = 0; i < 340; ++i) {
    if (i % 4 == 0 && planted < 77) {
      ++planted;
      posts.push_back({std::to_string(i), "some text with term" + std::to_string(i) + "x inside", {}});
    } else {
      posts.push_back({std::to_string(i), "filler term" + std::to_string(i) + "y text", {}});
    }
  }
  CHECK(find_present_roots(g, posts).size() == 77);
}

TEST_CASE("split of ten roots") {
  std::vector<GlossaryEntry> present;
  for (auto w : {"aa", "bb", "cc", "dd", "ee", "ff"}) present.push_back(make_entry(w, {}));
  for (auto w : {"g h", "i j", "k l", "m n"}) present.push_back(make_entry(w, {}));
  auto s = split_seeds(present, 0.2, 7);
  std::map<int, int> per_len;
  for (const auto& e : s.train) ++per_len[e.ngram_len];
  CHECK(per_len[1] == 1);
  CHECK(per_len[2] == 1);
  CHECK(s.train.size() + s.test.size() == 10);

  // Membership oracle: the root-sorted stratum shuffled by the same generator,
  // strata in ascending length order, first round(ratio*n) taken.
  Rng rng(7);
  std::vector<std::string> uni = {"aa", "bb", "cc", "dd", "ee", "ff"};
  std::vector<std::string> bi = {"g h", "i j", "k l", "m n"};
  rng.shuffle(uni);
  rng.shuffle(bi);
  CHECK(roots(s.train) == std::set<std::string>{uni[0], bi[0]});
}

TEST_CASE("single root is promoted to train") {
  auto s = split_seeds({make_entry("only", {})}, 0.2, 3);
  REQUIRE(s.train.size() == 1);
  CHECK(s.train[0].root == "only");
  CHECK(s.test.empty());
}

TEST_CASE("empty present set is an error") { CHECK_THROWS(split_seeds({}, 0.2, 1)); }

TEST_CASE("split is deterministic and serializes identically") {
  auto g = balanced();
  auto a = split_seeds(g, 0.2, 11).to_json().dump();
  auto b = split_seeds(g, 0.2, 11).to_json().dump();
  CHECK(a == b);
  auto shuffled = g;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(split_seeds(shuffled, 0.2, 11).to_json().dump() == a);
}

TEST_CASE("split properties across ratios and seeds") {
  auto g = balanced();
  std::map<int, int> stratum;
  for (const auto& e : g) ++stratum[e.ngram_len];
  for (double ratio : {0.1, 0.2, 0.5, 0.8}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto s = split_seeds(g, ratio, seed);
      auto tr = roots(s.train), te = roots(s.test);
      std::set<std::string> all = tr;
      all.insert(te.begin(), te.end());
      CHECK(all == roots(g));
      CHECK(tr.size() + te.size() == g.size());
      std::map<int, int> got;
      for (const auto& e : s.train) ++got[e.ngram_len];
      for (const auto& [len, n] : stratum) {
        double want = ratio * n;
        CHECK(got[len] >= static_cast<int>(std::floor(want)));
        CHECK(got[len] <= static_cast<int>(std::ceil(want)));
      }
    }
  }
}

TEST_CASE("split file round trip keeps surfaces") {
  std::vector<GlossaryEntry> g = {make_entry("deep state", {"deepstate"}), make_entry("zog", {}),
                                  make_entry("globalist", {"globalists"})};
  auto s = split_seeds(g, 0.5, 2);
  auto back = SeedSplit::from_json(s.to_json(), g);
  CHECK(back.train == s.train);
  CHECK(back.test == s.test);
  json bad = s.to_json();
  bad["test"].push_back("unknown root");
  CHECK_THROWS(SeedSplit::from_json(bad, g));
}
