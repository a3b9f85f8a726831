#include "fetch/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "fetch/common.hpp"
#include "fetch/emoji.hpp"

namespace fetch {

using nlohmann::json;

namespace {

// Glossary phrases that name emoji rather than words. Matched as the literal
// code points and as the alias token produced by preprocessing.
const std::map<std::string, std::vector<std::string>>& emoji_phrases() {
  static const std::map<std::string, std::vector<std::string>> kPhrases = {
      {"bear emoji", {"\U0001F43B"}},
      {"checkered flag emoji", {"\U0001F3C1"}},
      {"cherry emoji", {"\U0001F352"}},
      {"dinosaur emojis", {"\U0001F995", "\U0001F996"}},
      {"frog emoji", {"\U0001F438"}},
      {"lizard emoji", {"\U0001F98E"}},
      {"milk emoji", {"\U0001F95B"}},
      {"ok sign emoji", {"\U0001F44C"}},
      {"pine tree emoji", {"\U0001F332"}},
      {"red square emoji", {"\U0001F7E5"}},
      {"spiderweb emoji", {"\U0001F578"}},
      {"two lightning bolt emojis", {"⚡⚡"}},
      {"black and orange square emojis", {"⬛\U0001F7E7"}},
  };
  return kPhrases;
}

bool is_word(char c) { return is_ascii_word_char(static_cast<unsigned char>(c)); }

}  // namespace

GlossaryEntry make_entry(std::string_view root, const std::vector<std::string>& surfaces) {
  GlossaryEntry e;
  e.root = collapse_ws(root);
  if (e.root.empty()) throw Error("glossary entry with empty root");
  e.surfaces.insert(e.root);
  for (const auto& s : surfaces) {
    std::string norm = collapse_ws(s);
    if (!norm.empty()) e.surfaces.insert(norm);
  }
  std::vector<std::string> extra;
  for (const auto& s : e.surfaces) {
    auto it = emoji_phrases().find(s);
    if (it == emoji_phrases().end()) continue;
    for (const auto& glyphs : it->second) {
      extra.push_back(glyphs);
      // Alias form of a single-emoji glyph, e.g. ":glass_of_milk:".
      if (auto alias = emoji_alias(glyphs)) extra.push_back(ascii_lower(*alias));
    }
  }
  e.surfaces.insert(extra.begin(), extra.end());
  e.ngram_len = static_cast<int>(split_ws(e.root).size());
  return e;
}

std::vector<GlossaryEntry> parse_glossary(const json& doc) {
  if (!doc.is_array()) throw Error("glossary must be a JSON array");
  std::vector<GlossaryEntry> out;
  std::set<std::string> seen;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("root") || !item["root"].is_string()) {
      throw Error("glossary item without a string \"root\"");
    }
    std::vector<std::string> surfaces;
    if (item.contains("surfaces")) {
      for (const auto& s : item["surfaces"]) {
        if (!s.is_string()) throw Error("glossary surfaces must be strings");
        surfaces.push_back(s.get<std::string>());
      }
    }
    GlossaryEntry e = make_entry(item["root"].get<std::string>(), surfaces);
    if (!seen.insert(e.root).second) throw Error("duplicate glossary root: " + e.root);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<GlossaryEntry> load_glossary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open glossary: " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error("glossary is not valid JSON: " + path.string());
  return parse_glossary(doc);
}

json glossary_to_json(const std::vector<GlossaryEntry>& glossary) {
  json arr = json::array();
  for (const auto& e : glossary) {
    json surfaces = json::array();
    for (const auto& s : e.surfaces) {
      if (s != e.root) surfaces.push_back(s);
    }
    arr.push_back(json{{"root", e.root}, {"surfaces", surfaces}});
  }
  return arr;
}

// ---- SurfaceMatcher ------------------------------------------------------

SurfaceMatcher::SurfaceMatcher(const std::vector<GlossaryEntry>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (const auto& s : entries[i].surfaces) surfaces_.push_back({s, i});
  }
}

bool SurfaceMatcher::occurs_at(std::string_view lowered, std::size_t pos, const std::string& s) {
  if (pos > 0 && is_word(lowered[pos - 1]) && is_word(s.front())) return false;
  std::size_t end = pos + s.size();
  if (end < lowered.size() && is_word(lowered[end]) && is_word(s.back())) return false;
  return true;
}

std::optional<std::size_t> SurfaceMatcher::find(std::string_view lowered, const std::string& s,
                                                std::size_t from) const {
  for (std::size_t pos = lowered.find(s, from); pos != std::string_view::npos;
       pos = lowered.find(s, pos + 1)) {
    if (occurs_at(lowered, pos, s)) return pos;
  }
  return std::nullopt;
}

std::vector<std::size_t> SurfaceMatcher::entries_in(std::string_view text) const {
  std::string lowered = ascii_lower(text);
  std::vector<std::size_t> out;
  for (const auto& s : surfaces_) {
    if (!out.empty() && std::find(out.begin(), out.end(), s.entry) != out.end()) continue;
    if (find(lowered, s.text, 0)) out.push_back(s.entry);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SurfaceMatcher::any(std::string_view text) const {
  std::string lowered = ascii_lower(text);
  return std::any_of(surfaces_.begin(), surfaces_.end(),
                     [&](const Surface& s) { return find(lowered, s.text, 0).has_value(); });
}

std::optional<SurfaceHit> SurfaceMatcher::first(std::string_view text) const {
  std::string lowered = ascii_lower(text);
  std::optional<SurfaceHit> best;
  for (const auto& s : surfaces_) {
    auto pos = find(lowered, s.text, 0);
    if (!pos) continue;
    if (!best || *pos < best->offset || (*pos == best->offset && s.text.size() > best->length)) {
      best = SurfaceHit{s.entry, *pos, s.text.size()};
    }
  }
  return best;
}

// ---- presence --------------------------------------------------------------

namespace {

// Roots drop out of the scan once found, so later posts get cheaper.
template <typename NextText>
std::set<std::string> scan_presence(const std::vector<GlossaryEntry>& glossary, NextText next) {
  std::set<std::string> found;
  std::vector<GlossaryEntry> pending = glossary;
  SurfaceMatcher matcher(pending);
  while (const std::string* text = next()) {
    if (pending.empty()) break;
    auto hits = matcher.entries_in(*text);
    if (hits.empty()) continue;
    std::vector<GlossaryEntry> still;
    std::size_t h = 0;
    for (std::size_t j = 0; j < pending.size(); ++j) {
      if (h < hits.size() && hits[h] == j) {
        found.insert(pending[j].root);
        ++h;
      } else {
        still.push_back(std::move(pending[j]));
      }
    }
    pending = std::move(still);
    matcher = SurfaceMatcher(pending);
  }
  return found;
}

}  // namespace

std::set<std::string> find_present_roots(const std::vector<GlossaryEntry>& glossary,
                                         const std::vector<Post>& corpus) {
  auto it = corpus.begin();
  return scan_presence(glossary, [&]() -> const std::string* {
    return it == corpus.end() ? nullptr : &(it++)->text;
  });
}

std::set<std::string> find_present_roots(const std::vector<GlossaryEntry>& glossary,
                                         CorpusReader& corpus) {
  std::optional<Post> current;
  return scan_presence(glossary, [&]() -> const std::string* {
    current = corpus.next();
    return current ? &current->text : nullptr;
  });
}

// ---- split -----------------------------------------------------------------

json SeedSplit::to_json() const {
  json tr = json::array(), te = json::array();
  for (const auto& e : train) tr.push_back(e.root);
  for (const auto& e : test) te.push_back(e.root);
  return json{{"train", tr}, {"test", te}, {"ratio", ratio}, {"rng_seed", rng_seed}};
}

SeedSplit SeedSplit::from_json(const json& doc, const std::vector<GlossaryEntry>& glossary) {
  std::map<std::string, const GlossaryEntry*> by_root;
  for (const auto& e : glossary) by_root[e.root] = &e;
  auto resolve = [&](const char* key) {
    std::vector<GlossaryEntry> out;
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw Error(std::string("split file missing array \"") + key + "\"");
    }
    for (const auto& r : doc[key]) {
      std::string root = collapse_ws(r.get<std::string>());
      auto it = by_root.find(root);
      if (it == by_root.end()) throw Error("split references unknown root: " + root);
      out.push_back(*it->second);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.root < b.root; });
    return out;
  };
  SeedSplit s;
  s.train = resolve("train");
  s.test = resolve("test");
  s.ratio = doc.value("ratio", 0.0);
  s.rng_seed = doc.value("rng_seed", std::uint64_t{0});
  for (const auto& a : s.train) {
    for (const auto& b : s.test) {
      if (a.root == b.root) throw Error("split root in both train and test: " + a.root);
    }
  }
  return s;
}

SeedSplit split_seeds(std::vector<GlossaryEntry> present, double ratio, std::uint64_t rng_seed) {
  if (present.empty()) throw Error("split_seeds: no present roots to split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split_seeds: ratio must be in (0, 1)");

  std::sort(present.begin(), present.end(),
            [](const auto& a, const auto& b) { return a.root < b.root; });
  std::map<int, std::vector<GlossaryEntry>> strata;
  for (auto& e : present) strata[e.ngram_len].push_back(std::move(e));

  Rng rng(rng_seed);
  SeedSplit split;
  split.ratio = ratio;
  split.rng_seed = rng_seed;
  const std::vector<GlossaryEntry>* largest = nullptr;
  for (auto& [len, group] : strata) {
    rng.shuffle(group);
    auto take = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(group.size()) + 0.5));
    take = std::min(take, group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      (i < take ? split.train : split.test).push_back(group[i]);
    }
    if (!largest || group.size() > largest->size()) largest = &group;
  }
  if (split.train.empty()) {
    const std::string& promoted = largest->front().root;
    auto it = std::find_if(split.test.begin(), split.test.end(),
                           [&](const auto& e) { return e.root == promoted; });
    split.train.push_back(*it);
    split.test.erase(it);
  }
  auto by_root = [](const auto& a, const auto& b) { return a.root < b.root; };
  std::sort(split.train.begin(), split.train.end(), by_root);
  std::sort(split.test.begin(), split.test.end(), by_root);
  return split;
}

std::vector<GlossaryEntry> select_roots(const std::vector<GlossaryEntry>& glossary,
                                        const std::set<std::string>& roots) {
  std::vector<GlossaryEntry> out;
  for (const auto& e : glossary) {
    if (roots.count(e.root)) out.push_back(e);
  }
  return out;
}

}  // namespace fetch
