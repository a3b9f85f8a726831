#include "fetch/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "fetch/common.hpp"

namespace fetch {

using nlohmann::json;

namespace {

constexpr std::string_view kSlot = "{TERM}";

const char* const kSyllables[] = {"zor", "blat", "quen", "mik", "vra", "dex", "plo",
                                  "tiv", "gru", "nak", "fen", "dru", "kal", "vop",
                                  "sil", "tra", "mun", "pek", "rov", "zib"};

// Two-syllable pseudo-words, distinct, in a fixed order.
std::vector<std::string> pseudo_words(std::size_t n) {
  constexpr std::size_t kN = std::size(kSyllables);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t gap = 1; gap < kN && out.size() < n; ++gap) {
    for (std::size_t a = 0; a < kN && out.size() < n; ++a) {
      std::string w = std::string(kSyllables[a]) + kSyllables[(a + gap) % kN];
      if (seen.insert(w).second) out.push_back(w);
    }
  }
  if (out.size() < n) throw Error("pseudo-word pool exhausted");
  return out;
}

std::string post_id(std::size_t i, std::size_t n) {
  int width = std::max(6, static_cast<int>(std::to_string(n).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%0*zu", width, i + 1);
  return buf;
}

}  // namespace

PlantSpec PlantSpec::standard(std::size_t n_seeds, std::size_t n_planted) {
  PlantSpec spec;
  // Every fifth term is a two-word phrase.
  std::size_t words_needed = 0;
  for (std::size_t i = 0; i < n_seeds + n_planted; ++i) words_needed += (i % 5 == 4) ? 2 : 1;
  auto words = pseudo_words(words_needed);
  std::size_t w = 0;
  for (std::size_t i = 0; i < n_seeds + n_planted; ++i) {
    std::string term = words[w++];
    if (i % 5 == 4) term += " " + words[w++];
    (i < n_seeds ? spec.seeds : spec.planted).push_back(term);
  }
  spec.context_templates = {
      "honestly the {TERM} crowd showed up at the marina again",
      "cannot believe they mentioned {TERM} during the council meeting",
      "my neighbor keeps posting about {TERM} on the forum",
      "everyone at the barbecue was whispering about {TERM} tonight",
      "saw another banner with {TERM} near the highway",
      "the podcast host joked about {TERM} for an hour",
      "that newsletter had {TERM} written all over it",
      "overheard two guys discussing {TERM} at the diner",
  };
  spec.negative_templates = {
      "just got back from the grocery store",
      "weather looks decent for the weekend",
      "finally fixed the squeaky door hinge",
      "reading a long novel on the train",
  };
  spec.filler_words = {"apple",  "river",  "window", "garden", "pencil", "blanket",
                       "ladder", "orange", "harbor", "violin", "meadow", "lantern",
                       "carpet", "pillow", "bucket", "mirror", "tunnel", "saddle",
                       "kettle", "basket", "candle", "feather", "hammer", "jacket",
                       "ribbon", "anchor", "button", "cactus", "wagon",  "zipper"};
  return spec;
}

void PlantSpec::validate() const {
  if (seeds.empty() && planted.empty()) throw Error("plant spec: no seed or planted terms");
  std::set<std::string> s;
  for (const auto& t : seeds) s.insert(collapse_ws(t));
  for (const auto& t : planted) {
    if (s.count(collapse_ws(t))) throw Error("plant spec: term is both seed and planted: " + t);
  }
  if (!(plant_rate > 0.0 && plant_rate <= 1.0)) throw Error("plant spec: plant_rate must be in (0, 1]");
  if (context_templates.empty()) throw Error("plant spec: no context templates");
  for (const auto& t : context_templates) {
    if (t.find(kSlot) == std::string::npos) throw Error("plant spec: template without {TERM}: " + t);
  }
  if (plant_rate < 1.0 && negative_templates.empty()) {
    throw Error("plant spec: plant_rate < 1 needs negative templates");
  }
  if (fillers_per_post > filler_words.size()) {
    throw Error("plant spec: fillers_per_post exceeds the filler list");
  }
}

json PlantSpec::to_json() const {
  return {{"seeds", seeds},
          {"planted", planted},
          {"n_posts", n_posts},
          {"plant_rate", plant_rate},
          {"context_templates", context_templates},
          {"negative_templates", negative_templates},
          {"filler_words", filler_words},
          {"fillers_per_post", fillers_per_post},
          {"rng_seed", rng_seed}};
}

SynthCorpus generate_corpus(const PlantSpec& spec) {
  spec.validate();
  SynthCorpus out;
  std::vector<std::string> terms = spec.seeds;
  terms.insert(terms.end(), spec.planted.begin(), spec.planted.end());

  Rng rng(spec.rng_seed);
  const auto n_positive = static_cast<std::size_t>(
      std::floor(spec.plant_rate * static_cast<double>(spec.n_posts) + 0.5));
  std::vector<std::size_t> order(spec.n_posts);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  // positive_term[i] = index into terms, or npos for a negative post.
  std::vector<std::size_t> positive_term(spec.n_posts, std::string::npos);
  for (std::size_t j = 0; j < n_positive && j < order.size(); ++j) positive_term[order[j]] = j % terms.size();

  std::vector<std::string> fillers = spec.filler_words;
  for (std::size_t i = 0; i < spec.n_posts; ++i) {
    Post p;
    p.id = post_id(i, spec.n_posts);
    if (positive_term[i] != std::string::npos) {
      const std::string& term = terms[positive_term[i]];
      std::string tmpl = spec.context_templates[rng.below(spec.context_templates.size())];
      std::size_t slot = tmpl.find(kSlot);
      p.text = tmpl.substr(0, slot) + term + tmpl.substr(slot + kSlot.size());
      out.key.push_back({p.id, term, slot});
    } else {
      p.text = spec.negative_templates[rng.below(spec.negative_templates.size())];
    }
    // Partial Fisher-Yates: the first fillers_per_post entries become the sample.
    for (std::size_t f = 0; f < spec.fillers_per_post; ++f) {
      std::size_t j = f + static_cast<std::size_t>(rng.below(fillers.size() - f));
      std::swap(fillers[f], fillers[j]);
      p.text += " " + fillers[f];
    }
    out.posts.push_back(std::move(p));
  }

  for (const auto& t : spec.seeds) out.split.train.push_back(make_entry(t, {}));
  for (const auto& t : spec.planted) out.split.test.push_back(make_entry(t, {}));
  out.glossary = out.split.train;
  out.glossary.insert(out.glossary.end(), out.split.test.begin(), out.split.test.end());
  auto by_root = [](const GlossaryEntry& a, const GlossaryEntry& b) { return a.root < b.root; };
  std::sort(out.split.train.begin(), out.split.train.end(), by_root);
  std::sort(out.split.test.begin(), out.split.test.end(), by_root);
  out.split.ratio = static_cast<double>(spec.seeds.size()) / static_cast<double>(terms.size());
  out.split.rng_seed = spec.rng_seed;
  return out;
}

SynthCorpus generate(const PlantSpec& spec, const std::filesystem::path& dir) {
  SynthCorpus out = generate_corpus(spec);
  std::filesystem::create_directories(dir);
  json header = {{"generator", "synthbench"}, {"spec", spec.to_json()}};
  write_corpus(dir / "corpus.jsonl", out.posts, &header);
  {
    std::ofstream g(dir / "glossary.json");
    g << glossary_to_json(out.glossary).dump(2) << '\n';
  }
  {
    std::ofstream k(dir / "answer_key.jsonl");
    for (const auto& o : out.key) {
      k << json{{"post_id", o.post_id}, {"term", o.term}, {"offset", o.offset}}.dump() << '\n';
    }
  }
  {
    std::ofstream s(dir / "split.json");
    s << out.split.to_json().dump(2) << '\n';
  }
  return out;
}

}  // namespace fetch
