#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fetch/corpus.hpp"
#include "fetch/lexicon.hpp"

namespace fetch {

// A planted-lexicon benchmark. Positive posts fill a context template's
// "{TERM}" slot with one term drawn from seeds + planted; negative posts use
// slot-free templates. Every post then gets `fillers_per_post` distinct words
// from the filler list.
struct PlantSpec {
  std::vector<std::string> seeds;
  std::vector<std::string> planted;
  std::size_t n_posts = 10000;
  double plant_rate = 1.0;
  std::vector<std::string> context_templates;
  std::vector<std::string> negative_templates;
  std::vector<std::string> filler_words;
  std::size_t fillers_per_post = 6;
  std::uint64_t rng_seed = 1;

  // Pseudo-word seeds/planted terms and neutral templates and fillers.
  static PlantSpec standard(std::size_t n_seeds = 5, std::size_t n_planted = 20);

  // Throws Error naming the first broken requirement.
  void validate() const;
  nlohmann::json to_json() const;
};

struct PlantedOccurrence {
  std::string post_id;
  std::string term;
  std::size_t offset = 0;  // byte offset in the post text

  bool operator==(const PlantedOccurrence&) const = default;
};

struct SynthCorpus {
  std::vector<Post> posts;
  std::vector<GlossaryEntry> glossary;   // seeds then planted, one entry per term
  std::vector<PlantedOccurrence> key;    // every seed/planted occurrence, in post order
  SeedSplit split;                       // train = seeds, test = planted
};

SynthCorpus generate_corpus(const PlantSpec& spec);

// Writes corpus.jsonl, glossary.json, answer_key.jsonl and split.json into
// `dir` (created if needed).
SynthCorpus generate(const PlantSpec& spec, const std::filesystem::path& dir);

}  // namespace fetch
