#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fetch/corpus.hpp"

namespace fetch {

struct GlossaryEntry {
  std::string root;                // case-folded canonical form
  std::set<std::string> surfaces;  // case-folded; always contains root
  int ngram_len = 1;               // whitespace token count of root

  bool operator==(const GlossaryEntry&) const = default;
};

// Builds an entry: case-folds and whitespace-normalizes root and surfaces,
// adds the root to its surfaces, and for emoji glossary phrases ("milk emoji")
// adds the literal emoji and its ":alias:" token as extra surfaces.
GlossaryEntry make_entry(std::string_view root, const std::vector<std::string>& surfaces);

// Glossary file: JSON array of {"root": string, "surfaces": [string...]}.
// Throws Error naming the root on duplicates.
std::vector<GlossaryEntry> parse_glossary(const nlohmann::json& doc);
std::vector<GlossaryEntry> load_glossary(const std::filesystem::path& path);
nlohmann::json glossary_to_json(const std::vector<GlossaryEntry>& glossary);

struct SurfaceHit {
  std::size_t entry = 0;   // index into the matcher's entries
  std::size_t offset = 0;  // byte offset in the text
  std::size_t length = 0;  // byte length of the matched surface
};

// Case-insensitive, token-boundary surface matching against raw text.
// A boundary is violated only when both the surface edge and the adjacent
// text byte are ASCII word characters, so "#milk" and emoji surfaces match
// next to punctuation.
class SurfaceMatcher {
 public:
  explicit SurfaceMatcher(const std::vector<GlossaryEntry>& entries);

  // Indices of entries with at least one surface in `text`, ascending.
  std::vector<std::size_t> entries_in(std::string_view text) const;
  bool any(std::string_view text) const;
  // Leftmost (then longest) surface occurrence.
  std::optional<SurfaceHit> first(std::string_view text) const;

  std::size_t size() const { return surfaces_.size(); }

 private:
  struct Surface {
    std::string text;
    std::size_t entry;
  };
  static bool occurs_at(std::string_view lowered, std::size_t pos, const std::string& s);
  std::optional<std::size_t> find(std::string_view lowered, const std::string& s,
                                  std::size_t from) const;

  std::vector<Surface> surfaces_;
};

// Roots with any surface occurring in any post's raw text, sorted.
std::set<std::string> find_present_roots(const std::vector<GlossaryEntry>& glossary,
                                         const std::vector<Post>& corpus);
std::set<std::string> find_present_roots(const std::vector<GlossaryEntry>& glossary,
                                         CorpusReader& corpus);

struct SeedSplit {
  std::vector<GlossaryEntry> train;  // sorted by root
  std::vector<GlossaryEntry> test;   // sorted by root
  double ratio = 0.2;
  std::uint64_t rng_seed = 0;

  // Split file: {"train":[roots], "test":[roots], "ratio", "rng_seed"}.
  nlohmann::json to_json() const;
  // Resolves roots against `glossary`; unknown roots are an error.
  static SeedSplit from_json(const nlohmann::json& doc,
                             const std::vector<GlossaryEntry>& glossary);
};

// Stratified split by ngram_len. Per stratum, round-half-up(ratio * n) entries
// go to train after a seeded shuffle of the root-sorted stratum. If train
// would be empty, the first shuffled entry of the largest stratum is promoted.
SeedSplit split_seeds(std::vector<GlossaryEntry> present, double ratio, std::uint64_t rng_seed);

// Entries whose root is in `roots`, in glossary order.
std::vector<GlossaryEntry> select_roots(const std::vector<GlossaryEntry>& glossary,
                                        const std::set<std::string>& roots);

}  // namespace fetch
