#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fetch/lemmatizer.hpp"

namespace fetch {

inline constexpr const char* kUrlSentinel = "HTTPURL";
inline constexpr const char* kUserSentinel = "@USER";

struct Post {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;  // filled by preprocess()
};

// The fixed English stop-word list shipped with the library (179 entries).
const std::set<std::string>& english_stopwords();

struct PreprocessConfig {
  std::set<std::string> stopwords = english_stopwords();
  bool lemmatize = true;
  bool emoji_aliasing = true;
  bool lowercase = true;
  bool strip_punctuation = true;
  std::shared_ptr<const Lemmatizer> lemmatizer = std::make_shared<SuffixLemmatizer>();

  // Serialized form written into artifact headers. The stop list is recorded
  // by size and hash.
  nlohmann::json to_json() const;
};

// Fills post.tokens from post.text:
//   URL -> HTTPURL, @handle -> @USER, "RT" retweet markers dropped, '#' stripped
//   from hashtags; emoji -> ":english_alias:"; lowercase; stop words removed;
//   lemmatized. Pure and deterministic.
Post preprocess(Post post, const PreprocessConfig& cfg);
std::vector<std::string> preprocess_text(std::string_view text, const PreprocessConfig& cfg);

enum class CorpusFormat { kJsonl, kJsonlGz, kPlainLines };

// Picks the format from the extension: .jsonl.gz/.gz, .jsonl/.json, else plain.
CorpusFormat format_for_path(const std::filesystem::path& path);

struct IngestStats {
  std::size_t posts = 0;
  std::size_t malformed = 0;
  std::size_t max_line_bytes = 0;  // largest single buffered line
};

// Single-pass streaming reader. Holds one line at a time; never the corpus.
// Lines without an "id" get their 1-based line number as id. Malformed lines
// (not JSON, no string "text") are skipped and counted.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, CorpusFormat format);
  explicit CorpusReader(const std::filesystem::path& path)
      : CorpusReader(path, format_for_path(path)) {}
  ~CorpusReader();
  CorpusReader(const CorpusReader&) = delete;
  CorpusReader& operator=(const CorpusReader&) = delete;

  std::optional<Post> next();
  const IngestStats& stats() const { return stats_; }

  class LineSource;

 private:
  std::unique_ptr<LineSource> source_;
  CorpusFormat format_;
  std::size_t line_no_ = 0;
  IngestStats stats_;
};

// Convenience: read every post into memory.
std::vector<Post> read_corpus(const std::filesystem::path& path, IngestStats* stats = nullptr);

// Writes posts as JSONL ({"id","text"} plus "tokens" when non-empty), with an
// optional leading {"header": ...} line.
void write_corpus(const std::filesystem::path& path, const std::vector<Post>& posts,
                  const nlohmann::json* header = nullptr);

}  // namespace fetch
