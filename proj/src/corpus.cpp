#include "fetch/corpus.hpp"

#include <fstream>

#include <spdlog/spdlog.h>
#include <zlib.h>

#include "fetch/common.hpp"
#include "fetch/emoji.hpp"
#include "fetch/tokenizer.hpp"

namespace fetch {

using nlohmann::json;

const std::set<std::string>& english_stopwords() {
  static const std::set<std::string> kStopwords = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
      "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him",
      "his", "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its",
      "itself", "they", "them", "their", "theirs", "themselves", "what", "which", "who",
      "whom", "this", "that", "that'll", "these", "those", "am", "is", "are", "was", "were",
      "be", "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing",
      "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while", "of",
      "at", "by", "for", "with", "about", "against", "between", "into", "through",
      "during", "before", "after", "above", "below", "to", "from", "up", "down", "in",
      "out", "on", "off", "over", "under", "again", "further", "then", "once", "here",
      "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
      "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so",
      "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should",
      "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't",
      "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn",
      "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn",
      "mustn't", "needn", "needn't", "shan", "shan't", "shouldn", "shouldn't", "wasn",
      "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't"};
  return kStopwords;
}

json PreprocessConfig::to_json() const {
  std::string joined;
  for (const auto& w : stopwords) joined += w + '\n';
  return json{{"stopword_count", stopwords.size()},
              {"stopword_hash", hex64(fnv1a64(joined))},
              {"lemmatize", lemmatize},
              {"emoji_aliasing", emoji_aliasing},
              {"lowercase", lowercase},
              {"strip_punctuation", strip_punctuation}};
}

namespace {

bool contains_http(std::string_view token) {
  return ascii_lower(token).find("http") != std::string::npos;
}

}  // namespace

std::vector<std::string> preprocess_text(std::string_view text, const PreprocessConfig& cfg) {
  std::vector<std::string> out;
  auto is_stop = [&](const std::string& w) { return cfg.stopwords.count(ascii_lower(w)) > 0; };

  for (Token& tok : tweet_tokenize(text)) {
    std::string t;
    switch (tok.kind) {
      case TokenKind::kUrl:
        out.emplace_back(kUrlSentinel);
        continue;
      case TokenKind::kMention:
        out.emplace_back(kUserSentinel);
        continue;
      case TokenKind::kPunct:
        if (!cfg.strip_punctuation) out.push_back(std::move(tok.text));
        continue;
      case TokenKind::kEmoticon:
        out.push_back(std::move(tok.text));
        continue;
      case TokenKind::kEmoji:
        if (cfg.emoji_aliasing) {
          t = emoji_alias(tok.text).value_or(tok.text);
          if (cfg.lowercase) t = ascii_lower(t);
        } else {
          t = std::move(tok.text);
        }
        out.push_back(std::move(t));
        continue;
      case TokenKind::kAlias:
        out.push_back(cfg.lowercase ? ascii_lower(tok.text) : std::move(tok.text));
        continue;
      case TokenKind::kHashtag:
        t = tok.text.substr(1);
        break;
      case TokenKind::kWord:
      case TokenKind::kNumber:
        t = std::move(tok.text);
        break;
    }
    if (t == "RT" || t == "rt") continue;
    if (contains_http(t)) {
      out.emplace_back(kUrlSentinel);
      continue;
    }
    if (cfg.lowercase) t = ascii_lower(t);
    if (is_stop(t)) continue;
    if (cfg.lemmatize && cfg.lemmatizer) {
      t = cfg.lemmatizer->lemmatize(t);
      if (is_stop(t)) continue;
    }
    out.push_back(std::move(t));
  }
  return out;
}

Post preprocess(Post post, const PreprocessConfig& cfg) {
  post.tokens = preprocess_text(post.text, cfg);
  return post;
}

CorpusFormat format_for_path(const std::filesystem::path& path) {
  std::string name = ascii_lower(path.filename().string());
  auto ends = [&](std::string_view s) {
    return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  if (ends(".gz")) return CorpusFormat::kJsonlGz;
  if (ends(".jsonl") || ends(".json") || ends(".ndjson")) return CorpusFormat::kJsonl;
  return CorpusFormat::kPlainLines;
}

class CorpusReader::LineSource {
 public:
  virtual ~LineSource() = default;
  virtual bool getline(std::string& line) = 0;
};

namespace {

class FileLines final : public CorpusReader::LineSource {
 public:
  explicit FileLines(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open corpus file: " + path.string());
  }
  bool getline(std::string& line) override { return static_cast<bool>(std::getline(in_, line)); }

 private:
  std::ifstream in_;
};

class GzLines final : public CorpusReader::LineSource {
 public:
  explicit GzLines(const std::filesystem::path& path) : gz_(gzopen(path.c_str(), "rb")) {
    if (!gz_) throw Error("cannot open gzip corpus file: " + path.string());
  }
  ~GzLines() override { gzclose(gz_); }
  GzLines(const GzLines&) = delete;
  GzLines& operator=(const GzLines&) = delete;

  bool getline(std::string& line) override {
    line.clear();
    char buf[8192];
    while (gzgets(gz_, buf, sizeof buf) != nullptr) {
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        return true;
      }
    }
    int err = 0;
    gzerror(gz_, &err);
    if (err != Z_OK && err != Z_STREAM_END) throw Error("corrupt gzip corpus stream");
    return !line.empty();
  }

 private:
  gzFile gz_;
};

}  // namespace

CorpusReader::CorpusReader(const std::filesystem::path& path, CorpusFormat format)
    : format_(format) {
  if (format == CorpusFormat::kJsonlGz) {
    source_ = std::make_unique<GzLines>(path);
  } else {
    source_ = std::make_unique<FileLines>(path);
  }
}

CorpusReader::~CorpusReader() = default;

std::optional<Post> CorpusReader::next() {
  std::string line;
  while (source_->getline(line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    stats_.max_line_bytes = std::max(stats_.max_line_bytes, line.size());
    if (trim(line).empty()) continue;

    Post post;
    if (format_ == CorpusFormat::kPlainLines) {
      post.id = std::to_string(line_no_);
      post.text = std::move(line);
      ++stats_.posts;
      return post;
    }
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_object() && obj.contains("header") && !obj.contains("text")) continue;
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string()) {
      ++stats_.malformed;
      spdlog::warn("corpus line {}: malformed record skipped", line_no_);
      continue;
    }
    post.text = obj["text"].get<std::string>();
    if (obj.contains("id") && obj["id"].is_string()) {
      post.id = obj["id"].get<std::string>();
    } else if (obj.contains("id") && obj["id"].is_number_integer()) {
      post.id = std::to_string(obj["id"].get<long long>());
    } else {
      post.id = std::to_string(line_no_);
    }
    if (obj.contains("tokens") && obj["tokens"].is_array()) {
      for (const auto& t : obj["tokens"]) {
        if (t.is_string()) post.tokens.push_back(t.get<std::string>());
      }
    }
    ++stats_.posts;
    return post;
  }
  return std::nullopt;
}

std::vector<Post> read_corpus(const std::filesystem::path& path, IngestStats* stats) {
  CorpusReader reader(path);
  std::vector<Post> posts;
  while (auto p = reader.next()) posts.push_back(std::move(*p));
  if (stats) *stats = reader.stats();
  return posts;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Post>& posts,
                  const json* header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file: " + path.string());
  if (header) out << json{{"header", *header}}.dump() << '\n';
  for (const Post& p : posts) {
    json obj{{"id", p.id}, {"text", p.text}};
    if (!p.tokens.empty()) obj["tokens"] = p.tokens;
    out << obj.dump() << '\n';
  }
}

}  // namespace fetch
