#include "fetch/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "fetch/common.hpp"
#include "fetch/corpus.hpp"
#include "fetch/tokenizer.hpp"
#include "fetch/vectorstore.hpp"

namespace fetch {

using nlohmann::json;

// ---- CandidateList -----------------------------------------------------------

std::vector<std::string> CandidateList::terms() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.term);
  return out;
}

CandidateList CandidateList::from_ordered(
    const std::vector<std::pair<std::string, double>>& ordered, const std::string& source) {
  CandidateList list;
  std::unordered_set<std::string> seen;
  for (const auto& [term, score] : ordered) {
    if (!seen.insert(term).second) continue;
    list.items.push_back({term, score, list.items.size() + 1, source, 0});
  }
  return list;
}

CandidateList CandidateList::from_scores(std::vector<std::pair<std::string, double>> scored,
                                         const std::string& source,
                                         std::optional<std::size_t> k) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  CandidateList list = from_ordered(scored, source);
  if (k && list.items.size() > *k) list.items.resize(*k);
  return list;
}

void CandidateList::validate() const {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (it.rank != i + 1) {
      throw Error("candidate '" + it.term + "' has rank " + std::to_string(it.rank) +
                  ", expected " + std::to_string(i + 1));
    }
    if (i > 0 && it.score > items[i - 1].score) {
      throw Error("candidate scores increase at rank " + std::to_string(it.rank));
    }
    if (!seen.insert(it.term).second) throw Error("duplicate candidate term: " + it.term);
  }
}

void CandidateList::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write candidate list " + path.string());
  if (!meta.empty()) out << json{{"header", meta}}.dump() << '\n';
  for (const auto& it : items) {
    json j = {{"term", it.term}, {"score", it.score}, {"rank", it.rank}, {"source", it.source}};
    if (it.level != 0) j["level"] = it.level;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed for candidate list " + path.string());
}

CandidateList CandidateList::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read candidate list " + path.string());
  CandidateList list;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": not a JSON object");
    }
    if (j.contains("header")) {
      list.meta = j["header"];
      continue;
    }
    CandidateItem it;
    it.term = j.at("term").get<std::string>();
    it.score = j.at("score").get<double>();
    it.rank = j.at("rank").get<std::size_t>();
    it.source = j.value("source", "");
    it.level = j.value("level", 0);
    list.items.push_back(std::move(it));
  }
  return list;
}

// ---- requests ----------------------------------------------------------------

KeywordMethod parse_keyword_method(std::string_view name) {
  if (name == "tfidf") return KeywordMethod::kTfidf;
  if (name == "rake") return KeywordMethod::kRake;
  if (name == "yake") return KeywordMethod::kYake;
  if (name == "textrank") return KeywordMethod::kTextRank;
  if (name == "embed-keyword") return KeywordMethod::kEmbedKeyword;
  throw Error("unknown keyword method: " + std::string(name));
}

std::string to_string(KeywordMethod method) {
  switch (method) {
    case KeywordMethod::kTfidf: return "tfidf";
    case KeywordMethod::kRake: return "rake";
    case KeywordMethod::kYake: return "yake";
    case KeywordMethod::kTextRank: return "textrank";
    case KeywordMethod::kEmbedKeyword: return "embed-keyword";
  }
  return "?";
}

json KeywordRequest::to_json() const {
  return {{"method", to_string(method)},
          {"max_ngram", max_ngram},
          {"k", k},
          {"documents", documents.size()},
          {"stopwords", stopwords.size()},
          {"provider", provider ? provider->name() : ""}};
}

// ---- tokenization --------------------------------------------------------------

namespace {

bool is_sentinel(std::string_view t) { return t == kUrlSentinel || t == kUserSentinel; }

bool ends_sentence(std::string_view punct) {
  return punct == "." || punct == "!" || punct == "?" || punct == "\xE2\x80\xA6" ||
         (punct.size() > 1 && punct.find_first_not_of('.') == std::string_view::npos);
}

}  // namespace

std::vector<std::vector<KeywordToken>> keyword_chunks(std::string_view text) {
  std::vector<std::vector<KeywordToken>> chunks(1);
  std::size_t sentence = 0;
  auto cut = [&] {
    if (!chunks.back().empty()) chunks.emplace_back();
  };
  for (Token& tok : tweet_tokenize(text)) {
    switch (tok.kind) {
      case TokenKind::kUrl:
        chunks.back().push_back({kUrlSentinel, tok.text, sentence});
        break;
      case TokenKind::kMention:
        chunks.back().push_back({kUserSentinel, tok.text, sentence});
        break;
      case TokenKind::kHashtag:
        chunks.back().push_back({ascii_lower(tok.text.substr(1)), tok.text.substr(1), sentence});
        break;
      case TokenKind::kWord:
      case TokenKind::kNumber:
        if (tok.text == "RT" || tok.text == "rt") break;
        chunks.back().push_back({ascii_lower(tok.text), tok.text, sentence});
        break;
      case TokenKind::kEmoji:
        chunks.back().push_back({tok.text, tok.text, sentence});
        break;
      case TokenKind::kAlias:
        chunks.back().push_back({ascii_lower(tok.text), tok.text, sentence});
        break;
      case TokenKind::kEmoticon:
        cut();
        break;
      case TokenKind::kPunct:
        cut();
        if (ends_sentence(tok.text)) ++sentence;
        break;
    }
  }
  if (chunks.back().empty()) chunks.pop_back();
  return chunks;
}

std::vector<std::string> candidate_ngrams(const std::vector<std::string>& tokens, int max_ngram,
                                          const std::set<std::string>& stopwords) {
  if (max_ngram < 1 || max_ngram > 3) throw Error("max_ngram must be 1, 2 or 3");
  std::vector<std::string> out;
  for (int n = 1; n <= max_ngram; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      const auto& first = tokens[i];
      const auto& last = tokens[i + static_cast<std::size_t>(n) - 1];
      if (stopwords.count(first) || stopwords.count(last)) continue;
      bool sentinel = false;
      std::string term;
      for (std::size_t j = i; j < i + static_cast<std::size_t>(n); ++j) {
        if (is_sentinel(tokens[j])) sentinel = true;
        if (j > i) term.push_back(' ');
        term += tokens[j];
      }
      if (!sentinel) out.push_back(std::move(term));
    }
  }
  return out;
}

double smoothed_idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

std::vector<double> textrank_scores(const std::vector<std::set<std::size_t>>& adjacency,
                                    double damping, double tolerance, int max_iterations) {
  const std::size_t n = adjacency.size();
  std::vector<double> score(n, 1.0), next(n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double sum = 0.0;
      for (std::size_t u : adjacency[v]) sum += score[u] / static_cast<double>(adjacency[u].size());
      next[v] = (1.0 - damping) + damping * sum;
      delta = std::max(delta, std::abs(next[v] - score[v]));
    }
    score.swap(next);
    if (delta <= tolerance) break;
  }
  return score;
}

// ---- per-document scorers --------------------------------------------------------

namespace {

using Chunks = std::vector<std::vector<KeywordToken>>;
using Scores = std::unordered_map<std::string, double>;

std::vector<std::string> chunk_texts(const std::vector<KeywordToken>& chunk) {
  std::vector<std::string> out;
  out.reserve(chunk.size());
  for (const auto& t : chunk) out.push_back(t.text);
  return out;
}

std::vector<std::string> doc_candidates(const Chunks& chunks, const KeywordRequest& req) {
  std::vector<std::string> out;
  for (const auto& c : chunks) {
    auto grams = candidate_ngrams(chunk_texts(c), req.max_ngram, req.stopwords);
    out.insert(out.end(), grams.begin(), grams.end());
  }
  return out;
}

bool is_content(const std::string& t, const std::set<std::string>& stop) {
  return !stop.count(t) && !is_sentinel(t);
}

std::vector<Scores> score_tfidf(const std::vector<Chunks>& docs, const KeywordRequest& req) {
  std::vector<std::map<std::string, std::size_t>> tf(docs.size());
  std::unordered_map<std::string, std::size_t> df;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (auto& term : doc_candidates(docs[d], req)) ++tf[d][term];
    for (const auto& [term, _] : tf[d]) ++df[term];
  }
  std::vector<Scores> out(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& [term, count] : tf[d]) {
      out[d][term] = static_cast<double>(count) * smoothed_idf(docs.size(), df[term]);
    }
  }
  return out;
}

// Maximal runs of content words inside a chunk.
std::vector<std::vector<std::string>> content_runs(const Chunks& chunks,
                                                   const std::set<std::string>& stop) {
  std::vector<std::vector<std::string>> runs;
  for (const auto& c : chunks) {
    std::vector<std::string> run;
    for (const auto& t : c) {
      if (is_content(t.text, stop)) {
        run.push_back(t.text);
      } else if (!run.empty()) {
        runs.push_back(std::move(run));
        run.clear();
      }
    }
    if (!run.empty()) runs.push_back(std::move(run));
  }
  return runs;
}

Scores score_rake(const Chunks& chunks, const KeywordRequest& req) {
  auto runs = content_runs(chunks, req.stopwords);
  std::unordered_map<std::string, double> freq, degree;
  for (const auto& run : runs) {
    for (const auto& w : run) {
      freq[w] += 1.0;
      degree[w] += static_cast<double>(run.size());
    }
  }
  Scores out;
  for (const auto& run : runs) {
    for (int n = 1; n <= req.max_ngram; ++n) {
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= run.size(); ++i) {
        std::string term;
        double s = 0.0;
        for (std::size_t j = i; j < i + static_cast<std::size_t>(n); ++j) {
          if (j > i) term.push_back(' ');
          term += run[j];
          s += degree[run[j]] / freq[run[j]];
        }
        out[term] = s;
      }
    }
  }
  return out;
}

Scores score_yake(const Chunks& chunks, const KeywordRequest& req) {
  struct Stats {
    double tf = 0, tf_upper = 0, tf_capital = 0;
    std::vector<std::size_t> sentences;
    std::map<std::string, std::size_t> left, right;
    double left_total = 0, right_total = 0;
  };
  std::map<std::string, Stats> stats;
  std::size_t n_sentences = 0;
  std::size_t prev_sentence = static_cast<std::size_t>(-1);
  for (const auto& c : chunks) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto& t = c[i];
      n_sentences = std::max(n_sentences, t.sentence + 1);
      bool sentence_start = t.sentence != prev_sentence;
      prev_sentence = t.sentence;
      if (!is_content(t.text, req.stopwords)) continue;
      Stats& s = stats[t.text];
      s.tf += 1;
      s.sentences.push_back(t.sentence);
      bool has_alpha = std::any_of(t.original.begin(), t.original.end(),
                                   [](char ch) { return std::isalpha(static_cast<unsigned char>(ch)); });
      bool all_upper = has_alpha && t.original.size() > 1 &&
                       std::none_of(t.original.begin(), t.original.end(),
                                    [](char ch) { return std::islower(static_cast<unsigned char>(ch)); });
      if (all_upper) {
        s.tf_upper += 1;
      } else if (!sentence_start && std::isupper(static_cast<unsigned char>(t.original[0]))) {
        s.tf_capital += 1;
      }
      if (i > 0 && !is_sentinel(c[i - 1].text)) {
        ++s.left[c[i - 1].text];
        s.left_total += 1;
      }
      if (i + 1 < c.size() && !is_sentinel(c[i + 1].text)) {
        ++s.right[c[i + 1].text];
        s.right_total += 1;
      }
    }
  }
  if (stats.empty()) return {};

  double mean = 0, max_tf = 0;
  for (const auto& [_, s] : stats) {
    mean += s.tf;
    max_tf = std::max(max_tf, s.tf);
  }
  mean /= static_cast<double>(stats.size());
  double var = 0;
  for (const auto& [_, s] : stats) var += (s.tf - mean) * (s.tf - mean);
  double sd = std::sqrt(var / static_cast<double>(stats.size()));

  std::unordered_map<std::string, double> word_score;
  for (auto& [w, s] : stats) {
    double t_case = std::max(s.tf_upper, s.tf_capital) / (1.0 + std::log(s.tf));
    std::vector<std::size_t> sent = s.sentences;
    std::sort(sent.begin(), sent.end());
    double median = sent.size() % 2 ? static_cast<double>(sent[sent.size() / 2])
                                    : (static_cast<double>(sent[sent.size() / 2 - 1]) +
                                       static_cast<double>(sent[sent.size() / 2])) / 2.0;
    double t_pos = std::log(std::log(3.0 + median));
    double t_norm = s.tf / (mean + sd);
    double dl = s.left_total > 0 ? static_cast<double>(s.left.size()) / s.left_total : 0.0;
    double dr = s.right_total > 0 ? static_cast<double>(s.right.size()) / s.right_total : 0.0;
    double t_rel = 1.0 + (dl + dr) * s.tf / max_tf;
    sent.erase(std::unique(sent.begin(), sent.end()), sent.end());
    double t_sent = static_cast<double>(sent.size()) / static_cast<double>(n_sentences);
    word_score[w] = t_rel * t_pos / (t_case + t_norm / t_rel + t_sent / t_rel);
  }

  std::map<std::string, double> kw_tf;
  for (auto& term : doc_candidates(chunks, req)) kw_tf[term] += 1.0;
  Scores out;
  for (const auto& [term, tf] : kw_tf) {
    double prod = 1.0, sum = 0.0;
    for (const auto& w : split_ws(term)) {
      auto it = word_score.find(w);
      if (it == word_score.end()) continue;  // interior stop word
      prod *= it->second;
      sum += it->second;
    }
    double s = prod / (tf * (1.0 + sum));
    out[term] = 1.0 / (1.0 + s);  // YAKE ranks low scores first; invert
  }
  return out;
}

Scores score_textrank(const Chunks& chunks, const KeywordRequest& req) {
  std::map<std::string, std::size_t> vertex;
  std::vector<std::vector<std::size_t>> sequences;
  for (const auto& c : chunks) {
    std::vector<std::size_t> seq;
    for (const auto& t : c) {
      if (!is_content(t.text, req.stopwords)) continue;
      auto [it, _] = vertex.emplace(t.text, vertex.size());
      seq.push_back(it->second);
    }
    sequences.push_back(std::move(seq));
  }
  std::vector<std::set<std::size_t>> adj(vertex.size());
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      if (seq[i] == seq[i + 1]) continue;
      adj[seq[i]].insert(seq[i + 1]);
      adj[seq[i + 1]].insert(seq[i]);
    }
  }
  auto rank = textrank_scores(adj);
  Scores out;
  for (auto& term : doc_candidates(chunks, req)) {
    double s = 0.0;
    for (const auto& w : split_ws(term)) {
      auto it = vertex.find(w);
      if (it != vertex.end()) s += rank[it->second];
    }
    out[term] = s;
  }
  return out;
}

std::vector<Scores> score_embed(const std::vector<Chunks>& docs, const KeywordRequest& req) {
  if (!req.provider) throw Error("embed-keyword requires an embedding provider");
  std::vector<std::vector<std::string>> cands(docs.size());
  std::map<std::string, std::size_t> term_pos;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto all = doc_candidates(docs[d], req);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (const auto& t : all) term_pos.emplace(t, 0);
    cands[d] = std::move(all);
  }
  std::vector<std::string> texts = req.documents;
  for (auto& [term, pos] : term_pos) {
    pos = texts.size();
    texts.push_back(term);
  }
  auto vecs = embed_texts(*req.provider, texts);
  std::vector<Scores> out(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& term : cands[d]) {
      const auto& a = vecs[d];
      const auto& b = vecs[term_pos[term]];
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
      out[d][term] = s;
    }
  }
  return out;
}

}  // namespace

CandidateList extract_keywords(const KeywordRequest& req) {
  if (req.documents.empty()) throw Error("extract_keywords: no documents");
  if (req.k < 1) throw Error("extract_keywords: k must be >= 1");
  if (req.max_ngram < 1 || req.max_ngram > 3) throw Error("max_ngram must be 1, 2 or 3");
  if (req.method == KeywordMethod::kEmbedKeyword && !req.provider) {
    throw Error("embed-keyword requires an embedding provider");
  }

  std::vector<Chunks> docs;
  docs.reserve(req.documents.size());
  for (const auto& d : req.documents) docs.push_back(keyword_chunks(d));

  std::vector<Scores> per_doc;
  switch (req.method) {
    case KeywordMethod::kTfidf: per_doc = score_tfidf(docs, req); break;
    case KeywordMethod::kEmbedKeyword: per_doc = score_embed(docs, req); break;
    case KeywordMethod::kRake:
    case KeywordMethod::kYake:
    case KeywordMethod::kTextRank:
      per_doc.resize(docs.size());
      for (std::size_t d = 0; d < docs.size(); ++d) {
        per_doc[d] = req.method == KeywordMethod::kRake ? score_rake(docs[d], req)
                     : req.method == KeywordMethod::kYake ? score_yake(docs[d], req)
                                                          : score_textrank(docs[d], req);
      }
      break;
  }

  std::unordered_map<std::string, double> pooled;
  for (const auto& scores : per_doc) {
    for (const auto& [term, s] : scores) {
      auto [it, inserted] = pooled.emplace(term, s);
      if (!inserted) it->second = std::max(it->second, s);
    }
  }
  std::vector<std::pair<std::string, double>> scored(pooled.begin(), pooled.end());
  CandidateList list = CandidateList::from_scores(std::move(scored), to_string(req.method), req.k);
  list.meta = req.to_json();
  return list;
}

}  // namespace fetch
