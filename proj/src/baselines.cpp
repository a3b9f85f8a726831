#include "fetch/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "fetch/common.hpp"
#include "fetch/eval.hpp"
#include "fetch/phraser.hpp"

namespace fetch {

std::size_t ExpansionTrace::size() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

ExpansionTrace expand_seeds(const EmbeddingModel& model, const std::set<std::string>& seed_tokens,
                            std::size_t k, std::size_t levels) {
  ExpansionTrace trace;
  trace.k_per_query = k;
  for (const auto& s : seed_tokens) {
    (model.contains(s) ? trace.queried_seeds : trace.skipped_seeds).push_back(s);
  }
  if (!trace.skipped_seeds.empty()) {
    spdlog::warn("{} seed token(s) not in the embedding vocabulary, e.g. '{}'",
                 trace.skipped_seeds.size(), trace.skipped_seeds.front());
  }
  if (levels == 0) return trace;
  if (trace.queried_seeds.empty()) {
    spdlog::warn("no seed token is in the embedding vocabulary; expansion is empty");
    return trace;
  }

  std::set<std::string> seen(seed_tokens.begin(), seed_tokens.end());
  std::vector<std::string> queries = trace.queried_seeds;
  for (std::size_t level = 0; level < levels && !queries.empty(); ++level) {
    std::map<std::string, double> found;
    for (const auto& q : queries) {
      for (const auto& nb : model.most_similar(q, k).items) {
        if (seen.count(nb.token)) continue;
        auto [it, inserted] = found.emplace(nb.token, nb.cosine);
        if (!inserted) it->second = std::max(it->second, nb.cosine);
      }
    }
    std::vector<Neighbor> lvl;
    queries.clear();
    for (const auto& [tok, cos] : found) {
      lvl.push_back({tok, cos});
      queries.push_back(tok);
      seen.insert(tok);
    }
    std::sort(lvl.begin(), lvl.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.cosine != b.cosine ? a.cosine > b.cosine : a.token < b.token;
    });
    trace.levels.push_back(std::move(lvl));
  }
  return trace;
}

std::set<std::string> seed_tokens_for(const std::vector<GlossaryEntry>& entries,
                                      const PreprocessConfig& cfg, std::string_view delimiter) {
  std::set<std::string> out;
  for (const auto& e : entries) {
    for (const auto& s : e.surfaces) {
      auto toks = preprocess_text(s, cfg);
      if (!toks.empty()) out.insert(join(toks, delimiter));
    }
  }
  return out;
}

CandidateList trace_to_candidates(const ExpansionTrace& trace, const std::string& source,
                                  std::string_view delimiter) {
  CandidateList list;
  std::set<std::string> seen;
  for (std::size_t l = 0; l < trace.levels.size(); ++l) {
    for (const auto& nb : trace.levels[l]) {
      std::string term = phrase_token_to_surface(nb.token, delimiter);
      if (!seen.insert(term).second) continue;
      list.items.push_back({term, 1.0 / static_cast<double>(l + 1), list.items.size() + 1, source,
                            static_cast<int>(l + 1)});
    }
  }
  return list;
}

// ---- sampling --------------------------------------------------------------------

std::vector<SeedSentence> sample_seed_sentences(const std::vector<Post>& posts,
                                                const SurfaceMatcher& seeds, std::size_t n,
                                                std::uint64_t rng_seed) {
  std::vector<SeedSentence> reservoir;
  if (n == 0) return reservoir;
  Rng rng(rng_seed);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    auto hit = seeds.first(posts[i].text);
    if (!hit) continue;
    ++seen;
    if (reservoir.size() < n) {
      reservoir.push_back({i, *hit});
    } else {
      std::uint64_t j = rng.below(seen);
      if (j < n) reservoir[j] = {i, *hit};
    }
  }
  std::sort(reservoir.begin(), reservoir.end(),
            [](const SeedSentence& a, const SeedSentence& b) { return a.post < b.post; });
  return reservoir;
}

std::string substitute(const std::string& text, const SurfaceHit& hit, std::string_view replacement) {
  std::string out = text.substr(0, hit.offset);
  out.append(replacement);
  out.append(text, hit.offset + hit.length);
  return out;
}

namespace {

void check_failures(const EndpointStats& s, std::string_view what) {
  if (s.requested > 0 && s.failed * 2 > s.requested) {
    throw EndpointError(std::string(what) + ": " + std::to_string(s.failed) + " of " +
                        std::to_string(s.requested) + " endpoint requests failed");
  }
  if (s.failed > 0) spdlog::warn("{}: skipped {} failed request(s)", what, s.failed);
}

}  // namespace

// ---- MLM ---------------------------------------------------------------------------

CandidateList mlm_candidates(const std::vector<Post>& posts, const std::vector<GlossaryEntry>& seeds,
                             const FillMaskBackend& backend, const MlmParams& params,
                             EndpointStats* stats) {
  CandidateList list;
  EndpointStats local;
  if (params.k == 0) {
    if (stats) *stats = local;
    return list;
  }
  SurfaceMatcher matcher(seeds);
  auto sample = sample_seed_sentences(posts, matcher, params.sample_n, params.rng_seed);
  std::vector<std::optional<std::vector<Fill>>> results(sample.size());
  parallel_for(sample.size(), params.max_in_flight, [&](std::size_t i) {
    const auto& s = sample[i];
    std::string masked = substitute(posts[s.post].text, s.hit, kMaskSentinel);
    try {
      results[i] = backend.fill(masked, params.fill_top_k);
    } catch (const EndpointError& e) {
      spdlog::debug("fill-mask failed for post {}: {}", posts[s.post].id, e.what());
    }
  });

  local.requested = sample.size();
  std::unordered_map<std::string, double> total;
  for (auto& r : results) {
    if (!r) {
      ++local.failed;
      continue;
    }
    auto fills = *r;
    std::stable_sort(fills.begin(), fills.end(), [](const Fill& a, const Fill& b) {
      return a.prob != b.prob ? a.prob > b.prob : a.token < b.token;
    });
    if (params.per_sentence_top_k && fills.size() > params.k) fills.resize(params.k);
    for (const auto& f : fills) {
      std::string t = collapse_ws(f.token);
      if (t.empty() || t == ascii_lower(kMaskSentinel)) continue;
      total[t] += f.prob;
    }
  }
  if (stats) *stats = local;
  check_failures(local, "mlm");

  list = CandidateList::from_scores({total.begin(), total.end()}, "mlm");
  remove_seed_surfaces(list, seeds);
  if (list.items.size() > params.k) list.items.resize(params.k);
  list.meta = {{"sampled", sample.size()}, {"endpoint", local.to_json()}};
  return list;
}

// ---- EPD -------------------------------------------------------------------------

std::vector<MinedPhrase> mine_phrases(const std::vector<std::string>& texts,
                                      const std::set<std::string>& stopwords,
                                      const PhraseMiningParams& params) {
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& text : texts) {
    for (const auto& chunk : keyword_chunks(text)) {
      total += chunk.size();
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        std::string gram;
        for (std::size_t n = 1; n <= static_cast<std::size_t>(params.max_len) && i + n <= chunk.size(); ++n) {
          if (n > 1) gram.push_back(' ');
          gram += chunk[i + n - 1].text;
          ++counts[gram];
        }
      }
    }
  }
  std::vector<MinedPhrase> out;
  if (total == 0) return out;
  const double N = static_cast<double>(total);
  for (const auto& [gram, c] : counts) {
    if (c < params.min_support) continue;
    auto words = split_ws(gram);
    const int len = static_cast<int>(words.size());
    if (len < params.min_len || len > params.max_len) continue;
    if (stopwords.count(words.front()) || stopwords.count(words.back())) continue;
    if (std::any_of(words.begin(), words.end(),
                    [](const std::string& w) { return w == kUrlSentinel || w == kUserSentinel; })) {
      continue;
    }
    double p_xy = static_cast<double>(c) / N;
    double npmi = 1.0;
    if (p_xy < 1.0) {
      for (int split = 1; split < len; ++split) {
        std::vector<std::string> left(words.begin(), words.begin() + split);
        std::vector<std::string> right(words.begin() + split, words.end());
        double p_x = static_cast<double>(counts.at(join(left, " "))) / N;
        double p_y = static_cast<double>(counts.at(join(right, " "))) / N;
        npmi = std::min(npmi, std::log(p_xy / (p_x * p_y)) / -std::log(p_xy));
      }
    }
    if (npmi >= params.min_npmi) out.push_back({gram, c, npmi});
  }
  std::sort(out.begin(), out.end(),
            [](const MinedPhrase& a, const MinedPhrase& b) { return a.phrase < b.phrase; });
  return out;
}

namespace {

std::optional<std::vector<double>> mean_vector(const EmbeddingModel& model,
                                               const std::vector<std::string>& tokens) {
  std::vector<double> v(static_cast<std::size_t>(model.dim()), 0.0);
  std::size_t used = 0;
  for (const auto& t : tokens) {
    auto idx = model.index_of(t);
    if (!idx) continue;
    auto u = model.unit_vector(*idx);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += u[j];
    ++used;
  }
  if (used == 0) return std::nullopt;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return std::nullopt;
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

std::vector<std::pair<std::string, double>> pool_phrases(
    const std::vector<MinedPhrase>& mined, const std::vector<GlossaryEntry>& seeds,
    const EmbeddingModel& unigram_model, const PreprocessConfig& cfg, std::size_t pool_size) {
  std::vector<std::vector<double>> seed_vecs;
  for (const auto& e : seeds) {
    for (const auto& s : e.surfaces) {
      if (auto v = mean_vector(unigram_model, preprocess_text(s, cfg))) seed_vecs.push_back(*v);
    }
  }
  auto banned = normalized_surfaces(seeds);
  std::vector<std::pair<std::string, double>> scored;
  if (seed_vecs.empty()) {
    spdlog::warn("epd: no seed surface has an in-vocabulary token; phrase pool is empty");
    return scored;
  }
  for (const auto& m : mined) {
    if (banned.count(normalize_term(m.phrase))) continue;
    auto v = mean_vector(unigram_model, preprocess_text(m.phrase, cfg));
    if (!v) continue;
    double best = -2.0;
    for (const auto& s : seed_vecs) {
      double d = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) d += s[j] * (*v)[j];
      best = std::max(best, d);
    }
    scored.emplace_back(m.phrase, best);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (scored.size() > pool_size) scored.resize(pool_size);
  return scored;
}

std::vector<std::size_t> word_offsets(std::string_view phrase, std::size_t at) {
  std::vector<std::size_t> out;
  bool in_word = false;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    bool space = std::isspace(static_cast<unsigned char>(phrase[i])) != 0;
    if (!space && !in_word) out.push_back(at + i);
    in_word = !space;
  }
  return out;
}

CandidateList epd_candidates(const std::vector<Post>& posts, const std::vector<GlossaryEntry>& seeds,
                             const FillMaskBackend& backend, const EmbeddingModel& unigram_model,
                             const PreprocessConfig& cfg, const EpdParams& params,
                             EndpointStats* stats) {
  CandidateList list;
  EndpointStats local;
  if (params.k == 0) {
    if (stats) *stats = local;
    return list;
  }
  std::vector<std::string> texts;
  texts.reserve(posts.size());
  for (const auto& p : posts) texts.push_back(p.text);
  auto mined = mine_phrases(texts, cfg.stopwords, params.mining);
  auto pool = pool_phrases(mined, seeds, unigram_model, cfg, params.phrase_pool_size);

  SurfaceMatcher matcher(seeds);
  auto sample = sample_seed_sentences(posts, matcher, params.sample_n, params.rng_seed);
  std::vector<std::optional<std::vector<double>>> results(sample.size());
  parallel_for(sample.size(), params.max_in_flight, [&](std::size_t i) {
    const auto& s = sample[i];
    std::vector<double> scores;
    scores.reserve(pool.size());
    try {
      for (const auto& [phrase, _] : pool) {
        std::string text = substitute(posts[s.post].text, s.hit, phrase);
        auto lp = backend.score(text, word_offsets(phrase, s.hit.offset));
        double sum = 0.0;
        for (double x : lp) sum += x;
        scores.push_back(sum);
      }
      results[i] = std::move(scores);
    } catch (const EndpointError& e) {
      spdlog::debug("fill-mask scoring failed for post {}: {}", posts[s.post].id, e.what());
    }
  });

  struct Pair {
    double score;
    std::size_t phrase;
    std::size_t sentence;
  };
  std::vector<Pair> pairs;
  local.requested = sample.size();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i]) {
      ++local.failed;
      continue;
    }
    for (std::size_t p = 0; p < results[i]->size(); ++p) pairs.push_back({(*results[i])[p], p, i});
  }
  if (stats) *stats = local;
  check_failures(local, "epd");

  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (pool[a.phrase].first != pool[b.phrase].first) return pool[a.phrase].first < pool[b.phrase].first;
    return a.sentence < b.sentence;
  });
  if (pairs.size() > params.k) pairs.resize(params.k);
  std::vector<std::pair<std::string, double>> ordered;
  ordered.reserve(pairs.size());
  for (const auto& p : pairs) ordered.emplace_back(pool[p.phrase].first, p.score);
  list = CandidateList::from_ordered(ordered, "epd");
  remove_seed_surfaces(list, seeds);
  list.meta = {{"mined_phrases", mined.size()},
               {"pooled_phrases", pool.size()},
               {"sampled", sample.size()},
               {"endpoint", local.to_json()}};
  return list;
}

}  // namespace fetch
