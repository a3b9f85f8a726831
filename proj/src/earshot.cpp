#include "fetch/earshot.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "fetch/common.hpp"
#include "fetch/eval.hpp"

namespace fetch {

using nlohmann::json;

namespace {

constexpr std::string_view kPreamble =
    "You are a helpful assistant participating in a content moderation task of dog whistle "
    "detection.\n"
    "A dog whistle is the use of coded or suggestive language in political messaging to garner "
    "support from a particular group without provoking opposition. The concept is named after "
    "ultrasonic dog whistles, which are audible to dogs but not humans. Dog whistles use language "
    "that appears normal to the majority but communicates specific things to intended audiences. "
    "They are generally used to convey messages on issues likely to provoke controversy without "
    "attracting negative attention. ";

constexpr std::string_view kPostSlot = "{POST}";

}  // namespace

PromptRegistry PromptRegistry::builtin() {
  PromptRegistry r;
  r.llm_predict = std::string(kPreamble) +
                  "Are dog whistles present in the following sentence?\n"
                  "{POST}\n"
                  "Please respond ONLY Yes or No. Do not explain your answer.\n";
  r.direct = std::string(kPreamble) +
             "Does the following post contain dog whistles? If they do, please identify the dog "
             "whistles.\n"
             "{POST}\n"
             "Please respond with a JSON for a function call with its proper arguments that best "
             "answers the given prompt. Respond in the format {\"dogwhistles\": list of strings}.\n";
  return r;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read prompt registry " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(path.string() + ": prompt registry must be a JSON object");
  }
  PromptRegistry r;
  for (const char* key : {"direct", "llm-predict"}) {
    if (!doc.contains(key) || !doc[key].is_string()) {
      throw Error(path.string() + ": missing prompt '" + key + "'");
    }
    const std::string text = doc[key].get<std::string>();
    if (text.find(kPostSlot) == std::string::npos) {
      throw Error(path.string() + ": prompt '" + key + "' has no {POST} placeholder");
    }
    (std::string_view(key) == "direct" ? r.direct : r.llm_predict) = text;
  }
  return r;
}

json PromptRegistry::to_json() const { return {{"direct", direct}, {"llm-predict", llm_predict}}; }

std::string PromptRegistry::render(PromptKind kind, std::string_view post_text) const {
  std::string out = kind == PromptKind::kDirect ? direct : llm_predict;
  auto pos = out.find(kPostSlot);
  if (pos != std::string::npos) out.replace(pos, kPostSlot.size(), post_text);
  return out;
}

// ---- response parsing ------------------------------------------------------------

std::optional<json> first_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        json j = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> parse_direct_response(std::string_view text) {
  auto obj = first_json_object(text);
  if (!obj) return std::nullopt;
  auto it = obj->find("dogwhistles");
  if (it == obj->end() || !it->is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (v.is_string()) out.push_back(v.get<std::string>());
  }
  return out;
}

bool says_yes(std::string_view response) {
  auto word = [&](std::size_t i) {
    return i < response.size() && std::isalnum(static_cast<unsigned char>(response[i]));
  };
  for (std::size_t i = 0; i + 3 <= response.size(); ++i) {
    if (ascii_lower(response.substr(i, 3)) != "yes") continue;
    if ((i == 0 || !word(i - 1)) && !word(i + 3)) return true;
  }
  return false;
}

// ---- DIRECT ----------------------------------------------------------------------

json DirectStats::to_json() const {
  return {{"posts", posts}, {"endpoint_failures", endpoint_failures}, {"parse_failures", parse_failures}};
}

CandidateList direct_extract(const std::vector<Post>& posts, const ChatBackend& chat,
                             const PromptRegistry& prompts, std::size_t max_in_flight,
                             DirectStats* stats) {
  std::vector<std::optional<std::string>> responses(posts.size());
  parallel_for(posts.size(), max_in_flight, [&](std::size_t i) {
    ChatRequest req;
    req.kind = PromptKind::kDirect;
    req.post_text = posts[i].text;
    req.prompt = prompts.render(PromptKind::kDirect, posts[i].text);
    try {
      responses[i] = chat.complete(req);
    } catch (const EndpointError& e) {
      spdlog::debug("chat failed for post {}: {}", posts[i].id, e.what());
    }
  });

  DirectStats local;
  local.posts = posts.size();
  std::unordered_map<std::string, std::size_t> count;
  std::vector<std::string> first_seen;
  for (const auto& r : responses) {
    if (!r) {
      ++local.endpoint_failures;
      continue;
    }
    auto terms = parse_direct_response(*r);
    if (!terms) {
      ++local.parse_failures;
      continue;
    }
    for (const auto& t : *terms) {
      std::string norm = collapse_ws(t);
      if (norm.empty()) continue;
      if (count[norm]++ == 0) first_seen.push_back(norm);
    }
  }
  if (local.endpoint_failures) spdlog::warn("direct: {} chat request(s) failed", local.endpoint_failures);
  if (local.parse_failures) spdlog::warn("direct: {} response(s) had no parseable JSON", local.parse_failures);
  if (stats) *stats = local;

  std::stable_sort(first_seen.begin(), first_seen.end(),
                   [&](const std::string& a, const std::string& b) { return count[a] > count[b]; });
  std::vector<std::pair<std::string, double>> ordered;
  for (const auto& t : first_seen) ordered.emplace_back(t, static_cast<double>(count[t]));
  return CandidateList::from_ordered(ordered, "earshot-direct");
}

// ---- filtering ---------------------------------------------------------------------

FilterStrategy parse_filter_strategy(std::string_view name) {
  if (name == "llm-yes-no" || name == "llm") return FilterStrategy::kLlmYesNo;
  if (name == "classifier") return FilterStrategy::kClassifier;
  throw Error("unknown filter strategy: " + std::string(name));
}

std::string to_string(FilterStrategy s) {
  return s == FilterStrategy::kLlmYesNo ? "llm-yes-no" : "classifier";
}

json FilterDecision::to_json() const {
  json j = {{"post_id", post_id},
            {"kept", kept},
            {"strategy", to_string(strategy)},
            {"raw_response", raw_response}};
  if (label) j["label"] = *label;
  if (score) j["score"] = *score;
  if (endpoint_failed) j["endpoint_failed"] = true;
  return j;
}

std::vector<FilterDecision> filter_posts(const std::vector<Post>& posts, FilterStrategy strategy,
                                         const FilterBackends& backends,
                                         const PromptRegistry& prompts, std::size_t max_in_flight,
                                         std::size_t batch_size) {
  std::vector<FilterDecision> out(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    out[i].post_id = posts[i].id;
    out[i].strategy = strategy;
  }
  if (strategy == FilterStrategy::kLlmYesNo) {
    if (!backends.chat) throw Error("llm-yes-no filtering needs a chat endpoint");
    parallel_for(posts.size(), max_in_flight, [&](std::size_t i) {
      ChatRequest req;
      req.kind = PromptKind::kLlmPredict;
      req.post_text = posts[i].text;
      req.prompt = prompts.render(PromptKind::kLlmPredict, posts[i].text);
      try {
        out[i].raw_response = backends.chat->complete(req);
        out[i].kept = says_yes(out[i].raw_response);
      } catch (const EndpointError& e) {
        out[i].endpoint_failed = true;
        spdlog::debug("chat failed for post {}: {}", posts[i].id, e.what());
      }
    });
  } else {
    if (!backends.classifier) throw Error("classifier filtering needs a classify endpoint");
    batch_size = std::max<std::size_t>(1, batch_size);
    const std::size_t n_batches = (posts.size() + batch_size - 1) / batch_size;
    parallel_for(n_batches, max_in_flight, [&](std::size_t b) {
      std::size_t lo = b * batch_size, hi = std::min(posts.size(), lo + batch_size);
      std::vector<std::string> texts;
      for (std::size_t i = lo; i < hi; ++i) texts.push_back(posts[i].text);
      try {
        auto labels = backends.classifier->classify(texts);
        if (labels.size() != texts.size()) throw EndpointError("classifier returned wrong count");
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& c = labels[i - lo];
          out[i].raw_response = c.label;
          out[i].label = c.label;
          out[i].score = c.score;
          out[i].kept = backends.positive_labels.count(c.label) > 0;
        }
      } catch (const EndpointError& e) {
        for (std::size_t i = lo; i < hi; ++i) out[i].endpoint_failed = true;
        spdlog::debug("classify batch {} failed: {}", b, e.what());
      }
    });
  }
  std::size_t failed = std::count_if(out.begin(), out.end(),
                                     [](const FilterDecision& d) { return d.endpoint_failed; });
  if (failed) spdlog::warn("filter: dropped {} post(s) after endpoint failures", failed);
  return out;
}

// ---- pipelines ---------------------------------------------------------------------

std::vector<Post> neighbor_posts(const std::vector<Post>& posts,
                                 const std::vector<GlossaryEntry>& train, const VectorIndex& index,
                                 std::size_t neighbors_per_seed, std::vector<std::string>* seed_ids,
                                 std::vector<std::string>* neighbor_ids) {
  SurfaceMatcher matcher(train);
  std::set<std::string> seeds;
  for (const auto& p : posts) {
    if (matcher.any(p.text)) seeds.insert(p.id);
  }
  if (seed_ids) seed_ids->assign(seeds.begin(), seeds.end());
  std::vector<Post> out;
  if (seeds.empty()) {
    spdlog::warn("no post contains a seed surface");
    if (neighbor_ids) neighbor_ids->clear();
    return out;
  }
  auto near = index.nearest_posts(seeds, neighbors_per_seed);
  for (const auto& p : posts) {
    if (near.count(p.id)) out.push_back(p);
  }
  if (neighbor_ids) neighbor_ids->assign(near.begin(), near.end());
  return out;
}

EarshotResult run_direct(const std::vector<Post>& posts, const SeedSplit& split,
                         const VectorIndex& index, const ChatBackend& chat,
                         const PromptRegistry& prompts, const EarshotConfig& cfg) {
  EarshotResult r;
  auto neighbors = neighbor_posts(posts, split.train, index, cfg.neighbors_per_seed,
                                  &r.seed_post_ids, &r.neighbor_post_ids);
  DirectStats ds;
  if (!neighbors.empty()) {
    r.candidates = direct_extract(neighbors, chat, prompts, cfg.max_in_flight, &ds);
  }
  std::size_t leaked = remove_seed_surfaces(r.candidates, split.train);
  if (r.candidates.items.size() > cfg.k) r.candidates.items.resize(cfg.k);
  r.stats = {{"seed_posts", r.seed_post_ids.size()},
             {"neighbor_posts", r.neighbor_post_ids.size()},
             {"direct", ds.to_json()},
             {"seed_surfaces_removed", leaked}};
  return r;
}

EarshotResult run_predict(const std::vector<Post>& posts, const SeedSplit& split,
                          const VectorIndex& index, const FilterBackends& backends,
                          const PromptRegistry& prompts, const EarshotConfig& cfg,
                          const EmbeddingProvider* keyword_provider) {
  EarshotResult r;
  auto neighbors = neighbor_posts(posts, split.train, index, cfg.neighbors_per_seed,
                                  &r.seed_post_ids, &r.neighbor_post_ids);
  r.decisions = filter_posts(neighbors, cfg.filter, backends, prompts, cfg.max_in_flight,
                             cfg.batch_size);
  KeywordRequest req;
  req.method = cfg.keyword_method;
  req.max_ngram = cfg.max_ngram;
  req.k = std::numeric_limits<std::size_t>::max();
  req.stopwords = english_stopwords();
  req.provider = keyword_provider;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (r.decisions[i].kept) req.documents.push_back(neighbors[i].text);
  }
  std::size_t leaked = 0;
  if (req.documents.empty()) {
    spdlog::warn("predict: the filter kept no posts");
  } else {
    r.candidates = extract_keywords(req);
    leaked = remove_seed_surfaces(r.candidates, split.train);
    if (r.candidates.items.size() > cfg.k) r.candidates.items.resize(cfg.k);
  }
  for (auto& it : r.candidates.items) it.source = "earshot-predict/" + to_string(cfg.keyword_method);
  r.candidates.meta = json::object();
  r.stats = {{"seed_posts", r.seed_post_ids.size()},
             {"neighbor_posts", r.neighbor_post_ids.size()},
             {"kept_posts", req.documents.size()},
             {"filter", to_string(cfg.filter)},
             {"keyword_method", to_string(cfg.keyword_method)},
             {"max_ngram", cfg.max_ngram},
             {"seed_surfaces_removed", leaked}};
  return r;
}

}  // namespace fetch
