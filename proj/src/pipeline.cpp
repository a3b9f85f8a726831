#include "fetch/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "fetch/common.hpp"
#include "fetch/vectorstore.hpp"

namespace fetch {

using nlohmann::json;
namespace fs = std::filesystem;

Pipeline parse_pipeline(std::string_view name) {
  if (name == "w2v") return Pipeline::kW2v;
  if (name == "p2v-2") return Pipeline::kP2v2;
  if (name == "p2v-3") return Pipeline::kP2v3;
  if (name == "mlm") return Pipeline::kMlm;
  if (name == "epd") return Pipeline::kEpd;
  if (name == "earshot-direct") return Pipeline::kEarshotDirect;
  if (name == "earshot-predict") return Pipeline::kEarshotPredict;
  throw ConfigError("pipeline", "unknown pipeline '" + std::string(name) +
                                    "' (expected w2v, p2v-2, p2v-3, mlm, epd, earshot-direct, "
                                    "earshot-predict)");
}

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kW2v: return "w2v";
    case Pipeline::kP2v2: return "p2v-2";
    case Pipeline::kP2v3: return "p2v-3";
    case Pipeline::kMlm: return "mlm";
    case Pipeline::kEpd: return "epd";
    case Pipeline::kEarshotDirect: return "earshot-direct";
    case Pipeline::kEarshotPredict: return "earshot-predict";
  }
  return "?";
}

// ---- config loading --------------------------------------------------------------

namespace {

class Section {
 public:
  Section(YAML::Node node, std::string prefix) : node_(std::move(node)), prefix_(std::move(prefix)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(prefix_, "expected a mapping");
  }

  std::string field(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_[key]) return;
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  void get_path(const std::string& key, fs::path& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = base / s;
  }

  void get_path(const std::string& key, std::optional<fs::path>& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = base / s;
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(node_ ? node_[key] : YAML::Node(), field(key));
  }

  // Unknown keys are almost always typos; refuse them.
  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void read_endpoint(Section& s, EndpointConfig& ep) {
  s.get("url", ep.url);
  s.get("timeout_s", ep.timeout_s);
  s.get("max_retries", ep.max_retries);
  s.get("backoff_s", ep.backoff_s);
  s.get("batch_size", ep.batch_size);
  s.get("max_in_flight", ep.max_in_flight);
}

void env_override(const char* var, EndpointConfig& ep) {
  if (const char* v = std::getenv(var); v && *v) ep.url = v;
}

json endpoint_json(const EndpointConfig& ep) {
  return {{"url", ep.url},
          {"timeout_s", ep.timeout_s},
          {"max_retries", ep.max_retries},
          {"backoff_s", ep.backoff_s},
          {"batch_size", ep.batch_size},
          {"max_in_flight", ep.max_in_flight}};
}

}  // namespace

RunConfig load_run_config(const fs::path& path, const CliOverrides& overrides) {
  if (!fs::exists(path)) throw ConfigError("config", "file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config", std::string("not valid YAML: ") + e.what());
  }
  const fs::path base = path.parent_path();
  RunConfig cfg;
  Section top(root, "");

  top.get("scenario", cfg.scenario);
  top.get_path("corpus", cfg.corpus, base);
  top.get_path("glossary", cfg.glossary, base);
  top.get_path("prompts", cfg.prompts_file, base);
  top.get_path("output", cfg.output, base);
  std::string pipeline;
  top.get("pipeline", pipeline);
  if (!pipeline.empty()) cfg.pipeline = parse_pipeline(pipeline);
  top.get("mock_endpoints", cfg.mock_endpoints);
  top.get("sweep", cfg.sweep);

  {
    Section s = top.sub("split");
    s.get("ratio", cfg.split_ratio);
    s.get("seed", cfg.split_seed);
    s.get_path("file", cfg.split_file, base);
    s.finish();
  }
  {
    Section s = top.sub("eval");
    s.get("unique_terms", cfg.eval.unique_terms);
    s.get("credit_all_roots", cfg.eval.credit_all_roots);
    s.finish();
  }
  {
    Section eps = top.sub("endpoints");
    Section chat = eps.sub("chat");
    read_endpoint(chat, cfg.chat);
    chat.finish();
    Section emb = eps.sub("embeddings");
    read_endpoint(emb, cfg.embeddings);
    emb.get("dim", cfg.embedding_dim);
    emb.get("seed", cfg.embedding_seed);
    emb.finish();
    Section fm = eps.sub("fill_mask");
    read_endpoint(fm, cfg.fill_mask);
    fm.finish();
    Section cl = eps.sub("classify");
    read_endpoint(cl, cfg.classify);
    std::vector<std::string> labels;
    cl.get("positive_labels", labels);
    if (!labels.empty()) cfg.positive_labels = {labels.begin(), labels.end()};
    cl.finish();
    eps.finish();
  }
  {
    Section s = top.sub("w2v");
    s.get("dim", cfg.w2v.dim);
    s.get("window", cfg.w2v.window);
    s.get("epochs", cfg.w2v.epochs);
    s.get("max_vocab", cfg.w2v.max_vocab);
    s.get("min_count", cfg.w2v.min_count);
    s.get("negative", cfg.w2v.negative);
    s.get("sample", cfg.w2v.sample);
    s.get("alpha", cfg.w2v.alpha);
    s.get("seed", cfg.w2v.seed);
    s.get("threads", cfg.w2v.threads);
    s.get("k", cfg.expansion_k);
    s.get("levels", cfg.expansion_levels);
    s.finish();
  }
  {
    Section s = top.sub("phraser");
    s.get("min_count", cfg.phraser.min_count);
    s.get("threshold", cfg.phraser.threshold);
    s.finish();
  }
  {
    Section s = top.sub("mlm");
    s.get("sample_n", cfg.mlm.sample_n);
    s.get("k", cfg.mlm.k);
    s.get("fill_top_k", cfg.mlm.fill_top_k);
    s.get("seed", cfg.mlm.rng_seed);
    s.get("per_sentence_top_k", cfg.mlm.per_sentence_top_k);
    s.finish();
  }
  {
    Section s = top.sub("epd");
    s.get("phrase_pool_size", cfg.epd.phrase_pool_size);
    s.get("sample_n", cfg.epd.sample_n);
    s.get("k", cfg.epd.k);
    s.get("seed", cfg.epd.rng_seed);
    s.get("min_support", cfg.epd.mining.min_support);
    s.get("min_npmi", cfg.epd.mining.min_npmi);
    s.finish();
  }
  {
    Section s = top.sub("earshot");
    s.get("neighbors_per_seed", cfg.earshot.neighbors_per_seed);
    std::string filter, method;
    s.get("filter", filter);
    s.get("keyword_method", method);
    try {
      if (!filter.empty()) cfg.earshot.filter = parse_filter_strategy(filter);
    } catch (const Error& e) {
      throw ConfigError(s.field("filter"), e.what());
    }
    try {
      if (!method.empty()) cfg.earshot.keyword_method = parse_keyword_method(method);
    } catch (const Error& e) {
      throw ConfigError(s.field("keyword_method"), e.what());
    }
    s.get("max_ngram", cfg.earshot.max_ngram);
    s.get("k", cfg.earshot.k);
    s.finish();
  }
  top.finish();

  env_override("FETCH_CHAT_URL", cfg.chat);
  env_override("FETCH_EMBED_URL", cfg.embeddings);
  env_override("FETCH_FILLMASK_URL", cfg.fill_mask);
  env_override("FETCH_CLASSIFY_URL", cfg.classify);

  if (overrides.pipeline) cfg.pipeline = parse_pipeline(*overrides.pipeline);
  if (overrides.output) cfg.output = *overrides.output;
  if (overrides.sweep) cfg.sweep = *overrides.sweep;
  if (overrides.mock_endpoints) cfg.mock_endpoints = true;
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (corpus.empty()) throw ConfigError("corpus", "is required");
  if (!fs::exists(corpus)) throw ConfigError("corpus", "file not found: " + corpus.string());
  if (glossary.empty()) throw ConfigError("glossary", "is required");
  if (!fs::exists(glossary)) throw ConfigError("glossary", "file not found: " + glossary.string());
  if (split_file && !fs::exists(*split_file)) {
    throw ConfigError("split.file", "file not found: " + split_file->string());
  }
  if (prompts_file && !fs::exists(*prompts_file)) {
    throw ConfigError("prompts", "file not found: " + prompts_file->string());
  }
  if (!pipeline) throw ConfigError("pipeline", "is required");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split.ratio", "must be in (0, 1)");
  if (sweep.empty()) throw ConfigError("sweep", "must list at least one cutoff");
  for (std::size_t k : sweep) {
    if (k == 0) throw ConfigError("sweep", "cutoffs must be >= 1");
  }
  if (w2v.dim <= 0) throw ConfigError("w2v.dim", "must be positive");
  if (w2v.window <= 0) throw ConfigError("w2v.window", "must be positive");
  if (w2v.epochs <= 0) throw ConfigError("w2v.epochs", "must be positive");
  if (w2v.max_vocab == 0) throw ConfigError("w2v.max_vocab", "must be positive");
  if (w2v.threads <= 0) throw ConfigError("w2v.threads", "must be positive");
  if (embedding_dim <= 0) throw ConfigError("endpoints.embeddings.dim", "must be positive");
  if (earshot.max_ngram < 1 || earshot.max_ngram > 3) {
    throw ConfigError("earshot.max_ngram", "must be 1, 2 or 3");
  }
  if (earshot.k == 0) throw ConfigError("earshot.k", "must be >= 1");

  struct Need {
    const char* field;
    const EndpointConfig* ep;
  };
  std::vector<Need> needs;
  switch (*pipeline) {
    case Pipeline::kMlm:
    case Pipeline::kEpd:
      needs.push_back({"endpoints.fill_mask", &fill_mask});
      break;
    case Pipeline::kEarshotDirect:
      needs.push_back({"endpoints.embeddings", &embeddings});
      needs.push_back({"endpoints.chat", &chat});
      break;
    case Pipeline::kEarshotPredict:
      needs.push_back({"endpoints.embeddings", &embeddings});
      if (earshot.filter == FilterStrategy::kClassifier) {
        needs.push_back({"endpoints.classify", &classify});
      } else {
        needs.push_back({"endpoints.chat", &chat});
      }
      break;
    default:
      break;
  }
  for (const auto& n : needs) {
    if (n.ep->max_retries < 0) throw ConfigError(std::string(n.field) + ".max_retries", "must be >= 0");
    if (mock_endpoints) continue;
    if (n.ep->url.empty()) {
      throw ConfigError(std::string(n.field) + ".url", "is required unless mock endpoints are used");
    }
    if (n.ep->url.find("://") == std::string::npos) {
      throw ConfigError(std::string(n.field) + ".url", "must look like http://host:port");
    }
  }
}

json RunConfig::to_json() const {
  json j = {
      {"scenario", scenario},
      {"corpus", corpus.filename().string()},
      {"glossary", glossary.filename().string()},
      {"split", {{"ratio", split_ratio},
                 {"seed", split_seed},
                 {"file", split_file ? split_file->filename().string() : ""}}},
      {"prompts", prompts_file ? prompts_file->filename().string() : ""},
      {"pipeline", pipeline ? to_string(*pipeline) : ""},
      {"mock_endpoints", mock_endpoints},
      {"sweep", sweep},
      {"eval", {{"unique_terms", eval.unique_terms}, {"credit_all_roots", eval.credit_all_roots}}},
      {"w2v", {{"dim", w2v.dim}, {"window", w2v.window}, {"epochs", w2v.epochs},
               {"max_vocab", w2v.max_vocab}, {"min_count", w2v.min_count},
               {"negative", w2v.negative}, {"sample", w2v.sample}, {"alpha", w2v.alpha},
               {"seed", w2v.seed}, {"threads", w2v.threads}, {"k", expansion_k},
               {"levels", expansion_levels}}},
      {"phraser", {{"min_count", phraser.min_count}, {"threshold", phraser.threshold}}},
      {"mlm", {{"sample_n", mlm.sample_n}, {"k", mlm.k}, {"fill_top_k", mlm.fill_top_k},
               {"seed", mlm.rng_seed}, {"per_sentence_top_k", mlm.per_sentence_top_k}}},
      {"epd", {{"phrase_pool_size", epd.phrase_pool_size}, {"sample_n", epd.sample_n},
               {"k", epd.k}, {"seed", epd.rng_seed}, {"min_support", epd.mining.min_support},
               {"min_npmi", epd.mining.min_npmi}}},
      {"earshot", {{"neighbors_per_seed", earshot.neighbors_per_seed},
                   {"filter", to_string(earshot.filter)},
                   {"keyword_method", to_string(earshot.keyword_method)},
                   {"max_ngram", earshot.max_ngram}, {"k", earshot.k}}},
  };
  if (!mock_endpoints) {
    j["endpoints"] = {{"chat", endpoint_json(chat)},
                      {"embeddings", endpoint_json(embeddings)},
                      {"fill_mask", endpoint_json(fill_mask)},
                      {"classify", endpoint_json(classify)}};
  }
  j["embedding"] = {{"dim", embedding_dim}, {"seed", embedding_seed}};
  j["positive_labels"] = positive_labels;
  return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

std::string glossary_hash(const std::vector<GlossaryEntry>& glossary) {
  return hex64(fnv1a64(glossary_to_json(glossary).dump()));
}

// ---- running ---------------------------------------------------------------------

namespace {

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::string buf(1 << 16, '\0');
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    auto n = static_cast<std::size_t>(in.gcount());
    if (n == 0) break;
    h = fnv1a64(std::string_view(buf.data(), n), h);
  }
  return hex64(h);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TokenCorpus preprocess_all(const std::vector<Post>& posts, const PreprocessConfig& pp) {
  TokenCorpus corpus(posts.size());
  parallel_for(posts.size(), 1, [&](std::size_t i) { corpus[i] = preprocess_text(posts[i].text, pp); });
  return corpus;
}

std::vector<std::string> glossary_surfaces(const std::vector<GlossaryEntry>& glossary) {
  std::vector<std::string> out;
  for (const auto& e : glossary) out.insert(out.end(), e.surfaces.begin(), e.surfaces.end());
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& cfg) {
  EmbeddingProviderConfig pc;
  pc.kind = cfg.mock_endpoints ? EmbeddingProviderConfig::Kind::kMock
                               : EmbeddingProviderConfig::Kind::kHttp;
  pc.endpoint = cfg.embeddings;
  pc.dim = cfg.embedding_dim;
  pc.seed = cfg.embedding_seed;
  return make_embedding_provider(pc);
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const Pipeline pipeline = *cfg.pipeline;
  RunResult result;
  result.out_dir = cfg.output;
  fs::create_directories(cfg.output);

  IngestStats ingest;
  auto posts = read_corpus(cfg.corpus, &ingest);
  auto glossary = load_glossary(cfg.glossary);
  spdlog::info("ingested {} posts ({} malformed), {} glossary roots", ingest.posts,
               ingest.malformed, glossary.size());
  auto present = find_present_roots(glossary, posts);
  spdlog::info("{} glossary roots present in the corpus", present.size());

  result.glossary_hash = glossary_hash(glossary);
  json cfg_json = cfg.to_json();
  cfg_json["corpus_hash"] = file_hash(cfg.corpus);
  result.config_hash = hex64(fnv1a64(cfg_json.dump()));

  SeedSplit split;
  if (cfg.split_file) {
    std::ifstream in(*cfg.split_file);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("split.file", "is not valid JSON");
    split = SeedSplit::from_json(doc, glossary);
  } else {
    if (present.empty()) throw Error("no glossary root occurs in the corpus; nothing to split");
    split = split_seeds(select_roots(glossary, present), cfg.split_ratio, cfg.split_seed);
  }
  spdlog::info("split: {} train roots, {} test roots", split.train.size(), split.test.size());

  const PreprocessConfig pp;
  json artifacts = json::object();
  json stats = json::object();
  CandidateList candidates;
  const std::string source = to_string(pipeline);

  switch (pipeline) {
    case Pipeline::kW2v:
    case Pipeline::kP2v2:
    case Pipeline::kP2v3: {
      TokenCorpus tokens = preprocess_all(posts, pp);
      if (pipeline != Pipeline::kW2v) {
        int passes = pipeline == Pipeline::kP2v2 ? 1 : 2;
        PhraserModel phraser = PhraserModel::learn(tokens, cfg.phraser, passes);
        tokens = merge_phrases(tokens, phraser);
        stats["phraser"] = phraser.summary();
      }
      EmbeddingModel model = EmbeddingModel::train(tokens, cfg.w2v);
      model.save(cfg.output / "model.bin");
      artifacts["model.bin"] = file_hash(cfg.output / "model.bin");
      auto seeds = seed_tokens_for(split.train, pp, cfg.phraser.delimiter);
      auto trace = expand_seeds(model, seeds, cfg.expansion_k, cfg.expansion_levels);
      candidates = trace_to_candidates(trace, source, cfg.phraser.delimiter);
      stats["vocab"] = model.size();
      stats["queried_seeds"] = trace.queried_seeds;
      stats["skipped_seeds"] = trace.skipped_seeds;
      break;
    }
    case Pipeline::kMlm: {
      std::unique_ptr<FillMaskBackend> backend;
      if (cfg.mock_endpoints) {
        backend = std::make_unique<LexiconMockFillMask>(glossary_surfaces(glossary));
      } else {
        backend = std::make_unique<HttpFillMask>(cfg.fill_mask);
      }
      MlmParams p = cfg.mlm;
      p.max_in_flight = cfg.fill_mask.max_in_flight;
      EndpointStats es;
      candidates = mlm_candidates(posts, split.train, *backend, p, &es);
      stats = candidates.meta;
      break;
    }
    case Pipeline::kEpd: {
      std::unique_ptr<FillMaskBackend> backend;
      if (cfg.mock_endpoints) {
        backend = std::make_unique<LexiconMockFillMask>(glossary_surfaces(glossary));
      } else {
        backend = std::make_unique<HttpFillMask>(cfg.fill_mask);
      }
      EmbeddingModel model = EmbeddingModel::train(preprocess_all(posts, pp), cfg.w2v);
      model.save(cfg.output / "model.bin");
      artifacts["model.bin"] = file_hash(cfg.output / "model.bin");
      EpdParams p = cfg.epd;
      p.max_in_flight = cfg.fill_mask.max_in_flight;
      candidates = epd_candidates(posts, split.train, *backend, model, pp, p);
      stats = candidates.meta;
      break;
    }
    case Pipeline::kEarshotDirect:
    case Pipeline::kEarshotPredict: {
      auto provider = make_provider(cfg);
      VectorIndex index = build_index(posts, *provider, cfg.embeddings.batch_size,
                                      cfg.mock_endpoints ? 1 : cfg.embeddings.max_in_flight);
      index.save(cfg.output / "index.bin");
      artifacts["index.bin"] = file_hash(cfg.output / "index.bin");
      PromptRegistry prompts =
          cfg.prompts_file ? PromptRegistry::load(*cfg.prompts_file) : PromptRegistry::builtin();
      EarshotConfig ec = cfg.earshot;
      EarshotResult r;
      if (pipeline == Pipeline::kEarshotDirect) {
        std::unique_ptr<ChatBackend> chat;
        if (cfg.mock_endpoints) {
          chat = std::make_unique<OracleMockChat>(glossary);
        } else {
          chat = std::make_unique<HttpChat>(cfg.chat);
        }
        ec.max_in_flight = cfg.chat.max_in_flight;
        r = run_direct(posts, split, index, *chat, prompts, ec);
      } else {
        std::unique_ptr<ChatBackend> chat;
        std::unique_ptr<ClassifyBackend> classifier;
        FilterBackends fb;
        fb.positive_labels = cfg.positive_labels;
        if (ec.filter == FilterStrategy::kLlmYesNo) {
          if (cfg.mock_endpoints) {
            chat = std::make_unique<OracleMockChat>(glossary);
          } else {
            chat = std::make_unique<HttpChat>(cfg.chat);
          }
          fb.chat = chat.get();
          ec.max_in_flight = cfg.chat.max_in_flight;
        } else {
          if (cfg.mock_endpoints) {
            classifier = std::make_unique<OracleMockClassifier>(glossary);
            fb.positive_labels = {"hate"};
          } else {
            classifier = std::make_unique<HttpClassify>(cfg.classify);
          }
          fb.classifier = classifier.get();
          ec.max_in_flight = cfg.classify.max_in_flight;
          ec.batch_size = cfg.classify.batch_size;
        }
        r = run_predict(posts, split, index, fb, prompts, ec, provider.get());
        std::ofstream dec(cfg.output / "decisions.jsonl", std::ios::binary);
        for (const auto& d : r.decisions) dec << d.to_json().dump() << '\n';
        dec.close();
        artifacts["decisions.jsonl"] = file_hash(cfg.output / "decisions.jsonl");
      }
      candidates = std::move(r.candidates);
      stats = r.stats;
      break;
    }
  }

  // Nothing a pipeline returns may name a train seed.
  stats["seed_surfaces_removed_final"] = remove_seed_surfaces(candidates, split.train);
  for (auto& it : candidates.items) it.source = it.source.empty() ? source : it.source;

  json header = {{"config_hash", result.config_hash},
                 {"glossary_hash", result.glossary_hash},
                 {"scenario", cfg.scenario},
                 {"pipeline", source},
                 {"preprocess", pp.to_json()},
                 {"stats", stats}};
  candidates.meta = header;
  candidates.save(cfg.output / "candidates.jsonl");
  artifacts["candidates.jsonl"] = file_hash(cfg.output / "candidates.jsonl");

  json split_json = split.to_json();
  split_json["config_hash"] = result.config_hash;
  split_json["glossary_hash"] = result.glossary_hash;
  write_json(cfg.output / "split.json", split_json);
  artifacts["split.json"] = file_hash(cfg.output / "split.json");

  const bool ranked = pipeline != Pipeline::kEarshotDirect;
  result.reports = sweep_thresholds(candidates.terms(), split.test, present, cfg.sweep, ranked,
                                    cfg.eval, &split.train);
  json reports = json::array();
  for (const auto& r : result.reports) {
    json j = r.to_json();
    j["model"] = source;
    j["scenario"] = cfg.scenario;
    j["config_hash"] = result.config_hash;
    j["glossary_hash"] = result.glossary_hash;
    reports.push_back(std::move(j));
  }
  write_json(cfg.output / "report.json", reports);
  artifacts["report.json"] = file_hash(cfg.output / "report.json");
  {
    std::ofstream tsv(cfg.output / "report.tsv", std::ios::binary);
    tsv << "# config_hash=" << result.config_hash << " glossary_hash=" << result.glossary_hash << '\n';
    write_report_tsv(tsv, source, result.reports);
  }
  artifacts["report.tsv"] = file_hash(cfg.output / "report.tsv");

  write_json(cfg.output / "manifest.json",
             {{"config", cfg.to_json()},
              {"config_hash", result.config_hash},
              {"glossary_hash", result.glossary_hash},
              {"ingest", {{"posts", ingest.posts}, {"malformed", ingest.malformed}}},
              {"present_roots", present.size()},
              {"artifacts", artifacts}});
  result.candidates = std::move(candidates);
  return result;
}

// ---- report merging --------------------------------------------------------------

std::vector<ReportRow> collect_report_rows(const std::vector<fs::path>& dirs) {
  std::vector<ReportRow> rows;
  for (const auto& dir : dirs) {
    fs::path file = dir / "report.json";
    if (!fs::exists(file)) {
      spdlog::warn("skipping {}: no report.json", dir.string());
      continue;
    }
    std::ifstream in(file);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array() || doc.empty()) {
      spdlog::warn("skipping {}: empty or unreadable report.json", dir.string());
      continue;
    }
    const json* best = &doc.front();
    for (const auto& r : doc) {
      if (r.value("best", false)) {
        best = &r;
        break;
      }
    }
    ReportRow row;
    row.scenario = best->value("scenario", "");
    row.pipeline = best->value("model", "");
    row.dir = dir.string();
    row.glossary_hash = best->value("glossary_hash", "");
    row.report.k = best->value("k", std::size_t{0});
    row.report.precision = best->value("precision", 0.0);
    row.report.dpr = best->value("dpr", 0.0);
    row.report.f_half = best->value("f_half", 0.0);
    row.report.n_predictions = best->value("n_predictions", std::size_t{0});
    row.report.best = true;
    if (best->contains("matched_roots")) {
      row.report.matched_roots = (*best)["matched_roots"].get<std::set<std::string>>();
    }
    rows.push_back(std::move(row));
  }
  for (const auto& r : rows) {
    if (r.glossary_hash != rows.front().glossary_hash) {
      throw Error("refusing to merge runs with different glossaries: " + rows.front().dir + " (" +
                  rows.front().glossary_hash + ") vs " + r.dir + " (" + r.glossary_hash + ")");
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.scenario, a.pipeline, a.dir) < std::tie(b.scenario, b.pipeline, b.dir);
  });
  return rows;
}

void write_comparison_table(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::map<std::string, double> best;
  for (const auto& r : rows) {
    auto [it, inserted] = best.emplace(r.scenario, r.report.f_half);
    if (!inserted) it->second = std::max(it->second, r.report.f_half);
  }
  out << "Scenario\tModel\tThreshold\tPrec\tDPR\tF0.5\n";
  for (const auto& r : rows) {
    std::string f = format_percent(r.report.f_half);
    if (r.report.f_half == best[r.scenario]) f = "**" + f + "**";
    out << r.scenario << '\t' << r.pipeline << '\t' << r.report.k << '\t'
        << format_percent(r.report.precision) << '\t' << format_percent(r.report.dpr) << '\t' << f
        << '\n';
  }
}

}  // namespace fetch
