#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fetch/baselines.hpp"
#include "fetch/earshot.hpp"
#include "fetch/embedding.hpp"
#include "fetch/endpoints.hpp"
#include "fetch/eval.hpp"
#include "fetch/phraser.hpp"

namespace fetch {

enum class Pipeline { kW2v, kP2v2, kP2v3, kMlm, kEpd, kEarshotDirect, kEarshotPredict };

Pipeline parse_pipeline(std::string_view name);  // throws ConfigError("pipeline", ...)
std::string to_string(Pipeline p);

// One run, read from a YAML file. Relative paths resolve against the file's
// directory. Endpoint URLs may be overridden by FETCH_CHAT_URL,
// FETCH_EMBED_URL, FETCH_FILLMASK_URL and FETCH_CLASSIFY_URL.
struct RunConfig {
  std::string scenario = "default";
  std::filesystem::path corpus;
  std::filesystem::path glossary;
  std::optional<std::filesystem::path> split_file;  // fixed split instead of split_seeds
  std::optional<std::filesystem::path> prompts_file;
  std::filesystem::path output = "runs/out";
  std::optional<Pipeline> pipeline;
  bool mock_endpoints = false;

  double split_ratio = 0.2;
  std::uint64_t split_seed = 1;
  std::vector<std::size_t> sweep = kDefaultSweep;
  EvalOptions eval;

  EndpointConfig chat, embeddings, fill_mask, classify;
  std::set<std::string> positive_labels = {"hate"};
  int embedding_dim = 64;
  std::uint64_t embedding_seed = 1;

  Word2VecParams w2v;
  std::size_t expansion_k = 10;
  std::size_t expansion_levels = 10;
  PhraserParams phraser;
  MlmParams mlm;
  EpdParams epd;
  EarshotConfig earshot;

  // Checks paths and ranges; throws ConfigError naming the field.
  void validate() const;
  // Canonical form: everything that influences results (not the output dir).
  nlohmann::json to_json() const;
  std::string hash() const;
};

struct CliOverrides {
  std::optional<std::string> pipeline;
  std::optional<std::filesystem::path> output;
  std::optional<std::vector<std::size_t>> sweep;
  bool mock_endpoints = false;
};

RunConfig load_run_config(const std::filesystem::path& path, const CliOverrides& overrides = {});

struct RunResult {
  CandidateList candidates;
  std::vector<EvalReport> reports;
  std::filesystem::path out_dir;
  std::string config_hash;
  std::string glossary_hash;
};

std::string glossary_hash(const std::vector<GlossaryEntry>& glossary);

// Ingest, split, build, run, evaluate; writes split.json, candidates.jsonl,
// report.json, report.tsv, manifest.json and any model/index files.
RunResult run_pipeline(const RunConfig& cfg);

// One row per run dir at its best F0.5, ordered by (scenario, pipeline, dir),
// with the best F0.5 per scenario in bold. Dirs without a report are skipped
// with a warning. Throws Error when glossary hashes differ.
struct ReportRow {
  std::string scenario;
  std::string pipeline;
  std::string dir;
  std::string glossary_hash;
  EvalReport report;
};
std::vector<ReportRow> collect_report_rows(const std::vector<std::filesystem::path>& dirs);
void write_comparison_table(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace fetch
