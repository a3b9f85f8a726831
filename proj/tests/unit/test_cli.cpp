// Drives the fetchdw binary the way an operator would.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "json.hpp"

#include "fetch/eval.hpp"
#include "fetch/keywords.hpp"
#include "fetch/lexicon.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run(const std::string& args) {
  std::string cmd = std::string(FETCH_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) o.output.append(buf.data(), n);
  int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path workdir() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / "fetch_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    auto o = run("synth --out " + (d / "bench").string() + " --posts 1500 --seed 3");
    REQUIRE(o.code == 0);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const std::string& extra, bool with_glossary = true) {
  auto dir = workdir();
  auto path = dir / (name + ".yaml");
  std::ofstream out(path);
  out << "scenario: synth\n"
      << "corpus: bench/corpus.jsonl\n";
  if (with_glossary) out << "glossary: bench/glossary.json\n";
  out << "output: runs/" << name << "\n"
      << "sweep: [50, 100, 200]\n"
      << "w2v:\n  dim: 16\n  epochs: 2\n  min_count: 2\n"
      << extra;
  return path;
}

}  // namespace

TEST_CASE("w2v run writes every artifact") {
  auto cfg = write_config("w2v", "");
  auto o = run("run --config " + cfg.string() + " --pipeline w2v");
  INFO(o.output);
  REQUIRE(o.code == 0);
  CHECK(o.output.find("Model\tThreshold\tPrec\tDPR\tF0.5") != std::string::npos);
  auto out = workdir() / "runs" / "w2v";
  for (const char* f : {"report.tsv", "report.json", "candidates.jsonl", "split.json", "manifest.json", "model.bin"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  auto header = json::parse(slurp(out / "candidates.jsonl").substr(0, slurp(out / "candidates.jsonl").find('\n')));
  auto report = json::parse(slurp(out / "report.json"));
  auto split = json::parse(slurp(out / "split.json"));
  const auto hash = header["header"]["config_hash"];
  CHECK(report[0]["config_hash"] == hash);
  CHECK(split["config_hash"] == hash);
  CHECK(json::parse(slurp(out / "manifest.json"))["config_hash"] == hash);
  CHECK(slurp(out / "report.tsv").find("# config_hash=" + hash.get<std::string>()) == 0);
}

TEST_CASE("missing glossary is a config error naming the field") {
  auto cfg = write_config("noglossary", "", false);
  auto o = run("run --config " + cfg.string() + " --pipeline w2v");
  CHECK(o.code == 2);
  CHECK(o.output.find("glossary") != std::string::npos);
}

TEST_CASE("unknown keys and bad values are config errors") {
  auto cfg = write_config("typo", "earshot:\n  neighbours_per_seed: 2\n");
  auto o = run("run --config " + cfg.string() + " --pipeline w2v");
  CHECK(o.code == 2);
  CHECK(o.output.find("earshot.neighbours_per_seed") != std::string::npos);

  cfg = write_config("badpipe", "");
  o = run("run --config " + cfg.string() + " --pipeline word2vec");
  CHECK(o.code == 2);
  CHECK(o.output.find("pipeline") != std::string::npos);

  o = run("run --config " + cfg.string() + " --pipeline w2v --sweep 10,x");
  CHECK(o.code == 2);
  CHECK(o.output.find("sweep") != std::string::npos);

  cfg = write_config("nourl", "");
  o = run("run --config " + cfg.string() + " --pipeline earshot-direct");
  CHECK(o.code == 2);
  CHECK(o.output.find("endpoints.") != std::string::npos);
}

TEST_CASE("mock direct runs are byte-identical") {
  auto cfg = write_config("direct", "");
  auto a = run("run --config " + cfg.string() + " --pipeline earshot-direct --mock-endpoints --out " +
               (workdir() / "runs" / "direct_a").string());
  auto b = run("run --config " + cfg.string() + " --pipeline earshot-direct --mock-endpoints --out " +
               (workdir() / "runs" / "direct_b").string());
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"report.tsv", "report.json", "candidates.jsonl", "split.json"}) {
    CHECK_MESSAGE(slurp(workdir() / "runs" / "direct_a" / f) == slurp(workdir() / "runs" / "direct_b" / f), f);
  }
  // unranked: one report row at full size
  CHECK(json::parse(slurp(workdir() / "runs" / "direct_a" / "report.json")).size() == 1);
}

TEST_CASE("no train surface in written candidates") {
  auto out = workdir() / "runs" / "direct_a";
  REQUIRE(fs::exists(out / "candidates.jsonl"));
  auto glossary = fetch::load_glossary(workdir() / "bench" / "glossary.json");
  auto split = fetch::SeedSplit::from_json(json::parse(slurp(out / "split.json")), glossary);
  auto banned = fetch::normalized_surfaces(split.train);
  for (const auto& t : fetch::CandidateList::load(out / "candidates.jsonl").terms()) {
    CHECK_FALSE(banned.count(fetch::normalize_term(t)));
  }
}

TEST_CASE("report merges runs into one table") {
  auto runs = workdir() / "runs";
  REQUIRE(fs::exists(runs / "w2v" / "report.json"));
  REQUIRE(fs::exists(runs / "direct_a" / "report.json"));
  auto o = run("report " + (runs / "w2v").string() + " " + (runs / "direct_a").string());
  INFO(o.output);
  REQUIRE(o.code == 0);
  CHECK(o.output.rfind("Scenario\tModel\tThreshold\tPrec\tDPR\tF0.5\n", 0) == 0);
  CHECK(std::count(o.output.begin(), o.output.end(), '\n') == 3);
  CHECK(o.output.find("**") != std::string::npos);

  auto table = workdir() / "table.tsv";
  run("report " + (runs / "direct_a").string() + " " + (runs / "w2v").string() + " --out " + table.string());
  auto first = slurp(table);
  run("report " + (runs / "w2v").string() + " " + (runs / "direct_a").string() + " --out " + table.string());
  CHECK(slurp(table) == first);
}

TEST_CASE("report tolerates empty dirs and refuses mixed glossaries") {
  auto empty = workdir() / "empty_run";
  fs::create_directories(empty);
  auto o = run("report " + empty.string());
  CHECK(o.code == 0);
  CHECK(o.output.find("Scenario\tModel") != std::string::npos);

  auto other = workdir() / "runs" / "other";
  fs::create_directories(other);
  auto report = json::parse(slurp(workdir() / "runs" / "w2v" / "report.json"));
  for (auto& r : report) r["glossary_hash"] = "0000000000000000";
  std::ofstream(other / "report.json") << report.dump();
  o = run("report " + (workdir() / "runs" / "w2v").string() + " " + other.string());
  CHECK(o.code == 1);
  CHECK(o.output.find("different glossaries") != std::string::npos);
}
