// fetchdw: run dog-whistle discovery pipelines and compare their reports.
//
//   fetchdw run --config run.yaml [--pipeline P] [--mock-endpoints] [--sweep 50,100] [--out DIR]
//   fetchdw report RUN_DIR... [--out table.tsv]
//   fetchdw synth --out DIR [--posts N] [--rate R] [--seed S] [--seeds N] [--planted N]
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "fetch/common.hpp"
#include "fetch/pipeline.hpp"
#include "fetch/synthbench.hpp"

namespace {

std::vector<std::size_t> parse_sweep(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = fetch::trim(item);
    if (t.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(std::string(t), &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size() || v == 0) throw fetch::ConfigError("sweep", "not a positive integer: " + std::string(t));
    ks.push_back(static_cast<std::size_t>(v));
  }
  if (ks.empty()) throw fetch::ConfigError("sweep", "empty list");
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dog-whistle discovery: candidate generation and evaluation"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* run = app.add_subcommand("run", "Run one pipeline from a config file");
  std::string config_path, pipeline, sweep, out_dir;
  bool mock = false;
  run->add_option("--config", config_path, "Run configuration (YAML)")->required();
  run->add_option("--pipeline", pipeline,
                  "w2v | p2v-2 | p2v-3 | mlm | epd | earshot-direct | earshot-predict");
  run->add_flag("--mock-endpoints", mock, "Use deterministic in-process model stand-ins");
  run->add_option("--sweep", sweep, "Comma-separated cutoffs k");
  run->add_option("--out", out_dir, "Output directory");

  auto* report = app.add_subcommand("report", "Merge run reports into one comparison table");
  std::vector<std::string> run_dirs;
  std::string table_out;
  report->add_option("dirs", run_dirs, "Run directories");
  report->add_option("--out", table_out, "Write the table here instead of stdout");

  auto* synth = app.add_subcommand("synth", "Write a planted-lexicon benchmark corpus");
  std::string synth_out;
  std::size_t posts = 10000, n_seeds = 5, n_planted = 20;
  double rate = 1.0;
  std::uint64_t seed = 1;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--posts", posts, "Number of posts");
  synth->add_option("--rate", rate, "Fraction of posts carrying a term");
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--seeds", n_seeds, "Number of seed terms");
  synth->add_option("--planted", n_planted, "Number of planted terms");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  try {
    if (*run) {
      fetch::CliOverrides ov;
      if (!pipeline.empty()) ov.pipeline = pipeline;
      if (!out_dir.empty()) ov.output = out_dir;
      if (!sweep.empty()) ov.sweep = parse_sweep(sweep);
      ov.mock_endpoints = mock;
      auto cfg = fetch::load_run_config(config_path, ov);
      auto result = fetch::run_pipeline(cfg);
      const auto* best = fetch::best_report(result.reports);
      std::cout << "Model\tThreshold\tPrec\tDPR\tF0.5\n";
      if (best) {
        std::cout << fetch::to_string(*cfg.pipeline) << '\t' << best->k << '\t'
                  << fetch::format_percent(best->precision) << '\t'
                  << fetch::format_percent(best->dpr) << '\t' << fetch::format_percent(best->f_half)
                  << '\n';
      }
      spdlog::info("artifacts written to {}", result.out_dir.string());
    } else if (*report) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      auto rows = fetch::collect_report_rows(dirs);
      if (table_out.empty()) {
        fetch::write_comparison_table(std::cout, rows);
      } else {
        std::ofstream out(table_out, std::ios::binary);
        fetch::write_comparison_table(out, rows);
      }
    } else if (*synth) {
      auto spec = fetch::PlantSpec::standard(n_seeds, n_planted);
      spec.n_posts = posts;
      spec.plant_rate = rate;
      spec.rng_seed = seed;
      auto corpus = fetch::generate(spec, synth_out);
      spdlog::info("wrote {} posts, {} glossary terms to {}", corpus.posts.size(),
                   corpus.glossary.size(), synth_out);
    }
  } catch (const fetch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
