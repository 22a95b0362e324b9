#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "absence/config.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<double> subsample;
};

absence::RunConfig resolve_config(const GlobalFlags& flags) {
  absence::RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = absence::load_config(flags.config_path);
  }
  // Flags win over the config file.
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.workers) cfg.workers = *flags.workers;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  if (flags.subsample) cfg.subsample = *flags.subsample;
  absence::validate_config(cfg);
  return cfg;
}

void print_written(const std::vector<std::string>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Home-absence detection pipeline: ingest appliance traces, "
               "annotate outings, tune and benchmark classifiers"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "JSON run configuration");
  app.add_option("--seed", flags.seed, "master seed (overrides config)");
  app.add_option("--workers", flags.workers, "worker threads");
  app.add_option("--out", flags.out_dir, "output directory");
  app.add_option("--subsample", flags.subsample, "benchmark row fraction (0, 1]");

  auto* ingest = app.add_subcommand("ingest", "parse or synthesize channels and resample");
  auto* annotate = app.add_subcommand("annotate", "inject outing events and emit the labeled dataset");
  auto* tune = app.add_subcommand("tune", "hyperparameter search for one learner");
  std::string learner;
  tune->add_option("learner", learner, "learner kind")->required();
  auto* bench = app.add_subcommand("benchmark", "repeated cross-validation over all learners");
  auto* report = app.add_subcommand("report", "print benchmark tables");
  // Let global flags appear after the subcommand name.
  for (auto* sub : {ingest, annotate, tune, bench, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const absence::RunConfig cfg = resolve_config(flags);
    if (ingest->parsed()) {
      print_written(absence::run_ingest(cfg));
    } else if (annotate->parsed()) {
      print_written(absence::run_annotate(cfg));
    } else if (tune->parsed()) {
      try {
        absence::learner_from_name(learner);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
      print_written(absence::run_tune(cfg, learner));
    } else if (bench->parsed()) {
      print_written(absence::run_benchmark(cfg));
    } else if (report->parsed()) {
      for (const auto& path : absence::run_report(cfg)) {
        std::ifstream in(path, std::ios::binary);
        std::cout << "== " << path << " ==\n" << in.rdbuf() << '\n';
      }
    }
  } catch (const absence::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
