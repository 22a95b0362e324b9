#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absence/dataset.hpp"
#include "absence/eval.hpp"
#include "absence/ingest.hpp"
#include "absence/learners.hpp"

namespace absence {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One structured file capturing a full reproducible run; command-line
// flags override individual fields.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 1;

  int window_minutes = 30;
  double threshold_watts = 10.0;
  int tz_offset_minutes = 0;

  // ingest: either synthetic generation or a UK-DALE house directory.
  std::string mode = "synth";  // "synth" | "ukdale"
  SynthConfig synth;
  std::string ukdale_dir;
  std::vector<std::string> appliances = {"television", "kettle", "oven",
                                         "microwave"};

  AnnotationConfig annotation;

  CvOptions cv;
  double alpha = 0.05;
  double subsample = 1.0;  // row fraction for the benchmark

  struct Tuning {
    int population = 20;
    int generations = 30;
    int random_draws = 60;
    int inner_folds = 3;
  } tuning;

  std::vector<std::string> learners = {"decision_table", "c45", "random_forest",
                                       "kde_nb", "mlp", "deep_nn"};

  Clock clock() const { return Clock(tz_offset_minutes); }
};

// Throws ConfigError on unknown keys or invalid values.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);
void validate_config(const RunConfig& cfg);

// Pipeline steps shared by the CLI and tests. Each returns the paths it
// wrote under cfg.out_dir.
std::vector<std::string> run_ingest(const RunConfig& cfg);
std::vector<std::string> run_annotate(const RunConfig& cfg);
std::vector<std::string> run_tune(const RunConfig& cfg, const std::string& learner);
std::vector<std::string> run_benchmark(const RunConfig& cfg);
std::vector<std::string> run_report(const RunConfig& cfg);

}  // namespace absence
