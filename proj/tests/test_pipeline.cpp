#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "absence/config.hpp"

using namespace absence;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("absence_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig small_config(const fs::path& out) {
  RunConfig cfg;
  cfg.out_dir = out.string();
  cfg.seed = 7;
  cfg.synth.num_days = 7;
  cfg.synth.start_date = {2013, 4, 1};
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults from an empty object") {
    const RunConfig cfg = config_from_json_text("{}");
    CHECK(cfg.seed == 1);
    CHECK(cfg.window_minutes == 30);
    CHECK(cfg.threshold_watts == 10.0);
    CHECK(cfg.mode == "synth");
    CHECK(cfg.learners.size() == 6);
  }
  SUBCASE("nested overrides") {
    const RunConfig cfg = config_from_json_text(R"({
      "seed": 99,
      "synth": {"start_date": "2014-02-01", "num_days": 3},
      "annotation": {"p_saturday_outing": 0.5},
      "cv": {"folds": 5, "runs": 2},
      "learners": ["c45", "kde_nb"]
    })");
    CHECK(cfg.seed == 99);
    CHECK(cfg.synth.start_date.year == 2014);
    CHECK(cfg.synth.num_days == 3);
    CHECK(cfg.annotation.p_saturday_outing == 0.5);
    CHECK(cfg.cv.folds == 5);
    CHECK(cfg.learners == std::vector<std::string>{"c45", "kde_nb"});
  }
  SUBCASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(config_from_json_text(R"({"sede": 1})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"synth": {"days": 3}})"),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"cv": {"fold": 10}})"), ConfigError);
  }
  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS(config_from_json_text(R"({"mode": "csv"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"window_minutes": 7})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"subsample": 0})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"learners": ["svm"]})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("[1,2]"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("{"), ConfigError);
  }
}

TEST_CASE("synthetic ingest and annotate") {
  TempDir tmp("pipeline");
  const RunConfig cfg = small_config(tmp.path);

  const auto ingest_paths = run_ingest(cfg);
  REQUIRE(ingest_paths.size() == 4);
  for (const auto& p : ingest_paths) {
    const std::string text = slurp(p);
    CHECK(text.rfind("window_start,appliance,mean_watts,sample_count", 0) == 0);
    CHECK(line_count(text) == 1 + 7 * 48);  // header + one row per window
  }

  const auto annotate_paths = run_annotate(cfg);
  REQUIRE(annotate_paths.size() == 3);
  const std::string dataset = slurp(tmp.path / "dataset.csv");
  CHECK(line_count(dataset) == 1 + 7 * 48);
  CHECK(slurp(tmp.path / "manifest.txt").rfind("annotation_manifest v1", 0) == 0);
  CHECK(slurp(tmp.path / "outing_histogram.csv").rfind("weekday,count", 0) == 0);

  SUBCASE("rerun is byte-identical") {
    const std::string manifest = slurp(tmp.path / "manifest.txt");
    run_ingest(cfg);
    run_annotate(cfg);
    CHECK(slurp(tmp.path / "dataset.csv") == dataset);
    CHECK(slurp(tmp.path / "manifest.txt") == manifest);
  }
  SUBCASE("different seed changes the traces") {
    RunConfig other = cfg;
    other.seed = 8;
    TempDir tmp2("pipeline_seed");
    other.out_dir = tmp2.path.string();
    run_ingest(other);
    CHECK(slurp(tmp2.path / "resampled_kettle.csv") !=
          slurp(tmp.path / "resampled_kettle.csv"));
  }
}

TEST_CASE("disabling every rule yields an all-present dataset") {
  TempDir tmp("no_rules");
  RunConfig cfg = small_config(tmp.path);
  cfg.annotation.p_saturday_outing = 0.0;
  cfg.annotation.fixed_trips = false;
  cfg.annotation.workday_rule = false;
  run_ingest(cfg);
  run_annotate(cfg);
  const std::string dataset = slurp(tmp.path / "dataset.csv");
  std::istringstream in(dataset);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    REQUIRE(!line.empty());
    CHECK(line.back() == '0');
  }
}

TEST_CASE("benchmark produces reports on a small run") {
  TempDir tmp("bench");
  RunConfig cfg = small_config(tmp.path);
  cfg.synth.num_days = 28;
  cfg.cv.folds = 3;
  cfg.cv.runs = 2;
  cfg.workers = 4;
  cfg.learners = {"c45", "kde_nb"};
  run_ingest(cfg);
  run_annotate(cfg);
  const auto paths = run_benchmark(cfg);
  CHECK(paths.size() == 3);
  const std::string csv = slurp(tmp.path / "report.csv");
  CHECK(csv.rfind("learner,stat,accuracy,precision,recall,f1", 0) == 0);
  CHECK(line_count(csv) == 1 + 2 * 2);  // 2 learners x {best, average}
  const std::string ttests = slurp(tmp.path / "ttests.csv");
  CHECK(ttests.rfind("baseline,challenger,t,p,significant", 0) == 0);
  CHECK(line_count(ttests) == 1 + 1);  // the baseline self-row is omitted
  CHECK(slurp(tmp.path / "report.txt").find("Classifier") != std::string::npos);

  // Tuned hyperparameters are picked up when present.
  {
    std::ofstream best(tmp.path / "best_c45.json");
    best << R"({"learner": "c45", "fitness": 0.9,)"
         << R"( "hyperparams": {"min_leaf": 4}})";
  }
  const auto paths2 = run_benchmark(cfg);
  CHECK(paths2.size() == 3);

  // Out-of-schema tuned values are rejected, not silently used.
  {
    std::ofstream best(tmp.path / "best_c45.json");
    best << R"({"learner": "c45", "fitness": 0.9,)"
         << R"( "hyperparams": {"min_leaf": 1000}})";
  }
  CHECK_THROWS_AS(run_benchmark(cfg), HyperparamError);
}

TEST_CASE("tuning step writes a log and best hyperparameters") {
  TempDir tmp("tune");
  RunConfig cfg = small_config(tmp.path);
  cfg.synth.num_days = 21;
  cfg.tuning.population = 4;
  cfg.tuning.generations = 2;
  cfg.tuning.random_draws = 3;
  cfg.tuning.inner_folds = 2;
  cfg.cv.runs = 1;
  run_ingest(cfg);
  run_annotate(cfg);
  for (const std::string learner : {"kde_nb", "deep_nn"}) {
    const auto paths = run_tune(cfg, learner);
    CHECK(paths.size() == 2);
    CHECK(slurp(tmp.path / ("tune_" + learner + ".csv"))
              .rfind("generation,candidate,fitness,skipped", 0) == 0);
    CHECK(slurp(tmp.path / ("best_" + learner + ".json")).find(learner) !=
          std::string::npos);
  }
  CHECK_THROWS(run_tune(cfg, "svm"));
}

TEST_CASE("missing inputs give actionable errors") {
  TempDir tmp("missing");
  RunConfig cfg = small_config(tmp.path);
  SUBCASE("annotate before ingest") {
    try {
      run_annotate(cfg);
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("resampled_") != std::string::npos);
    }
  }
  SUBCASE("ukdale mode without the house directory") {
    cfg.mode = "ukdale";
    cfg.ukdale_dir = (tmp.path / "house_1").string();
    try {
      run_ingest(cfg);
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("labels.dat") != std::string::npos);
    }
  }
}
