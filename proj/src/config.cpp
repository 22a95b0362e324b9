#include "absence/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "absence/tuning.hpp"

namespace absence {
namespace fs = std::filesystem;

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, const std::string& hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string() +
                             (hint.empty() ? "" : " (" + hint + ")"));
  }
  return in;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  try {
    check_keys(j,
               {"seed", "out_dir", "workers", "window_minutes", "threshold_watts",
                "tz_offset_minutes", "mode", "synth", "ukdale_dir", "appliances",
                "annotation", "cv", "alpha", "subsample", "tuning", "learners"},
               "top level");
    maybe(j, "seed", cfg.seed);
    maybe(j, "out_dir", cfg.out_dir);
    maybe(j, "workers", cfg.workers);
    maybe(j, "window_minutes", cfg.window_minutes);
    maybe(j, "threshold_watts", cfg.threshold_watts);
    maybe(j, "tz_offset_minutes", cfg.tz_offset_minutes);
    maybe(j, "mode", cfg.mode);
    maybe(j, "ukdale_dir", cfg.ukdale_dir);
    maybe(j, "appliances", cfg.appliances);
    maybe(j, "alpha", cfg.alpha);
    maybe(j, "subsample", cfg.subsample);
    maybe(j, "learners", cfg.learners);
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      check_keys(s,
                 {"start_date", "num_days", "p_weekday_midday_use",
                  "p_saturday_midday_use"},
                 "synth");
      if (s.contains("start_date")) {
        cfg.synth.start_date = parse_date(s.at("start_date").get<std::string>());
      }
      maybe(s, "num_days", cfg.synth.num_days);
      maybe(s, "p_weekday_midday_use", cfg.synth.p_weekday_midday_use);
      maybe(s, "p_saturday_midday_use", cfg.synth.p_saturday_midday_use);
    }
    if (j.contains("annotation")) {
      const auto& a = j.at("annotation");
      check_keys(a,
                 {"p_saturday_outing", "saturday_start_hours",
                  "saturday_duration_hours", "summer_start_days", "fixed_trips",
                  "workday_rule"},
                 "annotation");
      maybe(a, "p_saturday_outing", cfg.annotation.p_saturday_outing);
      if (a.contains("saturday_start_hours")) {
        const auto v = a.at("saturday_start_hours").get<std::vector<double>>();
        if (v.size() != 2) throw ConfigError("config: saturday_start_hours needs 2 values");
        cfg.annotation.saturday_start_lo_h = v[0];
        cfg.annotation.saturday_start_hi_h = v[1];
      }
      if (a.contains("saturday_duration_hours")) {
        const auto v = a.at("saturday_duration_hours").get<std::vector<double>>();
        if (v.size() != 2) throw ConfigError("config: saturday_duration_hours needs 2 values");
        cfg.annotation.saturday_dur_lo_h = v[0];
        cfg.annotation.saturday_dur_hi_h = v[1];
      }
      if (a.contains("summer_start_days")) {
        const auto v = a.at("summer_start_days").get<std::vector<int>>();
        if (v.size() != 2) throw ConfigError("config: summer_start_days needs 2 values");
        cfg.annotation.summer_start_day_lo = v[0];
        cfg.annotation.summer_start_day_hi = v[1];
      }
      maybe(a, "fixed_trips", cfg.annotation.fixed_trips);
      maybe(a, "workday_rule", cfg.annotation.workday_rule);
    }
    if (j.contains("cv")) {
      const auto& c = j.at("cv");
      check_keys(c, {"folds", "runs", "stratified", "pool_folds", "positive_class"},
                 "cv");
      maybe(c, "folds", cfg.cv.folds);
      maybe(c, "runs", cfg.cv.runs);
      maybe(c, "stratified", cfg.cv.stratified);
      maybe(c, "pool_folds", cfg.cv.pool_folds);
      maybe(c, "positive_class", cfg.cv.positive_class);
    }
    if (j.contains("tuning")) {
      const auto& t = j.at("tuning");
      check_keys(t, {"population", "generations", "random_draws", "inner_folds"},
                 "tuning");
      maybe(t, "population", cfg.tuning.population);
      maybe(t, "generations", cfg.tuning.generations);
      maybe(t, "random_draws", cfg.tuning.random_draws);
      maybe(t, "inner_folds", cfg.tuning.inner_folds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

void validate_config(const RunConfig& cfg) {
  if (cfg.mode != "synth" && cfg.mode != "ukdale") {
    throw ConfigError("config: mode must be \"synth\" or \"ukdale\"");
  }
  if (cfg.window_minutes <= 0 || 1440 % cfg.window_minutes != 0) {
    throw ConfigError("config: window_minutes must divide 1440");
  }
  if (cfg.threshold_watts <= 0) throw ConfigError("config: threshold_watts must be > 0");
  if (cfg.synth.num_days < 1) throw ConfigError("config: synth num_days must be >= 1");
  if (cfg.annotation.p_saturday_outing < 0 || cfg.annotation.p_saturday_outing > 1) {
    throw ConfigError("config: p_saturday_outing must be in [0, 1]");
  }
  if (cfg.cv.folds < 2 || cfg.cv.runs < 1) {
    throw ConfigError("config: need cv folds >= 2 and runs >= 1");
  }
  if (cfg.subsample <= 0 || cfg.subsample > 1) {
    throw ConfigError("config: subsample must be in (0, 1]");
  }
  if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (cfg.appliances.size() != 4) {
    throw ConfigError("config: exactly 4 appliance channels are supported");
  }
  for (const auto& name : cfg.learners) {
    try {
      learner_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (cfg.tuning.population < 2 || cfg.tuning.generations < 1 ||
      cfg.tuning.random_draws < 1 || cfg.tuning.inner_folds < 2) {
    throw ConfigError("config: invalid tuning settings");
  }
}

namespace {

fs::path resampled_path(const RunConfig& cfg, const std::string& appliance) {
  return fs::path(cfg.out_dir) / ("resampled_" + appliance + ".csv");
}

std::vector<ResampledSeries> load_resampled(const RunConfig& cfg) {
  std::vector<ResampledSeries> channels;
  for (const auto& appliance : cfg.appliances) {
    auto in = open_in(resampled_path(cfg, appliance),
                      "run the ingest command first");
    channels.push_back(read_resampled_csv(in));
  }
  return channels;
}

DataView load_view(const RunConfig& cfg) {
  auto in = open_in(fs::path(cfg.out_dir) / "dataset.csv",
                    "run the annotate command first");
  return make_view(read_dataset_csv(in));
}

// Deterministic stratified row subsample for the desk-scale modes.
DataView subsample_view(const DataView& data, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return data;
  DataView out;
  Rng rng(derive_seed(seed, "subsample"));
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.y[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto keep = static_cast<std::size_t>(
        fraction * static_cast<double>(members.size()));
    members.resize(std::max<std::size_t>(keep, 1));
    std::sort(members.begin(), members.end());
    for (auto i : members) {
      out.x.push_back(data.x[i]);
      out.y.push_back(data.y[i]);
    }
  }
  return out;
}

Hyperparams tuned_or_default(const RunConfig& cfg, LearnerKind kind) {
  const fs::path path =
      fs::path(cfg.out_dir) / ("best_" + std::string(learner_name(kind)) + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return Hyperparams{};
  return read_best_hyperparams(in);
}

}  // namespace

std::vector<std::string> run_ingest(const RunConfig& cfg) {
  validate_config(cfg);
  const Clock clock = cfg.clock();
  std::vector<std::pair<std::string, ResampledSeries>> outputs;

  if (cfg.mode == "synth") {
    for (const auto& appliance : cfg.appliances) {
      SynthConfig synth = cfg.synth;
      synth.seed = derive_seed(cfg.seed, "synth");
      const RawSeries raw = synth_channel(appliance, synth, clock);
      outputs.emplace_back(appliance, resample(raw, cfg.window_minutes, clock));
    }
  } else {
    const fs::path labels_path = fs::path(cfg.ukdale_dir) / "labels.dat";
    std::ifstream labels_in(labels_path, std::ios::binary);
    if (!labels_in) {
      throw std::runtime_error("missing labels file: expected " +
                               labels_path.string());
    }
    const auto labels = parse_labels(labels_in);
    for (const auto& appliance : cfg.appliances) {
      int channel = -1;
      for (const auto& [ch, name] : labels) {
        if (name == appliance) {
          channel = ch;
          break;
        }
      }
      if (channel < 0) {
        throw std::runtime_error("appliance \"" + appliance + "\" not in " +
                                 labels_path.string());
      }
      const fs::path channel_path =
          fs::path(cfg.ukdale_dir) / ("channel_" + std::to_string(channel) + ".dat");
      auto in = open_in(channel_path, "UK-DALE channel file");
      const RawSeries raw = parse_channel(in, appliance);
      outputs.emplace_back(appliance, resample(raw, cfg.window_minutes, clock));
    }
  }

  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  for (const auto& [appliance, series] : outputs) {
    const fs::path path = resampled_path(cfg, appliance);
    auto out = open_out(path);
    write_resampled_csv(series, out);
    written.push_back(path.string());
  }
  return written;
}

std::vector<std::string> run_annotate(const RunConfig& cfg) {
  validate_config(cfg);
  const Clock clock = cfg.clock();
  const auto channels = load_resampled(cfg);
  const BinarizedGrid grid = binarize_grid(channels, cfg.threshold_watts);

  AnnotationConfig ann_cfg = cfg.annotation;
  ann_cfg.seed = derive_seed(cfg.seed, "annotation");
  const Annotation ann = annotate(grid, ann_cfg, clock);
  const LabeledDataset ds = build_dataset(grid, ann.effective, clock);

  std::vector<std::string> written;
  const fs::path out_dir(cfg.out_dir);
  {
    auto out = open_out(out_dir / "dataset.csv");
    write_dataset_csv(ds, out);
    written.push_back((out_dir / "dataset.csv").string());
  }
  {
    auto out = open_out(out_dir / "manifest.txt");
    write_manifest(ann, clock, out);
    written.push_back((out_dir / "manifest.txt").string());
  }
  {
    auto out = open_out(out_dir / "outing_histogram.csv");
    write_histogram_csv(outing_histogram(ds), out);
    written.push_back((out_dir / "outing_histogram.csv").string());
  }
  return written;
}

std::vector<std::string> run_tune(const RunConfig& cfg, const std::string& learner) {
  validate_config(cfg);
  const LearnerKind kind = learner_from_name(learner);
  const DataView full = load_view(cfg);
  const DataView data = subsample_view(full, cfg.subsample, cfg.seed);

  CvOptions inner;
  inner.folds = cfg.tuning.inner_folds;
  inner.runs = 1;
  inner.positive_class = cfg.cv.positive_class;
  inner.workers = cfg.workers;
  const auto tune_seed = derive_seed(cfg.seed, std::string("tune/") + learner);
  const FitnessFn fitness = [&](const Hyperparams& hp) {
    try {
      return cross_validate(data, kind, hp, inner, tune_seed).overall_mean.f1;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();  // skipped and logged
    }
  };

  const SearchSpace space = default_search_space(kind);
  TuneResult result;
  if (kind == LearnerKind::kDeepNn) {
    result = random_search(space, fitness, cfg.tuning.random_draws, tune_seed);
  } else {
    QgaConfig qga;
    qga.population = cfg.tuning.population;
    qga.generations = cfg.tuning.generations;
    result = qga_tune(space, fitness, qga, tune_seed);
  }

  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);
  const std::string tag(learner_name(kind));
  std::vector<std::string> written;
  {
    auto out = open_out(out_dir / ("tune_" + tag + ".csv"));
    write_tune_log_csv(result, out);
    written.push_back((out_dir / ("tune_" + tag + ".csv")).string());
  }
  {
    auto out = open_out(out_dir / ("best_" + tag + ".json"));
    write_best_hyperparams(result, kind, out);
    written.push_back((out_dir / ("best_" + tag + ".json")).string());
  }
  return written;
}

std::vector<std::string> run_benchmark(const RunConfig& cfg) {
  validate_config(cfg);
  const DataView full = load_view(cfg);
  const DataView data = subsample_view(full, cfg.subsample, cfg.seed);

  std::vector<BenchmarkEntry> entries;
  for (const auto& name : cfg.learners) {
    const LearnerKind kind = learner_from_name(name);
    entries.push_back(BenchmarkEntry{kind, tuned_or_default(cfg, kind)});
  }
  CvOptions opt = cfg.cv;
  opt.workers = cfg.workers;
  const BenchmarkReport report =
      benchmark(data, entries, opt, cfg.alpha, derive_seed(cfg.seed, "benchmark"));

  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  {
    auto out = open_out(out_dir / "report.txt");
    write_report_text(report, out);
    written.push_back((out_dir / "report.txt").string());
  }
  {
    auto out = open_out(out_dir / "report.csv");
    write_report_csv(report, out);
    written.push_back((out_dir / "report.csv").string());
  }
  {
    auto out = open_out(out_dir / "ttests.csv");
    write_ttest_csv(report, out);
    written.push_back((out_dir / "ttests.csv").string());
  }
  return written;
}

std::vector<std::string> run_report(const RunConfig& cfg) {
  const fs::path out_dir(cfg.out_dir);
  std::vector<std::string> produced;
  for (const char* name : {"report.txt", "ttests.csv", "outing_histogram.csv"}) {
    const fs::path path = out_dir / name;
    if (fs::exists(path)) produced.push_back(path.string());
  }
  if (produced.empty()) {
    throw std::runtime_error("no report artifacts under " + cfg.out_dir +
                             "; run benchmark first");
  }
  return produced;
}

}  // namespace absence
