#include "absence/learners.hpp"

#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "absence/c45.hpp"
#include "absence/decision_table.hpp"
#include "absence/forest.hpp"
#include "absence/kde_nb.hpp"
#include "absence/mlp.hpp"

namespace absence {

const std::array<LearnerKind, 6> kAllLearners = {
    LearnerKind::kDecisionTable, LearnerKind::kC45,
    LearnerKind::kRandomForest,  LearnerKind::kKdeNaiveBayes,
    LearnerKind::kMlp,           LearnerKind::kDeepNn,
};

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "tv", "kettle", "oven", "microwave", "time_slot", "weekday", "day", "month"};
const std::array<int, kNumFeatures> kFeatureLo = {0, 0, 0, 0, 0, 0, 1, 1};
const std::array<int, kNumFeatures> kFeatureHi = {1, 1, 1, 1, 1439, 6, 31, 12};

const char* learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kDecisionTable: return "decision_table";
    case LearnerKind::kC45: return "c45";
    case LearnerKind::kRandomForest: return "random_forest";
    case LearnerKind::kKdeNaiveBayes: return "kde_nb";
    case LearnerKind::kMlp: return "mlp";
    case LearnerKind::kDeepNn: return "deep_nn";
  }
  return "?";
}

LearnerKind learner_from_name(const std::string& name) {
  for (LearnerKind kind : kAllLearners) {
    if (name == learner_name(kind)) return kind;
  }
  std::string valid;
  for (LearnerKind kind : kAllLearners) {
    valid += std::string(valid.empty() ? "" : ", ") + learner_name(kind);
  }
  throw std::invalid_argument("unknown learner \"" + name + "\" (valid: " + valid + ")");
}

FeatureVec to_features(const FeatureRow& row) {
  return {row.appliances_on[0], row.appliances_on[1], row.appliances_on[2],
          row.appliances_on[3], row.time_slot,        row.weekday,
          row.day,              row.month};
}

void check_feature_ranges(const FeatureVec& x) {
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (x[f] < kFeatureLo[f] || x[f] > kFeatureHi[f]) {
      throw std::domain_error(std::string("feature ") + kFeatureNames[f] +
                              " out of range: " + std::to_string(x[f]));
    }
  }
}

DataView make_view(const LabeledDataset& ds) {
  DataView view;
  view.x.reserve(ds.rows.size());
  view.y.reserve(ds.rows.size());
  for (const auto& r : ds.rows) {
    view.x.push_back(to_features(r.features));
    view.y.push_back(r.label);
  }
  return view;
}

namespace {

struct ParamSchema {
  const char* name;
  double lo, hi;
};

std::vector<ParamSchema> schema_for(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kDecisionTable:
      return {{"search_stale_limit", 1, 16}};
    case LearnerKind::kC45:
      return {{"pruning_confidence", 0.01, 0.5},
              {"min_leaf", 1, 64},
              {"gain_ratio", 0, 1},
              {"prune", 0, 1}};
    case LearnerKind::kRandomForest:
      return {{"tree_count", 1, 300},
              {"bootstrap", 0, 1},
              {"feature_subset_size", 1, kNumFeatures},
              {"pruning_confidence", 0.01, 0.5},
              {"min_leaf", 1, 64},
              {"gain_ratio", 0, 1},
              {"prune", 0, 1}};
    case LearnerKind::kKdeNaiveBayes:
      return {{"bandwidth_mode", 0, 1}, {"bandwidth_scale", 0.05, 20}};
    case LearnerKind::kMlp:
      return {{"hidden_layers", 1, 10},
              {"hidden_units", 1, 128},
              {"learning_rate", 1e-5, 1},
              {"epochs", 1, 500},
              {"batch_size", 1, 4096},
              {"l2", 0, 0.1}};
    case LearnerKind::kDeepNn:
      // Depth left open by contract; capped at 32 for tractability.
      return {{"hidden_layers", 1, 32},
              {"hidden_units", 1, 128},
              {"learning_rate", 1e-5, 1},
              {"epochs", 1, 500},
              {"batch_size", 1, 4096},
              {"l2", 0, 0.1}};
  }
  return {};
}

}  // namespace

void validate_hyperparams(LearnerKind kind, const Hyperparams& hp) {
  const auto schema = schema_for(kind);
  for (const auto& [name, value] : hp.values) {
    const auto it = std::find_if(schema.begin(), schema.end(),
                                 [&](const ParamSchema& p) { return name == p.name; });
    if (it == schema.end()) {
      throw HyperparamError(std::string(learner_name(kind)) +
                            ": unknown hyperparameter \"" + name + "\"");
    }
    if (value < it->lo || value > it->hi) {
      throw HyperparamError(std::string(learner_name(kind)) + ": " + name + "=" +
                            std::to_string(value) + " outside [" +
                            std::to_string(it->lo) + ", " + std::to_string(it->hi) +
                            "]");
    }
  }
}

std::vector<int> Model::predict_all(const std::vector<FeatureVec>& xs) const {
  std::vector<int> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

double Model::training_accuracy(const DataView& data) const {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict(data.x[i]) == data.y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::unique_ptr<Model> fit(LearnerKind kind, const DataView& data,
                           const Hyperparams& hp, std::uint64_t seed) {
  if (data.size() == 0) throw std::invalid_argument("fit: empty dataset");
  validate_hyperparams(kind, hp);
  switch (kind) {
    case LearnerKind::kDecisionTable: {
      auto m = decision_table_fit(data, hp);
      m->seed = seed;
      return m;
    }
    case LearnerKind::kC45:
      return c45_fit(data, hp, seed);
    case LearnerKind::kRandomForest:
      return forest_fit(data, hp, seed);
    case LearnerKind::kKdeNaiveBayes: {
      auto m = kde_nb_fit(data, hp);
      m->seed = seed;
      return m;
    }
    case LearnerKind::kMlp:
    case LearnerKind::kDeepNn:
      return mlp_fit(kind, data, hp, seed);
  }
  throw std::invalid_argument("fit: unknown learner kind");
}

void save_model(const Model& model, std::ostream& out) {
  nlohmann::json j;
  j["format"] = "absence-model";
  j["version"] = 1;
  j["kind"] = learner_name(model.kind());
  j["seed"] = model.seed;
  j["hyperparams"] = model.hyperparams.values;
  j["params"] = model.params_json();
  out << j.dump(2) << '\n';
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
  if (j.at("format") != "absence-model" || j.at("version") != 1) {
    throw std::invalid_argument("unsupported model file");
  }
  const LearnerKind kind = learner_from_name(j.at("kind").get<std::string>());
  const auto& params = j.at("params");
  std::unique_ptr<Model> model;
  switch (kind) {
    case LearnerKind::kC45: {
      auto m = std::make_unique<C45Model>();
      m->root = tree_from_json(params);
      model = std::move(m);
      break;
    }
    case LearnerKind::kRandomForest: {
      auto m = std::make_unique<RandomForestModel>();
      for (const auto& t : params) m->trees.push_back(tree_from_json(t));
      model = std::move(m);
      break;
    }
    case LearnerKind::kDecisionTable: {
      auto m = std::make_unique<DecisionTableModel>();
      m->features = params.at("features").get<std::vector<int>>();
      m->fallback_class = params.at("fallback").get<int>();
      for (const auto& row : params.at("rows")) {
        m->table[row.at("key").get<std::vector<int>>()] = row.at("class").get<int>();
      }
      model = std::move(m);
      break;
    }
    case LearnerKind::kKdeNaiveBayes: {
      auto m = std::make_unique<KdeNaiveBayesModel>();
      for (std::size_t c = 0; c < 2; ++c) {
        const auto& cj = params.at(c);
        auto& cp = m->classes[c];
        cp.log_prior = cj.at("log_prior").get<double>();
        cp.log_p_on = cj.at("log_p_on").get<std::array<double, 4>>();
        cp.log_p_off = cj.at("log_p_off").get<std::array<double, 4>>();
        for (std::size_t f = 0; f < 4; ++f) {
          const auto& kj = cj.at("kde").at(f);
          cp.kde[f].bandwidth = kj.at("bandwidth").get<double>();
          cp.kde[f].n = kj.at("n").get<std::int64_t>();
          for (const auto& vc : kj.at("values")) {
            cp.kde[f].value_counts.emplace_back(vc.at(0).get<int>(),
                                                vc.at(1).get<std::int64_t>());
          }
        }
      }
      model = std::move(m);
      break;
    }
    case LearnerKind::kMlp:
    case LearnerKind::kDeepNn: {
      Network net(params.at("layer_sizes").get<std::vector<int>>());
      net.set_parameters(params.at("parameters").get<std::vector<double>>());
      auto m = std::make_unique<MlpModel>(kind, std::move(net));
      m->feature_scale =
          params.at("feature_scale").get<std::array<double, kNumFeatures>>();
      model = std::move(m);
      break;
    }
  }
  model->seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [name, value] : j.at("hyperparams").items()) {
    model->hyperparams.set(name, value.get<double>());
  }
  return model;
}

std::unique_ptr<Model> load_model(std::istream& in) {
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace absence
