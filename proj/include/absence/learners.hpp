#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "absence/dataset.hpp"

namespace absence {

enum class LearnerKind {
  kDecisionTable,
  kC45,
  kRandomForest,
  kKdeNaiveBayes,
  kMlp,
  kDeepNn,
};

const char* learner_name(LearnerKind kind);
LearnerKind learner_from_name(const std::string& name);  // throws on unknown
extern const std::array<LearnerKind, 6> kAllLearners;

constexpr int kNumFeatures = 8;
using FeatureVec = std::array<int, kNumFeatures>;

// Index 0-3: appliance on/off (equality splits); 4-7: time_slot, weekday,
// day, month (threshold splits).
constexpr int kFirstNumericFeature = 4;
extern const std::array<const char*, kNumFeatures> kFeatureNames;
extern const std::array<int, kNumFeatures> kFeatureLo;
extern const std::array<int, kNumFeatures> kFeatureHi;  // slot bound is the loose 1440

FeatureVec to_features(const FeatureRow& row);
void check_feature_ranges(const FeatureVec& x);  // throws std::domain_error

struct DataView {
  std::vector<FeatureVec> x;
  std::vector<int> y;  // 0 = present, 1 = absent

  std::size_t size() const { return y.size(); }
};

DataView make_view(const LabeledDataset& ds);

// Flat name->value map; every hyperparameter in this project is numeric.
struct Hyperparams {
  std::map<std::string, double> values;

  double get(const std::string& name, double fallback) const {
    auto it = values.find(name);
    return it == values.end() ? fallback : it->second;
  }
  int get_int(const std::string& name, int fallback) const {
    return static_cast<int>(get(name, fallback));
  }
  void set(const std::string& name, double v) { values[name] = v; }
};

struct HyperparamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Throws HyperparamError on unknown names or out-of-schema values.
void validate_hyperparams(LearnerKind kind, const Hyperparams& hp);

class Model {
 public:
  virtual ~Model() = default;
  virtual LearnerKind kind() const = 0;
  virtual int predict(const FeatureVec& x) const = 0;
  virtual nlohmann::json params_json() const = 0;

  std::vector<int> predict_all(const std::vector<FeatureVec>& xs) const;
  double training_accuracy(const DataView& data) const;

  Hyperparams hyperparams;
  std::uint64_t seed = 0;
};

// Uniform entry point across the six learner families.
std::unique_ptr<Model> fit(LearnerKind kind, const DataView& data,
                           const Hyperparams& hp, std::uint64_t seed);

// Versioned structured-text serialization; load reproduces bit-identical
// predictions.
void save_model(const Model& model, std::ostream& out);
std::unique_ptr<Model> load_model(std::istream& in);
std::unique_ptr<Model> model_from_json(const nlohmann::json& j);

}  // namespace absence
