#pragma once

#include <map>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "absence/learners.hpp"

namespace absence {

// Decision table over a searched feature subset: keys are value
// combinations of the selected features, cells hold the majority class,
// unmatched queries fall back to the global majority.

class DecisionTableModel : public Model {
 public:
  LearnerKind kind() const override { return LearnerKind::kDecisionTable; }
  int predict(const FeatureVec& x) const override;
  nlohmann::json params_json() const override;

  std::vector<int> features;              // selected subset, ascending
  std::map<std::vector<int>, int> table;  // key -> class
  int fallback_class = 0;
};

// Leave-one-out accuracy of the table induced by the feature subset;
// exposed for the exhaustive-search oracle.
double table_loo_accuracy(const DataView& data, const std::vector<int>& subset);

std::unique_ptr<DecisionTableModel> decision_table_fit(const DataView& data,
                                                       const Hyperparams& hp);

}  // namespace absence
