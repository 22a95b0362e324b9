#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "absence/c45.hpp"
#include "absence/learners.hpp"

namespace absence {

// Bagged ensemble of C4.5 trees; majority vote with ties broken toward
// the present class.

class RandomForestModel : public Model {
 public:
  LearnerKind kind() const override { return LearnerKind::kRandomForest; }
  int predict(const FeatureVec& x) const override;
  nlohmann::json params_json() const override;

  std::vector<std::unique_ptr<TreeNode>> trees;
};

std::unique_ptr<RandomForestModel> forest_fit(const DataView& data,
                                              const Hyperparams& hp,
                                              std::uint64_t seed);

}  // namespace absence
