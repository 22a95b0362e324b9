#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "absence/learners.hpp"
#include "absence/rng.hpp"

namespace absence {

// C4.5-style induction: information-gain splits (gain ratio behind a
// switch), binary threshold splits at midpoints for numeric features,
// equality splits for binary ones, pessimistic-error subtree replacement.

struct TreeNode {
  bool leaf = true;
  int feature = -1;
  double threshold = 0.0;  // numeric: go left iff value <= threshold;
                           // binary: left = 0, right = 1
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  int leaf_class = 0;
  std::array<double, 2> counts{};  // training class counts reaching the node

  int node_count() const;
  int depth() const;
};

struct C45Config {
  double pruning_confidence = 0.25;
  int min_leaf = 2;
  bool gain_ratio = false;
  bool prune = true;
  bool allow_zero_gain_fallback = true;
};

// Candidate-feature provider per node; empty = all features.
using FeatureSampler = std::function<std::vector<int>(Rng&)>;

struct SplitChoice {
  int feature;
  double threshold;
  double gain;
};

// Best split over the candidate features, or nullopt when no split has
// positive gain or respects min_leaf. Exposed for the brute-force oracle.
std::optional<SplitChoice> best_split(const DataView& data,
                                      const std::vector<std::size_t>& idx,
                                      const std::vector<int>& features,
                                      const C45Config& cfg);

std::unique_ptr<TreeNode> grow_tree(const DataView& data,
                                    const std::vector<std::size_t>& idx,
                                    const C45Config& cfg,
                                    const FeatureSampler& sampler, Rng& rng);

// Bottom-up subtree replacement; never increases the node count.
void prune_tree(TreeNode& node, double confidence);

int tree_predict(const TreeNode& node, const FeatureVec& x);

nlohmann::json tree_to_json(const TreeNode& node);
std::unique_ptr<TreeNode> tree_from_json(const nlohmann::json& j);

class C45Model : public Model {
 public:
  LearnerKind kind() const override { return LearnerKind::kC45; }
  int predict(const FeatureVec& x) const override;
  nlohmann::json params_json() const override;

  std::unique_ptr<TreeNode> root;
};

std::unique_ptr<C45Model> c45_fit(const DataView& data, const Hyperparams& hp,
                                  std::uint64_t seed);

// Weka-style pessimistic extra-error estimate for a leaf with n cases and
// e errors at the given confidence.
double pessimistic_added_errors(double n, double e, double confidence);

}  // namespace absence
