#include "absence/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace absence {

int RandomForestModel::predict(const FeatureVec& x) const {
  check_feature_ranges(x);
  int votes_absent = 0;
  for (const auto& tree : trees) {
    votes_absent += tree_predict(*tree, x);
  }
  // Majority vote; a tie goes to present (0).
  return 2 * votes_absent > static_cast<int>(trees.size()) ? 1 : 0;
}

nlohmann::json RandomForestModel::params_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& tree : trees) j.push_back(tree_to_json(*tree));
  return j;
}

std::unique_ptr<RandomForestModel> forest_fit(const DataView& data,
                                              const Hyperparams& hp,
                                              std::uint64_t seed) {
  const int tree_count = hp.get_int("tree_count", 100);
  const bool bootstrap = hp.get_int("bootstrap", 1) != 0;
  const int default_subset =
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(kNumFeatures))));
  const int subset_size = hp.get_int("feature_subset_size", default_subset);

  C45Config cfg;
  cfg.pruning_confidence = hp.get("pruning_confidence", 0.25);
  cfg.min_leaf = hp.get_int("min_leaf", 2);
  cfg.gain_ratio = hp.get_int("gain_ratio", 0) != 0;
  cfg.prune = hp.get_int("prune", 1) != 0;

  FeatureSampler sampler;
  if (subset_size < kNumFeatures) {
    sampler = [subset_size](Rng& rng) {
      std::array<int, kNumFeatures> all;
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      return std::vector<int>(all.begin(), all.begin() + subset_size);
    };
  }

  auto model = std::make_unique<RandomForestModel>();
  for (int t = 0; t < tree_count; ++t) {
    Rng tree_rng(derive_seed(seed, "forest-tree", static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> idx;
    idx.reserve(data.size());
    if (bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
      for (std::size_t i = 0; i < data.size(); ++i) idx.push_back(pick(tree_rng));
    } else {
      idx.resize(data.size());
      std::iota(idx.begin(), idx.end(), 0);
    }
    auto tree = grow_tree(data, idx, cfg, sampler, tree_rng);
    if (cfg.prune) prune_tree(*tree, cfg.pruning_confidence);
    model->trees.push_back(std::move(tree));
  }
  model->hyperparams = hp;
  model->seed = seed;
  return model;
}

}  // namespace absence
