#include "absence/c45.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace absence {
namespace {

double entropy(double c0, double c1) {
  const double n = c0 + c1;
  if (n <= 0) return 0.0;
  double h = 0.0;
  for (double c : {c0, c1}) {
    if (c > 0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

int majority(const std::array<double, 2>& counts) {
  // Ties toward the present class (0).
  return counts[1] > counts[0] ? 1 : 0;
}

}  // namespace

int TreeNode::node_count() const {
  if (leaf) return 1;
  return 1 + left->node_count() + right->node_count();
}

int TreeNode::depth() const {
  if (leaf) return 0;
  return 1 + std::max(left->depth(), right->depth());
}

std::optional<SplitChoice> best_split(const DataView& data,
                                      const std::vector<std::size_t>& idx,
                                      const std::vector<int>& features,
                                      const C45Config& cfg) {
  std::array<double, 2> total{};
  for (auto i : idx) total[static_cast<std::size_t>(data.y[i])] += 1;
  const double n = total[0] + total[1];
  const double parent_h = entropy(total[0], total[1]);

  std::optional<SplitChoice> best;
  // Features in ascending order keeps the choice deterministic under ties.
  std::vector<int> feats = features;
  std::sort(feats.begin(), feats.end());
  for (int f : feats) {
    // Per-value class counts; all features are small non-negative ints.
    std::vector<std::pair<int, std::array<double, 2>>> by_value;
    for (auto i : idx) {
      const int v = data.x[i][static_cast<std::size_t>(f)];
      auto it = std::find_if(by_value.begin(), by_value.end(),
                             [v](const auto& p) { return p.first == v; });
      if (it == by_value.end()) {
        by_value.push_back({v, {}});
        it = std::prev(by_value.end());
      }
      it->second[static_cast<std::size_t>(data.y[i])] += 1;
    }
    if (by_value.size() < 2) continue;
    std::sort(by_value.begin(), by_value.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Every split is binary: `<= midpoint` between consecutive distinct
    // values; for 0/1 features that is the equality split.
    std::array<double, 2> left{};
    for (std::size_t k = 0; k + 1 < by_value.size(); ++k) {
      left[0] += by_value[k].second[0];
      left[1] += by_value[k].second[1];
      const std::array<double, 2> right{total[0] - left[0], total[1] - left[1]};
      const double nl = left[0] + left[1];
      const double nr = right[0] + right[1];
      if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
      double gain = parent_h - (nl / n) * entropy(left[0], left[1]) -
                    (nr / n) * entropy(right[0], right[1]);
      if (cfg.gain_ratio) {
        const double split_info = entropy(nl, nr);
        if (split_info <= 1e-12) continue;
        gain /= split_info;
      }
      gain = std::max(gain, 0.0);
      const double thr =
          (by_value[k].first + by_value[k + 1].first) / 2.0;
      if (!best || gain > best->gain + 1e-12) {
        best = SplitChoice{f, thr, gain};
      }
    }
  }
  return best;
}

std::unique_ptr<TreeNode> grow_tree(const DataView& data,
                                    const std::vector<std::size_t>& idx,
                                    const C45Config& cfg,
                                    const FeatureSampler& sampler, Rng& rng) {
  auto node = std::make_unique<TreeNode>();
  for (auto i : idx) node->counts[static_cast<std::size_t>(data.y[i])] += 1;
  node->leaf_class = majority(node->counts);
  if (node->counts[0] == 0 || node->counts[1] == 0 ||
      idx.size() < 2 * static_cast<std::size_t>(cfg.min_leaf)) {
    return node;
  }

  std::vector<int> features;
  if (sampler) {
    features = sampler(rng);
  } else {
    for (int f = 0; f < kNumFeatures; ++f) features.push_back(f);
  }
  // A zero-gain split is still taken on an impure node: nested parity
  // patterns (XOR) have zero marginal gain at the top split yet become
  // separable one level down. Pruning collapses the useless cases.
  const auto split = best_split(data, idx, features, cfg);
  if (!split || (split->gain <= 1e-12 && !cfg.allow_zero_gain_fallback)) {
    return node;
  }

  std::vector<std::size_t> left_idx, right_idx;
  for (auto i : idx) {
    if (data.x[i][static_cast<std::size_t>(split->feature)] <= split->threshold) {
      left_idx.push_back(i);
    } else {
      right_idx.push_back(i);
    }
  }
  node->leaf = false;
  node->feature = split->feature;
  node->threshold = split->threshold;
  node->left = grow_tree(data, left_idx, cfg, sampler, rng);
  node->right = grow_tree(data, right_idx, cfg, sampler, rng);
  return node;
}

double pessimistic_added_errors(double n, double e, double confidence) {
  if (n <= 0) return 0.0;
  if (e < 1) {
    const double base = n * (1.0 - std::pow(confidence, 1.0 / n));
    if (e <= 0) return base;
    return base + e * (pessimistic_added_errors(n, 1.0, confidence) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const boost::math::normal_distribution<double> norm;
  const double z = boost::math::quantile(norm, 1.0 - confidence);
  const double f = (e + 0.5) / n;
  const double r =
      (f + z * z / (2 * n) +
       z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) /
      (1 + z * z / n);
  return r * n - e;
}

namespace {

// Estimated errors of the subtree as grown (sum over its leaves).
double subtree_estimated_errors(const TreeNode& node, double confidence) {
  if (node.leaf) {
    const double n = node.counts[0] + node.counts[1];
    const double e = n - node.counts[static_cast<std::size_t>(node.leaf_class)];
    return e + pessimistic_added_errors(n, e, confidence);
  }
  return subtree_estimated_errors(*node.left, confidence) +
         subtree_estimated_errors(*node.right, confidence);
}

}  // namespace

void prune_tree(TreeNode& node, double confidence) {
  if (node.leaf) return;
  prune_tree(*node.left, confidence);
  prune_tree(*node.right, confidence);
  const double n = node.counts[0] + node.counts[1];
  const int cls = majority(node.counts);
  const double leaf_e = n - node.counts[static_cast<std::size_t>(cls)];
  const double leaf_est = leaf_e + pessimistic_added_errors(n, leaf_e, confidence);
  const double subtree_est = subtree_estimated_errors(node, confidence);
  if (leaf_est <= subtree_est) {
    node.leaf = true;
    node.left.reset();
    node.right.reset();
    node.feature = -1;
    node.leaf_class = cls;
  }
}

int tree_predict(const TreeNode& node, const FeatureVec& x) {
  const TreeNode* cur = &node;
  while (!cur->leaf) {
    cur = x[static_cast<std::size_t>(cur->feature)] <= cur->threshold
              ? cur->left.get()
              : cur->right.get();
  }
  return cur->leaf_class;
}

nlohmann::json tree_to_json(const TreeNode& node) {
  nlohmann::json j;
  j["counts"] = node.counts;
  if (node.leaf) {
    j["class"] = node.leaf_class;
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = tree_to_json(*node.left);
    j["right"] = tree_to_json(*node.right);
  }
  return j;
}

std::unique_ptr<TreeNode> tree_from_json(const nlohmann::json& j) {
  auto node = std::make_unique<TreeNode>();
  node->counts = j.at("counts").get<std::array<double, 2>>();
  if (j.contains("class")) {
    node->leaf_class = j.at("class").get<int>();
  } else {
    node->leaf = false;
    node->feature = j.at("feature").get<int>();
    node->threshold = j.at("threshold").get<double>();
    node->left = tree_from_json(j.at("left"));
    node->right = tree_from_json(j.at("right"));
    node->leaf_class = majority(node->counts);
  }
  return node;
}

int C45Model::predict(const FeatureVec& x) const {
  check_feature_ranges(x);
  return tree_predict(*root, x);
}

nlohmann::json C45Model::params_json() const { return tree_to_json(*root); }

std::unique_ptr<C45Model> c45_fit(const DataView& data, const Hyperparams& hp,
                                  std::uint64_t seed) {
  C45Config cfg;
  cfg.pruning_confidence = hp.get("pruning_confidence", 0.25);
  cfg.min_leaf = hp.get_int("min_leaf", 2);
  cfg.gain_ratio = hp.get_int("gain_ratio", 0) != 0;
  cfg.prune = hp.get_int("prune", 1) != 0;

  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  auto model = std::make_unique<C45Model>();
  model->root = grow_tree(data, idx, cfg, nullptr, rng);
  if (cfg.prune) prune_tree(*model->root, cfg.pruning_confidence);
  model->hyperparams = hp;
  model->seed = seed;
  return model;
}

}  // namespace absence
