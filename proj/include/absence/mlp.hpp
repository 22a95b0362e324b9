#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "absence/learners.hpp"
#include "absence/rng.hpp"

namespace absence {

// Feedforward binary classifier: rectified-linear hidden layers, sigmoid
// output, binary cross-entropy loss, adaptive moment estimation updates.
// The MLP and the deep network share this implementation; they differ only
// in the depth their hyperparameter schemas admit.

class Network {
 public:
  // layer_sizes includes input and output, e.g. {8, 16, 16, 1}.
  explicit Network(std::vector<int> layer_sizes);

  void init_weights(Rng& rng);  // uniform +-1/sqrt(fan_in)

  double forward(const std::vector<double>& x) const;  // output probability

  // Mean loss and gradient over a batch (flattened parameter order).
  double loss(const std::vector<std::vector<double>>& xs,
              const std::vector<int>& ys) const;
  std::vector<double> gradient(const std::vector<std::vector<double>>& xs,
                               const std::vector<int>& ys) const;

  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& flat);
  std::size_t parameter_count() const;

  const std::vector<int>& layer_sizes() const { return sizes_; }

 private:
  std::vector<int> sizes_;
  // weights_[l] is (out x in) row-major, biases_[l] length out.
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

// One optimizer step on the batch. Throws std::runtime_error on a
// non-finite loss (suggesting a lower learning rate). Returns the loss
// before the update.
double backprop_step(Network& net, AdamState& adam,
                     const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys, double learning_rate,
                     double l2);

class MlpModel : public Model {
 public:
  explicit MlpModel(LearnerKind kind, Network net)
      : kind_(kind), net_(std::move(net)) {}

  LearnerKind kind() const override { return kind_; }
  int predict(const FeatureVec& x) const override;
  nlohmann::json params_json() const override;

  double predict_proba(const FeatureVec& x) const;
  std::vector<double> scale_input(const FeatureVec& x) const;

  std::array<double, kNumFeatures> feature_scale{};
  Network& network() { return net_; }

 private:
  LearnerKind kind_;
  Network net_;
};

std::unique_ptr<MlpModel> mlp_fit(LearnerKind kind, const DataView& data,
                                  const Hyperparams& hp, std::uint64_t seed);

}  // namespace absence
