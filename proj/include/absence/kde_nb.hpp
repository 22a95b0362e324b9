#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "absence/learners.hpp"

namespace absence {

// Naive Bayes with Gaussian kernel density estimates for numeric features
// and Laplace-smoothed Bernoulli likelihoods for the binary ones. All
// likelihood math happens in log space.

class KdeNaiveBayesModel : public Model {
 public:
  LearnerKind kind() const override { return LearnerKind::kKdeNaiveBayes; }
  int predict(const FeatureVec& x) const override;
  nlohmann::json params_json() const override;

  // Posterior over {present, absent}; sums to 1.
  std::array<double, 2> posterior(const FeatureVec& x) const;

  struct KdeFeature {
    std::vector<std::pair<int, std::int64_t>> value_counts;  // ascending values
    double bandwidth = 1.0;
    std::int64_t n = 0;
  };
  struct ClassParams {
    double log_prior = 0.0;
    std::array<double, 4> log_p_on{};   // binary features, P(on | class)
    std::array<double, 4> log_p_off{};
    std::array<KdeFeature, 4> kde;      // numeric features
  };
  std::array<ClassParams, 2> classes;

 private:
  double log_joint(const FeatureVec& x, int cls) const;
};

std::unique_ptr<KdeNaiveBayesModel> kde_nb_fit(const DataView& data,
                                               const Hyperparams& hp);

}  // namespace absence
