#include "absence/kde_nb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace absence {
namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;

double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Silverman's rule of thumb; Scott's factor behind bandwidth_mode = 1.
double rule_of_thumb_bandwidth(const std::vector<double>& values, int mode,
                               double scale) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= std::max(n - 1.0, 1.0);
  const double sd = std::sqrt(var);

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
  };
  const double iqr = quantile(0.75) - quantile(0.25);

  double spread;
  if (mode == 1) {
    spread = sd;  // Scott
  } else {
    spread = std::min(sd, iqr / 1.34);
    if (spread <= 0) spread = std::max(sd, iqr / 1.34);
  }
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (mode == 1) h = 1.06 * spread * std::pow(n, -0.2);
  h *= scale;
  // Constant features degenerate to a point mass; keep a narrow but
  // finite kernel so log densities stay finite.
  return std::max(h, 1e-3);
}

}  // namespace

double KdeNaiveBayesModel::log_joint(const FeatureVec& x, int cls) const {
  const ClassParams& cp = classes[static_cast<std::size_t>(cls)];
  double lj = cp.log_prior;
  for (std::size_t f = 0; f < 4; ++f) {
    lj += x[f] != 0 ? cp.log_p_on[f] : cp.log_p_off[f];
  }
  for (std::size_t f = 0; f < 4; ++f) {
    const KdeFeature& k = cp.kde[f];
    const double xv = static_cast<double>(x[kFirstNumericFeature + f]);
    std::vector<double> terms;
    terms.reserve(k.value_counts.size());
    for (const auto& [v, cnt] : k.value_counts) {
      const double z = (xv - static_cast<double>(v)) / k.bandwidth;
      terms.push_back(std::log(static_cast<double>(cnt)) - 0.5 * z * z -
                      kLogSqrt2Pi - std::log(k.bandwidth));
    }
    lj += log_sum_exp(terms) - std::log(static_cast<double>(k.n));
  }
  return lj;
}

std::array<double, 2> KdeNaiveBayesModel::posterior(const FeatureVec& x) const {
  const double l0 = log_joint(x, 0);
  const double l1 = log_joint(x, 1);
  const double m = std::max(l0, l1);
  const double z0 = std::exp(l0 - m);
  const double z1 = std::exp(l1 - m);
  return {z0 / (z0 + z1), z1 / (z0 + z1)};
}

int KdeNaiveBayesModel::predict(const FeatureVec& x) const {
  check_feature_ranges(x);
  const auto post = posterior(x);
  return post[1] > post[0] ? 1 : 0;  // tie toward present
}

nlohmann::json KdeNaiveBayesModel::params_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& cp : classes) {
    nlohmann::json c;
    c["log_prior"] = cp.log_prior;
    c["log_p_on"] = cp.log_p_on;
    c["log_p_off"] = cp.log_p_off;
    nlohmann::json kdes = nlohmann::json::array();
    for (const auto& k : cp.kde) {
      nlohmann::json kj;
      kj["bandwidth"] = k.bandwidth;
      kj["n"] = k.n;
      kj["values"] = nlohmann::json::array();
      for (const auto& [v, cnt] : k.value_counts) {
        kj["values"].push_back({v, cnt});
      }
      kdes.push_back(kj);
    }
    c["kde"] = kdes;
    j.push_back(c);
  }
  return j;
}

std::unique_ptr<KdeNaiveBayesModel> kde_nb_fit(const DataView& data,
                                               const Hyperparams& hp) {
  const int mode = hp.get_int("bandwidth_mode", 0);
  const double scale = hp.get("bandwidth_scale", 1.0);

  auto model = std::make_unique<KdeNaiveBayesModel>();
  std::array<std::int64_t, 2> n_cls{};
  for (int y : data.y) n_cls[static_cast<std::size_t>(y)] += 1;
  const double n_total = static_cast<double>(data.size());

  for (int cls = 0; cls < 2; ++cls) {
    auto& cp = model->classes[static_cast<std::size_t>(cls)];
    const double nc = static_cast<double>(n_cls[static_cast<std::size_t>(cls)]);
    // Add-1 on the priors keeps single-class datasets finite.
    cp.log_prior = std::log((nc + 1.0) / (n_total + 2.0));
    if (nc == 0) {
      // Unseen class: uniform likelihoods; the prior already crushes it.
      for (std::size_t f = 0; f < 4; ++f) {
        cp.log_p_on[f] = cp.log_p_off[f] = std::log(0.5);
        cp.kde[f].value_counts = {{0, 1}};
        cp.kde[f].bandwidth = 1e3;
        cp.kde[f].n = 1;
      }
      continue;
    }

    for (std::size_t f = 0; f < 4; ++f) {
      std::int64_t on = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.y[i] == cls && data.x[i][f] != 0) ++on;
      }
      cp.log_p_on[f] = std::log((static_cast<double>(on) + 1.0) / (nc + 2.0));
      cp.log_p_off[f] =
          std::log((nc - static_cast<double>(on) + 1.0) / (nc + 2.0));
    }

    for (std::size_t f = 0; f < 4; ++f) {
      std::map<int, std::int64_t> counts;
      std::vector<double> values;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.y[i] != cls) continue;
        counts[data.x[i][kFirstNumericFeature + f]] += 1;
        values.push_back(
            static_cast<double>(data.x[i][kFirstNumericFeature + f]));
      }
      auto& k = cp.kde[f];
      k.value_counts.assign(counts.begin(), counts.end());
      k.n = static_cast<std::int64_t>(values.size());
      k.bandwidth = rule_of_thumb_bandwidth(values, mode, scale);
    }
  }
  model->hyperparams = hp;
  return model;
}

}  // namespace absence
