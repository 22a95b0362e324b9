#include "absence/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace absence {
namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

double clamp_p(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

}  // namespace

Network::Network(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2 || sizes_.back() != 1) {
    throw std::invalid_argument("Network: need input..hidden..1 layer sizes");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.emplace_back(
        static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l]), 0.0);
    biases_.emplace_back(static_cast<std::size_t>(sizes_[l + 1]), 0.0);
  }
}

void Network::init_weights(Rng& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : weights_[l]) w = dist(rng);
    for (auto& b : biases_[l]) b = 0.0;
  }
}

namespace {

// Forward pass keeping pre-activations; acts[0] is the input.
struct ForwardPass {
  std::vector<std::vector<double>> acts;
};

ForwardPass run_forward(const std::vector<int>& sizes,
                        const std::vector<std::vector<double>>& weights,
                        const std::vector<std::vector<double>>& biases,
                        const std::vector<double>& x) {
  ForwardPass fp;
  fp.acts.push_back(x);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto in = static_cast<std::size_t>(sizes[l]);
    const auto out = static_cast<std::size_t>(sizes[l + 1]);
    std::vector<double> a(out);
    for (std::size_t o = 0; o < out; ++o) {
      double z = biases[l][o];
      const double* wrow = &weights[l][o * in];
      for (std::size_t i = 0; i < in; ++i) z += wrow[i] * fp.acts.back()[i];
      const bool last = l + 1 == weights.size();
      a[o] = last ? sigmoid(z) : std::max(z, 0.0);
    }
    fp.acts.push_back(std::move(a));
  }
  return fp;
}

}  // namespace

double Network::forward(const std::vector<double>& x) const {
  return run_forward(sizes_, weights_, biases_, x).acts.back()[0];
}

double Network::loss(const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys) const {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double p = clamp_p(forward(xs[i]));
    total += ys[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(xs.size());
}

std::vector<double> Network::gradient(const std::vector<std::vector<double>>& xs,
                                      const std::vector<int>& ys) const {
  std::vector<std::vector<double>> gw(weights_.size());
  std::vector<std::vector<double>> gb(biases_.size());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    gw[l].assign(weights_[l].size(), 0.0);
    gb[l].assign(biases_[l].size(), 0.0);
  }

  for (std::size_t r = 0; r < xs.size(); ++r) {
    const ForwardPass fp = run_forward(sizes_, weights_, biases_, xs[r]);
    // delta for the sigmoid + cross-entropy head collapses to (p - y).
    std::vector<double> delta{clamp_p(fp.acts.back()[0]) -
                              static_cast<double>(ys[r])};
    for (std::size_t l = weights_.size(); l-- > 0;) {
      const auto in = static_cast<std::size_t>(sizes_[l]);
      const auto out = static_cast<std::size_t>(sizes_[l + 1]);
      for (std::size_t o = 0; o < out; ++o) {
        gb[l][o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) {
          gw[l][o * in + i] += delta[o] * fp.acts[l][i];
        }
      }
      if (l == 0) break;
      std::vector<double> prev(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        double s = 0.0;
        for (std::size_t o = 0; o < out; ++o) {
          s += weights_[l][o * in + i] * delta[o];
        }
        prev[i] = fp.acts[l][i] > 0 ? s : 0.0;  // ReLU mask
      }
      delta = std::move(prev);
    }
  }

  std::vector<double> flat;
  flat.reserve(parameter_count());
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t l = 0; l < gw.size(); ++l) {
    for (double g : gw[l]) flat.push_back(g * inv_n);
    for (double g : gb[l]) flat.push_back(g * inv_n);
  }
  return flat;
}

std::vector<double> Network::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), weights_[l].begin(), weights_[l].end());
    flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
  }
  return flat;
}

void Network::set_parameters(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("set_parameters: size mismatch");
  }
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                weights_[l].size(), weights_[l].begin());
    pos += weights_[l].size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                biases_[l].size(), biases_[l].begin());
    pos += biases_[l].size();
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += weights_[l].size() + biases_[l].size();
  }
  return n;
}

double backprop_step(Network& net, AdamState& adam,
                     const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys, double learning_rate,
                     double l2) {
  if (xs.empty()) throw std::invalid_argument("backprop_step: empty batch");
  const double loss = net.loss(xs, ys);
  if (!std::isfinite(loss)) {
    throw std::runtime_error(
        "training diverged (non-finite loss); lower the learning rate");
  }
  auto grad = net.gradient(xs, ys);
  auto params = net.parameters();
  if (adam.m.empty()) {
    adam.m.assign(params.size(), 0.0);
    adam.v.assign(params.size(), 0.0);
  }
  adam.t += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] + l2 * params[i];
    adam.m[i] = adam.beta1 * adam.m[i] + (1 - adam.beta1) * g;
    adam.v[i] = adam.beta2 * adam.v[i] + (1 - adam.beta2) * g * g;
    const double mhat = adam.m[i] / bc1;
    const double vhat = adam.v[i] / bc2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + adam.eps);
  }
  net.set_parameters(params);
  return loss;
}

std::vector<double> MlpModel::scale_input(const FeatureVec& x) const {
  std::vector<double> out(kNumFeatures);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    out[f] = feature_scale[f] > 0 ? x[f] / feature_scale[f]
                                  : static_cast<double>(x[f]);
  }
  return out;
}

double MlpModel::predict_proba(const FeatureVec& x) const {
  return net_.forward(scale_input(x));
}

int MlpModel::predict(const FeatureVec& x) const {
  check_feature_ranges(x);
  return predict_proba(x) > 0.5 ? 1 : 0;
}

nlohmann::json MlpModel::params_json() const {
  nlohmann::json j;
  j["layer_sizes"] = net_.layer_sizes();
  j["parameters"] = net_.parameters();
  j["feature_scale"] = feature_scale;
  return j;
}

std::unique_ptr<MlpModel> mlp_fit(LearnerKind kind, const DataView& data,
                                  const Hyperparams& hp, std::uint64_t seed) {
  const int hidden_layers = hp.get_int("hidden_layers", 2);
  const int hidden_units = hp.get_int("hidden_units", 16);
  const double lr = hp.get("learning_rate", 1e-3);
  const int epochs = hp.get_int("epochs", 50);
  const auto batch = static_cast<std::size_t>(hp.get_int("batch_size", 256));
  const double l2 = hp.get("l2", 0.0);

  std::vector<int> sizes{kNumFeatures};
  for (int l = 0; l < hidden_layers; ++l) sizes.push_back(hidden_units);
  sizes.push_back(1);
  Network net(sizes);
  Rng rng(seed);
  net.init_weights(rng);

  auto model = std::make_unique<MlpModel>(kind, std::move(net));
  // Scale each feature by its training maximum so slots and dates land
  // in [0, 1] alongside the binary inputs.
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    int mx = 1;
    for (const auto& x : data.x) mx = std::max(mx, x[f]);
    model->feature_scale[f] = static_cast<double>(mx);
  }

  std::vector<std::vector<double>> scaled;
  scaled.reserve(data.size());
  for (const auto& x : data.x) scaled.push_back(model->scale_input(x));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  AdamState adam;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, order.size());
      std::vector<std::vector<double>> xs;
      std::vector<int> ys;
      xs.reserve(stop - start);
      ys.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        xs.push_back(scaled[order[i]]);
        ys.push_back(data.y[order[i]]);
      }
      backprop_step(model->network(), adam, xs, ys, lr, l2);
    }
  }
  model->hyperparams = hp;
  model->seed = seed;
  return model;
}

}  // namespace absence
