#include "absence/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace absence {
namespace {

constexpr double kHalfPi = 1.5707963267948966;

int bits_for_count(std::uint64_t count) {
  int bits = 1;
  while ((1ull << bits) < count) ++bits;
  return bits;
}

}  // namespace

int ParamDomain::bit_width() const {
  switch (kind) {
    case Kind::kCategorical:
      return bits_for_count(categories.size());
    case Kind::kInteger:
      return bits_for_count(static_cast<std::uint64_t>(hi - lo) + 1);
    case Kind::kReal:
      return 8;
  }
  return 1;
}

double ParamDomain::decode_bits(std::uint64_t v) const {
  switch (kind) {
    case Kind::kCategorical:
      // Clamp policy: codes past the end map to the last category.
      return categories[std::min<std::uint64_t>(v, categories.size() - 1)];
    case Kind::kInteger:
      return std::min(lo + static_cast<double>(v), hi);
    case Kind::kReal: {
      const double frac =
          static_cast<double>(v) / static_cast<double>((1ull << bit_width()) - 1);
      double x = lo + frac * (hi - lo);
      if (scale == ParamScale::kLog) {
        x = std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo)));
      }
      // exp/log round trips can land one ulp outside the interval.
      return std::clamp(x, lo, hi);
    }
  }
  return lo;
}

double ParamDomain::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kCategorical: {
      std::uniform_int_distribution<std::size_t> pick(0, categories.size() - 1);
      return categories[pick(rng)];
    }
    case Kind::kInteger: {
      std::uniform_int_distribution<std::int64_t> pick(
          static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi));
      return static_cast<double>(pick(rng));
    }
    case Kind::kReal: {
      if (scale == ParamScale::kLog) {
        std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
        return std::clamp(std::exp(u(rng)), lo, hi);
      }
      std::uniform_real_distribution<double> u(lo, hi);
      return u(rng);
    }
  }
  return lo;
}

int SearchSpace::total_bits() const {
  int bits = 0;
  for (const auto& p : params) bits += p.bit_width();
  return bits;
}

Hyperparams SearchSpace::decode(const std::vector<bool>& bits) const {
  Hyperparams hp;
  std::size_t pos = 0;
  for (const auto& p : params) {
    const int width = p.bit_width();
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) {
      v = (v << 1) | (bits[pos++] ? 1u : 0u);
    }
    hp.set(p.name, p.decode_bits(v));
  }
  return hp;
}

Hyperparams SearchSpace::sample(Rng& rng) const {
  Hyperparams hp;
  for (const auto& p : params) hp.set(p.name, p.sample(rng));
  return hp;
}

std::uint64_t SearchSpace::num_points() const {
  std::uint64_t n = 1;
  for (const auto& p : params) {
    std::uint64_t m = 1;
    switch (p.kind) {
      case ParamDomain::Kind::kCategorical: m = p.categories.size(); break;
      case ParamDomain::Kind::kInteger:
        m = static_cast<std::uint64_t>(p.hi - p.lo) + 1;
        break;
      case ParamDomain::Kind::kReal: m = 256; break;
    }
    if (m == 0) return 0;
    if (n > (1ull << 62) / m) return 1ull << 62;
    n *= m;
  }
  return n;
}

SearchSpace default_search_space(LearnerKind kind) {
  using K = ParamDomain::Kind;
  SearchSpace s;
  auto integer = [](std::string name, double lo, double hi) {
    ParamDomain p;
    p.name = std::move(name);
    p.kind = K::kInteger;
    p.lo = lo;
    p.hi = hi;
    return p;
  };
  auto real = [](std::string name, double lo, double hi, ParamScale scale) {
    ParamDomain p;
    p.name = std::move(name);
    p.kind = K::kReal;
    p.lo = lo;
    p.hi = hi;
    p.scale = scale;
    return p;
  };
  auto flag = [](std::string name) {
    ParamDomain p;
    p.name = std::move(name);
    p.kind = K::kCategorical;
    p.categories = {0, 1};
    return p;
  };
  switch (kind) {
    case LearnerKind::kDecisionTable:
      s.params = {integer("search_stale_limit", 1, 8)};
      break;
    case LearnerKind::kC45:
      s.params = {real("pruning_confidence", 0.05, 0.5, ParamScale::kLinear),
                  integer("min_leaf", 1, 16), flag("gain_ratio")};
      break;
    case LearnerKind::kRandomForest:
      s.params = {integer("tree_count", 10, 120),
                  integer("feature_subset_size", 1, kNumFeatures),
                  flag("bootstrap"), integer("min_leaf", 1, 16)};
      break;
    case LearnerKind::kKdeNaiveBayes:
      s.params = {flag("bandwidth_mode"),
                  real("bandwidth_scale", 0.1, 10, ParamScale::kLog)};
      break;
    case LearnerKind::kMlp:
      s.params = {integer("hidden_layers", 1, 10),
                  integer("hidden_units", 4, 64),
                  real("learning_rate", 1e-4, 1e-1, ParamScale::kLog),
                  integer("epochs", 10, 60), integer("batch_size", 32, 512),
                  real("l2", 1e-8, 1e-2, ParamScale::kLog)};
      break;
    case LearnerKind::kDeepNn:
      s.params = {integer("hidden_layers", 1, 32),
                  integer("hidden_units", 4, 64),
                  real("learning_rate", 1e-4, 1e-1, ParamScale::kLog),
                  integer("epochs", 10, 60), integer("batch_size", 32, 512),
                  real("l2", 1e-8, 1e-2, ParamScale::kLog)};
      break;
  }
  return s;
}

namespace {

void check_space(const SearchSpace& space) {
  if (space.params.empty() || space.num_points() == 0) {
    throw std::invalid_argument("tuning: empty search space");
  }
  for (const auto& p : space.params) {
    if (p.kind == ParamDomain::Kind::kCategorical && p.categories.empty()) {
      throw std::invalid_argument("tuning: empty categorical domain " + p.name);
    }
    if (p.kind != ParamDomain::Kind::kCategorical && p.hi < p.lo) {
      throw std::invalid_argument("tuning: empty range for " + p.name);
    }
  }
}

double safe_eval(const FitnessFn& fitness, const Hyperparams& hp, bool& skipped) {
  const double f = fitness(hp);
  skipped = !std::isfinite(f);
  return skipped ? -std::numeric_limits<double>::infinity() : f;
}

}  // namespace

TuneResult qga_tune(const SearchSpace& space, const FitnessFn& fitness,
                    const QgaConfig& cfg, std::uint64_t seed) {
  check_space(space);
  if (cfg.population < 2 || cfg.generations < 1) {
    throw std::invalid_argument("qga_tune: need population >= 2, generations >= 1");
  }
  const int nbits = space.total_bits();
  const double uniform = 1.0 / std::sqrt(2.0);
  std::vector<std::vector<Qubit>> pop(
      static_cast<std::size_t>(cfg.population),
      std::vector<Qubit>(static_cast<std::size_t>(nbits), Qubit{uniform, uniform}));

  Rng rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  TuneResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<bool> best_bits;
  int stagnant = 0;

  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<std::vector<bool>> observed(pop.size());
    std::vector<double> fits(pop.size());
    bool improved = false;
    int gen_best = -1;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      observed[i].resize(static_cast<std::size_t>(nbits));
      for (std::size_t b = 0; b < static_cast<std::size_t>(nbits); ++b) {
        const double p1 = pop[i][b].beta * pop[i][b].beta;
        observed[i][b] = u01(rng) < p1;
      }
      EvalRecord rec;
      rec.generation = gen;
      rec.candidate = static_cast<int>(i);
      rec.hp = space.decode(observed[i]);
      fits[i] = safe_eval(fitness, rec.hp, rec.skipped);
      rec.fitness = rec.skipped ? std::numeric_limits<double>::quiet_NaN() : fits[i];
      result.log.push_back(rec);
      if (fits[i] > result.best_fitness) {
        result.best_fitness = fits[i];
        result.best = rec.hp;
        best_bits = observed[i];
        improved = true;
      }
      if (gen_best < 0 || fits[i] > fits[static_cast<std::size_t>(gen_best)]) {
        gen_best = static_cast<int>(i);
      }
    }

    if (gen + 1 == cfg.generations) break;

    // Rotate each qubit toward the best-so-far bitstring when the
    // candidate underperformed it.
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!(fits[i] < result.best_fitness)) continue;
      for (std::size_t b = 0; b < static_cast<std::size_t>(nbits); ++b) {
        if (observed[i][b] == best_bits[b]) continue;
        double theta = std::atan2(pop[i][b].beta, pop[i][b].alpha);
        theta += best_bits[b] ? cfg.rotation_angle : -cfg.rotation_angle;
        theta = std::clamp(theta, cfg.theta_clamp, kHalfPi - cfg.theta_clamp);
        pop[i][b] = Qubit{std::cos(theta), std::sin(theta)};
      }
    }

    stagnant = improved ? 0 : stagnant + 1;
    if (cfg.disaster_stagnation > 0 && stagnant >= cfg.disaster_stagnation) {
      // Reinitialize the worst fraction of the population to uniform
      // superposition; the generation's best chromosome is exempt.
      std::vector<std::size_t> order(pop.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return fits[a] < fits[b]; });
      auto to_reset = static_cast<std::size_t>(
          std::ceil(cfg.disaster_fraction * static_cast<double>(pop.size())));
      std::size_t reset = 0;
      for (std::size_t k = 0; k < order.size() && reset < to_reset; ++k) {
        if (order[k] == static_cast<std::size_t>(gen_best)) continue;
        pop[order[k]].assign(static_cast<std::size_t>(nbits),
                             Qubit{uniform, uniform});
        ++reset;
      }
      stagnant = 0;
    }
    if (cfg.on_generation) cfg.on_generation(pop);
  }
  return result;
}

TuneResult random_search(const SearchSpace& space, const FitnessFn& fitness,
                         int num_draws, std::uint64_t seed) {
  check_space(space);
  if (num_draws < 1) throw std::invalid_argument("random_search: N must be >= 1");
  Rng rng(seed);
  TuneResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_draws; ++i) {
    EvalRecord rec;
    rec.generation = i;
    rec.candidate = i;
    rec.hp = space.sample(rng);
    const double f = safe_eval(fitness, rec.hp, rec.skipped);
    rec.fitness = rec.skipped ? std::numeric_limits<double>::quiet_NaN() : f;
    result.log.push_back(rec);
    // Strict comparison keeps the first draw on ties.
    if (f > result.best_fitness) {
      result.best_fitness = f;
      result.best = rec.hp;
    }
  }
  return result;
}

void write_tune_log_csv(const TuneResult& result, std::ostream& out) {
  out << "generation,candidate,fitness,skipped,params\n";
  for (const auto& rec : result.log) {
    std::ostringstream params;
    bool first = true;
    for (const auto& [name, value] : rec.hp.values) {
      params << (first ? "" : ";") << name << '=' << value;
      first = false;
    }
    out << rec.generation << ',' << rec.candidate << ',';
    if (rec.skipped) {
      out << "nan";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", rec.fitness);
      out << buf;
    }
    out << ',' << (rec.skipped ? 1 : 0) << ',' << params.str() << '\n';
  }
}

void write_best_hyperparams(const TuneResult& result, LearnerKind kind,
                            std::ostream& out) {
  nlohmann::json j;
  j["learner"] = learner_name(kind);
  j["fitness"] = result.best_fitness;
  j["hyperparams"] = result.best.values;
  out << j.dump(2) << '\n';
}

Hyperparams read_best_hyperparams(std::istream& in, LearnerKind* kind_out) {
  nlohmann::json j;
  in >> j;
  if (kind_out) *kind_out = learner_from_name(j.at("learner").get<std::string>());
  Hyperparams hp;
  for (const auto& [name, value] : j.at("hyperparams").items()) {
    hp.set(name, value.get<double>());
  }
  return hp;
}

}  // namespace absence
