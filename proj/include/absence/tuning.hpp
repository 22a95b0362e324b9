#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "absence/learners.hpp"
#include "absence/rng.hpp"

namespace absence {

enum class ParamScale { kLinear, kLog };

struct ParamDomain {
  std::string name;
  enum class Kind { kCategorical, kInteger, kReal } kind = Kind::kInteger;
  std::vector<double> categories;  // categorical
  double lo = 0.0, hi = 0.0;       // integer / real
  ParamScale scale = ParamScale::kLinear;

  int bit_width() const;  // chromosome encoding width
  double decode_bits(std::uint64_t v) const;
  double sample(Rng& rng) const;
};

struct SearchSpace {
  std::vector<ParamDomain> params;

  int total_bits() const;
  Hyperparams decode(const std::vector<bool>& bits) const;
  Hyperparams sample(Rng& rng) const;
  std::uint64_t num_points() const;  // saturates at 2^62
};

// Built-in per-learner spaces used by the tuning command.
SearchSpace default_search_space(LearnerKind kind);

using FitnessFn = std::function<double(const Hyperparams&)>;

struct EvalRecord {
  int generation = 0;  // draw index for random search
  int candidate = 0;
  Hyperparams hp;
  double fitness = 0.0;
  bool skipped = false;  // non-finite fitness
};

struct TuneResult {
  Hyperparams best;
  double best_fitness = 0.0;
  std::vector<EvalRecord> log;
};

// Qubit as amplitude pair with alpha^2 + beta^2 = 1.
struct Qubit {
  double alpha;
  double beta;
};

struct QgaConfig {
  int population = 20;
  int generations = 30;
  double rotation_angle = 0.05 * 3.14159265358979323846;
  int disaster_stagnation = 5;   // generations without improvement
  double disaster_fraction = 0.5;
  double theta_clamp = 0.005;    // keeps qubits off the poles, radians

  // Invoked with the population after each generation's update; used by
  // tests to watch qubit normalization.
  std::function<void(const std::vector<std::vector<Qubit>>&)> on_generation;
};

// Quantum genetic algorithm: observe, evaluate, rotate toward the best
// observed bitstring; stagnation triggers a partial reinitialization to
// uniform superposition (the elite chromosome is exempt).
TuneResult qga_tune(const SearchSpace& space, const FitnessFn& fitness,
                    const QgaConfig& cfg, std::uint64_t seed);

TuneResult random_search(const SearchSpace& space, const FitnessFn& fitness,
                         int num_draws, std::uint64_t seed);

void write_tune_log_csv(const TuneResult& result, std::ostream& out);
void write_best_hyperparams(const TuneResult& result, LearnerKind kind,
                            std::ostream& out);
Hyperparams read_best_hyperparams(std::istream& in, LearnerKind* kind_out = nullptr);

}  // namespace absence
