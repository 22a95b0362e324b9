#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "absence/tuning.hpp"

using namespace absence;

namespace {

ParamDomain integer_domain(const std::string& name, double lo, double hi) {
  ParamDomain d;
  d.name = name;
  d.kind = ParamDomain::Kind::kInteger;
  d.lo = lo;
  d.hi = hi;
  return d;
}

// 8 one-bit integers; fitness counts ones, optimum all-ones.
SearchSpace one_max_space() {
  SearchSpace space;
  for (int i = 0; i < 8; ++i) {
    space.params.push_back(integer_domain("b" + std::to_string(i), 0, 1));
  }
  return space;
}

double one_max(const Hyperparams& hp) {
  double s = 0.0;
  for (const auto& [k, v] : hp.values) s += v;
  return s;
}

}  // namespace

TEST_CASE("domain encoding") {
  SUBCASE("bit widths cover the range") {
    CHECK(integer_domain("x", 0, 1).bit_width() == 1);
    CHECK(integer_domain("x", 1, 8).bit_width() == 3);
    CHECK(integer_domain("x", 1, 9).bit_width() == 4);
    ParamDomain real;
    real.kind = ParamDomain::Kind::kReal;
    real.lo = 0.0;
    real.hi = 1.0;
    CHECK(real.bit_width() == 8);
    ParamDomain cat;
    cat.kind = ParamDomain::Kind::kCategorical;
    cat.categories = {0.1, 0.2, 0.3};
    CHECK(cat.bit_width() == 2);
  }
  SUBCASE("decode is total and clamped: every bit pattern is in range") {
    for (LearnerKind kind : kAllLearners) {
      const SearchSpace space = default_search_space(kind);
      Rng rng(4);
      std::uniform_int_distribution<int> coin(0, 1);
      for (int trial = 0; trial < 500; ++trial) {
        std::vector<bool> bits;
        for (int b = 0; b < space.total_bits(); ++b) bits.push_back(coin(rng) == 1);
        CHECK_NOTHROW(validate_hyperparams(kind, space.decode(bits)));
      }
      for (int trial = 0; trial < 200; ++trial) {
        CHECK_NOTHROW(validate_hyperparams(kind, space.sample(rng)));
      }
    }
  }
  SUBCASE("integer decode hits every value in a small range") {
    const auto d = integer_domain("x", 1, 6);  // 3 bits, patterns 6,7 clamp
    std::set<double> seen;
    for (std::uint64_t v = 0; v < 8; ++v) seen.insert(d.decode_bits(v));
    CHECK(seen == std::set<double>{1, 2, 3, 4, 5, 6});
    CHECK(d.decode_bits(7) == 6);
  }
  SUBCASE("log-scale real sampling stays in range") {
    ParamDomain d;
    d.name = "lr";
    d.kind = ParamDomain::Kind::kReal;
    d.lo = 1e-5;
    d.hi = 1.0;
    d.scale = ParamScale::kLog;
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
      const double v = d.sample(rng);
      CHECK(v >= 1e-5);
      CHECK(v <= 1.0);
    }
    for (std::uint64_t v = 0; v < 256; ++v) {
      const double x = d.decode_bits(v);
      CHECK(x >= 1e-5);
      CHECK(x <= 1.0);
    }
  }
  SUBCASE("num_points multiplies domain sizes") {
    CHECK(one_max_space().num_points() == 256);
  }
}

TEST_CASE("qga solves one-max") {
  QgaConfig cfg;
  cfg.population = 12;
  cfg.generations = 40;
  const TuneResult result = qga_tune(one_max_space(), one_max, cfg, 5);
  CHECK(result.best_fitness == 8.0);
  CHECK(one_max(result.best) == 8.0);
  CHECK(result.log.size() == 12u * 40u);
}

TEST_CASE("qga is deterministic for a fixed seed") {
  QgaConfig cfg;
  cfg.population = 6;
  cfg.generations = 10;
  const TuneResult a = qga_tune(one_max_space(), one_max, cfg, 21);
  const TuneResult b = qga_tune(one_max_space(), one_max, cfg, 21);
  std::ostringstream sa, sb;
  write_tune_log_csv(a, sa);
  write_tune_log_csv(b, sb);
  CHECK(sa.str() == sb.str());
  const TuneResult c = qga_tune(one_max_space(), one_max, cfg, 22);
  std::ostringstream sc;
  write_tune_log_csv(c, sc);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("qubits stay normalized and off the poles") {
  QgaConfig cfg;
  cfg.population = 8;
  cfg.generations = 25;
  bool saw_population = false;
  cfg.on_generation = [&](const std::vector<std::vector<Qubit>>& pop) {
    saw_population = true;
    CHECK(pop.size() == 8);
    for (const auto& chrom : pop) {
      for (const Qubit& q : chrom) {
        CHECK(q.alpha * q.alpha + q.beta * q.beta ==
              doctest::Approx(1.0).epsilon(1e-12));
        // theta_clamp keeps both observation outcomes possible.
        CHECK(std::abs(q.alpha) > 1e-4);
        CHECK(std::abs(q.beta) > 1e-4);
      }
    }
  };
  qga_tune(one_max_space(), one_max, cfg, 3);
  CHECK(saw_population);
}

TEST_CASE("zero rotation and no disasters leave the population untouched") {
  QgaConfig cfg;
  cfg.population = 5;
  cfg.generations = 8;
  cfg.rotation_angle = 0.0;
  cfg.disaster_stagnation = 1000;
  std::vector<std::vector<Qubit>> first, last;
  cfg.on_generation = [&](const std::vector<std::vector<Qubit>>& pop) {
    if (first.empty()) first = pop;
    last = pop;
  };
  qga_tune(one_max_space(), one_max, cfg, 7);
  REQUIRE(!first.empty());
  for (std::size_t c = 0; c < first.size(); ++c) {
    for (std::size_t b = 0; b < first[c].size(); ++b) {
      // The rotation path reconstructs amplitudes through atan2/cos/sin,
      // so invariance holds only to rounding.
      CHECK(first[c][b].alpha == doctest::Approx(last[c][b].alpha).epsilon(1e-12));
      CHECK(first[c][b].beta == doctest::Approx(last[c][b].beta).epsilon(1e-12));
    }
  }
}

TEST_CASE("non-finite fitness is logged as skipped, never selected") {
  SearchSpace space = one_max_space();
  auto fitness = [](const Hyperparams& hp) {
    const double s = one_max(hp);
    // Poison the global optimum.
    return s == 8.0 ? std::nan("") : s;
  };
  QgaConfig cfg;
  cfg.population = 10;
  cfg.generations = 30;
  const TuneResult result = qga_tune(space, fitness, cfg, 2);
  CHECK(result.best_fitness == 7.0);
  bool any_skipped = false;
  for (const auto& rec : result.log) {
    if (rec.skipped) any_skipped = true;
  }
  CHECK(any_skipped);
}

TEST_CASE("random search") {
  SUBCASE("single draw returns that draw") {
    const TuneResult r = random_search(one_max_space(), one_max, 1, 31);
    CHECK(r.log.size() == 1);
    CHECK(r.best_fitness == one_max(r.best));
  }
  SUBCASE("ties keep the first draw") {
    const TuneResult r =
        random_search(one_max_space(), [](const Hyperparams&) { return 1.0; },
                      50, 31);
    REQUIRE(!r.log.empty());
    for (const auto& [k, v] : r.log.front().hp.values) {
      CHECK(r.best.values.at(k) == v);
    }
  }
  SUBCASE("finds the peak of a quadratic") {
    SearchSpace space;
    space.params.push_back(integer_domain("x", 0, 15));
    const auto fitness = [](const Hyperparams& hp) {
      const double x = hp.get("x", 0);
      return -(x - 3.0) * (x - 3.0);
    };
    const TuneResult r = random_search(space, fitness, 200, 8);
    CHECK(r.best.get("x", -1) == 3.0);
    CHECK(r.best_fitness == 0.0);
  }
}

TEST_CASE("tuning artifacts round trip") {
  QgaConfig cfg;
  cfg.population = 4;
  cfg.generations = 3;
  const SearchSpace space = default_search_space(LearnerKind::kC45);
  const auto fitness = [](const Hyperparams& hp) {
    return hp.get("min_leaf", 0);
  };
  const TuneResult result = qga_tune(space, fitness, cfg, 12);

  std::ostringstream log;
  write_tune_log_csv(result, log);
  CHECK(log.str().rfind("generation,candidate,fitness,skipped", 0) == 0);

  std::stringstream best;
  write_best_hyperparams(result, LearnerKind::kC45, best);
  LearnerKind kind;
  const Hyperparams hp = read_best_hyperparams(best, &kind);
  CHECK(kind == LearnerKind::kC45);
  for (const auto& [k, v] : result.best.values) {
    CHECK(hp.values.at(k) == v);
  }
}
