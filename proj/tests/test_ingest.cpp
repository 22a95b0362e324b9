#include <doctest.h>

#include <cmath>
#include <sstream>

#include "absence/ingest.hpp"
#include "absence/rng.hpp"

using namespace absence;

namespace {

RawSeries series_of(std::vector<RawSample> samples) {
  RawSeries s;
  s.appliance = "kettle";
  s.samples = std::move(samples);
  return s;
}

}  // namespace

TEST_CASE("parse_channel parses well-formed lines") {
  std::istringstream in("1362992241 120\n1362992247 121.5\n");
  const RawSeries s = parse_channel(in, "kettle");
  REQUIRE(s.samples.size() == 2);
  CHECK(s.samples[0].timestamp == 1362992241);
  CHECK(s.samples[0].watts == 120.0);
  CHECK(s.samples[1].watts == 121.5);
}

TEST_CASE("parse_channel empty stream") {
  std::istringstream in("");
  CHECK(parse_channel(in, "tv").samples.empty());
}

TEST_CASE("parse_channel error cases carry line numbers") {
  {
    std::istringstream in("10 5.0\n9 4.0\n");
    CHECK_THROWS_WITH_AS(parse_channel(in, "x"), "line 2: non-monotonic timestamp",
                         ParseError);
  }
  {
    std::istringstream in("10 5.0\nbogus\n");
    CHECK_THROWS_AS(parse_channel(in, "x"), ParseError);
  }
  {
    std::istringstream in("10 5.0 7\n");
    CHECK_THROWS_AS(parse_channel(in, "x"), ParseError);
  }
  {
    std::istringstream in("10 abc\n");
    CHECK_THROWS_AS(parse_channel(in, "x"), ParseError);
  }
}

TEST_CASE("parse_channel after serialize is the identity") {
  Rng rng(99);
  RawSeries s;
  s.appliance = "oven";
  std::int64_t ts = 1362992241;
  std::uniform_real_distribution<double> w(0.0, 3000.0);
  for (int i = 0; i < 500; ++i) {
    ts += 6;
    s.samples.push_back({ts, w(rng)});
  }
  std::ostringstream out;
  serialize_channel(s, out);
  std::istringstream in(out.str());
  const RawSeries back = parse_channel(in, "oven");
  REQUIRE(back.samples.size() == s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    CHECK(back.samples[i].timestamp == s.samples[i].timestamp);
    CHECK(back.samples[i].watts == s.samples[i].watts);
  }
}

TEST_CASE("resample means and gap policy") {
  const Clock clock(0);
  const std::int64_t t0 = clock.midnight(2013, 3, 11);
  SUBCASE("two samples in one window") {
    const auto r = resample(series_of({{t0, 10.0}, {t0 + 6, 20.0}}), 30, clock);
    REQUIRE(r.values.size() == 1);
    CHECK(r.values[0].mean_watts == doctest::Approx(15.0));
    CHECK(r.values[0].sample_count == 2);
    CHECK(r.values[0].window_start == t0);
  }
  SUBCASE("single sample is identity") {
    const auto r = resample(series_of({{t0 + 60, 7.5}}), 30, clock);
    REQUIRE(r.values.size() == 1);
    CHECK(r.values[0].mean_watts == 7.5);
  }
  SUBCASE("gap window gets mean 0 count 0") {
    const auto r = resample(series_of({{t0, 5.0}, {t0 + 3 * 1800, 9.0}}), 30, clock);
    REQUIRE(r.values.size() == 4);
    CHECK(r.values[1].mean_watts == 0.0);
    CHECK(r.values[1].sample_count == 0);
    CHECK(r.values[2].sample_count == 0);
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(resample(series_of({}), 30, clock), std::invalid_argument);
  }
  SUBCASE("window must divide a day") {
    CHECK_THROWS_AS(resample(series_of({{t0, 1.0}}), 7, clock),
                    std::invalid_argument);
  }
}

TEST_CASE("resample conserves mass and assigns every sample exactly once") {
  const Clock clock(0);
  Rng rng(1234);
  std::uniform_real_distribution<double> w(0.0, 2500.0);
  std::uniform_int_distribution<int> gap(1, 4000);
  RawSeries s;
  s.appliance = "tv";
  std::int64_t ts = clock.midnight(2013, 5, 1) + 123;
  double total = 0.0;
  for (int i = 0; i < 3000; ++i) {
    ts += gap(rng);
    const double watts = w(rng);
    total += watts;
    s.samples.push_back({ts, watts});
  }
  const auto r = resample(s, 30, clock);

  double mass = 0.0;
  std::int64_t count = 0;
  for (const auto& win : r.values) {
    mass += win.mean_watts * static_cast<double>(win.sample_count);
    count += win.sample_count;
    CHECK((win.window_start % 1800) == 0);
  }
  CHECK(count == 3000);
  CHECK(mass == doctest::Approx(total).epsilon(1e-9));

  // Window count matches the covered span; brute-force assignment check.
  const std::int64_t first_aligned = s.samples.front().timestamp -
                                     (s.samples.front().timestamp % 1800);
  const std::int64_t span = s.samples.back().timestamp - first_aligned;
  CHECK(static_cast<std::int64_t>(r.values.size()) == span / 1800 + 1);
  for (const auto& sample : s.samples) {
    int owners = 0;
    for (const auto& win : r.values) {
      if (sample.timestamp >= win.window_start &&
          sample.timestamp < win.window_start + 1800) {
        ++owners;
      }
    }
    CHECK(owners == 1);
  }
}

TEST_CASE("binarize threshold semantics") {
  CHECK_FALSE(binarize(1.0));
  CHECK(binarize(30.0));
  CHECK(binarize(10.0));  // 10 is not lower than 10
  CHECK_FALSE(binarize(9.999));
  // Monotone: a < b and on(a) implies on(b).
  for (double a = 0; a < 20; a += 0.7) {
    for (double b = a + 0.1; b < 20; b += 1.3) {
      if (binarize(a)) CHECK(binarize(b));
    }
  }
}

TEST_CASE("synth_household determinism and banded output") {
  const Clock clock(0);
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.num_days = 1;
  const auto a = synth_household(cfg, clock);
  const auto b = synth_household(cfg, clock);
  REQUIRE(a.size() == 4);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(a[c].samples.size() == 14400);  // 86400 / 6
    REQUIRE(a[c].samples.size() == b[c].samples.size());
    for (std::size_t i = 0; i < a[c].samples.size(); ++i) {
      CHECK(a[c].samples[i].timestamp == b[c].samples[i].timestamp);
      CHECK(a[c].samples[i].watts == b[c].samples[i].watts);
      const double w = a[c].samples[i].watts;
      CHECK(((w >= 0.0 && w <= 2.0) || (w >= 30.0 && w <= 3000.0)));
    }
  }
  CHECK_THROWS_AS(synth_channel("tv", SynthConfig{.num_days = 0}, clock),
                  std::invalid_argument);
}

TEST_CASE("resampled CSV round trip") {
  const Clock clock(0);
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.num_days = 2;
  const auto r = resample(synth_channel("kettle", cfg, clock), 30, clock);
  std::ostringstream out;
  write_resampled_csv(r, out);
  std::istringstream in(out.str());
  const auto back = read_resampled_csv(in);
  CHECK(back.appliance == r.appliance);
  CHECK(back.window_minutes == r.window_minutes);
  REQUIRE(back.values.size() == r.values.size());
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    CHECK(back.values[i].window_start == r.values[i].window_start);
    CHECK(back.values[i].mean_watts == r.values[i].mean_watts);
    CHECK(back.values[i].sample_count == r.values[i].sample_count);
  }
}

TEST_CASE("labels file parsing") {
  std::istringstream in("1 aggregate\n2 kettle\n3 television\n");
  const auto labels = parse_labels(in);
  CHECK(labels.at(2) == "kettle");
  CHECK(labels.at(3) == "television");
}
