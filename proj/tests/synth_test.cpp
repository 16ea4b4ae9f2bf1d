#include "zne/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace zne;

TEST_CASE("TrueCurve evaluates its closed form") {
  TrueCurve c{"c", 0.9, 0.1, 0.5, 0.02};
  CHECK(c.eval(0.0) == doctest::Approx(0.9).epsilon(1e-14));
  double expect = 0.1 + 0.8 * std::exp(-0.5 * 2.0 + 0.02 * 4.0);
  CHECK(c.eval(2.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("curve_within_unit checks the exponent extrema exactly") {
  // Pure decay from 1: stays inside.
  CHECK(curve_within_unit(TrueCurve{"a", 1.0, 0.0, 1.0, 0.0}));
  // Positive curvature dominating by lambda = 5 escapes upward:
  // exponent at 5 is -0.5 + 2.5 = 2, so E(5) = e^2 > 1.
  CHECK_FALSE(curve_within_unit(TrueCurve{"b", 1.0, 0.0, 0.1, 0.1}));
  // Interior vertex case: exponent -lambda + 0.2 lambda^2 peaks back at 0
  // by lambda = 5, never pushing E above 1.
  CHECK(curve_within_unit(TrueCurve{"c", 1.0, 0.0, 1.0, 0.2}));
  // Stronger curvature overwhelms the decay by the right edge:
  // exponent at 5 is -5 + 6.25 = 1.25, so E(5) = 0.2 + 0.8 e^1.25 > 1.
  CHECK_FALSE(curve_within_unit(TrueCurve{"d", 1.0, 0.2, 1.0, 0.25}));
}

TEST_CASE("sample_true_curve draws admissible curves from the bin") {
  SplitMixStream rng(404);
  Regime flat{"flat", 0.05, 0.5, 0.0, 0.0};
  for (int i = 0; i < 50; ++i) {
    TrueCurve c = sample_true_curve(0.95, 1.0, flat, rng, "x");
    CHECK(c.ideal >= 0.95);
    CHECK(c.ideal < 1.0);
    CHECK(c.asymptote >= -0.2);
    CHECK(c.asymptote <= 0.2);
    CHECK(c.curvature == 0.0);
    CHECK(curve_within_unit(c));
    // Zero curvature means monotone decay toward the asymptote.
    double prev = c.eval(0.0);
    for (double l = 0.5; l <= 5.0; l += 0.5) {
      double now = c.eval(l);
      CHECK(now <= prev + 1e-12);
      CHECK(now >= c.asymptote - 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("a curve whose ideal equals its asymptote is flat") {
  TrueCurve c{"flat", 0.0, 0.0, 0.3, 0.01};
  for (double l = 0.0; l <= 5.0; l += 0.25) {
    CHECK(std::abs(c.eval(l)) <= 1e-15);
  }
}

TEST_CASE("sampled ideals are uniform over the bin") {
  SplitMixStream rng(808);
  Regime mild = regime_by_name("mild");
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    sum += sample_true_curve(0.45, 0.5, mild, rng, "u").ideal;
  }
  CHECK(std::abs(sum / n - 0.475) <= 0.002);
}

TEST_CASE("sample_true_curve gives up on impossible regimes") {
  SplitMixStream rng(1);
  // Curvature at least 2 sends every curve far outside the unit interval.
  Regime impossible{"bad", 0.05, 0.1, 2.0, 3.0};
  CHECK_THROWS_AS(sample_true_curve(0.95, 1.0, impossible, rng, "x"),
                  GenerationError);
}

TEST_CASE("shot_sample is exact at the endpoints and lattice valued") {
  SplitMixStream rng(17);
  CHECK(shot_sample(1.0, 100, rng) == 1.0);
  CHECK(shot_sample(-1.0, 100, rng) == -1.0);
  for (int i = 0; i < 500; ++i) {
    long shots = 50;
    double v = shot_sample(0.37, shots, rng);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    double k = (v + 1.0) * static_cast<double>(shots) / 2.0;
    CHECK(std::abs(k - std::round(k)) <= 1e-9);
  }
}

TEST_CASE("shot_sample has binomial moments at true value zero") {
  SplitMixStream rng(2718);
  const int n = 100000;
  const long shots = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = shot_sample(0.0, shots, rng);
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n;
  double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
  // sigma of one sample is 1/sqrt(shots) = 0.01.
  CHECK(std::abs(mean) <= 4.0 * 0.01 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sd - 0.01) <= 0.02 * 0.01);
}

TEST_CASE("shot samples are unbiased for an interior true value") {
  SplitMixStream rng(31459);
  const int n = 100000;
  const long shots = 400;
  const double truth = 0.62;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += shot_sample(truth, shots, rng);
  double sigma = std::sqrt((1.0 - truth * truth) / static_cast<double>(shots));
  CHECK(std::abs(sum / n - truth) <= 5.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("binomial_draw matches binomial moments") {
  SplitMixStream rng(55);
  const int n = 200000;
  const long trials = 60;
  const double p = 0.3;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    long k = binomial_draw(trials, p, rng);
    CHECK(k >= 0);
    CHECK(k <= trials);
    sum += static_cast<double>(k);
    sumsq += static_cast<double>(k) * static_cast<double>(k);
  }
  double mean = sum / n;
  double var = (sumsq - n * mean * mean) / (n - 1);
  double expect_mean = trials * p;
  double expect_var = trials * p * (1.0 - p);
  CHECK(std::abs(mean - expect_mean) <=
        5.0 * std::sqrt(expect_var / static_cast<double>(n)));
  CHECK(std::abs(var - expect_var) <= 0.05 * expect_var);
  CHECK(binomial_draw(10, 0.0, rng) == 0);
  CHECK(binomial_draw(10, 1.0, rng) == 10);
}

TEST_CASE("generate_dataset produces the full experiment matrix") {
  BenchmarkConfig config;
  config.bin_width = 0.5;  // 4 bins over [-1, 1]
  config.curves_per_bin = 2;
  config.lambda_sets = {{1, 2, 3}};
  config.repetitions = 2;
  config.shots = 100;
  config.seed = 9;
  Dataset data = generate_dataset(config);

  CHECK(data.curves.size() == 4u * 2u * 2u);
  CHECK(data.records.size() == 4u * 2u * 2u * 1u * 2u);

  std::map<std::pair<std::string, long>, int> bin_counts;
  for (const TrueCurve& c : data.curves) {
    long bin = static_cast<long>(std::floor((c.ideal + 1.0) / config.bin_width));
    if (bin == 4) bin = 3;  // ideal exactly 1 belongs to the last bin
    bin_counts[{c.id.substr(0, c.id.find("-b")), bin}]++;
    // Each curve's ideal lies inside its own bin.
    double lo = -1.0 + bin * config.bin_width;
    CHECK(c.ideal >= lo);
    CHECK(c.ideal < lo + config.bin_width + 1e-12);
  }
  for (const auto& [key, count] : bin_counts) CHECK(count == 2);

  std::set<std::string> ids;
  for (const ExperimentRecord& r : data.records) {
    CHECK(ids.insert(r.id).second);  // ids unique
    REQUIRE(r.lambdas.size() == 3);
    CHECK(r.lambdas[0] == 1.0);
    CHECK(r.lambdas[1] == 2.0);
    CHECK(r.lambdas[2] == 3.0);
    CHECK(r.shots == 100);
    CHECK(r.meta.at("schema_version") == "1");
    CHECK(r.meta.count("lambda_set") == 1);
    CHECK(r.meta.count("width") == 1);
    for (double e : r.expectations) {
      CHECK(e >= -1.0);
      CHECK(e <= 1.0);
      double k = (e + 1.0) * static_cast<double>(r.shots) / 2.0;
      CHECK(std::abs(k - std::round(k)) <= 1e-9);
    }
  }
}

TEST_CASE("generate_dataset is a pure function of its config") {
  BenchmarkConfig config;
  config.bin_width = 0.25;
  config.curves_per_bin = 1;
  config.lambda_sets = {{1, 3, 5}};
  config.repetitions = 1;
  config.shots = 200;
  config.seed = 31;
  Dataset a = generate_dataset(config);
  Dataset b = generate_dataset(config);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i] == b.records[i]);
  }
  REQUIRE(a.curves.size() == b.curves.size());
  for (std::size_t i = 0; i < a.curves.size(); ++i) {
    CHECK(a.curves[i].id == b.curves[i].id);
    CHECK(a.curves[i].ideal == b.curves[i].ideal);
    CHECK(a.curves[i].asymptote == b.curves[i].asymptote);
    CHECK(a.curves[i].decay_rate == b.curves[i].decay_rate);
    CHECK(a.curves[i].curvature == b.curves[i].curvature);
  }

  config.seed = 32;
  Dataset c = generate_dataset(config);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.records.size() && !any_diff; ++i) {
    any_diff = !(a.records[i] == c.records[i]);
  }
  CHECK(any_diff);
}

TEST_CASE("generate_dataset validates its config") {
  BenchmarkConfig config;
  config.bin_width = 0.3;  // does not divide 2 evenly
  CHECK_THROWS_AS(generate_dataset(config), StructuralError);
  config = BenchmarkConfig{};
  config.lambda_sets = {{1, 1, 2}};
  CHECK_THROWS_AS(generate_dataset(config), StructuralError);
  config = BenchmarkConfig{};
  config.curves_per_bin = 0;
  CHECK_THROWS_AS(generate_dataset(config), StructuralError);
}

TEST_CASE("ideal registry matches the base-circuit table") {
  CHECK(ideal_registry_lookup(Circuit::GHZ, Observable::AllX) == 1.0);
  CHECK(ideal_registry_lookup(Circuit::GHZ, Observable::AllZ) == 1.0);
  CHECK(ideal_registry_lookup(Circuit::WState, Observable::AllX) == 0.0);
  CHECK(ideal_registry_lookup(Circuit::WState, Observable::AllZ) == -1.0);
  CHECK(ideal_registry_lookup("ghz", "all_z") == 1.0);
  CHECK(ideal_registry_lookup("w", "all_x") == 0.0);
  CHECK(ideal_registry_lookup("w", "all_z") == -1.0);
  CHECK_THROWS_AS(ideal_registry_lookup("bell", "all_z"), StructuralError);
}

TEST_CASE("the stock regimes carry the documented ranges") {
  std::vector<Regime> regimes = default_regimes();
  REQUIRE(regimes.size() == 2);
  CHECK(regimes[0].backend_tag == "mild");
  CHECK(regimes[0].decay_min == 0.05);
  CHECK(regimes[0].decay_max == 0.5);
  CHECK(regimes[1].backend_tag == "harsh");
  CHECK(regimes[1].decay_min == 0.5);
  CHECK(regimes[1].decay_max == 2.0);
  CHECK(regime_by_name("harsh").backend_tag == "harsh");
  CHECK_THROWS_AS(regime_by_name("tropical"), StructuralError);
}
