#pragma once

#include "zne/rng.hpp"
#include "zne/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace zne {

/// Ground-truth expectation curve E(l) = asymptote +
/// (ideal - asymptote) * exp(-decay_rate * l + curvature * l^2).
/// E(0) = ideal by construction; admissible curves satisfy |E(l)| <= 1 for
/// every l in [0, 5].
struct TrueCurve {
  std::string id;
  double ideal = 0.0;
  double asymptote = 0.0;
  double decay_rate = 1.0;
  double curvature = 0.0;

  double eval(double lambda) const;
};

/// True when the curve stays inside [-1, 1] on [0, 5]. Checked at the
/// exponent's critical points (interval ends and the parabola vertex), so
/// the test is exact rather than grid based.
bool curve_within_unit(const TrueCurve& curve);

/// Decay/curvature ranges for one noise regime; `backend_tag` labels the
/// generated records.
struct Regime {
  std::string backend_tag;
  double decay_min = 0.05;
  double decay_max = 0.5;
  double curvature_min = -0.05;
  double curvature_max = 0.05;
};

/// The two stock regimes: "mild" draws decay rates from [0.05, 0.5] and
/// "harsh" from [0.5, 2.0]; both use curvature in [-0.05, 0.05].
std::vector<Regime> default_regimes();
Regime regime_by_name(const std::string& name);

struct BenchmarkConfig {
  double bin_width = 0.05;  // ideal-value bins spanning [-1, 1]
  int curves_per_bin = 100;
  std::vector<std::vector<double>> lambda_sets = {
      {1, 2, 3}, {1, 3, 5}, {1, 2, 3, 4, 5}};
  int repetitions = 10;
  long shots = 10000;
  std::vector<Regime> regimes = default_regimes();
  std::uint64_t seed = 0;
};

/// Rejection-samples an admissible curve: ideal uniform in [bin_lo, bin_hi),
/// asymptote uniform in [-0.2, 0.2], rates uniform in the regime ranges.
/// Draws failing curve_within_unit are discarded; after 10000 attempts a
/// GenerationError is raised.
TrueCurve sample_true_curve(double bin_lo, double bin_hi, const Regime& regime,
                            SplitMixStream& rng, std::string id);

/// One measured expectation: k ~ Binomial(shots, (1 + true_value) / 2),
/// returned as 2k/shots - 1. true_value of exactly +-1 reproduces exactly.
double shot_sample(double true_value, long shots, SplitMixStream& rng);

/// Exact inversion sampler for Binomial(n, p), walking outward from the
/// mode. One uniform deviate per draw.
long binomial_draw(long n, double p, SplitMixStream& rng);

struct Dataset {
  std::vector<TrueCurve> curves;
  std::vector<ExperimentRecord> records;
};

/// Full synthetic benchmark: for every regime, ideal-value bin and curve,
/// measures each lambda set `repetitions` times under shot noise. Every
/// curve and record gets its own named random stream derived from
/// (config.seed, id), so any subset regenerates identically and the result
/// does not depend on evaluation order.
Dataset generate_dataset(const BenchmarkConfig& config);

enum class Circuit { GHZ, WState };
enum class Observable { AllX, AllZ };

/// Noiseless expectation values used when replicating the hardware-style
/// configuration: GHZ measures +1 under both all-X and all-Z observables;
/// the W state gives 0 under all-X and -1 under all-Z.
double ideal_registry_lookup(Circuit circuit, Observable observable);
double ideal_registry_lookup(const std::string& circuit,
                             const std::string& observable);

}  // namespace zne
