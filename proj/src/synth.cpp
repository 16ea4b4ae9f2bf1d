#include "zne/synth.hpp"

#include "zne/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace zne {

double TrueCurve::eval(double lambda) const {
  double exponent = -decay_rate * lambda + curvature * lambda * lambda;
  return asymptote + (ideal - asymptote) * std::exp(exponent);
}

bool curve_within_unit(const TrueCurve& curve) {
  // E is monotone in the exponent g(l) = -r l + k l^2, so its extrema over
  // [0, 5] sit where g is extremal: the ends, plus the vertex r / (2k).
  double g0 = 0.0;
  double g5 = -curve.decay_rate * 5.0 + curve.curvature * 25.0;
  double gmin = std::min(g0, g5);
  double gmax = std::max(g0, g5);
  if (curve.curvature != 0.0) {
    double vertex = curve.decay_rate / (2.0 * curve.curvature);
    if (vertex > 0.0 && vertex < 5.0) {
      double gv = -curve.decay_rate * vertex +
                  curve.curvature * vertex * vertex;
      gmin = std::min(gmin, gv);
      gmax = std::max(gmax, gv);
    }
  }
  double span = curve.ideal - curve.asymptote;
  for (double g : {gmin, gmax}) {
    double value = curve.asymptote + span * std::exp(g);
    if (!(value >= -1.0 && value <= 1.0)) return false;
  }
  return true;
}

std::vector<Regime> default_regimes() {
  return {{"mild", 0.05, 0.5, -0.05, 0.05}, {"harsh", 0.5, 2.0, -0.05, 0.05}};
}

Regime regime_by_name(const std::string& name) {
  for (const Regime& r : default_regimes()) {
    if (r.backend_tag == name) return r;
  }
  throw StructuralError("unknown regime '" + name + "'");
}

TrueCurve sample_true_curve(double bin_lo, double bin_hi, const Regime& regime,
                            SplitMixStream& rng, std::string id) {
  if (!(bin_lo < bin_hi) || bin_lo < -1.0 || bin_hi > 1.0 + 1e-12) {
    throw StructuralError("ideal-value bin must be a subinterval of [-1, 1]");
  }
  if (!(regime.decay_min > 0.0) || regime.decay_min > regime.decay_max ||
      regime.curvature_min > regime.curvature_max) {
    throw StructuralError("regime ranges are invalid");
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    TrueCurve curve;
    curve.id = id;
    curve.ideal = rng.next_in(bin_lo, bin_hi);
    curve.asymptote = rng.next_in(-0.2, 0.2);
    curve.decay_rate = rng.next_in(regime.decay_min, regime.decay_max);
    curve.curvature = rng.next_in(regime.curvature_min, regime.curvature_max);
    if (curve_within_unit(curve)) return curve;
  }
  throw GenerationError("no admissible curve after 10000 attempts for bin [" +
                        format_double(bin_lo) + ", " + format_double(bin_hi) +
                        ")");
}

long binomial_draw(long n, double p, SplitMixStream& rng) {
  if (n < 0) throw StructuralError("binomial draw needs n >= 0");
  if (p <= 0.0) {
    rng.next_unit();
    return 0;
  }
  if (p >= 1.0) {
    rng.next_unit();
    return n;
  }
  const double q = 1.0 - p;
  long mode = static_cast<long>(std::floor((static_cast<double>(n) + 1.0) * p));
  mode = std::min(mode, n);
  double log_pm = std::lgamma(static_cast<double>(n) + 1.0) -
                  std::lgamma(static_cast<double>(mode) + 1.0) -
                  std::lgamma(static_cast<double>(n - mode) + 1.0) +
                  static_cast<double>(mode) * std::log(p) +
                  static_cast<double>(n - mode) * std::log1p(-p);
  double mass = std::exp(log_pm);
  double u = rng.next_unit();
  if (u < mass) return mode;
  u -= mass;

  // Inversion by accumulating pmf mass outward from the mode, always taking
  // the heavier of the two frontier cells next.
  long down = mode, up = mode;
  double mass_down = mass, mass_up = mass;
  while (down > 0 || up < n) {
    double next_up =
        up < n ? mass_up * (static_cast<double>(n - up) /
                            static_cast<double>(up + 1)) * (p / q)
               : -1.0;
    double next_down =
        down > 0 ? mass_down * (static_cast<double>(down) /
                                static_cast<double>(n - down + 1)) * (q / p)
                 : -1.0;
    if (next_up >= next_down) {
      ++up;
      mass_up = next_up;
      if (u < mass_up) return up;
      u -= mass_up;
    } else {
      --down;
      mass_down = next_down;
      if (u < mass_down) return down;
      u -= mass_down;
    }
  }
  // Residual rounding mass (u was within a few ulps of 1): fall back to the
  // mode rather than failing.
  return mode;
}

double shot_sample(double true_value, long shots, SplitMixStream& rng) {
  if (shots < 1) throw StructuralError("shots must be positive");
  if (!(true_value >= -1.0 && true_value <= 1.0)) {
    throw StructuralError("true expectation must lie in [-1, 1]");
  }
  double p = std::clamp((1.0 + true_value) / 2.0, 0.0, 1.0);
  long k = binomial_draw(shots, p, rng);
  return 2.0 * static_cast<double>(k) / static_cast<double>(shots) - 1.0;
}

namespace {

std::string lambda_set_label(const std::vector<double>& lambdas) {
  std::string out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(lambdas[i]);
  }
  return out;
}

void validate_config(const BenchmarkConfig& cfg, long* bins_out) {
  if (!(cfg.bin_width > 0.0)) throw StructuralError("bin width must be positive");
  long bins = std::lround(2.0 / cfg.bin_width);
  if (bins < 1 ||
      std::abs(static_cast<double>(bins) * cfg.bin_width - 2.0) > 1e-9) {
    throw StructuralError("bin width must divide [-1, 1] evenly");
  }
  if (cfg.curves_per_bin < 1) throw StructuralError("curves_per_bin must be >= 1");
  if (cfg.repetitions < 1) throw StructuralError("repetitions must be >= 1");
  if (cfg.shots < 1) throw StructuralError("shots must be >= 1");
  if (cfg.lambda_sets.empty()) throw StructuralError("need at least one lambda set");
  for (const auto& set : cfg.lambda_sets) {
    if (set.empty()) throw StructuralError("lambda sets must be non-empty");
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (!(set[i] >= 1.0)) throw StructuralError("lambdas must be >= 1");
      if (i > 0 && !(set[i] > set[i - 1])) {
        throw StructuralError("lambda sets must be strictly increasing");
      }
    }
  }
  if (cfg.regimes.empty()) throw StructuralError("need at least one regime");
  for (const Regime& r : cfg.regimes) {
    if (r.backend_tag.empty()) throw StructuralError("regime tag must be non-empty");
  }
  *bins_out = bins;
}

}  // namespace

Dataset generate_dataset(const BenchmarkConfig& config) {
  long bins = 0;
  validate_config(config, &bins);

  SplitMixStream root(config.seed);
  Dataset out;
  out.curves.reserve(static_cast<std::size_t>(bins) * config.regimes.size() *
                     static_cast<std::size_t>(config.curves_per_bin));

  std::string width_label = format_double(config.bin_width);
  char buf[64];
  for (const Regime& regime : config.regimes) {
    for (long bin = 0; bin < bins; ++bin) {
      double lo = -1.0 + static_cast<double>(bin) * config.bin_width;
      double hi = lo + config.bin_width;
      for (int c = 0; c < config.curves_per_bin; ++c) {
        std::snprintf(buf, sizeof(buf), "%s-b%02ld-c%03d",
                      regime.backend_tag.c_str(), bin, c);
        std::string curve_id(buf);
        SplitMixStream curve_rng = root.derive(curve_id);
        TrueCurve curve =
            sample_true_curve(lo, hi, regime, curve_rng, curve_id);
        out.curves.push_back(curve);

        for (std::size_t ls = 0; ls < config.lambda_sets.size(); ++ls) {
          const std::vector<double>& lambdas = config.lambda_sets[ls];
          for (int rep = 0; rep < config.repetitions; ++rep) {
            std::snprintf(buf, sizeof(buf), "%s-L%zu-r%02d", curve_id.c_str(),
                          ls, rep);
            ExperimentRecord rec;
            rec.id = buf;
            rec.curve_id = curve_id;
            rec.backend = regime.backend_tag;
            rec.ideal = curve.ideal;
            rec.repetition = rep;
            rec.shots = config.shots;
            rec.lambdas.resize(static_cast<Eigen::Index>(lambdas.size()));
            rec.expectations.resize(static_cast<Eigen::Index>(lambdas.size()));
            SplitMixStream rec_rng = root.derive(rec.id);
            for (std::size_t i = 0; i < lambdas.size(); ++i) {
              rec.lambdas[static_cast<Eigen::Index>(i)] = lambdas[i];
              rec.expectations[static_cast<Eigen::Index>(i)] =
                  shot_sample(curve.eval(lambdas[i]), config.shots, rec_rng);
            }
            rec.meta["lambda_set"] = lambda_set_label(lambdas);
            rec.meta["schema_version"] = "1";
            rec.meta["width"] = width_label;
            out.records.push_back(std::move(rec));
          }
        }
      }
    }
  }
  return out;
}

double ideal_registry_lookup(Circuit circuit, Observable observable) {
  if (circuit == Circuit::GHZ) return 1.0;
  return observable == Observable::AllX ? 0.0 : -1.0;
}

double ideal_registry_lookup(const std::string& circuit,
                             const std::string& observable) {
  Circuit c;
  if (circuit == "ghz") {
    c = Circuit::GHZ;
  } else if (circuit == "w") {
    c = Circuit::WState;
  } else {
    throw StructuralError("unknown circuit '" + circuit + "'");
  }
  Observable o;
  if (observable == "all_x") {
    o = Observable::AllX;
  } else if (observable == "all_z") {
    o = Observable::AllZ;
  } else {
    throw StructuralError("unknown observable '" + observable + "'");
  }
  return ideal_registry_lookup(c, o);
}

}  // namespace zne
