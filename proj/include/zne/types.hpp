#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zne {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: layout mismatches, invalid specs, out-of-box inits.
struct StructuralError : Error {
  using Error::Error;
};

/// Too few data points for the requested operation.
struct InsufficientDataError : Error {
  using Error::Error;
};

/// Rank-deficient linear system (e.g. numerically coincident scale factors).
struct SingularSystemError : Error {
  using Error::Error;
};

/// Statistically degenerate input (e.g. all-zero paired differences).
struct DegenerateInputError : Error {
  using Error::Error;
};

/// Rejection sampling failed to produce an admissible draw.
struct GenerationError : Error {
  using Error::Error;
};

/// Dataset/result file problem; `line` is 1-based when the error is
/// attributable to a specific line, -1 otherwise.
struct DataError : Error {
  explicit DataError(const std::string& msg, long line_number = -1)
      : Error(msg), line(line_number) {}
  long line;
};

/// Invalid model-spec string.
struct SpecParseError : Error {
  using Error::Error;
};

enum class ModelFamily { Polynomial, Exponential, PolyExp };

/// Asymptotic value of the model as the noise scale grows: either estimated
/// from data or fixed to a known value (0 for traceless observables).
class Asymptote {
 public:
  static Asymptote free() { return Asymptote(false, 0.0); }
  static Asymptote fixed(double value) { return Asymptote(true, value); }

  bool is_fixed() const { return fixed_; }
  double value() const { return value_; }

  friend bool operator==(const Asymptote& a, const Asymptote& b) {
    return a.fixed_ == b.fixed_ && (!a.fixed_ || a.value_ == b.value_);
  }

 private:
  Asymptote(bool fixed, double value) : fixed_(fixed), value_(value) {}
  bool fixed_;
  double value_;
};

/// Extrapolation family plus hyperparameters. `degree` applies to
/// Polynomial and PolyExp; `asymptote` to Exponential and PolyExp.
struct ModelSpec {
  ModelFamily family = ModelFamily::Polynomial;
  int degree = 1;
  Asymptote asymptote = Asymptote::free();
  bool bounded = false;

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    if (a.family != b.family || a.bounded != b.bounded) return false;
    bool deg = a.family == ModelFamily::Exponential || a.degree == b.degree;
    bool asy = a.family == ModelFamily::Polynomial || a.asymptote == b.asymptote;
    return deg && asy;
  }
};

/// Throws StructuralError if the spec violates its own invariants.
void validate(const ModelSpec& spec);

/// Parameter vector in the family's fixed layout:
///   Polynomial            (theta_0, ..., theta_d)
///   Exponential unbounded (a, b, c)
///   Exponential bounded   (a, zeta, c)
///   PolyExp unbounded     (a, c_0, ..., c_d), sign carried separately
///   PolyExp bounded       (a, zeta, c_1, ..., c_d)
struct ParamVector {
  Eigen::VectorXd values;
  int sign = +1;  // used by unbounded PolyExp only; always +1 or -1

  bool all_finite() const { return values.allFinite(); }
};

/// Componentwise box; entries may be +/- infinity. lower == upper pins a
/// parameter.
struct ParamBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

/// Ordered (lambda, y) measurement points for one experiment repetition.
/// Construction sorts pairs by lambda and enforces: lambda >= 1, strictly
/// increasing, all entries finite.
class ScaleSeries {
 public:
  ScaleSeries() = default;
  ScaleSeries(Eigen::VectorXd lambdas, Eigen::VectorXd values);

  static ScaleSeries from_pairs(const std::vector<std::pair<double, double>>& pts);

  const Eigen::VectorXd& lambdas() const { return lambdas_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return lambdas_.size(); }

 private:
  Eigen::VectorXd lambdas_;
  Eigen::VectorXd values_;
};

/// One synthetic or ingested ZNE instance.
struct ExperimentRecord {
  std::string id;
  std::string curve_id;
  std::string backend;
  Eigen::VectorXd lambdas;
  Eigen::VectorXd expectations;
  double ideal = 0.0;
  int repetition = 0;
  long shots = 1;
  std::map<std::string, std::string> meta;
};

bool operator==(const ExperimentRecord& a, const ExperimentRecord& b);

}  // namespace zne
