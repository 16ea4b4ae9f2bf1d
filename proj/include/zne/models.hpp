#pragma once

#include "zne/types.hpp"

namespace zne {

/// Length of the continuous parameter vector for `spec` (the sign of the
/// unbounded PolyExp family is carried separately and not counted here).
int param_count(const ModelSpec& spec);

/// Number of degrees of freedom the fit must estimate. Counts the discrete
/// sign of the unbounded PolyExp family and excludes fixed asymptotes:
///   Polynomial                   d + 1
///   Exponential   fixed a: 2     free a: 3
///   PolyExp bounded  fixed a: d + 1   free a: d + 2
///   PolyExp unbounded fixed a: d + 2  free a: d + 3
int free_param_count(const ModelSpec& spec);

/// True when `n_points` measurements are enough to fit `spec`, i.e.
/// free_param_count(spec) <= n_points.
bool feasible(const ModelSpec& spec, Eigen::Index n_points);

/// Model prediction at noise scale `lambda`.
///   Polynomial            theta_0 + theta_1 l + ... + theta_d l^d
///   Exponential unbounded a + b exp(-c l)
///   Exponential bounded   a + (zeta - a) exp(-c l)
///   PolyExp unbounded     a + sign * exp(c_0 + c_1 l + ... + c_d l^d)
///   PolyExp bounded       a + (zeta - a) exp(c_1 l + ... + c_d l^d)
/// The bounded reparametrisations make the zero-noise value an explicit
/// parameter (theta_0 or zeta) so a box constraint on one coordinate is the
/// physical bound.
double eval_model(const ModelSpec& spec, const ParamVector& params, double lambda);

/// Partial derivatives of eval_model with respect to the continuous
/// parameters, in layout order. The PolyExp sign is held constant.
Eigen::VectorXd gradient(const ModelSpec& spec, const ParamVector& params,
                         double lambda);

/// Closed-form value of the model at lambda = 0:
///   Polynomial theta_0; Exponential unbounded a + b; Exponential bounded
///   zeta; PolyExp unbounded a + sign * exp(c_0); PolyExp bounded zeta.
double zero_noise_value(const ModelSpec& spec, const ParamVector& params);

/// Feasible box for the parameter vector. Bounded specs constrain the
/// zero-noise coordinate (and the exponential decay rate) so every feasible
/// point predicts a physical value at lambda = 0; unbounded specs leave all
/// coordinates free. A fixed asymptote is realised as lower = upper = value.
ParamBox param_box(const ModelSpec& spec);

/// Options for param_box. The decay rate of the unbounded exponential is
/// left unconstrained by default, matching the reference implementations
/// this family mirrors; set `positive_decay_unbounded_exp` to restrict it to
/// c >= 1e-8 like the bounded variant.
struct BoxOptions {
  bool positive_decay_unbounded_exp = false;
};

ParamBox param_box(const ModelSpec& spec, const BoxOptions& options);

/// Deterministic starting point derived from the data:
///   - asymptote a: fixed value, or y at the largest lambda;
///   - zero-noise coordinate (theta_0 / zeta): linear extrapolation to
///     lambda = 0 through the first two points, clamped into the box;
///   - exponential rate c: 1;
///   - PolyExp coefficients: c_1 = -0.1 * sgn(y_last - y_first) (ties treated
///     as -0.1), higher c_j = 0; unbounded PolyExp additionally sets
///     sign = +1 when a_0 < y_first and -1 otherwise, and
///     c_0 = ln |y_first - a_0| clamped into [-20, 20] (the magnitude is
///     floored at 1e-12 before the log);
///   - Polynomial theta_1..theta_d: ordinary least squares when the series
///     has at least d + 1 points, zeros otherwise.
/// Requires at least two points.
ParamVector default_init(const ModelSpec& spec, const ScaleSeries& series);

/// Canonical spec string, e.g. "poly:d=2:bounded", "exp:a=0:unbounded",
/// "polyexp:d=1:a=free:bounded". parse_model_spec inverts it.
std::string spec_id(const ModelSpec& spec);

/// Spec string without the bounded/unbounded suffix; bounded and unbounded
/// variants of the same family share this key when pairing results.
std::string family_id(const ModelSpec& spec);

/// Parses the grammar family[:d=<int>][:a=<free|number>][:bounded|:unbounded]
/// with families poly, exp, polyexp. Defaults: d=1, a=free, unbounded.
/// Throws SpecParseError on malformed input.
ModelSpec parse_model_spec(std::string_view text);

}  // namespace zne
