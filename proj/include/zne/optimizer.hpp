#pragma once

#include "zne/types.hpp"

#include <functional>

namespace zne {

/// Stopping rules for minimize_box. Convergence is declared when the
/// infinity norm of the projected gradient x - P(x - g) drops to
/// gradient_tolerance, or when the relative objective change between
/// accepted iterates falls to objective_rel_tolerance (relative to
/// max(|f_prev|, |f_next|), guarded against an exactly zero objective).
struct SolveSettings {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double objective_rel_tolerance = 1e-10;
  int memory_pairs = 10;
};

enum class SolveStatus { Converged, MaxIterations, NonFinite, LineSearchFailure };

struct SolveOutcome {
  Eigen::VectorXd point;
  double objective = 0.0;
  SolveStatus status = SolveStatus::LineSearchFailure;
  int iterations = 0;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Box-constrained minimisation: limited-memory BFGS directions combined
/// with gradient projection onto the box, and a backtracking line search
/// along the projected path. Pinned coordinates (lower == upper) stay put.
/// Deterministic: no randomness, no time dependence. The starting point must
/// lie inside the box (callers clamp first); anything else raises
/// StructuralError. Non-finite objective or gradient values surface as
/// status NonFinite rather than exceptions.
SolveOutcome minimize_box(const ObjectiveFn& objective,
                          const GradientFn& gradient,
                          const Eigen::VectorXd& init, const ParamBox& box,
                          const SolveSettings& settings = {});

/// Ordinary least squares fit of theta_0 + theta_1 l + ... + theta_d l^d,
/// solved by column-pivoted QR on the Vandermonde matrix. Requires
/// series.size() >= degree + 1 (InsufficientDataError) and a full-rank
/// system (SingularSystemError).
Eigen::VectorXd ols_polynomial(const ScaleSeries& series, int degree);

/// Exact solution of the intercept-bounded polynomial least squares
/// problem: plain OLS when the intercept already lies in [-1, 1], otherwise
/// the intercept is pinned to the nearest bound and the remaining
/// coefficients are re-solved against the shifted values. For a convex
/// quadratic with one box-constrained coordinate this is the exact
/// constrained minimiser.
Eigen::VectorXd bounded_polynomial_fit(const ScaleSeries& series, int degree);

}  // namespace zne
