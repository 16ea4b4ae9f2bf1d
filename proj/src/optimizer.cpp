#include "zne/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace zne {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr int kMaxExpansions = 10;

void check_inputs(const Eigen::VectorXd& init, const ParamBox& box,
                  const SolveSettings& settings) {
  if (settings.max_iterations < 1 || settings.memory_pairs < 1 ||
      !(settings.gradient_tolerance > 0.0) ||
      !(settings.objective_rel_tolerance > 0.0)) {
    throw StructuralError("invalid solver settings");
  }
  if (box.lower.size() != init.size() || box.upper.size() != init.size()) {
    throw StructuralError("box size does not match the starting point");
  }
  for (Eigen::Index i = 0; i < init.size(); ++i) {
    if (std::isnan(box.lower[i]) || std::isnan(box.upper[i]) ||
        box.lower[i] > box.upper[i]) {
      throw StructuralError("box bounds must satisfy lower <= upper");
    }
  }
  if (!box.contains(init)) {
    throw StructuralError("starting point must lie inside the box");
  }
}

/// Coordinates sitting on a bound with the gradient pushing outward cannot
/// move; treating them as variables lets clipped steps corrupt the curvature
/// estimate, so they are masked out of the quasi-Newton computation instead.
Eigen::ArrayXd free_coordinate_mask(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& g,
                                    const ParamBox& box) {
  Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if ((x[j] <= box.lower[j] && g[j] > 0.0) ||
        (x[j] >= box.upper[j] && g[j] < 0.0)) {
      mask[j] = 0.0;
    }
  }
  return mask;
}

/// Two-loop recursion restricted to the free coordinates: applies the
/// limited-memory inverse Hessian estimate to the masked gradient. Pairs
/// whose masked curvature degenerates are skipped; with no usable pair the
/// result is the masked gradient itself.
Eigen::VectorXd apply_inverse_hessian(const Eigen::VectorXd& g,
                                      const std::deque<Eigen::VectorXd>& s,
                                      const std::deque<Eigen::VectorXd>& y,
                                      const Eigen::ArrayXd& mask) {
  Eigen::VectorXd q = (g.array() * mask).matrix();
  if (s.empty()) return q;
  const std::size_t k = s.size();
  std::vector<Eigen::VectorXd> ms(k), my(k);
  std::vector<double> rho(k, 0.0);
  double gamma = 1.0;
  bool usable = false;
  for (std::size_t i = 0; i < k; ++i) {
    ms[i] = (s[i].array() * mask).matrix();
    my[i] = (y[i].array() * mask).matrix();
    double sy = ms[i].dot(my[i]);
    if (sy > 1e-10 * ms[i].norm() * my[i].norm()) {
      rho[i] = 1.0 / sy;
      gamma = sy / my[i].squaredNorm();
      usable = true;
    }
  }
  if (!usable) return q;
  std::vector<double> alpha(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    if (rho[i] == 0.0) continue;
    alpha[i] = rho[i] * ms[i].dot(q);
    q -= alpha[i] * my[i];
  }
  q *= gamma;
  for (std::size_t i = 0; i < k; ++i) {
    if (rho[i] == 0.0) continue;
    double beta = rho[i] * my[i].dot(q);
    q += (alpha[i] - beta) * ms[i];
  }
  return q;
}

struct LineSearchResult {
  bool accepted = false;
  bool saw_nonfinite = false;
  bool stalled = false;
  Eigen::VectorXd point;
  double value = 0.0;
};

/// Backtracking (with one expansion pass) along the projected path
/// x(t) = P(x + t d), accepting on sufficient decrease relative to the
/// actual projected step.
LineSearchResult projected_search(const ObjectiveFn& objective,
                                  const Eigen::VectorXd& x, double f,
                                  const Eigen::VectorXd& g,
                                  const Eigen::VectorXd& d, double step0,
                                  const ParamBox& box) {
  LineSearchResult res;
  double step = step0;
  for (int t = 0; t < kMaxBacktracks; ++t) {
    Eigen::VectorXd xt = box.clamp(x + step * d);
    Eigen::VectorXd move = xt - x;
    if ((move.array() == 0.0).all()) return res;  // step too small to move
    double slope = g.dot(move);
    if (slope < 0.0 && f + slope == f) {
      // Even the full predicted decrease is below the resolution of f, and
      // shrinking the step only shrinks it further, so the point is converged
      // to machine precision along this direction.
      res.stalled = true;
      return res;
    }
    double ft = objective(xt);
    if (!std::isfinite(ft)) {
      res.saw_nonfinite = true;
      step *= 0.5;
      continue;
    }
    if (slope < 0.0 && ft <= f + kArmijo * slope) {
      res.accepted = true;
      res.point = std::move(xt);
      res.value = ft;
      // Grow the step while doing so keeps improving; this substitutes for
      // a curvature check when the initial step is far too short.
      if (t == 0) {
        for (int e = 0; e < kMaxExpansions; ++e) {
          double wide = step * 2.0;
          Eigen::VectorXd xw = box.clamp(x + wide * d);
          if (((xw - res.point).array() == 0.0).all()) break;
          double wslope = g.dot(xw - x);
          double fw = objective(xw);
          if (!std::isfinite(fw) || wslope >= 0.0 ||
              fw > f + kArmijo * wslope || fw >= res.value) {
            break;
          }
          step = wide;
          res.point = std::move(xw);
          res.value = fw;
        }
      }
      return res;
    }
    step *= 0.5;
  }
  return res;
}

}  // namespace

SolveOutcome minimize_box(const ObjectiveFn& objective,
                          const GradientFn& gradient,
                          const Eigen::VectorXd& init, const ParamBox& box,
                          const SolveSettings& settings) {
  check_inputs(init, box, settings);

  Eigen::VectorXd x = init;
  double f = objective(x);
  if (!std::isfinite(f)) return {x, f, SolveStatus::NonFinite, 0};
  Eigen::VectorXd g = gradient(x);
  if (g.size() != x.size()) {
    throw StructuralError("gradient size does not match the point");
  }
  if (!g.allFinite()) return {x, f, SolveStatus::NonFinite, 0};

  std::deque<Eigen::VectorXd> mem_s, mem_y;
  int iter = 0;
  int flat_steps = 0;

  while (true) {
    Eigen::VectorXd projected_grad = x - box.clamp(x - g);
    if (projected_grad.lpNorm<Eigen::Infinity>() <=
        settings.gradient_tolerance) {
      return {x, f, SolveStatus::Converged, iter};
    }
    if (iter >= settings.max_iterations) {
      return {x, f, SolveStatus::MaxIterations, iter};
    }
    ++iter;

    Eigen::ArrayXd mask = free_coordinate_mask(x, g, box);
    Eigen::VectorXd steepest = -(g.array() * mask).matrix();
    Eigen::VectorXd dir = -apply_inverse_hessian(g, mem_s, mem_y, mask);
    bool quasi_newton = !mem_s.empty();
    if (!dir.allFinite() || dir.dot(g) >= 0.0) {
      mem_s.clear();
      mem_y.clear();
      dir = steepest;
      quasi_newton = false;
    }

    auto initial_step = [&](const Eigen::VectorXd& d, bool qn) {
      if (qn) return 1.0;
      return std::min(1.0, 1.0 / std::max(1.0, d.lpNorm<Eigen::Infinity>()));
    };

    LineSearchResult ls = projected_search(objective, x, f, g, dir,
                                           initial_step(dir, quasi_newton), box);
    if (!ls.accepted && quasi_newton) {
      // The quasi-Newton direction can be poorly scaled right after a box
      // face changes; retry once from the raw gradient.
      mem_s.clear();
      mem_y.clear();
      dir = steepest;
      bool nf = ls.saw_nonfinite;
      ls = projected_search(objective, x, f, g, dir, initial_step(dir, false),
                            box);
      ls.saw_nonfinite = ls.saw_nonfinite || nf;
    }
    if (!ls.accepted) {
      if (ls.stalled) {
        // Even the raw gradient direction offers no representable decrease.
        return {x, f, SolveStatus::Converged, iter};
      }
      return {x, f,
              ls.saw_nonfinite ? SolveStatus::NonFinite
                               : SolveStatus::LineSearchFailure,
              iter};
    }

    Eigen::VectorXd gt = gradient(ls.point);
    if (!gt.allFinite()) {
      return {ls.point, ls.value, SolveStatus::NonFinite, iter};
    }

    Eigen::VectorXd step_s = ls.point - x;
    Eigen::VectorXd step_y = gt - g;
    double sy = step_s.dot(step_y);
    if (sy > 1e-10 * step_s.norm() * step_y.norm()) {
      mem_s.push_back(std::move(step_s));
      mem_y.push_back(std::move(step_y));
      if (mem_s.size() > static_cast<std::size_t>(settings.memory_pairs)) {
        mem_s.pop_front();
        mem_y.pop_front();
      }
    }

    double f_prev = f;
    x = ls.point;
    f = ls.value;
    g = std::move(gt);

    // A single small step can be a line-search artifact rather than
    // convergence, so require two consecutive ones.
    double scale = std::max({std::abs(f_prev), std::abs(f),
                             std::numeric_limits<double>::min()});
    if (std::abs(f_prev - f) <= settings.objective_rel_tolerance * scale) {
      if (++flat_steps >= 2) return {x, f, SolveStatus::Converged, iter};
    } else {
      flat_steps = 0;
    }
  }
}

namespace {

Eigen::MatrixXd vandermonde(const Eigen::VectorXd& lambdas, int first_power,
                            int last_power) {
  Eigen::MatrixXd m(lambdas.size(), last_power - first_power + 1);
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    double pw = std::pow(lambdas[i], first_power);
    for (int j = 0; j <= last_power - first_power; ++j) {
      m(i, j) = pw;
      pw *= lambdas[i];
    }
  }
  return m;
}

Eigen::VectorXd solve_full_rank(const Eigen::MatrixXd& m,
                                const Eigen::VectorXd& rhs) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  if (qr.rank() < m.cols()) {
    throw SingularSystemError("design matrix is rank deficient");
  }
  return qr.solve(rhs);
}

}  // namespace

Eigen::VectorXd ols_polynomial(const ScaleSeries& series, int degree) {
  if (degree < 1) throw StructuralError("polynomial degree must be at least 1");
  if (series.size() < degree + 1) {
    throw InsufficientDataError("polynomial fit needs degree + 1 points");
  }
  return solve_full_rank(vandermonde(series.lambdas(), 0, degree),
                         series.values());
}

Eigen::VectorXd bounded_polynomial_fit(const ScaleSeries& series, int degree) {
  Eigen::VectorXd theta = ols_polynomial(series, degree);
  if (theta[0] >= -1.0 && theta[0] <= 1.0) return theta;
  double pinned = theta[0] > 1.0 ? 1.0 : -1.0;
  Eigen::VectorXd shifted =
      series.values() - Eigen::VectorXd::Constant(series.size(), pinned);
  Eigen::VectorXd rest =
      solve_full_rank(vandermonde(series.lambdas(), 1, degree), shifted);
  Eigen::VectorXd out(degree + 1);
  out[0] = pinned;
  out.tail(degree) = rest;
  return out;
}

}  // namespace zne
