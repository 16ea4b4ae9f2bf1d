#include "zne/engine.hpp"

#include "zne/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace zne {

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::OptimizationFailed: return "optimization_failed";
    case FitStatus::NonFinitePrediction: return "non_finite_prediction";
    case FitStatus::Infeasible: return "infeasible";
    case FitStatus::InsufficientData: return "insufficient_data";
  }
  throw StructuralError("unknown fit status");
}

FitStatus fit_status_from_string(std::string_view text) {
  if (text == "converged") return FitStatus::Converged;
  if (text == "optimization_failed") return FitStatus::OptimizationFailed;
  if (text == "non_finite_prediction") return FitStatus::NonFinitePrediction;
  if (text == "infeasible") return FitStatus::Infeasible;
  if (text == "insufficient_data") return FitStatus::InsufficientData;
  throw StructuralError("unknown fit status '" + std::string(text) + "'");
}

namespace {

double sum_squared_residuals(const ModelSpec& spec, const ParamVector& params,
                             const ScaleSeries& series) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    double r = eval_model(spec, params, series.lambdas()[i]) -
               series.values()[i];
    sse += r * r;
  }
  return sse;
}

FitResult exact_polynomial_fit(const ScaleSeries& series, const ModelSpec& spec,
                               const SolveSettings& settings) {
  FitResult out;
  out.spec = spec;
  out.solver_settings = settings;
  out.starts_used = 1;
  Eigen::VectorXd theta;
  try {
    theta = spec.bounded ? bounded_polynomial_fit(series, spec.degree)
                         : ols_polynomial(series, spec.degree);
  } catch (const SingularSystemError&) {
    out.status = FitStatus::OptimizationFailed;
    return out;
  }
  if (!theta.allFinite()) {
    out.status = FitStatus::OptimizationFailed;
    return out;
  }
  ParamVector params{theta, +1};
  out.params = params;
  out.sse = sum_squared_residuals(spec, params, series);
  out.zne_estimate = zero_noise_value(spec, params);
  out.status = FitStatus::Converged;
  return out;
}

}  // namespace

FitResult fit(const ScaleSeries& series, const ModelSpec& spec,
              const SolveSettings& settings, std::uint64_t seed) {
  validate(spec);
  FitResult out;
  out.spec = spec;
  out.solver_settings = settings;
  if (series.size() == 0) {
    out.status = FitStatus::InsufficientData;
    return out;
  }
  if (!feasible(spec, series.size())) {
    out.status = FitStatus::Infeasible;
    return out;
  }
  if (spec.family == ModelFamily::Polynomial) {
    return exact_polynomial_fit(series, spec, settings);
  }

  const ParamBox box = param_box(spec);
  ParamVector base = default_init(spec, series);

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(base.values);
  SplitMixStream rng(seed);
  for (int s = 0; s < 4; ++s) {
    Eigen::VectorXd v = base.values;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      v[j] *= rng.next_in(0.5, 1.5);
    }
    starts.push_back(box.clamp(v));
  }

  std::vector<int> signs;
  if (spec.family == ModelFamily::PolyExp && !spec.bounded) {
    signs = {+1, -1};
  } else {
    signs = {base.sign};
  }

  bool have_best = false;
  double best_sse = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_point;
  int best_sign = +1;
  int attempts = 0;

  for (const Eigen::VectorXd& start : starts) {
    for (int sign : signs) {
      auto objective = [&](const Eigen::VectorXd& x) {
        return sum_squared_residuals(spec, ParamVector{x, sign}, series);
      };
      auto grad = [&](const Eigen::VectorXd& x) {
        ParamVector p{x, sign};
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        for (Eigen::Index i = 0; i < series.size(); ++i) {
          double lambda = series.lambdas()[i];
          double r = eval_model(spec, p, lambda) - series.values()[i];
          g += 2.0 * r * gradient(spec, p, lambda);
        }
        return g;
      };
      SolveOutcome sol = minimize_box(objective, grad, start, box, settings);
      ++attempts;
      if (sol.status != SolveStatus::Converged) continue;
      if (!std::isfinite(sol.objective) || !sol.point.allFinite()) continue;
      if (!have_best || sol.objective < best_sse) {
        have_best = true;
        best_sse = sol.objective;
        best_point = sol.point;
        best_sign = sign;
      }
    }
  }

  out.starts_used = attempts;
  if (!have_best) {
    out.status = FitStatus::OptimizationFailed;
    return out;
  }
  ParamVector winner{best_point, best_sign};
  out.params = winner;
  out.sse = best_sse;
  double zne = zero_noise_value(spec, winner);
  if (!std::isfinite(zne)) {
    out.status = FitStatus::NonFinitePrediction;
    return out;
  }
  out.zne_estimate = zne;
  out.status = FitStatus::Converged;
  return out;
}

std::pair<FitResult, FitResult> fit_pair(const ScaleSeries& series,
                                         const ModelSpec& spec,
                                         const SolveSettings& settings,
                                         std::uint64_t seed) {
  ModelSpec bounded_spec = spec;
  bounded_spec.bounded = true;
  ModelSpec unbounded_spec = spec;
  unbounded_spec.bounded = false;
  return {fit(series, bounded_spec, settings, seed),
          fit(series, unbounded_spec, settings, seed)};
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view record_id,
                          std::string_view spec_id) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<unsigned char>(master_seed >> (8 * i));
  }
  std::uint64_t h = fnv1a64_bytes(bytes, sizeof(bytes));
  h = fnv1a64(record_id, h);
  const unsigned char sep = 0x1f;
  h = fnv1a64_bytes(&sep, 1, h);
  return fnv1a64(spec_id, h);
}

std::vector<BatchResult> fit_batch(const std::vector<ExperimentRecord>& records,
                                   const std::vector<ModelSpec>& specs,
                                   const SolveSettings& settings,
                                   std::uint64_t master_seed, int threads) {
  struct Job {
    const ExperimentRecord* record;
    const ModelSpec* spec;
    std::string spec_key;
  };
  std::vector<Job> jobs;
  jobs.reserve(records.size() * specs.size());
  for (const ExperimentRecord& rec : records) {
    for (const ModelSpec& spec : specs) {
      jobs.push_back({&rec, &spec, spec_id(spec)});
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    if (a.record->id != b.record->id) return a.record->id < b.record->id;
    return a.spec_key < b.spec_key;
  });

  std::vector<BatchResult> results(jobs.size());
  auto run_job = [&](std::size_t k) {
    const Job& job = jobs[k];
    ScaleSeries series(job.record->lambdas, job.record->expectations);
    std::uint64_t seed = derive_seed(master_seed, job.record->id, job.spec_key);
    results[k] = {job.record->id, job.spec_key,
                  fit(series, *job.spec, settings, seed)};
  };

  if (threads <= 1 || jobs.size() < 2) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_job(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (std::size_t k = next.fetch_add(1);
           k < jobs.size() && !failed.load(); k = next.fetch_add(1)) {
        try {
          run_job(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(threads, static_cast<int>(jobs.size()));
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
  }
  return results;
}

}  // namespace zne
