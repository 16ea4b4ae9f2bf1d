#pragma once

#include "zne/models.hpp"
#include "zne/optimizer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace zne {

enum class FitStatus {
  Converged,
  OptimizationFailed,
  NonFinitePrediction,
  Infeasible,
  InsufficientData,
};

const char* to_string(FitStatus status);
FitStatus fit_status_from_string(std::string_view text);

/// Outcome of fitting one model spec to one series. `params`, `sse` and
/// `zne_estimate` are present when a successfully solved candidate exists;
/// `zne_estimate` additionally requires the extrapolated value to be finite.
/// status == Converged guarantees all three are present and finite.
struct FitResult {
  ModelSpec spec;
  FitStatus status = FitStatus::InsufficientData;
  std::optional<ParamVector> params;
  std::optional<double> zne_estimate;
  std::optional<double> sse;
  int starts_used = 0;
  SolveSettings solver_settings;
};

/// Least-squares fit of `spec` to `series`.
///
/// Polynomial specs are solved exactly by (bounded) least squares; the other
/// families run the box-constrained solver from five starting points: the
/// data-derived default plus four variants whose coordinates are scaled by
/// factors drawn uniformly from [0.5, 1.5] using a stream seeded with
/// `seed`, all clamped into the box. The unbounded PolyExp family is solved
/// for both signs (+1 tried first) and the lower sum of squared residuals
/// wins; ties keep the earlier candidate. Only starts whose solve converged
/// to a finite point enter the selection.
FitResult fit(const ScaleSeries& series, const ModelSpec& spec,
              const SolveSettings& settings = {}, std::uint64_t seed = 0);

/// Fits the bounded and unbounded variants of `spec` with identical
/// settings and seed; returns {bounded, unbounded}.
std::pair<FitResult, FitResult> fit_pair(const ScaleSeries& series,
                                         const ModelSpec& spec,
                                         const SolveSettings& settings = {},
                                         std::uint64_t seed = 0);

struct BatchResult {
  std::string record_id;
  std::string spec;  // canonical spec id
  FitResult result;
};

/// Per-fit seed: FNV-1a over the little-endian master seed bytes, the
/// record id, a 0x1f separator and the spec id. Stable across platforms and
/// thread counts; published so results can be reproduced fit by fit.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view record_id,
                          std::string_view spec_id);

/// Fits every spec to every record. Results are ordered by
/// (record id, spec id) regardless of `threads`, and each fit's seed comes
/// from derive_seed, so output is identical for any thread count.
std::vector<BatchResult> fit_batch(const std::vector<ExperimentRecord>& records,
                                   const std::vector<ModelSpec>& specs,
                                   const SolveSettings& settings = {},
                                   std::uint64_t master_seed = 0,
                                   int threads = 1);

}  // namespace zne
