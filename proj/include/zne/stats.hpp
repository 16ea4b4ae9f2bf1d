#pragma once

#include "zne/engine.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zne {

/// Mean with a sample standard deviation (n - 1 denominator); the sd is
/// absent for a single observation.
struct MeanSd {
  double mean = 0.0;
  std::optional<double> sd;
};

/// Mean absolute error |estimate - ideal| across paired entries.
MeanSd mae(const Eigen::VectorXd& estimates, const Eigen::VectorXd& ideals);

/// Mean squared error (estimate - ideal)^2 across paired entries.
MeanSd mse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& ideals);

/// Per-record improvement of the bounded arm over the unbounded one:
/// |unbounded - ideal| - |bounded - ideal|. Positive means the bounded fit
/// landed closer to the ideal value.
double improvement(double unbounded_estimate, double bounded_estimate,
                   double ideal);

/// Two-sided Wilcoxon signed-rank test on paired differences. Zeros are
/// discarded, ties get midranks, and the statistic is min(W+, W-). Up to 25
/// non-zero differences the p-value is exact (full null distribution of the
/// rank sum); beyond that a normal approximation with tie-corrected
/// variance and a 0.5 continuity correction is used. All-zero input raises
/// DegenerateInputError.
struct WilcoxonResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n_used = 0;
  bool exact = true;
};

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences);

/// Holm step-down adjustment. Input order is preserved; adjusted values are
/// monotone over the sorted p-values and clamped to 1.
std::vector<double> holm_adjust(const std::vector<double>& p_values);

enum class EffectCategory { Negligible, Small, Medium, Large, Undefined };

const char* to_string(EffectCategory category);

/// Paired Cohen's d: mean(differences) / sd(differences), categorised at
/// |d| thresholds 0.2 / 0.5 / 0.8. Fewer than two observations or zero sd
/// yields Undefined with d absent.
struct EffectSize {
  std::optional<double> d;
  EffectCategory category = EffectCategory::Undefined;
};

EffectSize cohens_d_paired(const std::vector<double>& differences);

/// Empirical CDF of the differences after winsorising into [-cap, cap].
/// xs are the distinct winsorised values in increasing order and fs[i] the
/// fraction of observations <= xs[i]; fraction_positive counts strictly
/// positive differences.
struct EcdfSummary {
  std::vector<double> xs;
  std::vector<double> fs;
  double fraction_positive = 0.0;
};

EcdfSummary ecdf_winsorized(const std::vector<double>& differences, double cap);

/// Convergence bookkeeping for one paired group. The maps hold only finite
/// estimates, keyed by record id; `matched_ids` is the sorted intersection.
struct CoverageSummary {
  long bounded_count = 0;
  long unbounded_count = 0;
  long matched_count = 0;
  long max_count = 0;
  double bounded_rate = 0.0;
  double unbounded_rate = 0.0;
  double matched_rate = 0.0;
  std::vector<std::string> matched_ids;
};

CoverageSummary coverage_summary(const std::map<std::string, double>& bounded,
                                 const std::map<std::string, double>& unbounded,
                                 long max_count);

/// One benchmark fit, flattened for files and grouping. `family_key` is the
/// spec id without its bounded/unbounded suffix, shared by the two arms of
/// a pair.
struct ResultRow {
  std::string record_id;
  std::string spec;
  std::string family_key;
  bool bounded = false;
  std::string lambda_key;
  std::string backend;
  std::string width;
  double ideal = 0.0;
  FitStatus status = FitStatus::InsufficientData;
  std::optional<double> zne;
  std::optional<double> sse;
  int starts_used = 0;
};

struct GroupKey {
  std::string family_key;
  std::string lambda_key = "-";
  std::string backend = "-";
  std::string width = "-";
};

struct GroupByOptions {
  bool lambda_set = true;
  bool backend = true;
  bool width = true;
};

/// Paired bounded-versus-unbounded comparison for one group of records.
struct PairedGroupSummary {
  GroupKey key;
  CoverageSummary coverage;
  std::optional<MeanSd> mae_bounded, mae_unbounded;
  std::optional<MeanSd> mse_bounded, mse_unbounded;
  std::vector<double> deltas;  // improvement per matched record, id order
  std::optional<WilcoxonResult> wilcoxon;
  std::optional<double> p_holm;
  EffectSize effect;
  bool significant = false;
};

/// Groups rows by family key plus the requested dimensions, computes
/// coverage over all records of the group, error statistics and improvement
/// deltas over records where both arms produced a finite converged
/// estimate, then applies the Holm correction jointly across every group
/// with a defined p-value. Groups come out sorted by key. A record/spec
/// combination appearing twice raises StructuralError.
std::vector<PairedGroupSummary> build_paired_summaries(
    const std::vector<ResultRow>& rows, const GroupByOptions& group_by,
    double alpha = 0.05);

}  // namespace zne
