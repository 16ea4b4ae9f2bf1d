#include "zne/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace zne {

namespace {

MeanSd mean_sd(const Eigen::VectorXd& values) {
  MeanSd out;
  const Eigen::Index n = values.size();
  out.mean = values.mean();
  if (n > 1) {
    double ss = (values.array() - out.mean).square().sum();
    out.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return out;
}

Eigen::VectorXd paired_errors(const Eigen::VectorXd& estimates,
                              const Eigen::VectorXd& ideals, bool squared) {
  if (estimates.size() != ideals.size()) {
    throw StructuralError("estimates and ideals must have equal length");
  }
  if (estimates.size() == 0) {
    throw InsufficientDataError("error statistics need at least one pair");
  }
  Eigen::VectorXd err = (estimates - ideals).cwiseAbs();
  if (squared) err = err.array().square();
  return err;
}

}  // namespace

MeanSd mae(const Eigen::VectorXd& estimates, const Eigen::VectorXd& ideals) {
  return mean_sd(paired_errors(estimates, ideals, false));
}

MeanSd mse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& ideals) {
  return mean_sd(paired_errors(estimates, ideals, true));
}

double improvement(double unbounded_estimate, double bounded_estimate,
                   double ideal) {
  return std::abs(unbounded_estimate - ideal) -
         std::abs(bounded_estimate - ideal);
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Exact two-sided p-value for min(W+, W-) = statistic, given the doubled
/// (hence integral) midranks of the non-zero differences. By the symmetry
/// of the null distribution of W+ around its mean,
/// P(min(W+, W-) <= w) = 2 P(W+ <= w), so it suffices to count sign
/// assignments whose rank sum stays below the observed low side.
double exact_two_sided_p(const std::vector<long>& doubled_ranks,
                         long doubled_statistic) {
  long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long reached = 0;
  for (long r : doubled_ranks) {
    reached = std::min(total, reached + r);
    for (long w = reached; w >= r; --w) {
      count[static_cast<std::size_t>(w)] +=
          count[static_cast<std::size_t>(w - r)];
    }
  }
  double below = 0.0;
  long cut = std::min(doubled_statistic, total);
  for (long w = 0; w <= cut; ++w) {
    below += count[static_cast<std::size_t>(w)];
  }
  double p = 2.0 * below /
             std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
  return std::min(p, 1.0);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences) {
  std::vector<double> nonzero;
  nonzero.reserve(differences.size());
  for (double d : differences) {
    if (!std::isfinite(d)) {
      throw StructuralError("differences must be finite");
    }
    if (d != 0.0) nonzero.push_back(d);
  }
  const std::size_t n = nonzero.size();
  if (n == 0) {
    throw DegenerateInputError(
        "signed-rank test needs a non-zero difference");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(nonzero[a]) < std::abs(nonzero[b]);
  });

  // Midranks: tied |d| blocks share the average of their positions. Ranks
  // are then integers or half-integers, so doubling makes them exact.
  std::vector<double> rank(n, 0.0);
  std::vector<long> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) {
      ++j;
    }
    double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    tie_sizes.push_back(static_cast<long>(j - i + 1));
    i = j + 1;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    (nonzero[k] > 0.0 ? w_plus : w_minus) += rank[k];
  }

  WilcoxonResult out;
  out.statistic = std::min(w_plus, w_minus);
  out.n_used = static_cast<int>(n);

  if (n <= 25) {
    std::vector<long> doubled(n);
    for (std::size_t k = 0; k < n; ++k) {
      doubled[k] = std::lround(2.0 * rank[k]);
    }
    out.exact = true;
    out.p_value = exact_two_sided_p(doubled, std::lround(2.0 * out.statistic));
    return out;
  }

  double nn = static_cast<double>(n);
  double mu = nn * (nn + 1.0) / 4.0;
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  for (long t : tie_sizes) {
    double td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  out.exact = false;
  if (var <= 0.0) {
    out.p_value = 1.0;
    return out;
  }
  double z = (out.statistic - mu + 0.5) / std::sqrt(var);
  out.p_value = std::clamp(2.0 * normal_cdf(z),
                           std::numeric_limits<double>::min(), 1.0);
  return out;
}

std::vector<double> holm_adjust(const std::vector<double>& p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw StructuralError("p-values must lie in [0, 1]");
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });
  std::vector<double> adjusted(m, 0.0);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double scaled = static_cast<double>(m - i) * p_values[order[i]];
    running = std::max(running, scaled);
    adjusted[order[i]] = std::min(1.0, running);
  }
  return adjusted;
}

const char* to_string(EffectCategory category) {
  switch (category) {
    case EffectCategory::Negligible: return "negligible";
    case EffectCategory::Small: return "small";
    case EffectCategory::Medium: return "medium";
    case EffectCategory::Large: return "large";
    case EffectCategory::Undefined: return "undefined";
  }
  throw StructuralError("unknown effect category");
}

EffectSize cohens_d_paired(const std::vector<double>& differences) {
  if (differences.size() < 2) {
    throw InsufficientDataError("effect size needs at least two differences");
  }
  EffectSize out;
  // Identical differences mean zero variance even when the computed mean
  // picks up rounding noise, so test for constancy directly.
  bool constant = std::all_of(differences.begin(), differences.end(),
                              [&](double v) { return v == differences.front(); });
  Eigen::Map<const Eigen::VectorXd> v(differences.data(),
                                      static_cast<Eigen::Index>(differences.size()));
  MeanSd ms = mean_sd(v);
  if (constant || !ms.sd || *ms.sd == 0.0) return out;
  double d = ms.mean / *ms.sd;
  out.d = d;
  double a = std::abs(d);
  if (a < 0.2) {
    out.category = EffectCategory::Negligible;
  } else if (a < 0.5) {
    out.category = EffectCategory::Small;
  } else if (a < 0.8) {
    out.category = EffectCategory::Medium;
  } else {
    out.category = EffectCategory::Large;
  }
  return out;
}

EcdfSummary ecdf_winsorized(const std::vector<double>& differences,
                            double cap) {
  if (!(cap > 0.0)) throw StructuralError("winsorising cap must be positive");
  if (differences.empty()) {
    throw InsufficientDataError("ECDF needs at least one observation");
  }
  std::vector<double> w(differences.size());
  std::size_t positive = 0;
  for (std::size_t i = 0; i < differences.size(); ++i) {
    if (!std::isfinite(differences[i])) {
      throw StructuralError("differences must be finite");
    }
    if (differences[i] > 0.0) ++positive;
    w[i] = std::clamp(differences[i], -cap, cap);
  }
  std::sort(w.begin(), w.end());

  EcdfSummary out;
  out.fraction_positive =
      static_cast<double>(positive) / static_cast<double>(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i + 1 < w.size() && w[i + 1] == w[i]) continue;  // keep last of run
    out.xs.push_back(w[i]);
    out.fs.push_back(static_cast<double>(i + 1) / static_cast<double>(w.size()));
  }
  return out;
}

CoverageSummary coverage_summary(const std::map<std::string, double>& bounded,
                                 const std::map<std::string, double>& unbounded,
                                 long max_count) {
  if (max_count < 1) throw StructuralError("max_count must be >= 1");
  CoverageSummary out;
  out.max_count = max_count;
  out.bounded_count = static_cast<long>(bounded.size());
  out.unbounded_count = static_cast<long>(unbounded.size());
  if (out.bounded_count > max_count || out.unbounded_count > max_count) {
    throw StructuralError("finite counts exceed max_count");
  }
  for (const auto& [id, value] : bounded) {
    (void)value;
    if (unbounded.count(id) != 0) out.matched_ids.push_back(id);
  }
  out.matched_count = static_cast<long>(out.matched_ids.size());
  double denom = static_cast<double>(max_count);
  out.bounded_rate = static_cast<double>(out.bounded_count) / denom;
  out.unbounded_rate = static_cast<double>(out.unbounded_count) / denom;
  out.matched_rate = static_cast<double>(out.matched_count) / denom;
  return out;
}

std::vector<PairedGroupSummary> build_paired_summaries(
    const std::vector<ResultRow>& rows, const GroupByOptions& group_by,
    double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw StructuralError("alpha must lie in (0, 1)");
  }

  struct Group {
    GroupKey key;
    std::map<std::string, double> bounded, unbounded;
    std::map<std::string, double> ideals;
    std::set<std::string> ids;
    std::set<std::string> seen;  // record/spec duplicates guard
  };

  std::map<std::string, Group> groups;
  for (const ResultRow& row : rows) {
    GroupKey key;
    key.family_key = row.family_key;
    if (group_by.lambda_set) key.lambda_key = row.lambda_key;
    if (group_by.backend) key.backend = row.backend;
    if (group_by.width) key.width = row.width;
    std::string map_key = key.family_key + '\x1f' + key.lambda_key + '\x1f' +
                          key.backend + '\x1f' + key.width;
    Group& g = groups[map_key];
    g.key = key;

    std::string seen_key = row.record_id + '\x1f' + row.spec;
    if (!g.seen.insert(seen_key).second) {
      throw StructuralError("duplicate result row for record '" +
                            row.record_id + "' and spec '" + row.spec + "'");
    }
    g.ids.insert(row.record_id);
    g.ideals[row.record_id] = row.ideal;
    bool finite = row.status == FitStatus::Converged && row.zne &&
                  std::isfinite(*row.zne);
    if (finite) {
      (row.bounded ? g.bounded : g.unbounded)[row.record_id] = *row.zne;
    }
  }

  std::vector<PairedGroupSummary> out;
  out.reserve(groups.size());
  for (auto& [map_key, g] : groups) {
    (void)map_key;
    PairedGroupSummary s;
    s.key = g.key;
    s.coverage = coverage_summary(g.bounded, g.unbounded,
                                  static_cast<long>(g.ids.size()));
    const std::vector<std::string>& matched = s.coverage.matched_ids;
    const Eigen::Index k = static_cast<Eigen::Index>(matched.size());
    if (k > 0) {
      Eigen::VectorXd est_b(k), est_u(k), ideal(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const std::string& id = matched[static_cast<std::size_t>(i)];
        est_b[i] = g.bounded.at(id);
        est_u[i] = g.unbounded.at(id);
        ideal[i] = g.ideals.at(id);
      }
      s.mae_bounded = mae(est_b, ideal);
      s.mae_unbounded = mae(est_u, ideal);
      s.mse_bounded = mse(est_b, ideal);
      s.mse_unbounded = mse(est_u, ideal);
      s.deltas.resize(static_cast<std::size_t>(k));
      for (Eigen::Index i = 0; i < k; ++i) {
        s.deltas[static_cast<std::size_t>(i)] =
            improvement(est_u[i], est_b[i], ideal[i]);
      }
      bool all_zero = std::all_of(s.deltas.begin(), s.deltas.end(),
                                  [](double d) { return d == 0.0; });
      if (!all_zero) s.wilcoxon = wilcoxon_signed_rank(s.deltas);
      if (k >= 2) s.effect = cohens_d_paired(s.deltas);
    }
    out.push_back(std::move(s));
  }

  std::vector<double> raw;
  std::vector<std::size_t> with_p;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].wilcoxon) {
      raw.push_back(out[i].wilcoxon->p_value);
      with_p.push_back(i);
    }
  }
  std::vector<double> adjusted = holm_adjust(raw);
  for (std::size_t j = 0; j < with_p.size(); ++j) {
    out[with_p[j]].p_holm = adjusted[j];
    out[with_p[j]].significant = adjusted[j] < alpha;
  }
  return out;
}

}  // namespace zne
