#include "zne/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zne {

void validate(const ModelSpec& spec) {
  if (spec.family != ModelFamily::Exponential && spec.degree < 1) {
    throw StructuralError("model degree must be at least 1");
  }
  if (spec.family != ModelFamily::Polynomial && spec.asymptote.is_fixed()) {
    double v = spec.asymptote.value();
    if (!std::isfinite(v)) {
      throw StructuralError("fixed asymptote must be finite");
    }
    if (spec.bounded && (v < -1.0 || v > 1.0)) {
      throw StructuralError(
          "fixed asymptote of a bounded model must lie in [-1, 1]");
    }
  }
}

ScaleSeries::ScaleSeries(Eigen::VectorXd lambdas, Eigen::VectorXd values) {
  if (lambdas.size() != values.size()) {
    throw StructuralError("scale series needs one value per lambda");
  }
  const Eigen::Index n = lambdas.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return lambdas[a] < lambdas[b]; });

  lambdas_.resize(n);
  values_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambdas_[i] = lambdas[order[static_cast<std::size_t>(i)]];
    values_[i] = values[order[static_cast<std::size_t>(i)]];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(lambdas_[i]) || !std::isfinite(values_[i])) {
      throw StructuralError("scale series entries must be finite");
    }
    if (lambdas_[i] < 1.0) {
      throw StructuralError("noise scales must satisfy lambda >= 1");
    }
    if (i > 0 && !(lambdas_[i] > lambdas_[i - 1])) {
      throw StructuralError("noise scales must be distinct");
    }
  }
}

ScaleSeries ScaleSeries::from_pairs(
    const std::vector<std::pair<double, double>>& pts) {
  Eigen::VectorXd l(static_cast<Eigen::Index>(pts.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    l[static_cast<Eigen::Index>(i)] = pts[i].first;
    v[static_cast<Eigen::Index>(i)] = pts[i].second;
  }
  return ScaleSeries(std::move(l), std::move(v));
}

bool operator==(const ExperimentRecord& a, const ExperimentRecord& b) {
  auto vec_eq = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.size() == y.size() && (x.array() == y.array()).all();
  };
  return a.id == b.id && a.curve_id == b.curve_id && a.backend == b.backend &&
         vec_eq(a.lambdas, b.lambdas) &&
         vec_eq(a.expectations, b.expectations) && a.ideal == b.ideal &&
         a.repetition == b.repetition && a.shots == b.shots && a.meta == b.meta;
}

}  // namespace zne
