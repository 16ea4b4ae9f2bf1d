#include "zne/models.hpp"

#include "zne/format.hpp"
#include "zne/optimizer.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace zne {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_layout(const ModelSpec& spec, const ParamVector& params) {
  if (params.values.size() != param_count(spec)) {
    throw StructuralError("parameter vector does not match the model layout");
  }
  if (spec.family == ModelFamily::PolyExp && !spec.bounded &&
      params.sign != 1 && params.sign != -1) {
    throw StructuralError("PolyExp sign must be +1 or -1");
  }
}

/// Horner evaluation of coeffs[0] + coeffs[1] l + ... over a contiguous
/// segment of the parameter vector.
double horner(const Eigen::VectorXd& v, Eigen::Index first, Eigen::Index count,
              double lambda) {
  double acc = 0.0;
  for (Eigen::Index j = count; j-- > 0;) {
    acc = acc * lambda + v[first + j];
  }
  return acc;
}

}  // namespace

int param_count(const ModelSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case ModelFamily::Polynomial:
      return spec.degree + 1;
    case ModelFamily::Exponential:
      return 3;
    case ModelFamily::PolyExp:
      return spec.degree + 2;
  }
  throw StructuralError("unknown model family");
}

int free_param_count(const ModelSpec& spec) {
  validate(spec);
  const int d = spec.degree;
  const bool fixed_a = spec.asymptote.is_fixed();
  switch (spec.family) {
    case ModelFamily::Polynomial:
      return d + 1;
    case ModelFamily::Exponential:
      return fixed_a ? 2 : 3;
    case ModelFamily::PolyExp:
      if (spec.bounded) return fixed_a ? d + 1 : d + 2;
      return fixed_a ? d + 2 : d + 3;
  }
  throw StructuralError("unknown model family");
}

bool feasible(const ModelSpec& spec, Eigen::Index n_points) {
  return n_points >= free_param_count(spec);
}

double eval_model(const ModelSpec& spec, const ParamVector& params,
                  double lambda) {
  check_layout(spec, params);
  const Eigen::VectorXd& v = params.values;
  switch (spec.family) {
    case ModelFamily::Polynomial:
      return horner(v, 0, spec.degree + 1, lambda);
    case ModelFamily::Exponential: {
      double decayed = std::exp(-v[2] * lambda);
      if (spec.bounded) return v[0] + (v[1] - v[0]) * decayed;
      return v[0] + v[1] * decayed;
    }
    case ModelFamily::PolyExp: {
      if (spec.bounded) {
        // r(l) = c_1 l + ... + c_d l^d, so r(0) = 0 and the curve passes
        // through zeta at l = 0.
        double r = horner(v, 2, spec.degree, lambda) * lambda;
        return v[0] + (v[1] - v[0]) * std::exp(r);
      }
      double z = horner(v, 1, spec.degree + 1, lambda);
      return v[0] + params.sign * std::exp(z);
    }
  }
  throw StructuralError("unknown model family");
}

Eigen::VectorXd gradient(const ModelSpec& spec, const ParamVector& params,
                         double lambda) {
  check_layout(spec, params);
  const Eigen::VectorXd& v = params.values;
  Eigen::VectorXd g(v.size());
  switch (spec.family) {
    case ModelFamily::Polynomial: {
      double pw = 1.0;
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        g[j] = pw;
        pw *= lambda;
      }
      return g;
    }
    case ModelFamily::Exponential: {
      double decayed = std::exp(-v[2] * lambda);
      if (spec.bounded) {
        g[0] = 1.0 - decayed;
        g[1] = decayed;
        g[2] = -(v[1] - v[0]) * lambda * decayed;
      } else {
        g[0] = 1.0;
        g[1] = decayed;
        g[2] = -v[1] * lambda * decayed;
      }
      return g;
    }
    case ModelFamily::PolyExp: {
      if (spec.bounded) {
        double er = std::exp(horner(v, 2, spec.degree, lambda) * lambda);
        g[0] = 1.0 - er;
        g[1] = er;
        double pw = lambda;
        for (int j = 1; j <= spec.degree; ++j) {
          g[1 + j] = (v[1] - v[0]) * er * pw;
          pw *= lambda;
        }
      } else {
        double ez = params.sign * std::exp(horner(v, 1, spec.degree + 1, lambda));
        g[0] = 1.0;
        double pw = 1.0;
        for (int j = 0; j <= spec.degree; ++j) {
          g[1 + j] = ez * pw;
          pw *= lambda;
        }
      }
      return g;
    }
  }
  throw StructuralError("unknown model family");
}

double zero_noise_value(const ModelSpec& spec, const ParamVector& params) {
  check_layout(spec, params);
  const Eigen::VectorXd& v = params.values;
  switch (spec.family) {
    case ModelFamily::Polynomial:
      return v[0];
    case ModelFamily::Exponential:
      return spec.bounded ? v[1] : v[0] + v[1];
    case ModelFamily::PolyExp:
      return spec.bounded ? v[1] : v[0] + params.sign * std::exp(v[1]);
  }
  throw StructuralError("unknown model family");
}

ParamBox param_box(const ModelSpec& spec) { return param_box(spec, BoxOptions{}); }

ParamBox param_box(const ModelSpec& spec, const BoxOptions& options) {
  const int n = param_count(spec);
  ParamBox box;
  box.lower = Eigen::VectorXd::Constant(n, -kInf);
  box.upper = Eigen::VectorXd::Constant(n, kInf);

  auto pin = [&box](Eigen::Index j, double value) {
    box.lower[j] = value;
    box.upper[j] = value;
  };
  auto unit = [&box](Eigen::Index j) {
    box.lower[j] = -1.0;
    box.upper[j] = 1.0;
  };

  switch (spec.family) {
    case ModelFamily::Polynomial:
      if (spec.bounded) unit(0);
      break;
    case ModelFamily::Exponential:
      if (spec.asymptote.is_fixed()) {
        pin(0, spec.asymptote.value());
      } else if (spec.bounded) {
        unit(0);
      }
      if (spec.bounded) {
        unit(1);
        box.lower[2] = 1e-8;
      } else if (options.positive_decay_unbounded_exp) {
        box.lower[2] = 1e-8;
      }
      break;
    case ModelFamily::PolyExp:
      if (spec.asymptote.is_fixed()) {
        pin(0, spec.asymptote.value());
      } else if (spec.bounded) {
        unit(0);
      }
      if (spec.bounded) unit(1);
      break;
  }
  return box;
}

ParamVector default_init(const ModelSpec& spec, const ScaleSeries& series) {
  validate(spec);
  if (series.size() < 2) {
    throw InsufficientDataError("default_init needs at least two points");
  }
  const Eigen::VectorXd& l = series.lambdas();
  const Eigen::VectorXd& y = series.values();
  const Eigen::Index n = series.size();

  // Line through the first two points, evaluated at lambda = 0.
  double extrap0 = y[0] + (y[0] - y[1]) / (l[1] - l[0]) * l[0];
  double y_first = y[0];
  double y_last = y[n - 1];
  double a0 = spec.asymptote.is_fixed() ? spec.asymptote.value() : y_last;

  ParamVector out;
  out.values.resize(param_count(spec));

  switch (spec.family) {
    case ModelFamily::Polynomial: {
      out.values.setZero();
      out.values[0] = extrap0;
      if (n >= spec.degree + 1) {
        Eigen::VectorXd theta = ols_polynomial(series, spec.degree);
        out.values.tail(spec.degree) = theta.tail(spec.degree);
      }
      break;
    }
    case ModelFamily::Exponential: {
      out.values[0] = a0;
      out.values[1] = spec.bounded ? extrap0 : extrap0 - a0;
      out.values[2] = 1.0;
      break;
    }
    case ModelFamily::PolyExp: {
      out.values.setZero();
      double c1 = y_last >= y_first ? -0.1 : 0.1;
      if (spec.bounded) {
        out.values[0] = a0;
        out.values[1] = extrap0;
        out.values[2] = c1;
      } else {
        out.sign = a0 < y_first ? 1 : -1;
        double magnitude = std::max(std::abs(y_first - a0), 1e-12);
        out.values[0] = a0;
        out.values[1] = std::clamp(std::log(magnitude), -20.0, 20.0);
        out.values[2] = c1;
      }
      break;
    }
  }
  out.values = param_box(spec).clamp(out.values);
  return out;
}

namespace {

const char* family_token(ModelFamily f) {
  switch (f) {
    case ModelFamily::Polynomial: return "poly";
    case ModelFamily::Exponential: return "exp";
    case ModelFamily::PolyExp: return "polyexp";
  }
  throw StructuralError("unknown model family");
}

std::string spec_body(const ModelSpec& spec) {
  std::string out = family_token(spec.family);
  if (spec.family != ModelFamily::Exponential) {
    out += ":d=" + std::to_string(spec.degree);
  }
  if (spec.family != ModelFamily::Polynomial) {
    out += ":a=";
    out += spec.asymptote.is_fixed() ? format_double(spec.asymptote.value())
                                     : "free";
  }
  return out;
}

}  // namespace

std::string spec_id(const ModelSpec& spec) {
  validate(spec);
  return spec_body(spec) + (spec.bounded ? ":bounded" : ":unbounded");
}

std::string family_id(const ModelSpec& spec) {
  validate(spec);
  return spec_body(spec);
}

ModelSpec parse_model_spec(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t colon = text.find(':', start);
    if (colon == std::string_view::npos) colon = text.size();
    tokens.push_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  if (tokens.empty() || tokens[0].empty()) {
    throw SpecParseError("empty model spec");
  }

  ModelSpec spec;
  std::string_view family = tokens[0];
  if (family == "poly") {
    spec.family = ModelFamily::Polynomial;
  } else if (family == "exp") {
    spec.family = ModelFamily::Exponential;
  } else if (family == "polyexp") {
    spec.family = ModelFamily::PolyExp;
  } else {
    throw SpecParseError("unknown model family '" + std::string(family) +
                         "' (expected poly, exp or polyexp)");
  }

  bool saw_degree = false, saw_asymptote = false, saw_boundedness = false;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    std::string_view tok = tokens[i];
    if (tok.rfind("d=", 0) == 0) {
      if (spec.family == ModelFamily::Exponential) {
        throw SpecParseError("degree is not applicable to exp");
      }
      if (saw_degree) throw SpecParseError("duplicate degree in model spec");
      std::string_view num = tok.substr(2);
      int d = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
      if (ec != std::errc{} || ptr != num.data() + num.size() || d < 1) {
        throw SpecParseError("invalid degree '" + std::string(num) + "'");
      }
      spec.degree = d;
      saw_degree = true;
    } else if (tok.rfind("a=", 0) == 0) {
      if (spec.family == ModelFamily::Polynomial) {
        throw SpecParseError("asymptote is not applicable to poly");
      }
      if (saw_asymptote) throw SpecParseError("duplicate asymptote in model spec");
      std::string_view val = tok.substr(2);
      if (val == "free") {
        spec.asymptote = Asymptote::free();
      } else {
        double a = 0.0;
        auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), a);
        if (ec != std::errc{} || ptr != val.data() + val.size() ||
            !std::isfinite(a)) {
          throw SpecParseError("invalid asymptote '" + std::string(val) + "'");
        }
        spec.asymptote = Asymptote::fixed(a);
      }
      saw_asymptote = true;
    } else if (tok == "bounded" || tok == "unbounded") {
      if (saw_boundedness) {
        throw SpecParseError("duplicate bounded/unbounded in model spec");
      }
      spec.bounded = tok == "bounded";
      saw_boundedness = true;
    } else {
      throw SpecParseError("unrecognised model spec token '" +
                           std::string(tok) + "'");
    }
  }
  try {
    validate(spec);
  } catch (const StructuralError& e) {
    throw SpecParseError(e.what());
  }
  return spec;
}

}  // namespace zne
