#include "zne/models.hpp"

#include "zne/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace zne;

namespace {

ModelSpec poly(int d, bool bounded) {
  ModelSpec s;
  s.family = ModelFamily::Polynomial;
  s.degree = d;
  s.bounded = bounded;
  return s;
}

ModelSpec expo(Asymptote a, bool bounded) {
  ModelSpec s;
  s.family = ModelFamily::Exponential;
  s.asymptote = a;
  s.bounded = bounded;
  return s;
}

ModelSpec polyexp(int d, Asymptote a, bool bounded) {
  ModelSpec s;
  s.family = ModelFamily::PolyExp;
  s.degree = d;
  s.asymptote = a;
  s.bounded = bounded;
  return s;
}

ParamVector pv(std::initializer_list<double> vals, int sign = +1) {
  ParamVector p;
  p.values = Eigen::Map<const Eigen::VectorXd>(vals.begin(),
                                               static_cast<Eigen::Index>(vals.size()));
  p.sign = sign;
  return p;
}

// Every spec shape exercised by the property tests below.
std::vector<ModelSpec> all_specs() {
  std::vector<ModelSpec> specs;
  for (bool bounded : {false, true}) {
    for (int d : {1, 2, 3}) specs.push_back(poly(d, bounded));
    specs.push_back(expo(Asymptote::free(), bounded));
    specs.push_back(expo(Asymptote::fixed(0.0), bounded));
    for (int d : {1, 2}) {
      specs.push_back(polyexp(d, Asymptote::free(), bounded));
      specs.push_back(polyexp(d, Asymptote::fixed(0.0), bounded));
    }
  }
  return specs;
}

/// Random parameter point strictly inside the spec's box, kept in ranges
/// where the exponentials neither overflow nor vanish.
ParamVector random_interior_point(const ModelSpec& spec, SplitMixStream& rng) {
  ParamVector p;
  p.values.resize(param_count(spec));
  switch (spec.family) {
    case ModelFamily::Polynomial:
      for (Eigen::Index j = 0; j < p.values.size(); ++j) {
        p.values[j] = rng.next_in(j == 0 && spec.bounded ? -0.95 : -1.0, 1.0);
      }
      break;
    case ModelFamily::Exponential:
      p.values[0] = spec.asymptote.is_fixed() ? spec.asymptote.value()
                                              : rng.next_in(-0.9, 0.9);
      p.values[1] = rng.next_in(-0.9, 0.9);
      p.values[2] = rng.next_in(0.05, 2.0);
      break;
    case ModelFamily::PolyExp:
      p.values[0] = spec.asymptote.is_fixed() ? spec.asymptote.value()
                                              : rng.next_in(-0.9, 0.9);
      p.values[1] = spec.bounded ? rng.next_in(-0.9, 0.9)
                                 : rng.next_in(-2.0, 0.5);  // c_0
      for (Eigen::Index j = 2; j < p.values.size(); ++j) {
        p.values[j] = rng.next_in(-0.4, 0.4);
      }
      if (!spec.bounded) p.sign = rng.next_unit() < 0.5 ? 1 : -1;
      break;
  }
  return p;
}

}  // namespace

TEST_CASE("eval_model reproduces the family formulas") {
  // Polynomial d=2: 0.5 - 0.1*2 + 0*4.
  CHECK(eval_model(poly(2, false), pv({0.5, -0.1, 0.0}), 2.0) ==
        doctest::Approx(0.3).epsilon(1e-14));
  // Bounded exponential: 0.8 * exp(-ln2) = 0.4.
  CHECK(eval_model(expo(Asymptote::fixed(0.0), true), pv({0.0, 0.8, std::log(2.0)}),
                   1.0) == doctest::Approx(0.4).epsilon(1e-14));
  // Bounded exponential at lambda=0 gives zeta for any parameters.
  CHECK(eval_model(expo(Asymptote::free(), true), pv({-0.3, 0.77, 1.9}), 0.0) ==
        doctest::Approx(0.77).epsilon(1e-14));
  // Bounded PolyExp d=1: long-double oracle for 0.1 + 0.8*exp(-1).
  long double oracle = 0.1L + 0.8L * std::exp(-1.0L);
  CHECK(eval_model(polyexp(1, Asymptote::free(), true), pv({0.1, 0.9, -1.0}),
                   1.0) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));
  // Unbounded PolyExp uses the carried sign.
  CHECK(eval_model(polyexp(1, Asymptote::free(), false), pv({0.2, 0.0, 0.0}, -1),
                   3.0) == doctest::Approx(0.2 - 1.0).epsilon(1e-14));
}

TEST_CASE("eval_model rejects layout mismatches") {
  CHECK_THROWS_AS(eval_model(poly(2, false), pv({1.0, 2.0}), 1.0),
                  StructuralError);
  CHECK_THROWS_AS(gradient(expo(Asymptote::free(), true), pv({0.0, 1.0}), 1.0),
                  StructuralError);
  CHECK_THROWS_AS(zero_noise_value(polyexp(2, Asymptote::free(), true),
                                   pv({0.0, 1.0, 0.0})),
                  StructuralError);
}

TEST_CASE("gradient matches hand-computed values") {
  Eigen::VectorXd g = gradient(poly(1, false), pv({0.4, -0.2}), 3.0);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(3.0));

  g = gradient(expo(Asymptote::free(), true), pv({0.0, 1.0, 1.0}), 0.0);
  CHECK(g[0] == doctest::Approx(0.0));  // d/da = 1 - e^0
  CHECK(g[1] == doctest::Approx(1.0));  // d/dzeta = e^0
  CHECK(g[2] == doctest::Approx(0.0));  // -(zeta-a) * 0 * e^0
}

TEST_CASE("gradient matches central finite differences at interior points") {
  SplitMixStream rng(2024);
  for (const ModelSpec& spec : all_specs()) {
    for (int rep = 0; rep < 60; ++rep) {
      ParamVector p = random_interior_point(spec, rng);
      double lambda = rng.next_in(0.0, 5.0);
      Eigen::VectorXd g = gradient(spec, p, lambda);
      for (Eigen::Index j = 0; j < p.values.size(); ++j) {
        double h = 1e-6 * std::max(1.0, std::abs(p.values[j]));
        ParamVector up = p, dn = p;
        up.values[j] += h;
        dn.values[j] -= h;
        double fd = (eval_model(spec, up, lambda) - eval_model(spec, dn, lambda)) /
                    (2.0 * h);
        double tol = 1e-5 * std::max({1.0, std::abs(g[j]), std::abs(fd)});
        CHECK(std::abs(g[j] - fd) <= tol);
      }
    }
  }
}

TEST_CASE("zero_noise_value matches the formulas and eval at 0") {
  CHECK(zero_noise_value(poly(2, false), pv({-0.4, 1.0, 1.0})) ==
        doctest::Approx(-0.4));
  CHECK(zero_noise_value(expo(Asymptote::free(), false), pv({0.1, 0.5, 2.0})) ==
        doctest::Approx(0.6));
  CHECK(zero_noise_value(polyexp(1, Asymptote::free(), false),
                         pv({0.0, 0.0, 1.0}, -1)) == doctest::Approx(-1.0));

  SplitMixStream rng(99);
  for (const ModelSpec& spec : all_specs()) {
    for (int rep = 0; rep < 40; ++rep) {
      ParamVector p = random_interior_point(spec, rng);
      double znv = zero_noise_value(spec, p);
      double at0 = eval_model(spec, p, 0.0);
      CHECK(std::abs(znv - at0) <= 1e-12 * std::max(1.0, std::abs(znv)));
    }
  }
}

TEST_CASE("bounded specs cannot predict outside [-1, 1] inside their box") {
  SplitMixStream rng(7);
  for (const ModelSpec& spec : all_specs()) {
    if (!spec.bounded) continue;
    ParamBox box = param_box(spec);
    for (int rep = 0; rep < 200; ++rep) {
      Eigen::VectorXd x(box.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        double lo = std::max(box.lower[j], -50.0);
        double hi = std::min(box.upper[j], 50.0);
        x[j] = rng.next_in(lo, hi);
      }
      double znv = zero_noise_value(spec, ParamVector{x, +1});
      CHECK(znv >= -1.0);
      CHECK(znv <= 1.0);
    }
  }
}

TEST_CASE("free parameter counts and feasibility") {
  CHECK(free_param_count(poly(3, false)) == 4);
  CHECK(free_param_count(expo(Asymptote::fixed(0.0), true)) == 2);
  CHECK(free_param_count(expo(Asymptote::free(), true)) == 3);
  CHECK(free_param_count(polyexp(1, Asymptote::fixed(0.0), true)) == 2);
  CHECK(free_param_count(polyexp(1, Asymptote::free(), true)) == 3);
  CHECK(free_param_count(polyexp(1, Asymptote::fixed(0.0), false)) == 3);
  CHECK(free_param_count(polyexp(1, Asymptote::free(), false)) == 4);

  CHECK_FALSE(feasible(poly(3, false), 3));
  CHECK(feasible(poly(2, false), 3));
  CHECK(feasible(polyexp(1, Asymptote::fixed(0.0), true), 3));
}

TEST_CASE("param_box matches the published constraint sets") {
  double inf = std::numeric_limits<double>::infinity();

  ParamBox b = param_box(poly(1, true));
  CHECK(b.lower[0] == -1.0);
  CHECK(b.upper[0] == 1.0);
  CHECK(b.lower[1] == -inf);
  CHECK(b.upper[1] == inf);

  b = param_box(expo(Asymptote::free(), true));
  CHECK(b.lower[0] == -1.0);
  CHECK(b.upper[0] == 1.0);
  CHECK(b.lower[1] == -1.0);
  CHECK(b.upper[1] == 1.0);
  CHECK(b.lower[2] == 1e-8);
  CHECK(b.upper[2] == inf);

  b = param_box(poly(2, false));
  CHECK((b.lower.array() == -inf).all());
  CHECK((b.upper.array() == inf).all());

  // Fixed asymptote pins the coordinate exactly.
  b = param_box(expo(Asymptote::fixed(0.25), true));
  CHECK(b.lower[0] == 0.25);
  CHECK(b.upper[0] == 0.25);

  // The unbounded exponential's decay rate is free by default, with an
  // opt-in positivity toggle.
  b = param_box(expo(Asymptote::free(), false));
  CHECK(b.lower[2] == -inf);
  BoxOptions opts;
  opts.positive_decay_unbounded_exp = true;
  b = param_box(expo(Asymptote::free(), false), opts);
  CHECK(b.lower[2] == 1e-8);
}

TEST_CASE("default_init follows the documented rules") {
  // Two-point extrapolation: 0.5 + (0.5 - 0.25) / (2 - 1) * 1 = 0.75.
  ScaleSeries decaying = ScaleSeries::from_pairs({{1, 0.5}, {2, 0.25}, {3, 0.125}});
  ParamVector p = default_init(expo(Asymptote::fixed(0.0), true), decaying);
  CHECK(p.values[0] == doctest::Approx(0.0));
  CHECK(p.values[1] == doctest::Approx(0.75));
  CHECK(p.values[2] == doctest::Approx(1.0));

  ScaleSeries flat = ScaleSeries::from_pairs({{1, 0.0}, {2, 0.0}});
  p = default_init(poly(1, true), flat);
  CHECK(p.values[0] == doctest::Approx(0.0));
  CHECK(p.values[1] == doctest::Approx(0.0));

  ScaleSeries mixed = ScaleSeries::from_pairs({{1, 0.9}, {2, 0.5}, {3, 0.3}});
  p = default_init(polyexp(1, Asymptote::free(), false), mixed);
  CHECK(p.values[0] == doctest::Approx(0.3));
  CHECK(p.sign == 1);
  CHECK(p.values[1] == doctest::Approx(std::log(0.6)));
  CHECK(p.values[2] == doctest::Approx(0.1));  // -0.1 * sgn(y_last - y_first)

  // Independent re-computation of the same rules as an oracle.
  {
    double y1 = 0.9, y2 = 0.5, l1 = 1.0, l2 = 2.0;
    double extrap = y1 + (y1 - y2) / (l2 - l1) * l1;
    ParamVector q = default_init(expo(Asymptote::free(), false), mixed);
    CHECK(q.values[0] == doctest::Approx(0.3));           // y at largest lambda
    CHECK(q.values[1] == doctest::Approx(extrap - 0.3));  // b = extrap - a
    CHECK(q.values[2] == doctest::Approx(1.0));
  }

  // Rising data flips the sign heuristics.
  ScaleSeries rising = ScaleSeries::from_pairs({{1, -0.5}, {2, -0.2}, {3, 0.1}});
  p = default_init(polyexp(1, Asymptote::free(), false), rising);
  CHECK(p.sign == -1);       // a0 = 0.1 >= y_first = -0.5
  CHECK(p.values[2] == doctest::Approx(-0.1));  // y_last >= y_first

  CHECK_THROWS_AS(default_init(poly(1, true),
                               ScaleSeries::from_pairs({{1, 0.5}})),
                  InsufficientDataError);
}

TEST_CASE("bounded exponential equals bounded PolyExp d=1 with c1=-c") {
  ModelSpec e = expo(Asymptote::free(), true);
  ModelSpec pe = polyexp(1, Asymptote::free(), true);
  SplitMixStream rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    double a = rng.next_in(-1.0, 1.0);
    double zeta = rng.next_in(-1.0, 1.0);
    double c = rng.next_in(0.01, 3.0);
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 5.0}) {
      double ve = eval_model(e, pv({a, zeta, c}), lambda);
      double vp = eval_model(pe, pv({a, zeta, -c}), lambda);
      CHECK(ve == doctest::Approx(vp).epsilon(1e-14));
    }
  }
}

TEST_CASE("fixed zero asymptote behaves like a pinned free asymptote") {
  ModelSpec fixed = expo(Asymptote::fixed(0.0), true);
  ModelSpec free_a = expo(Asymptote::free(), true);
  ParamVector p = pv({0.0, 0.8, 0.7});
  for (double lambda : {0.0, 1.0, 2.5}) {
    CHECK(eval_model(fixed, p, lambda) == eval_model(free_a, p, lambda));
  }
}

TEST_CASE("spec ids round-trip through the parser") {
  for (const ModelSpec& spec : all_specs()) {
    ModelSpec reparsed = parse_model_spec(spec_id(spec));
    CHECK(reparsed == spec);
    CHECK(spec_id(reparsed) == spec_id(spec));
  }
  CHECK(spec_id(poly(2, true)) == "poly:d=2:bounded");
  CHECK(spec_id(expo(Asymptote::fixed(0.0), false)) == "exp:a=0:unbounded");
  CHECK(spec_id(polyexp(1, Asymptote::free(), true)) ==
        "polyexp:d=1:a=free:bounded");
  CHECK(family_id(poly(2, true)) == "poly:d=2");
  CHECK(family_id(poly(2, false)) == "poly:d=2");
}

TEST_CASE("parse_model_spec applies defaults and rejects junk") {
  ModelSpec s = parse_model_spec("exp");
  CHECK(s.family == ModelFamily::Exponential);
  CHECK_FALSE(s.bounded);
  CHECK_FALSE(s.asymptote.is_fixed());

  s = parse_model_spec("polyexp:a=0:d=2:bounded");
  CHECK(s.degree == 2);
  CHECK(s.asymptote.is_fixed());
  CHECK(s.asymptote.value() == 0.0);
  CHECK(s.bounded);

  s = parse_model_spec("exp:a=-0.5:bounded");
  CHECK(s.asymptote.value() == doctest::Approx(-0.5));

  CHECK_THROWS_AS(parse_model_spec(""), SpecParseError);
  CHECK_THROWS_AS(parse_model_spec("gauss"), SpecParseError);
  CHECK_THROWS_AS(parse_model_spec("poly:a=0"), SpecParseError);
  CHECK_THROWS_AS(parse_model_spec("exp:d=2"), SpecParseError);
  CHECK_THROWS_AS(parse_model_spec("poly:d=0"), SpecParseError);
  CHECK_THROWS_AS(parse_model_spec("poly:d=1:bounded:unbounded"), SpecParseError);
  CHECK_THROWS_AS(parse_model_spec("exp:a=nope"), SpecParseError);
  // A fixed asymptote outside [-1, 1] cannot be bounded.
  CHECK_THROWS_AS(parse_model_spec("exp:a=1.5:bounded"), SpecParseError);
  CHECK_NOTHROW(parse_model_spec("exp:a=1.5:unbounded"));
}

TEST_CASE("scale series sorts, validates and rejects duplicates") {
  ScaleSeries s = ScaleSeries::from_pairs({{3, 0.3}, {1, 0.1}, {2, 0.2}});
  CHECK(s.lambdas()[0] == 1.0);
  CHECK(s.lambdas()[2] == 3.0);
  CHECK(s.values()[0] == 0.1);
  CHECK(s.values()[2] == 0.3);

  CHECK_THROWS_AS(ScaleSeries::from_pairs({{0.5, 0.1}}), StructuralError);
  CHECK_THROWS_AS(ScaleSeries::from_pairs({{1, 0.1}, {1, 0.2}}), StructuralError);
  CHECK_THROWS_AS(ScaleSeries::from_pairs({{1, std::nan("")}}), StructuralError);
}
