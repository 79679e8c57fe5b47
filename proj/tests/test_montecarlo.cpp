#include "diffract/errors.hpp"
#include "diffract/montecarlo.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace diffract;

namespace {

// Value of u_t = (a u')' with a = a_plus (x > 0), a_minus (x < 0) and
// u(0, .) = 1{x > 0}: erf profiles on each side glued so that u and a u' are
// continuous at 0.
double step_solution(double a_plus, double a_minus, double t, double x) {
  const double c = std::sqrt(a_plus) / (std::sqrt(a_plus) + std::sqrt(a_minus));
  if (x >= 0.0) return c + (1.0 - c) * std::erf(x / std::sqrt(4.0 * a_plus * t));
  return c * (1.0 + std::erf(x / std::sqrt(4.0 * a_minus * t)));
}

}  // namespace

TEST_CASE("scheme names and epsilon rules parse") {
  CHECK(parse_scheme("transformed") == SchemeKind::Transformed);
  CHECK(parse_scheme("regularized") == SchemeKind::Regularized);
  CHECK(std::string(to_string(SchemeKind::Oracle1D)) == "oracle1d");
  CHECK_THROWS_AS(parse_scheme("milstein"), ConfigError);

  CHECK(EpsilonRule::parse("h^0.25")(1e-4) == Catch::Approx(0.1));
  CHECK(EpsilonRule::parse("2*h^0.5")(1e-4) == Catch::Approx(0.02));
  CHECK(EpsilonRule::parse("0.05")(1e-4) == 0.05);
  CHECK_THROWS_AS(EpsilonRule::parse("h^-1"), ConfigError);
  CHECK_THROWS_AS(EpsilonRule::parse("sqrt(h)"), ConfigError);
}

TEST_CASE("disc domain geometry") {
  DiscDomain disc;
  CHECK(disc.distance_to_boundary(make_vec({0.6, 0.0})) == Catch::Approx(0.4));
  CHECK_FALSE(disc.contains(make_vec({1.2, 0.0})));
  CHECK((disc.project_to_boundary(make_vec({0.0, 2.0})) - make_vec({0.0, 1.0})).norm() <= 1e-15);
  CHECK((disc.outward_normal(make_vec({-0.5, 0.0})) - make_vec({-1.0, 0.0})).norm() <= 1e-15);
}

TEST_CASE("constant payoff gives an exact mean and zero spread") {
  auto field = presets::paper_example_2d();
  RunConfig run = RunConfig::parabolic(0.01, 10);
  run.paths = 3000;
  run.workers = 2;
  const auto r = estimate_parabolic(field, run, make_vec({0.1, 0.05}), [](const Vec&) { return 1.0; });
  CHECK(r.mean == 1.0);
  CHECK(r.std_error == 0.0);
  CHECK(r.paths == 3000);
  CHECK(r.excluded == 0);
}

TEST_CASE("results do not depend on the worker count") {
  auto field = presets::paper_example_2d();
  RunConfig run = RunConfig::parabolic(0.05, 50);
  run.paths = 5000;
  run.domain = std::make_shared<DiscDomain>();
  const ScalarField u0 = [](const Vec& x) { return 10.0 * (1.0 - x.squaredNorm()); };
  run.workers = 1;
  const auto one = estimate_parabolic_bounded(field, run, make_vec({0.0, 0.05}), u0);
  run.workers = 4;
  const auto four = estimate_parabolic_bounded(field, run, make_vec({0.0, 0.05}), u0);
  CHECK(one.mean == four.mean);
  CHECK(one.std_error == four.std_error);
  CHECK(one.crossings == four.crossings);
  CHECK(one.corrections == four.corrections);
  run.seed = 2;
  const auto other = estimate_parabolic_bounded(field, run, make_vec({0.0, 0.05}), u0);
  CHECK(other.mean != one.mean);
}

TEST_CASE("brownian second moment under constant coefficients") {
  // a = value I, sigma = sqrt(2 value) I: E|X_T|^2 = |x0|^2 + 2 value d T, exact for Euler.
  for (int d : {1, 2}) {
    auto field = presets::constant(d, 0.5);
    RunConfig run = RunConfig::parabolic(1.0, 20);
    run.paths = 40000;
    Vec x0 = Vec::Constant(d, 0.3);
    const auto r = estimate_parabolic(field, run, x0, [](const Vec& x) { return x.squaredNorm(); });
    const double expected = x0.squaredNorm() + d * 1.0;
    CHECK(std::abs(r.mean - expected) <= 4.0 * r.std_error);
  }
}

TEST_CASE("both schemes coincide pathwise under continuous coefficients") {
  auto field = presets::constant(2, 0.5);
  RunConfig run = RunConfig::parabolic(0.1, 100);
  run.paths = 2000;
  const ScalarField f = [](const Vec& x) { return std::sin(x[0]) + x[1] * x[1]; };
  run.scheme = SchemeKind::Transformed;
  const auto a = estimate_parabolic(field, run, make_vec({0.1, 0.01}), f);
  run.scheme = SchemeKind::Regularized;
  const auto b = estimate_parabolic(field, run, make_vec({0.1, 0.01}), f);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("one-dimensional transformed scheme matches the closed-form solution") {
  const double ap = 2.0, am = 1.0, T = 1.0, x0 = 0.1, h = 1.0 / 256;
  auto field = presets::piecewise_constant_1d(ap, am);
  RunConfig run = RunConfig::parabolic(T, 256);
  run.paths = 100000;
  const ScalarField step = [](const Vec& x) { return x[0] > 0.0 ? 1.0 : 0.0; };
  const double exact = step_solution(ap, am, T, x0);
  for (SchemeKind kind : {SchemeKind::Transformed, SchemeKind::Oracle1D}) {
    run.scheme = kind;
    const auto r = estimate_parabolic(field, run, make_vec({x0}), step);
    CHECK(std::abs(r.mean - exact) <= 4.0 * (r.std_error + 2.0 * std::sqrt(h)));
  }
  // without the correction the scheme follows a non-divergence-form process
  run.scheme = SchemeKind::Transformed;
  run.scheme_options.apply_correction = false;
  const auto plain = estimate_parabolic(field, run, make_vec({x0}), step);
  CHECK(std::abs(plain.mean - exact) > 5.0 * plain.std_error);
}

TEST_CASE("exit problem with harmonic boundary data") {
  // Constant coefficients: u(x) = x1 is harmonic, so E f(X_tau) = x0_1.
  auto field = presets::constant(2, 0.5);
  RunConfig run = RunConfig::elliptic(1e-3);
  run.paths = 20000;
  run.domain = std::make_shared<DiscDomain>();
  const auto r = estimate_elliptic_exit(field, run, make_vec({0.4, -0.2}), [](const Vec& x) { return x[0]; });
  CHECK(r.excluded == 0);
  CHECK(std::abs(r.mean - 0.4) <= 4.0 * r.std_error + 0.01);
}

TEST_CASE("paths beyond the step cap are excluded and flagged") {
  auto field = presets::constant(2, 0.5);
  RunConfig run = RunConfig::elliptic(1e-2);
  run.paths = 500;
  run.step_cap_time = 0.02;  // two steps: almost nothing exits from the centre
  run.domain = std::make_shared<DiscDomain>();
  const auto r = estimate_elliptic_exit(field, run, make_vec({0.0, 0.0}), [](const Vec&) { return 1.0; });
  CHECK(r.cap_exceeded == r.excluded);
  CHECK(r.excluded > 490);
  CHECK(r.flagged());
}

TEST_CASE("pathwise 1D oracle agreement and its negative control") {
  auto field = presets::piecewise_constant_1d(2.0, 1.0);
  RunConfig run = RunConfig::parabolic(1.0, 500);
  run.paths = 500;
  const auto ok = oracle1d_discrepancy(field, run, 0.1);
  CHECK(ok.max_discrepancy <= 1e-10);
  CHECK(ok.crossings > 0);
  run.scheme_options.apply_correction = false;
  CHECK(oracle1d_discrepancy(field, run, 0.1).max_discrepancy > 1e-3);
}

TEST_CASE("occupation sum vanishes far from the interface") {
  auto field = presets::paper_example_2d();
  RunConfig run = RunConfig::parabolic(0.01, 10);
  run.paths = 1000;
  run.domain = std::make_shared<DiscDomain>();
  const auto far = occupation_diagnostic(field, run, make_vec({0.0, 0.9}), 0.5);
  CHECK(far.mean < 1e-12);
  const auto close = occupation_diagnostic(field, run, make_vec({0.0, 0.0}), 0.5);
  CHECK(close.mean > 1e-3);
}

TEST_CASE("log-log fit recovers a power law") {
  const std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> err;
  for (double v : h) err.push_back(-3.0 * std::pow(v, 0.5));
  const auto [slope, intercept] = fit_loglog(h, err);
  CHECK(slope == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(intercept == Catch::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("convergence study needs resolved errors") {
  const std::vector<double> hs = {0.1, 0.01, 0.001};
  auto noisy = [](double) {
    EstimatorResult r;
    r.mean = 1.0001;
    r.std_error = 0.01;
    return r;
  };
  CHECK_THROWS_AS(convergence_study(hs, 1.0, noisy), InsufficientResolution);
  const auto table = tabulate_convergence(hs, 1.0, noisy);
  CHECK(table.resolved_points == 0);
  CHECK(std::isnan(table.slope));

  auto biased = [](double h) {
    EstimatorResult r;
    r.mean = 1.0 + 2.0 * h;
    r.std_error = 1e-6;
    return r;
  };
  const auto good = convergence_study(hs, 1.0, biased);
  CHECK(good.resolved_points == 3);
  CHECK(good.slope == Catch::Approx(1.0).epsilon(1e-9));
}
