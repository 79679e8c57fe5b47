#include "diffract/coefficients.hpp"
#include "diffract/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace diffract;

namespace {

std::vector<Vec> disc_samples(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < n) {
    Vec x = make_vec({u(rng), u(rng)});
    if (x.norm() <= 1.0) out.push_back(x);
  }
  return out;
}

// Band matrix of the two-dimensional example written out by hand.
Mat band_matrix(double x2, double eps) {
  const double r3 = std::sqrt(3.0);
  const double off = r3 / 8.0 + 2.0 + x2 * (2.0 / eps - r3 / (8.0 * eps));
  Mat a(2, 2);
  a << 31.0 / 8.0 - 0.7 * eps + x2 * (9.0 / (8.0 * eps) + 1.2), off, off,
      29.0 / 8.0 - 0.7 * eps + x2 * (11.0 / (8.0 * eps) + 1.2);
  return 0.5 * a;
}

}  // namespace

TEST_CASE("cholesky factor reproduces the matrix") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int d = 1; d <= 3; ++d) {
    for (int k = 0; k < 200; ++k) {
      Mat b(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b(i, j) = z(rng);
      const Mat m = b * b.transpose() + 0.1 * Mat::Identity(d, d);
      const Mat l = cholesky_lower(m);
      CHECK((l * l.transpose() - m).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.norm()));
      CHECK(l.isLowerTriangular());
    }
  }
  Mat bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky_lower(bad), NotPositiveDefinite);
}

TEST_CASE("two-dimensional example matches its closed-form factors") {
  auto field = presets::paper_example_2d();
  for (const Vec& x : disc_samples(200, 5)) {
    const double x2 = x[1];
    const Side side = x2 > 0.0 ? Side::Plus : Side::Minus;
    Mat sigma(2, 2);
    if (side == Side::Plus) {
      const double p = 5.0 + 0.5 * x2;
      sigma << std::sqrt(p), 0.0, 4.0 / std::sqrt(p), std::sqrt(p - 16.0 / p);
    } else {
      const double p = 11.0 / 4.0 + 1.9 * x2;
      sigma << std::sqrt(p), 0.0, std::sqrt(3.0) / 4.0 / std::sqrt(p),
          std::sqrt(9.0 / 4.0 + 1.9 * x2 - 3.0 / (44.0 + 30.4 * x2));
    }
    CHECK((field->sigma(x) - sigma).cwiseAbs().maxCoeff() <= 1e-12);
    const Mat s = field->sigma(x);
    CHECK((s * s.transpose() - 2.0 * field->evaluate(x)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("analytic drifts agree with the divergence of a") {
  auto field = presets::paper_example_2d();
  for (const Vec& x : disc_samples(100, 6)) {
    for (Side s : {Side::Plus, Side::Minus}) {
      const Vec fd = divergence_fd(field->branch(s).a, x);
      CHECK((fd - field->drift(x, s)).norm() <= 1e-8);
    }
  }
}

TEST_CASE("declared ellipticity bounds hold on the unit disc") {
  auto field = presets::paper_example_2d();
  const auto samples = disc_samples(5000, 7);
  const auto report = field->validate(samples);
  CHECK(report.ok);
  CHECK(report.min_eigenvalue >= 0.05);
  CHECK(report.max_abs_entry <= 4.75);
}

TEST_CASE("co-normals point to the correct sides") {
  auto field = presets::paper_example_2d();
  const Vec y = make_vec({0.3, 0.0});
  const Vec nu = field->interface().normal(y);
  CHECK(nu.dot(field->conormal_plus(y)) > 0.0);
  CHECK(nu.dot(field->conormal_minus(y)) < 0.0);
  CHECK((field->conormal_plus(y) - make_vec({2.0, 2.5})).norm() <= 1e-15);
}

TEST_CASE("regularised field is continuous at the band edges") {
  auto base = presets::paper_example_2d();
  for (double eps : {0.1, std::pow(1e-4, 0.25), std::pow(1e-6, 0.25)}) {
    RegularizedField reg(base, eps);
    for (double x1 : {-0.7, 0.0, 0.4}) {
      const Vec top = make_vec({x1, eps});
      const Vec bottom = make_vec({x1, -eps});
      CHECK((reg.evaluate(top) - base->evaluate(top, Side::Plus)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((reg.evaluate(bottom) - base->evaluate(bottom, Side::Minus)).cwiseAbs().maxCoeff() <=
            1e-12);
    }
  }
}

TEST_CASE("regularised field matches the written-out band matrix") {
  auto base = presets::paper_example_2d();
  for (double eps : {0.1, std::pow(1e-5, 0.25)}) {
    RegularizedField reg(base, eps);
    for (int k = 0; k <= 40; ++k) {
      const double x2 = -eps + 2.0 * eps * k / 40.0;
      const Vec x = make_vec({0.37, x2});
      CHECK((reg.evaluate(x) - band_matrix(x2, eps)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("band drift is the divergence of the band matrix") {
  auto base = presets::paper_example_2d();
  const double eps = 0.1;
  RegularizedField reg(base, eps);
  // d/dx2 of the band matrix columns: (1/eps - sqrt3/(16 eps), 11/(16 eps) + 0.6)
  const Vec expected = make_vec({1.0 / eps - std::sqrt(3.0) / (16.0 * eps), 11.0 / (16.0 * eps) + 0.6});
  for (double x2 : {-0.09, -0.03, 0.0, 0.05, 0.099}) {
    CHECK((reg.drift(make_vec({0.2, x2})) - expected).norm() <= 1e-8);
  }
  // outside the band the base drift is used
  CHECK((reg.drift(make_vec({0.2, 0.5})) - make_vec({0.0, 0.25})).norm() == 0.0);
  CHECK((reg.drift(make_vec({0.2, -0.5})) - make_vec({0.0, 0.95})).norm() == 0.0);
}

TEST_CASE("band matrix stays elliptic") {
  auto base = presets::paper_example_2d();
  RegularizedField reg(base, std::pow(1e-4, 0.25));
  for (int k = 0; k <= 100; ++k) {
    const Vec x = make_vec({0.0, -0.1 + 0.2 * k / 100.0});
    Eigen::SelfAdjointEigenSolver<Mat> eig(reg.evaluate(x));
    CHECK(eig.eigenvalues().minCoeff() >= 0.05);
    const Mat s = reg.sigma(x);
    CHECK((s * s.transpose() - 2.0 * reg.evaluate(x)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("one-dimensional and constant presets") {
  auto pc = presets::piecewise_constant_1d(2.0, 1.0);
  CHECK(pc->discontinuous());
  CHECK(pc->evaluate(make_vec({0.5}))(0, 0) == 2.0);
  CHECK(pc->evaluate(make_vec({-0.5}))(0, 0) == 1.0);
  CHECK(pc->evaluate(make_vec({0.0}))(0, 0) == 2.0);  // closed plus side
  CHECK(pc->sigma(make_vec({0.5}))(0, 0) == Catch::Approx(2.0));
  CHECK(pc->bounds().lambda == 1.0);
  CHECK(pc->bounds().Lambda == 2.0);

  auto c = presets::constant(3, 0.5);
  CHECK_FALSE(c->discontinuous());
  CHECK((c->sigma(make_vec({1.0, 2.0, 3.0})) - Mat::Identity(3, 3)).norm() <= 1e-15);
  CHECK(c->drift(make_vec({1.0, 2.0, 3.0})).norm() == 0.0);
  CHECK_THROWS(presets::constant(2, -1.0));
}
