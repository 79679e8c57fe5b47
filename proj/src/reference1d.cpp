#include "diffract/reference1d.hpp"

#include "diffract/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diffract {

Coefficient1D Coefficient1D::piecewise_constant(double a_plus, double a_minus) {
  if (!(a_plus > 0.0) || !(a_minus > 0.0)) {
    throw std::invalid_argument("Coefficient1D: coefficients must be positive");
  }
  return {[a_plus](double) { return a_plus; }, [a_minus](double) { return a_minus; },
          std::max(a_plus, a_minus)};
}

void Grid1D::validate() const {
  if (!(half_width > 0.0)) throw std::invalid_argument("Grid1D: half-width must be positive");
  if (cells < 2 || cells % 2 != 0) {
    throw std::invalid_argument("Grid1D: cell count must be even so that 0 is a node");
  }
  if (time_steps < 1) throw std::invalid_argument("Grid1D: need at least one time step");
}

double default_half_width(double Lambda, double T, double x0) {
  return 10.0 * std::sqrt(2.0 * Lambda * T) + std::abs(x0);
}

Solution1D::Solution1D(Grid1D grid, double T, std::vector<double> values, double a_plus0,
                       double a_minus0)
    : grid_(std::move(grid)), T_(T), values_(std::move(values)), a_plus0_(a_plus0),
      a_minus0_(a_minus0) {}

double Solution1D::node(std::int64_t i) const {
  return -grid_.half_width + static_cast<double>(i) * grid_.dx();
}

double Solution1D::operator()(double x) const {
  const double L = grid_.half_width;
  if (!(x >= -L && x <= L)) throw std::out_of_range("Solution1D: point outside the grid");
  const double s = (x + L) / grid_.dx();
  auto i = static_cast<std::int64_t>(std::floor(s));
  if (i >= grid_.cells) i = grid_.cells - 1;
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

namespace {

// Solves (I - theta dt A) u_new = (I + (1 - theta) dt A) u on the interior,
// boundary values held fixed.
class Stepper {
 public:
  Stepper(std::vector<double> face, double dx) : face_(std::move(face)), inv_dx2_(1.0 / (dx * dx)) {
    const std::size_t n = face_.size() + 1;
    lower_.resize(n);
    diag_.resize(n);
    upper_.resize(n);
    rhs_.resize(n);
  }

  void step(std::vector<double>& u, double dt, double theta) {
    const std::size_t n = u.size();
    const double explicit_w = (1.0 - theta) * dt * inv_dx2_;
    const double implicit_w = theta * dt * inv_dx2_;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double fl = face_[i - 1];
      const double fr = face_[i];
      rhs_[i] = u[i] + explicit_w * (fr * (u[i + 1] - u[i]) - fl * (u[i] - u[i - 1]));
      lower_[i] = -implicit_w * fl;
      upper_[i] = -implicit_w * fr;
      diag_[i] = 1.0 + implicit_w * (fl + fr);
    }
    // Fold the Dirichlet values into the first and last equations.
    rhs_[1] -= lower_[1] * u[0];
    rhs_[n - 2] -= upper_[n - 2] * u[n - 1];

    // Thomas forward sweep
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double m = lower_[i] / diag_[i - 1];
      diag_[i] -= m * upper_[i - 1];
      rhs_[i] -= m * rhs_[i - 1];
      if (!(std::abs(diag_[i]) > 0.0)) throw UnstableConfig("cn_solve: singular tridiagonal system");
    }
    u[n - 2] = rhs_[n - 2] / diag_[n - 2];
    for (std::size_t i = n - 3; i >= 1; --i) {
      u[i] = (rhs_[i] - upper_[i] * u[i + 1]) / diag_[i];
    }
  }

 private:
  std::vector<double> face_;
  double inv_dx2_;
  std::vector<double> lower_, diag_, upper_, rhs_;
};

}  // namespace

Solution1D cn_solve(const Coefficient1D& a, const std::function<double(double)>& u0, double T,
                    const Grid1D& grid) {
  grid.validate();
  if (!(T > 0.0)) throw std::invalid_argument("cn_solve: T must be positive");
  const std::int64_t M = grid.cells;
  const double dx = grid.dx();
  const double L = grid.half_width;
  auto x_of = [&](std::int64_t i) { return -L + static_cast<double>(i) * dx; };

  // Cell [x_i, x_{i+1}] lies entirely on one side since 0 is a node.
  std::vector<double> face(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i) {
    const bool plus_side = i >= M / 2;
    const auto& side = plus_side ? a.plus : a.minus;
    const double al = side(x_of(i));
    const double ar = side(x_of(i + 1));
    if (!(al > 0.0) || !(ar > 0.0)) throw std::invalid_argument("cn_solve: a must be positive");
    face[i] = 2.0 * al * ar / (al + ar);
  }

  std::vector<double> u(static_cast<std::size_t>(M + 1));
  const double eta = 1e-9 * dx;
  for (std::int64_t i = 0; i <= M; ++i) {
    const double x = x_of(i);
    u[i] = 0.5 * (u0(x - eta) + u0(x + eta));
  }
  u[0] = grid.left.value_or(u0(-L));
  u[M] = grid.right.value_or(u0(L));

  Stepper stepper(std::move(face), dx);
  const double dt = grid.dt(T);
  std::int64_t k = 0;
  // Rannacher start-up
  for (; k < std::min<std::int64_t>(2, grid.time_steps); ++k) {
    stepper.step(u, 0.5 * dt, 1.0);
    stepper.step(u, 0.5 * dt, 1.0);
  }
  for (; k < grid.time_steps; ++k) stepper.step(u, dt, 0.5);

  const double zero = 0.0;
  return Solution1D(grid, T, std::move(u), a.plus(zero), a.minus(zero));
}

double oracle_value(const Coefficient1D& a, const std::function<double(double)>& u0, double T,
                    double x, std::int64_t cells) {
  auto solve = [&](std::int64_t m) {
    Grid1D grid;
    grid.half_width = default_half_width(a.Lambda, T, x);
    grid.cells = m;
    grid.time_steps = m;
    return cn_solve(a, u0, T, grid)(x);
  };
  const double coarse = solve(cells);
  const double fine = solve(2 * cells);
  return (4.0 * fine - coarse) / 3.0;
}

double flux_jump(const Solution1D& s) {
  const auto& u = s.values();
  const std::int64_t o = s.origin_index();
  if (o < 2 || o + 2 >= static_cast<std::int64_t>(u.size())) {
    throw std::invalid_argument("flux_jump: grid too coarse");
  }
  const double dx = s.dx();
  const double right = (-3.0 * u[o] + 4.0 * u[o + 1] - u[o + 2]) / (2.0 * dx);
  const double left = (3.0 * u[o] - 4.0 * u[o - 1] + u[o - 2]) / (2.0 * dx);
  return s.a_plus0() * right - s.a_minus0() * left;
}

}  // namespace diffract
