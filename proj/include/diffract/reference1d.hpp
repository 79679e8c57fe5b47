#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace diffract {

/// a(x) on the real line, smooth on each side of the discontinuity at 0.
/// `plus` is used on x >= 0 and `minus` on x <= 0 (the two one-sided limits
/// at 0 are both needed for the flux).
struct Coefficient1D {
  std::function<double(double)> plus;
  std::function<double(double)> minus;
  /// Upper bound of a, used to size the truncated domain.
  double Lambda = 1.0;

  static Coefficient1D piecewise_constant(double a_plus, double a_minus);
};

/// Uniform grid on [-L, L] with M cells (M even, so 0 is node M/2) and a fixed
/// number of time steps.
struct Grid1D {
  double half_width = 1.0;
  std::int64_t cells = 1024;
  std::int64_t time_steps = 1024;
  /// Dirichlet values at -L and L; empty means u0(-L) and u0(L).
  std::optional<double> left;
  std::optional<double> right;

  double dx() const { return 2.0 * half_width / static_cast<double>(cells); }
  double dt(double T) const { return T / static_cast<double>(time_steps); }
  void validate() const;
};

/// Half-width 10 sqrt(2 Lambda T) + |x0|: the Gaussian tail beyond it is negligible.
double default_half_width(double Lambda, double T, double x0);

/// Nodal values of u(T, .) with linear interpolation between nodes.
class Solution1D {
 public:
  Solution1D(Grid1D grid, double T, std::vector<double> values, double a_plus0, double a_minus0);

  const Grid1D& grid() const { return grid_; }
  double time() const { return T_; }
  double dx() const { return grid_.dx(); }
  const std::vector<double>& values() const { return values_; }
  std::int64_t origin_index() const { return grid_.cells / 2; }
  double node(std::int64_t i) const;

  /// Linear interpolation; throws std::out_of_range outside [-L, L].
  double operator()(double x) const;

  /// One-sided limits a(0+) and a(0-).
  double a_plus0() const { return a_plus0_; }
  double a_minus0() const { return a_minus0_; }

 private:
  Grid1D grid_;
  double T_;
  std::vector<double> values_;
  double a_plus0_;
  double a_minus0_;
};

/// Crank-Nicolson for u_t = (a u')' on the grid. Face coefficients are the
/// harmonic mean of a at the two ends of each cell (taken from the cell's
/// side), so the flux is continuous across 0 at the discrete level. The first
/// two steps are replaced by four backward Euler half-steps to damp the
/// oscillations CN produces from non-smooth data. Nodes sitting on a jump
/// of u0 get the average of the two one-sided values.
Solution1D cn_solve(const Coefficient1D& a, const std::function<double(double)>& u0, double T,
                    const Grid1D& grid);

/// u(T, x) from solves with `cells` and 2 `cells` cells (as many time steps
/// as cells), Richardson-extrapolated for second order. The domain is sized
/// by default_half_width.
double oracle_value(const Coefficient1D& a, const std::function<double(double)>& u0, double T,
                    double x, std::int64_t cells = 4096);

/// a(0+) u'(0+) - a(0-) u'(0-) from one-sided second-order differences.
double flux_jump(const Solution1D& solution);

}  // namespace diffract
