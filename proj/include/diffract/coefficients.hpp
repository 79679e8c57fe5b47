#pragma once

#include "diffract/geometry.hpp"
#include "diffract/linalg.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <span>

namespace diffract {

/// Declared uniform ellipticity bounds: lambda |xi|^2 <= xi^T a(x) xi and
/// every entry (and eigenvalue) of a bounded by Lambda.
struct Ellipticity {
  double lambda = 1.0;
  double Lambda = 1.0;
};

/// One smooth side of the coefficient field. `a` must be defined (and smooth)
/// on a neighbourhood of the closure of its side. An empty `drift` means the
/// column divergence is taken by central differences of `a`.
struct Branch {
  MatrixField a;
  VectorField drift;
  bool constant = false;
};

/// Lower-triangular L with L L^T = m. Throws NotPositiveDefinite.
Mat cholesky_lower(const Mat& m);

/// Column divergence (sum_i d_i a_ij(x))_j by central differences with step
/// 1e-5 (1 + |x|) (or `step` when given).
Vec divergence_fd(const MatrixField& a, const Vec& x, std::optional<double> step = std::nullopt);

struct EllipticityReport {
  double min_eigenvalue = 0.0;
  double max_abs_entry = 0.0;
  double max_symmetry_error = 0.0;
  bool ok = false;
};

/// Piecewise-smooth symmetric matrix field a = a_+ on the plus side and a_- on
/// the closed minus side; interface points use the plus branch.
class CoefficientField {
 public:
  CoefficientField(std::shared_ptr<const Interface> interface, Branch plus, Branch minus,
                   Ellipticity bounds, bool discontinuous = true);

  int dim() const { return interface_->dim(); }
  const Interface& interface() const { return *interface_; }
  const std::shared_ptr<const Interface>& interface_ptr() const { return interface_; }
  const Ellipticity& bounds() const { return bounds_; }
  bool discontinuous() const { return discontinuous_; }
  const Branch& branch(Side s) const { return branch_of(s) == Side::Plus ? plus_ : minus_; }

  Mat evaluate(const Vec& x) const { return evaluate(x, interface_->side(x)); }
  Mat evaluate(const Vec& x, Side branch) const;

  /// Cholesky factor of 2 a(x).
  Mat sigma(const Vec& x) const { return sigma(x, interface_->side(x)); }
  Mat sigma(const Vec& x, Side branch) const;

  /// Divergence drift (sum_i d_i a_ij)_j of the branch, analytic when supplied.
  Vec drift(const Vec& x) const { return drift(x, interface_->side(x)); }
  Vec drift(const Vec& x, Side branch) const;

  /// gamma_+(y) = a_+(y) nu(y)
  Vec conormal_plus(const Vec& y) const;
  /// gamma_-(y) = -a_-(y) nu(y)
  Vec conormal_minus(const Vec& y) const;

  /// Checks symmetry and the declared bounds at the given points, each
  /// evaluated with its own side's branch.
  EllipticityReport validate(std::span<const Vec> samples) const;

 private:
  struct Cache {
    Mat a;
    Mat sigma;
    Vec drift;
  };

  std::shared_ptr<const Interface> interface_;
  Branch plus_;
  Branch minus_;
  Ellipticity bounds_;
  bool discontinuous_;
  std::optional<Cache> plus_cache_;
  std::optional<Cache> minus_cache_;
};

/// Coefficient field smoothed across a band |F^nu| <= epsilon by affine
/// interpolation, along the normal, between the branch values on the band
/// edges:
///   a_eps(x) = (1 - t) a_-(x - (F + eps) nu) + t a_+(x + (eps - F) nu),
///   t = (F + eps) / (2 eps).
/// Outside the band it equals the base field.
class RegularizedField {
 public:
  RegularizedField(std::shared_ptr<const CoefficientField> base, double epsilon);

  const CoefficientField& base() const { return *base_; }
  double epsilon() const { return epsilon_; }
  int dim() const { return base_->dim(); }
  bool in_band(const Vec& x) const {
    return std::abs(base_->interface().signed_distance(x)) <= epsilon_;
  }

  Mat evaluate(const Vec& x) const;
  Mat sigma(const Vec& x) const;
  Vec drift(const Vec& x) const;

 private:
  Vec band_drift(const Vec& x) const;

  std::shared_ptr<const CoefficientField> base_;
  double epsilon_;
  bool planar_;
};

namespace presets {

/// The two-dimensional example: interface {x2 = 0}, rotated anisotropic
/// branches with linear dependence on x2, analytic divergence drifts.
/// Bounds are declared for the closed unit disc.
std::shared_ptr<const CoefficientField> paper_example_2d();

/// d = 1, a = a_plus on x > 0 and a_minus on x < 0, zero drift.
std::shared_ptr<const CoefficientField> piecewise_constant_1d(double a_plus, double a_minus);

/// a = value * I in dimension `dim` with interface {x_dim = 0}.
std::shared_ptr<const CoefficientField> constant(int dim, double value);

}  // namespace presets

}  // namespace diffract
