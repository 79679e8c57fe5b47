#pragma once

#include "diffract/linalg.hpp"

#include <limits>
#include <memory>

namespace diffract {

/// Position of a point relative to the interface. `On` means within the
/// geometric tolerance of the interface.
enum class Side { Minus, On, Plus };

/// Branch label used by the schemes: points on the interface belong to the
/// closed plus side.
constexpr Side branch_of(Side s) { return s == Side::On ? Side::Plus : s; }

constexpr Side opposite(Side s) {
  return s == Side::Plus ? Side::Minus : (s == Side::Minus ? Side::Plus : Side::On);
}

const char* to_string(Side s);

/// Result of an oblique projection: `point == foot + factor * g(foot)`.
struct ObliqueFoot {
  Vec foot;
  double factor = 0.0;
};

/// Smooth hypersurface splitting space into an open plus side and a minus side.
///
/// `signed_distance` is positive on the plus side; `normal` is the unit normal
/// pointing into the plus side. Implementations are immutable and may be shared
/// across threads.
class Interface {
 public:
  virtual ~Interface() = default;

  virtual int dim() const = 0;
  virtual double signed_distance(const Vec& x) const = 0;
  /// Unit normal at the closest interface point of `x`.
  virtual Vec normal(const Vec& x) const = 0;
  /// Closest interface point of `x` (the normal foot).
  virtual Vec normal_foot(const Vec& x) const = 0;
  /// Oblique projections are only defined for |signed_distance| <= tube_radius.
  virtual double tube_radius() const = 0;
  /// Points with |signed_distance| <= on_tolerance are classified `On`.
  virtual double on_tolerance(const Vec& x) const = 0;

  /// Solves `x = s + F g(s)` with `s` on the interface.
  ///
  /// Throws NotInTube when `x` is outside the tube, TangentField when
  /// |<nu(s), g(s)>| < min_transversality, NoConvergence when an iterative
  /// solve fails.
  virtual ObliqueFoot project_oblique(const Vec& x, const VectorField& g,
                                      double min_transversality = 1e-12) const = 0;

  Side side(const Vec& x) const;

  /// Distance parallel to g, normalised: F * |g(s)|.
  double algebraic_distance(const Vec& x, const VectorField& g,
                            double min_transversality = 1e-12) const;

  /// Mirrors a crossing overshoot along the opposite co-normal:
  /// returns s - F g_out(s) where (s, F) is the projection of x along g_in.
  Vec crossing_correction(const Vec& x, const VectorField& g_in, const VectorField& g_out,
                          double min_transversality = 1e-12) const;
};

/// Hyperplane {x : <n, x> = offset}, plus side {<n, x> > offset}.
/// Projections are global (infinite tube radius).
class PlanarInterface final : public Interface {
 public:
  PlanarInterface(Vec normal, double offset);

  int dim() const override { return static_cast<int>(normal_.size()); }
  double signed_distance(const Vec& x) const override { return normal_.dot(x) - offset_; }
  Vec normal(const Vec&) const override { return normal_; }
  Vec normal_foot(const Vec& x) const override { return x - signed_distance(x) * normal_; }
  double tube_radius() const override { return std::numeric_limits<double>::infinity(); }
  double on_tolerance(const Vec& x) const override { return 1e-14 * (1.0 + x.norm()); }

  /// Closed form: F = F^nu(x) / <n, g(s)>; the foot is refined by fixed-point
  /// passes, which terminate after one confirming pass when g is constant on
  /// the interface.
  ObliqueFoot project_oblique(const Vec& x, const VectorField& g,
                              double min_transversality = 1e-12) const override;

  const Vec& unit_normal() const { return normal_; }
  double offset() const { return offset_; }

 private:
  Vec normal_;
  double offset_;
};

/// Interface given as the zero set of a signed-distance level-set function.
///
/// The level set must be a true signed distance inside the tube so that
/// `signed_distance`, `normal` and `normal_foot` are exact there. Oblique
/// projections use damped Newton on (foot, factor) started at the normal foot.
class LevelSetInterface final : public Interface {
 public:
  struct Options {
    double tube_radius = 0.1;
    double on_tolerance = 1e-12;
    double projection_tolerance = 1e-10;
    int max_iterations = 50;
  };

  LevelSetInterface(int dim, ScalarField level_set, VectorField gradient, Options options);

  /// Circle/sphere of given radius; the plus side is the outside.
  static std::shared_ptr<LevelSetInterface> sphere(Vec center, double radius, Options options);

  int dim() const override { return dim_; }
  double signed_distance(const Vec& x) const override { return level_set_(x); }
  Vec normal(const Vec& x) const override;
  Vec normal_foot(const Vec& x) const override;
  double tube_radius() const override { return options_.tube_radius; }
  double on_tolerance(const Vec&) const override { return options_.on_tolerance; }

  ObliqueFoot project_oblique(const Vec& x, const VectorField& g,
                              double min_transversality = 1e-12) const override;

 private:
  int dim_;
  ScalarField level_set_;
  VectorField gradient_;
  Options options_;
};

}  // namespace diffract
