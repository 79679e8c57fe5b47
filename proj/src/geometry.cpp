#include "diffract/geometry.hpp"

#include "diffract/errors.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace diffract {

namespace {

constexpr int kPlanarMaxPasses = 50;

[[noreturn]] void throw_not_in_tube(double distance, double radius) {
  std::ostringstream os;
  os << "point at distance " << distance << " from the interface is outside the tube of radius "
     << radius;
  throw NotInTube(os.str());
}

void check_transversal(double normal_component, double min_transversality) {
  if (std::abs(normal_component) < min_transversality) {
    std::ostringstream os;
    os << "projection field is tangent to the interface (<nu, g> = " << normal_component << ")";
    throw TangentField(os.str());
  }
}

}  // namespace

const char* to_string(Side s) {
  switch (s) {
    case Side::Minus: return "minus";
    case Side::On: return "on";
    case Side::Plus: return "plus";
  }
  return "?";
}

Side Interface::side(const Vec& x) const {
  const double d = signed_distance(x);
  if (std::abs(d) <= on_tolerance(x)) return Side::On;
  return d > 0.0 ? Side::Plus : Side::Minus;
}

double Interface::algebraic_distance(const Vec& x, const VectorField& g,
                                     double min_transversality) const {
  const ObliqueFoot p = project_oblique(x, g, min_transversality);
  return p.factor * g(p.foot).norm();
}

Vec Interface::crossing_correction(const Vec& x, const VectorField& g_in, const VectorField& g_out,
                                   double min_transversality) const {
  const ObliqueFoot p = project_oblique(x, g_in, min_transversality);
  return p.foot - p.factor * g_out(p.foot);
}

// ---------------------------------------------------------------------------

PlanarInterface::PlanarInterface(Vec normal, double offset) : normal_(std::move(normal)) {
  const double len = normal_.norm();
  if (normal_.size() < 1 || normal_.size() > kMaxDim || !(len > 0.0)) {
    throw std::invalid_argument("PlanarInterface: normal must be a nonzero vector of dimension 1..3");
  }
  normal_ /= len;
  offset_ = offset / len;
}

ObliqueFoot PlanarInterface::project_oblique(const Vec& x, const VectorField& g,
                                             double min_transversality) const {
  const double f_nu = signed_distance(x);
  if (std::abs(f_nu) <= on_tolerance(x)) return {x, 0.0};

  Vec s = normal_foot(x);
  Vec gs = g(s);
  for (int pass = 0; pass < kPlanarMaxPasses; ++pass) {
    const double denom = normal_.dot(gs);
    check_transversal(denom, min_transversality);
    const double factor = f_nu / denom;
    Vec next = x - factor * gs;
    Vec g_next = g(next);
    if ((g_next - gs).norm() <= 1e-14 * (1.0 + gs.norm())) return {std::move(next), factor};
    s = std::move(next);
    gs = std::move(g_next);
  }
  throw NoConvergence("planar oblique projection: fixed-point passes did not settle");
}

// ---------------------------------------------------------------------------

LevelSetInterface::LevelSetInterface(int dim, ScalarField level_set, VectorField gradient,
                                     Options options)
    : dim_(dim),
      level_set_(std::move(level_set)),
      gradient_(std::move(gradient)),
      options_(options) {
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("LevelSetInterface: bad dimension");
  if (!(options_.tube_radius > 0.0)) throw std::invalid_argument("LevelSetInterface: tube radius must be > 0");
}

std::shared_ptr<LevelSetInterface> LevelSetInterface::sphere(Vec center, double radius,
                                                             Options options) {
  const int d = static_cast<int>(center.size());
  auto phi = [center, radius](const Vec& x) { return (x - center).norm() - radius; };
  auto grad = [center, d](const Vec& x) -> Vec {
    Vec r = x - center;
    const double len = r.norm();
    if (len == 0.0) {
      Vec e = Vec::Zero(d);
      e[0] = 1.0;
      return e;
    }
    return r / len;
  };
  return std::make_shared<LevelSetInterface>(d, std::move(phi), std::move(grad), options);
}

Vec LevelSetInterface::normal(const Vec& x) const {
  Vec g = gradient_(x);
  return g / g.norm();
}

Vec LevelSetInterface::normal_foot(const Vec& x) const {
  return x - level_set_(x) * normal(x);
}

ObliqueFoot LevelSetInterface::project_oblique(const Vec& x, const VectorField& g,
                                               double min_transversality) const {
  using Sys = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim + 1,
                            kMaxDim + 1>;
  using SysVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim + 1, 1>;

  const double f_nu = level_set_(x);
  if (std::abs(f_nu) > options_.tube_radius) throw_not_in_tube(std::abs(f_nu), options_.tube_radius);
  if (std::abs(f_nu) <= options_.on_tolerance) return {x, 0.0};

  const int d = dim_;
  auto residual = [&](const Vec& s, double factor) {
    SysVec r(d + 1);
    r.head(d) = s + factor * g(s) - x;
    r[d] = level_set_(s);
    return r;
  };

  Vec s = normal_foot(x);
  double normal_component = normal(s).dot(g(s));
  check_transversal(normal_component, min_transversality);
  double factor = f_nu / normal_component;
  SysVec r = residual(s, factor);

  for (int it = 0; it < options_.max_iterations; ++it) {
    if (r.norm() <= options_.projection_tolerance) {
      check_transversal(normal(s).dot(g(s)), min_transversality);
      return {s, factor};
    }
    // Jacobian of (s, F) -> (s + F g(s) - x, phi(s)); the field Jacobian is
    // taken by central differences.
    Sys jac = Sys::Zero(d + 1, d + 1);
    const Vec gs = g(s);
    const double delta = 1e-6 * (1.0 + s.norm());
    for (int k = 0; k < d; ++k) {
      Vec sp = s, sm = s;
      sp[k] += delta;
      sm[k] -= delta;
      const Vec dg = (g(sp) - g(sm)) / (2.0 * delta);
      jac.col(k).head(d) = factor * dg;
      jac(k, k) += 1.0;
    }
    jac.col(d).head(d) = gs;
    jac.row(d).head(d) = gradient_(s).transpose();
    const SysVec step = jac.partialPivLu().solve(-r);

    double damping = 1.0;
    const double r0 = r.norm();
    for (int halving = 0; halving < 30; ++halving) {
      Vec s_try = s + damping * step.head(d);
      const double f_try = factor + damping * step[d];
      SysVec r_try = residual(s_try, f_try);
      if (r_try.norm() < r0 || halving == 29) {
        s = std::move(s_try);
        factor = f_try;
        r = std::move(r_try);
        break;
      }
      damping *= 0.5;
    }
  }
  if (r.norm() <= options_.projection_tolerance) return {s, factor};
  std::ostringstream os;
  os << "level-set oblique projection did not converge in " << options_.max_iterations
     << " iterations (residual " << r.norm() << ")";
  throw NoConvergence(os.str());
}

}  // namespace diffract
