#include "diffract/coefficients.hpp"

#include "diffract/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace diffract {

Mat cholesky_lower(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "matrix is not positive definite:\n" << m;
    throw NotPositiveDefinite(os.str());
  }
  return llt.matrixL();
}

Vec divergence_fd(const MatrixField& a, const Vec& x, std::optional<double> step) {
  const Eigen::Index d = x.size();
  const double delta = step.value_or(1e-5 * (1.0 + x.norm()));
  Vec div = Vec::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp[i] += delta;
    xm[i] -= delta;
    const Mat diff = a(xp) - a(xm);
    // row i of d_i a contributes to every column j
    div += diff.row(i).transpose() / (2.0 * delta);
  }
  return div;
}

// ---------------------------------------------------------------------------

CoefficientField::CoefficientField(std::shared_ptr<const Interface> interface, Branch plus,
                                   Branch minus, Ellipticity bounds, bool discontinuous)
    : interface_(std::move(interface)),
      plus_(std::move(plus)),
      minus_(std::move(minus)),
      bounds_(bounds),
      discontinuous_(discontinuous) {
  if (!interface_) throw std::invalid_argument("CoefficientField: null interface");
  if (!plus_.a || !minus_.a) throw std::invalid_argument("CoefficientField: missing branch evaluator");
  if (!(bounds_.lambda > 0.0) || bounds_.Lambda < bounds_.lambda) {
    throw std::invalid_argument("CoefficientField: need 0 < lambda <= Lambda");
  }
  const int d = interface_->dim();
  auto make_cache = [d](const Branch& b) -> std::optional<Cache> {
    if (!b.constant) return std::nullopt;
    const Vec origin = Vec::Zero(d);
    Mat a = b.a(origin);
    Mat s = cholesky_lower(2.0 * a);
    return Cache{std::move(a), std::move(s), Vec::Zero(d)};
  };
  plus_cache_ = make_cache(plus_);
  minus_cache_ = make_cache(minus_);
}

Mat CoefficientField::evaluate(const Vec& x, Side side) const {
  const bool plus = branch_of(side) == Side::Plus;
  const auto& cache = plus ? plus_cache_ : minus_cache_;
  if (cache) return cache->a;
  return (plus ? plus_ : minus_).a(x);
}

Mat CoefficientField::sigma(const Vec& x, Side side) const {
  const bool plus = branch_of(side) == Side::Plus;
  const auto& cache = plus ? plus_cache_ : minus_cache_;
  if (cache) return cache->sigma;
  return cholesky_lower(2.0 * (plus ? plus_ : minus_).a(x));
}

Vec CoefficientField::drift(const Vec& x, Side side) const {
  const bool plus = branch_of(side) == Side::Plus;
  const auto& cache = plus ? plus_cache_ : minus_cache_;
  if (cache) return cache->drift;
  const Branch& b = plus ? plus_ : minus_;
  if (b.drift) return b.drift(x);
  return divergence_fd(b.a, x);
}

Vec CoefficientField::conormal_plus(const Vec& y) const {
  return evaluate(y, Side::Plus) * interface_->normal(y);
}

Vec CoefficientField::conormal_minus(const Vec& y) const {
  return -(evaluate(y, Side::Minus) * interface_->normal(y));
}

EllipticityReport CoefficientField::validate(std::span<const Vec> samples) const {
  EllipticityReport report;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const Vec& x : samples) {
    const Mat a = evaluate(x);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    report.max_symmetry_error =
        std::max(report.max_symmetry_error, (a - a.transpose()).cwiseAbs().maxCoeff() / scale);
    report.max_abs_entry = std::max(report.max_abs_entry, a.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Mat> eig(a, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = std::min(report.min_eigenvalue, eig.eigenvalues().minCoeff());
  }
  report.ok = report.max_symmetry_error <= 1e-14 &&
              report.min_eigenvalue >= bounds_.lambda * (1.0 - 1e-9) &&
              report.max_abs_entry <= bounds_.Lambda;
  return report;
}

// ---------------------------------------------------------------------------

RegularizedField::RegularizedField(std::shared_ptr<const CoefficientField> base, double epsilon)
    : base_(std::move(base)), epsilon_(epsilon) {
  if (!base_) throw std::invalid_argument("RegularizedField: null base field");
  if (!(epsilon_ > 0.0)) throw std::invalid_argument("RegularizedField: epsilon must be > 0");
  planar_ = dynamic_cast<const PlanarInterface*>(&base_->interface()) != nullptr;
}

Mat RegularizedField::evaluate(const Vec& x) const {
  const Interface& gamma = base_->interface();
  const double f = gamma.signed_distance(x);
  if (std::abs(f) > epsilon_) return base_->evaluate(x);
  const Vec nu = gamma.normal(x);
  const double t = (f + epsilon_) / (2.0 * epsilon_);
  const Vec edge_minus = x - (f + epsilon_) * nu;
  const Vec edge_plus = x + (epsilon_ - f) * nu;
  return (1.0 - t) * base_->evaluate(edge_minus, Side::Minus) +
         t * base_->evaluate(edge_plus, Side::Plus);
}

Mat RegularizedField::sigma(const Vec& x) const {
  if (!in_band(x)) return base_->sigma(x);
  return cholesky_lower(2.0 * evaluate(x));
}

Vec RegularizedField::drift(const Vec& x) const {
  if (!in_band(x)) return base_->drift(x);
  return band_drift(x);
}

Vec RegularizedField::band_drift(const Vec& x) const {
  if (!planar_) {
    return divergence_fd([this](const Vec& p) { return evaluate(p); }, x);
  }
  // Planar band: the edge points move tangentially with x and t grows along
  // the normal at rate 1 / (2 eps), so
  //   div a_eps = (A_+ - A_-)^T n / (2 eps) + (1 - t) T_-(p_-) + t T_+(p_+),
  // where T(p) = div a(p) - d_n (a n)(p) is the tangential divergence.
  const Interface& gamma = base_->interface();
  const double f = gamma.signed_distance(x);
  const Vec nu = gamma.normal(x);
  const double t = (f + epsilon_) / (2.0 * epsilon_);
  const Vec edge_minus = x - (f + epsilon_) * nu;
  const Vec edge_plus = x + (epsilon_ - f) * nu;
  const Mat a_minus = base_->evaluate(edge_minus, Side::Minus);
  const Mat a_plus = base_->evaluate(edge_plus, Side::Plus);

  Vec div = (a_plus - a_minus).transpose() * nu / (2.0 * epsilon_);

  auto tangential = [&](const Vec& p, Side side) -> Vec {
    if (base_->branch(side).constant) return Vec::Zero(p.size());
    const double delta = 1e-5 * (1.0 + p.norm());
    const Mat da = (base_->evaluate(p + delta * nu, side) - base_->evaluate(p - delta * nu, side)) /
                   (2.0 * delta);
    return base_->drift(p, side) - da * nu;
  };
  div += (1.0 - t) * tangential(edge_minus, Side::Minus) + t * tangential(edge_plus, Side::Plus);
  return div;
}

// ---------------------------------------------------------------------------

namespace presets {

std::shared_ptr<const CoefficientField> paper_example_2d() {
  auto gamma = std::make_shared<PlanarInterface>(make_vec({0.0, 1.0}), 0.0);
  const double r3 = std::sqrt(3.0);
  Branch plus{
      [](const Vec& x) {
        const double diag = 0.5 * (5.0 + 0.5 * x[1]);
        Mat a(2, 2);
        a << diag, 2.0, 2.0, diag;
        return a;
      },
      [](const Vec&) { return make_vec({0.0, 0.25}); },
      false};
  Branch minus{
      [r3](const Vec& x) {
        Mat a(2, 2);
        a << 0.5 * (2.75 + 1.9 * x[1]), r3 / 8.0, r3 / 8.0, 0.5 * (2.25 + 1.9 * x[1]);
        return a;
      },
      [](const Vec&) { return make_vec({0.0, 0.95}); },
      false};
  // Extremes over the closed unit disc: eigenvalues of a_- are
  // (2 + 1.9 x2) / 2 and (3 + 1.9 x2) / 2, those of a_+ are (1 + 0.5 x2) / 2
  // and (9 + 0.5 x2) / 2.
  return std::make_shared<CoefficientField>(gamma, std::move(plus), std::move(minus),
                                            Ellipticity{0.05, 4.75}, true);
}

std::shared_ptr<const CoefficientField> piecewise_constant_1d(double a_plus, double a_minus) {
  if (!(a_plus > 0.0) || !(a_minus > 0.0)) {
    throw std::invalid_argument("piecewise_constant_1d: coefficients must be positive");
  }
  auto gamma = std::make_shared<PlanarInterface>(make_vec({1.0}), 0.0);
  auto branch = [](double v) {
    return Branch{[v](const Vec&) {
                    Mat a(1, 1);
                    a(0, 0) = v;
                    return a;
                  },
                  [](const Vec&) { return Vec::Zero(1).eval(); }, true};
  };
  return std::make_shared<CoefficientField>(
      gamma, branch(a_plus), branch(a_minus),
      Ellipticity{std::min(a_plus, a_minus), std::max(a_plus, a_minus)}, a_plus != a_minus);
}

std::shared_ptr<const CoefficientField> constant(int dim, double value) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("constant preset: bad dimension");
  if (!(value > 0.0)) throw std::invalid_argument("constant preset: value must be positive");
  Vec n = Vec::Zero(dim);
  n[dim - 1] = 1.0;
  auto gamma = std::make_shared<PlanarInterface>(n, 0.0);
  Branch b{[dim, value](const Vec&) { return (value * Mat::Identity(dim, dim)).eval(); },
           [dim](const Vec&) { return Vec::Zero(dim).eval(); }, true};
  return std::make_shared<CoefficientField>(gamma, b, b, Ellipticity{value, value}, false);
}

}  // namespace presets

}  // namespace diffract
