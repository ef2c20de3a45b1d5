#include "concavlab/coefficients.hpp"

#include <cmath>

namespace concavlab {

CoefficientSet::CoefficientSet()
    : CoefficientSet(Expr::constant(1), Expr::constant(1), Expr::constant(0),
                     Expr::constant(1), 1.0) {}

CoefficientSet::CoefficientSet(Expr a, Expr alpha11, Expr alpha12, Expr alpha22, double zeta)
    : a_(std::move(a)),
      a11_(std::move(alpha11)),
      a12_(std::move(alpha12)),
      a22_(std::move(alpha22)),
      zeta_(zeta) {
  if (!(zeta_ > 0)) fail("ellipticity-violation", "zeta must be positive");
  dax_ = a_.derivative(Var::X);
  day_ = a_.derivative(Var::Y);
  dalpha_x_ = {a11_.derivative(Var::X), a12_.derivative(Var::X), a22_.derivative(Var::X)};
  dalpha_y_ = {a11_.derivative(Var::Y), a12_.derivative(Var::Y), a22_.derivative(Var::Y)};
}

double CoefficientSet::a(const Point& x, double eps) const {
  return a_.eval(x.x(), x.y(), eps);
}

Eigen::Vector2d CoefficientSet::grad_a(const Point& x, double eps) const {
  return {dax_.eval(x.x(), x.y(), eps), day_.eval(x.x(), x.y(), eps)};
}

Eigen::Matrix2d CoefficientSet::alpha(const Point& x, double eps) const {
  double a11 = a11_.eval(x.x(), x.y(), eps);
  double a12 = a12_.eval(x.x(), x.y(), eps);
  double a22 = a22_.eval(x.x(), x.y(), eps);
  Eigen::Matrix2d m;
  m << a11, a12, a12, a22;
  return m;
}

const Expr& CoefficientSet::alpha_expr(int i, int j) const {
  if (i == 1 && j == 1) return a11_;
  if (i == 2 && j == 2) return a22_;
  return a12_;
}

Eigen::Vector2d CoefficientSet::grad_alpha(int i, int j, const Point& x, double eps) const {
  int k = (i == 1 && j == 1) ? 0 : ((i == 2 && j == 2) ? 2 : 1);
  return {dalpha_x_[k].eval(x.x(), x.y(), eps), dalpha_y_[k].eval(x.x(), x.y(), eps)};
}

void CoefficientSet::validate_on(const Grid& grid, double eps) const {
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!grid.mask(i, j)) continue;
      Point p = grid.node(i, j);
      Eigen::Matrix2d m = alpha(p, eps);
      double tr = m.trace(), det = m.determinant();
      double lambda_min = 0.5 * (tr - std::sqrt(std::max(tr * tr - 4 * det, 0.0)));
      if (lambda_min < zeta_ - 1e-12)
        fail("ellipticity-violation", "sampled eigenvalue " + std::to_string(lambda_min) +
                                          " below zeta at a grid node");
      if (!(a(p, eps) > 0)) fail("nonpositive-source", "a(x) must be positive");
    }
  }
}

double CoefficientSet::eps_measure(const ConvexDomain& domain, double eps, int lattice) const {
  Eigen::Vector4d bb = domain.bounding_box();
  double sup_a = 0.0;
  std::array<double, 3> sup_alpha = {0.0, 0.0, 0.0};
  for (int j = 0; j <= lattice; ++j) {
    double y = bb[2] + (bb[3] - bb[2]) * j / lattice;
    for (int i = 0; i <= lattice; ++i) {
      double x = bb[0] + (bb[1] - bb[0]) * i / lattice;
      Point p(x, y);
      if (!domain.contains(p)) continue;
      sup_a = std::max(sup_a, grad_a(p, eps).norm());
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector2d g(dalpha_x_[k].eval(x, y, eps), dalpha_y_[k].eval(x, y, eps));
        sup_alpha[k] = std::max(sup_alpha[k], g.norm());
      }
    }
  }
  return sup_a + std::max({sup_alpha[0], sup_alpha[1], sup_alpha[2]});
}

}  // namespace concavlab
