#pragma once

#include <Eigen/Dense>
#include <array>

#include "concavlab/expression.hpp"
#include "concavlab/geometry.hpp"
#include "concavlab/grid.hpp"

namespace concavlab {

/// The diffusion matrix alpha^{ij}(x) and source coefficient a(x) as
/// expression templates over (x, y, eps), together with their exact
/// symbolic spatial gradients. alpha is symmetric by construction
/// (alpha12 is stored once).
class CoefficientSet {
 public:
  CoefficientSet();  // isotropic: a = 1, alpha = identity, zeta = 1
  CoefficientSet(Expr a, Expr alpha11, Expr alpha12, Expr alpha22, double zeta);

  double a(const Point& x, double eps) const;
  Eigen::Vector2d grad_a(const Point& x, double eps) const;
  Eigen::Matrix2d alpha(const Point& x, double eps) const;
  Eigen::Vector2d grad_alpha(int i, int j, const Point& x, double eps) const;
  double zeta() const { return zeta_; }

  const Expr& a_expr() const { return a_; }
  const Expr& alpha_expr(int i, int j) const;

  /// Sampled uniform-ellipticity and positivity check over the grid mask.
  /// Throws ellipticity-violation / nonpositive-source.
  void validate_on(const Grid& grid, double eps) const;

  /// sup |grad a| + max_ij sup |grad alpha^{ij}| over a dense lattice within
  /// the domain, the measured perturbation size of the propositions.
  double eps_measure(const ConvexDomain& domain, double eps, int lattice = 512) const;

 private:
  Expr a_, a11_, a12_, a22_;
  Expr dax_, day_;
  std::array<Expr, 3> dalpha_x_, dalpha_y_;  // order: 11, 12, 22
  double zeta_ = 1.0;
};

}  // namespace concavlab
