#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "concavlab/coefficients.hpp"
#include "concavlab/field.hpp"

namespace concavlab {

enum class PhiKind { One, InverseShift, Exp, Power };

std::string phi_name(PhiKind k);
PhiKind phi_from_name(const std::string& name);

/// phi(t) and phi'(t) for t > 0.
double phi_eval(PhiKind k, double gamma, double t);
double phi_deriv(PhiKind k, double gamma, double t);

/// True when phi is non-increasing (the strict sign condition); Power(gamma)
/// relies on the loosened condition e^s phi(e^-s) - phi'(e^-s) >= gamma' > 0.
bool phi_strict_condition(PhiKind k);

struct NonlinearitySpec {
  enum class Kind { Power, EigenPerturbed } kind = Kind::Power;
  double beta = 0.0;        // Power
  PhiKind phi = PhiKind::One;  // EigenPerturbed
  double gamma = 0.0;       // EigenPerturbed with phi = Power
  double eps_phi = 0.1;     // EigenPerturbed perturbation size
};

struct SolverControls {
  double tol = 1e-10;   // max-norm of the nonlinear residual
  int max_iter = 50;
  double damping = 1.0;  // initial Newton step; the line search halves from here
  double u_floor = 1e-12;
};

struct ProblemSpec {
  ConvexDomain domain = ConvexDomain::disk(Point(0, 0), 1.0);
  int resolution = 65;  // nodes across the longer bounding-box side
  CoefficientSet coeffs;
  double eps = 0.0;  // binds the eps placeholder of the coefficient templates
  NonlinearitySpec nonlinearity;
  SolverControls controls;

  void validate() const;  // throws beta-one-rejected / invalid-nonlinearity
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  double min_u = 0.0;
  bool shortley_weller_used = false;
  double wall_seconds = 0.0;
  std::vector<double> residual_history;
};

/// The discrete map u -> -sum alpha^{ij}(x) D^2_ij u on the grid mask.
/// Pure second derivatives use 3-point stencils; the mixed term is split
/// into the two diagonal second derivatives; every line arm that exits the
/// domain is shortened to the boundary crossing (Shortley-Weller), and the
/// Dirichlet datum at the crossing accumulates into boundary_rhs.
struct LinearOperator {
  Eigen::SparseMatrix<double> matrix;  // interior x interior
  Eigen::VectorXd boundary_rhs;
  std::vector<std::pair<int, int>> rows;          // node (i, j) per row
  Eigen::ArrayXXi index;                          // node -> row, -1 outside
  bool shortened = false;

  Eigen::VectorXd restrict_to_rows(const ScalarField& f) const;
  ScalarField expand(const Eigen::VectorXd& v, const std::shared_ptr<const Grid>& g,
                     std::optional<double> trace) const;
};

using BoundaryFn = std::function<double(const Point&)>;

LinearOperator assemble_operator(const std::shared_ptr<const Grid>& grid,
                                 const CoefficientSet& coeffs, double eps,
                                 const BoundaryFn& dirichlet = nullptr);

std::pair<ScalarField, SolveReport> solve(const ProblemSpec& spec,
                                          const BoundaryFn& dirichlet = nullptr);

struct ConvergenceReport {
  std::vector<double> hs;
  std::vector<double> errors;
  std::vector<double> orders;     // between consecutive resolutions
  double observed_order = 0.0;    // from the finest pair
};

/// Manufactured-solution study: the forcing coefficient
/// a(x) := (-sum alpha^{ij} D^2_ij u*) / u*^beta is built symbolically and
/// the Dirichlet datum is u* itself, so the discrete solution must converge
/// to u* at second order.
ConvergenceReport manufactured_convergence(const ProblemSpec& spec_template,
                                           const Expr& u_exact,
                                           const std::vector<int>& resolutions);

}  // namespace concavlab
