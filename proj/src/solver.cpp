#include "concavlab/solver.hpp"

#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>

namespace concavlab {

std::string phi_name(PhiKind k) {
  switch (k) {
    case PhiKind::One: return "one";
    case PhiKind::InverseShift: return "inverse_shift";
    case PhiKind::Exp: return "exp";
    case PhiKind::Power: return "power";
  }
  return "?";
}

PhiKind phi_from_name(const std::string& name) {
  if (name == "one") return PhiKind::One;
  if (name == "inverse_shift") return PhiKind::InverseShift;
  if (name == "exp") return PhiKind::Exp;
  if (name == "power") return PhiKind::Power;
  fail("invalid-nonlinearity", "unknown phi '" + name + "'");
}

double phi_eval(PhiKind k, double gamma, double t) {
  switch (k) {
    case PhiKind::One: return 1.0;
    case PhiKind::InverseShift: return 1.0 / (1.0 + t);
    case PhiKind::Exp: return std::exp(-t);
    case PhiKind::Power: return std::pow(t, gamma);
  }
  return 0.0;
}

double phi_deriv(PhiKind k, double gamma, double t) {
  switch (k) {
    case PhiKind::One: return 0.0;
    case PhiKind::InverseShift: return -1.0 / ((1.0 + t) * (1.0 + t));
    case PhiKind::Exp: return -std::exp(-t);
    case PhiKind::Power: return gamma * std::pow(t, gamma - 1.0);
  }
  return 0.0;
}

bool phi_strict_condition(PhiKind k) { return k != PhiKind::Power; }

void ProblemSpec::validate() const {
  if (nonlinearity.kind == NonlinearitySpec::Kind::Power) {
    if (nonlinearity.beta == 1.0)
      fail("beta-one-rejected", "beta = 1 is excluded (the pure eigenvalue case)");
    if (!(nonlinearity.beta >= 0.0 && nonlinearity.beta < 1.0))
      fail("invalid-nonlinearity", "beta must lie in [0,1)");
  } else {
    if (!(nonlinearity.eps_phi > 0.0))
      fail("invalid-nonlinearity", "eps_phi must be positive");
    if (nonlinearity.phi == PhiKind::Power &&
        !(nonlinearity.gamma >= 0.0 && nonlinearity.gamma < 1.0))
      fail("invalid-nonlinearity", "phi power exponent must lie in [0,1)");
  }
  if (resolution < 9) fail("invalid-grid", "resolution must be >= 9");
}

Eigen::VectorXd LinearOperator::restrict_to_rows(const ScalarField& f) const {
  Eigen::VectorXd v(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) v[r] = f.value(rows[r].first, rows[r].second);
  return v;
}

ScalarField LinearOperator::expand(const Eigen::VectorXd& v,
                                   const std::shared_ptr<const Grid>& g,
                                   std::optional<double> trace) const {
  Eigen::ArrayXXd vals(g->nx, g->ny);
  vals.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < rows.size(); ++r) vals(rows[r].first, rows[r].second) = v[r];
  return ScalarField(g, std::move(vals), trace);
}

namespace {

// Fraction of the step at which the segment node -> node+step crosses the
// boundary. The node is inside and the stepped point outside.
double crossing_fraction(const ConvexDomain& dom, const Point& from, const Point& step) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (dom.contains(from + mid * step))
      lo = mid;
    else
      hi = mid;
  }
  return std::max(hi, 1e-9);  // keep the shortened stencil finite
}

struct SourceTerm {
  const NonlinearitySpec* nl;
  const CoefficientSet* coeffs;
  double eps;
  double floor;

  double value(const Point& p, double u) const {
    double av = coeffs->a(p, eps);
    if (nl->kind == NonlinearitySpec::Kind::Power) {
      if (nl->beta == 0.0) return av;
      return av * std::pow(std::max(u, floor), nl->beta);
    }
    return av * u + nl->eps_phi * phi_eval(nl->phi, nl->gamma, std::max(u, floor));
  }

  double deriv(const Point& p, double u) const {
    double av = coeffs->a(p, eps);
    if (nl->kind == NonlinearitySpec::Kind::Power) {
      if (nl->beta == 0.0) return 0.0;
      return av * nl->beta * std::pow(std::max(u, floor), nl->beta - 1.0);
    }
    return av + nl->eps_phi * phi_deriv(nl->phi, nl->gamma, std::max(u, floor));
  }
};

}  // namespace

LinearOperator assemble_operator(const std::shared_ptr<const Grid>& grid,
                                 const CoefficientSet& coeffs, double eps,
                                 const BoundaryFn& dirichlet) {
  const Grid& g = *grid;
  if (!g.domain) fail("invalid-grid", "operator assembly needs the grid's domain");
  coeffs.validate_on(g, eps);

  LinearOperator op;
  op.index.setConstant(g.nx, g.ny, -1);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.mask(i, j)) {
        op.index(i, j) = static_cast<int>(op.rows.size());
        op.rows.emplace_back(i, j);
      }
  const int n = static_cast<int>(op.rows.size());
  op.boundary_rhs = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 9);

  // Line directions: axes and diagonals. The operator is
  //   -(a11 Dxx + a22 Dyy + a12 (Ddd - Dee))
  // with Ddd/Dee the second derivatives along (1,1)/sqrt2 and (1,-1)/sqrt2.
  struct Line {
    int di, dj;
    double spacing2;  // squared node spacing along the line, in units of h^2
  };
  const Line lines[4] = {{1, 0, 1.0}, {0, 1, 1.0}, {1, 1, 2.0}, {1, -1, 2.0}};

  auto boundary_value = [&](const Point& p) { return dirichlet ? dirichlet(p) : 0.0; };

  for (int r = 0; r < n; ++r) {
    auto [i, j] = op.rows[r];
    Point p = g.node(i, j);
    Eigen::Matrix2d al = coeffs.alpha(p, eps);
    double cline[4] = {al(0, 0), al(1, 1), al(0, 1), -al(0, 1)};

    for (int L = 0; L < 4; ++L) {
      double c = cline[L];
      if (c == 0.0) continue;
      const Line& ln = lines[L];
      double s2 = ln.spacing2 * g.h * g.h;

      double theta[2] = {1.0, 1.0};
      int nbr_row[2] = {-1, -1};
      double nbr_bc[2] = {0.0, 0.0};
      for (int side = 0; side < 2; ++side) {
        int sgn = side == 0 ? 1 : -1;
        int ni = i + sgn * ln.di, nj = j + sgn * ln.dj;
        if (g.in_mask(ni, nj)) {
          nbr_row[side] = op.index(ni, nj);
        } else {
          Point step(sgn * ln.di * g.h, sgn * ln.dj * g.h);
          double t = crossing_fraction(*g.domain, p, step);
          theta[side] = t;
          nbr_bc[side] = boundary_value(p + t * step);
          op.shortened = true;
        }
      }

      double tsum = theta[0] + theta[1];
      double wC = 2.0 / (theta[0] * theta[1]) / s2;
      double wR = 2.0 / (theta[0] * tsum) / s2;
      double wL = 2.0 / (theta[1] * tsum) / s2;
      // -c * D2_line u  ->  +c*wC at the center, -c*w at the arms.
      trips.emplace_back(r, r, c * wC);
      if (nbr_row[0] >= 0)
        trips.emplace_back(r, nbr_row[0], -c * wR);
      else
        op.boundary_rhs[r] += c * wR * nbr_bc[0];
      if (nbr_row[1] >= 0)
        trips.emplace_back(r, nbr_row[1], -c * wL);
      else
        op.boundary_rhs[r] += c * wL * nbr_bc[1];
    }
  }

  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  return op;
}

std::pair<ScalarField, SolveReport> solve(const ProblemSpec& spec, const BoundaryFn& dirichlet) {
  spec.validate();
  auto t0 = std::chrono::steady_clock::now();

  auto grid = Grid::over_domain(spec.domain, spec.resolution);
  LinearOperator op = assemble_operator(grid, spec.coeffs, spec.eps, dirichlet);
  const int n = static_cast<int>(op.rows.size());

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(op.matrix);
  lu.factorize(op.matrix);
  if (lu.info() != Eigen::Success) fail("newton-divergence", "singular diffusion operator");

  // Problem-adapted start: the linear beta = 0 solve, scaled to unit max.
  Eigen::VectorXd a_vec(n);
  for (int r = 0; r < n; ++r)
    a_vec[r] = spec.coeffs.a(grid->node(op.rows[r].first, op.rows[r].second), spec.eps);
  Eigen::VectorXd u = lu.solve(op.boundary_rhs + a_vec);
  double umax = u.maxCoeff();
  if (umax > 0) u /= umax;

  SourceTerm source{&spec.nonlinearity, &spec.coeffs, spec.eps, spec.controls.u_floor};

  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd f = op.matrix * v - op.boundary_rhs;
    for (int r = 0; r < n; ++r)
      f[r] -= source.value(grid->node(op.rows[r].first, op.rows[r].second), v[r]);
    return f;
  };

  SolveReport report;
  Eigen::VectorXd F = residual(u);
  double Fn = F.lpNorm<Eigen::Infinity>();
  report.residual_history.push_back(Fn);

  bool linear = spec.nonlinearity.kind == NonlinearitySpec::Kind::Power &&
                spec.nonlinearity.beta == 0.0;

  int it = 0;
  while (Fn > spec.controls.tol && it < spec.controls.max_iter) {
    ++it;
    if (linear) {
      u = lu.solve(op.boundary_rhs + a_vec);
    } else {
      Eigen::SparseMatrix<double> J = op.matrix;
      for (int r = 0; r < n; ++r)
        J.coeffRef(r, r) -=
            source.deriv(grid->node(op.rows[r].first, op.rows[r].second), u[r]);
      Eigen::SparseLU<Eigen::SparseMatrix<double>> jlu;
      jlu.compute(J);
      if (jlu.info() != Eigen::Success)
        fail("newton-divergence", "singular Newton linearization");
      Eigen::VectorXd delta = jlu.solve(-F);

      double step = spec.controls.damping;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        Eigen::VectorXd trial = u + step * delta;
        double tn = residual(trial).lpNorm<Eigen::Infinity>();
        if (tn < Fn * (1.0 - 1e-4 * step) || tn <= spec.controls.tol) {
          u = trial;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted)
        fail("newton-divergence", "line search failed to reduce the residual");
    }
    F = residual(u);
    Fn = F.lpNorm<Eigen::Infinity>();
    report.residual_history.push_back(Fn);
  }

  if (Fn > spec.controls.tol)
    fail("newton-divergence", "residual " + std::to_string(Fn) + " after " +
                                  std::to_string(it) + " iterations");

  double umin = u.minCoeff();
  if (umin <= spec.controls.u_floor)
    fail("positivity-loss", "final iterate touches the positivity floor");

  report.iterations = it;
  report.residual = Fn;
  report.min_u = umin;
  report.shortley_weller_used = op.shortened;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  return {op.expand(u, grid, 0.0), report};
}

ConvergenceReport manufactured_convergence(const ProblemSpec& spec_template,
                                           const Expr& u_exact,
                                           const std::vector<int>& resolutions) {
  if (resolutions.size() < 2)
    fail("needs-two-resolutions", "order estimation needs at least two resolutions");

  double beta = spec_template.nonlinearity.beta;
  if (spec_template.nonlinearity.kind != NonlinearitySpec::Kind::Power)
    fail("invalid-nonlinearity", "manufactured studies use the power nonlinearity");

  Expr uxx = u_exact.derivative(Var::X).derivative(Var::X);
  Expr uxy = u_exact.derivative(Var::X).derivative(Var::Y);
  Expr uyy = u_exact.derivative(Var::Y).derivative(Var::Y);
  const CoefficientSet& c = spec_template.coeffs;
  Expr lhs = -(c.alpha_expr(1, 1) * uxx + Expr::constant(2) * c.alpha_expr(1, 2) * uxy +
               c.alpha_expr(2, 2) * uyy);
  Expr forcing_a = beta == 0.0 ? lhs : lhs / pow(u_exact, beta);

  ProblemSpec spec = spec_template;
  spec.coeffs = CoefficientSet(forcing_a, c.alpha_expr(1, 1), c.alpha_expr(1, 2),
                               c.alpha_expr(2, 2), c.zeta());
  double eps = spec.eps;
  BoundaryFn dirichlet = [&u_exact, eps](const Point& p) {
    return u_exact.eval(p.x(), p.y(), eps);
  };

  ConvergenceReport rep;
  for (int n : resolutions) {
    spec.resolution = n;
    auto [u, srep] = solve(spec, dirichlet);
    const Grid& g = u.grid();
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.mask(i, j)) {
          Point p = g.node(i, j);
          err = std::max(err, std::abs(u.value(i, j) - u_exact.eval(p.x(), p.y(), eps)));
        }
    rep.hs.push_back(g.h);
    rep.errors.push_back(err);
  }
  for (std::size_t k = 0; k + 1 < rep.errors.size(); ++k) {
    double p = std::log(rep.errors[k] / rep.errors[k + 1]) / std::log(rep.hs[k] / rep.hs[k + 1]);
    rep.orders.push_back(p);
  }
  rep.observed_order = rep.orders.back();
  return rep;
}

}  // namespace concavlab
