#include "concavlab/verifier.hpp"

#include <cmath>

namespace concavlab {

BFunction BFunction::power_transform(CoefficientSet coeffs, double eps, double beta) {
  BFunction b;
  b.kind = Kind::PowerTransform;
  b.coeffs = std::move(coeffs);
  b.eps = eps;
  b.beta = beta;
  return b;
}

BFunction BFunction::log_transform(CoefficientSet coeffs, double eps, PhiKind phi, double gamma,
                                   double eps_phi) {
  BFunction b;
  b.kind = Kind::LogTransform;
  b.coeffs = std::move(coeffs);
  b.eps = eps;
  b.phi = phi;
  b.gamma = gamma;
  b.eps_phi = eps_phi;
  return b;
}

double BFunction::f_xi(const Point& x, const Eigen::Vector2d& xi) const {
  double quad = xi.dot(coeffs.alpha(x, eps) * xi);
  return 0.5 * coeffs.a(x, eps) * (1.0 - beta) + (1.0 + beta) / (1.0 - beta) * quad;
}

double BFunction::b(const Point& x, double s, const Eigen::Vector2d& xi) const {
  if (kind == Kind::PowerTransform) {
    if (!(s < 0.0)) fail("s-domain-violation", "power-transform b needs s < 0");
    return f_xi(x, xi) / (-s);
  }
  double es = std::exp(s);
  return xi.dot(coeffs.alpha(x, eps) * xi) + coeffs.a(x, eps) +
         eps_phi * es * phi_eval(phi, gamma, std::exp(-s));
}

double BFunction::db_ds(const Point& x, double s, const Eigen::Vector2d& xi) const {
  if (kind == Kind::PowerTransform) {
    if (!(s < 0.0)) fail("s-domain-violation", "power-transform b needs s < 0");
    return f_xi(x, xi) / (s * s);
  }
  double es = std::exp(s), ems = std::exp(-s);
  return eps_phi * (es * phi_eval(phi, gamma, ems) - phi_deriv(phi, gamma, ems));
}

SigmaNu sigma_nu_estimate(const BFunction& bfun, const Point& x1, const Point& x3, double s1,
                          double s3, const Eigen::Vector2d& xi, int m) {
  if (m < 2) m = 2;
  double slo = std::min(s1, s3), shi = std::max(s1, s3);
  if (bfun.kind == BFunction::Kind::PowerTransform && !(shi < 0.0))
    fail("s-domain-violation", "s-segment reaches the power-transform singularity");

  // m x m tensor sampling; Lipschitz safety margin from the max sampled slope.
  std::vector<Point> seg = segment_samples(x1, x3, m);
  double dx = (x3 - x1).norm() / (m - 1);
  double ds = (shi - slo) / (m - 1);

  Eigen::MatrixXd B(m, m), D(m, m);
  for (int k = 0; k < m; ++k) {
    double s = slo + (shi - slo) * k / (m - 1);
    if (m == 2 && shi == slo) s = slo;
    for (int q = 0; q < m; ++q) {
      B(q, k) = bfun.b(seg[q], s, xi);
      D(q, k) = bfun.db_ds(seg[q], s, xi);
    }
  }

  auto lipschitz = [&](const Eigen::MatrixXd& M) {
    double lx = 0, ls = 0;
    for (int k = 0; k < m; ++k)
      for (int q = 0; q + 1 < m; ++q)
        if (dx > 0) lx = std::max(lx, std::abs(M(q + 1, k) - M(q, k)) / dx);
    for (int k = 0; k + 1 < m; ++k)
      for (int q = 0; q < m; ++q)
        if (ds > 0) ls = std::max(ls, std::abs(M(q, k + 1) - M(q, k)) / ds);
    return 0.5 * (lx * dx + ls * ds);
  };

  SigmaNu sn;
  sn.nu_raw = B.minCoeff();
  sn.sigma_raw = D.minCoeff();
  sn.nu_safe = sn.nu_raw - lipschitz(B);
  sn.sigma_safe = sn.sigma_raw - lipschitz(D);
  return sn;
}

double epsilon_of_xi(const CoefficientSet& coeffs, const BFunction& bfun, const Point& x1,
                     const Point& x3, const Eigen::Vector2d& xi, int m) {
  (void)bfun;
  (void)xi;  // the transformed equations keep alpha^{ij}(x) as coefficients
  double sup = 0.0;
  for (const Point& p : segment_samples(x1, x3, m)) {
    sup = std::max(sup, coeffs.grad_alpha(1, 1, p, bfun.eps).norm());
    sup = std::max(sup, coeffs.grad_alpha(1, 2, p, bfun.eps).norm());
    sup = std::max(sup, coeffs.grad_alpha(2, 2, p, bfun.eps).norm());
  }
  return sup;
}

namespace {

std::pair<int, int> nearest_node(const Grid& g, const Point& x) {
  int i = static_cast<int>(std::lround((x.x() - g.xmin) / g.h));
  int j = static_cast<int>(std::lround((x.y() - g.ymin) / g.h));
  i = std::min(std::max(i, 0), g.nx - 1);
  j = std::min(std::max(j, 0), g.ny - 1);
  return {i, j};
}

}  // namespace

double c_const(const ScalarField& v, const Point& x1, const Point& x3,
               const ConvexDomain& domain) {
  const Grid& g = v.grid();
  double m = 0.0;
  for (const Point& p : {x1, x3}) {
    auto [i, j] = nearest_node(g, p);
    Eigen::Matrix2d H = hessian_at(v, i, j);
    m = std::max(m, H.cwiseAbs().maxCoeff());
  }
  return 4.0 * m * domain.diameter();  // n = 2
}

Eigen::Vector2d interpolated_gradient(const ScalarField& v, const Point& x) {
  const Grid& g = v.grid();
  int ci = static_cast<int>(std::floor((x.x() - g.xmin) / g.h));
  int cj = static_cast<int>(std::floor((x.y() - g.ymin) / g.h));
  ci = std::min(std::max(ci, 0), g.nx - 2);
  cj = std::min(std::max(cj, 0), g.ny - 2);
  double tx = (x.x() - g.x(ci)) / g.h;
  double ty = (x.y() - g.y(cj)) / g.h;
  Eigen::Vector2d g00 = gradient_at(v, ci, cj);
  Eigen::Vector2d g10 = gradient_at(v, ci + 1, cj);
  Eigen::Vector2d g01 = gradient_at(v, ci, cj + 1);
  Eigen::Vector2d g11 = gradient_at(v, ci + 1, cj + 1);
  return g00 * (1 - tx) * (1 - ty) + g10 * tx * (1 - ty) + g01 * (1 - tx) * ty +
         g11 * tx * ty;
}

namespace {

struct AuditSetup {
  Triple t;
  Eigen::Vector2d xi;
  double s1, s3;
  double floor;
  bool vacuous = false;
  bool boundary = false;
};

AuditSetup prepare(const ScalarField& v, const DeficitReport& report) {
  AuditSetup setup;
  setup.t = report.argmax;
  setup.floor = 10.0 * v.grid().h * v.grid().h * v.max_abs();
  if (report.deficit <= setup.floor) {
    setup.vacuous = true;
    return setup;
  }
  if (report.classification == "boundary-violation") {
    setup.boundary = true;
    return setup;
  }
  setup.xi = interpolated_gradient(v, setup.t.x1);
  setup.s1 = field_value(v, setup.t.x1);
  setup.s3 = field_value(v, setup.t.x3);
  return setup;
}

bool margins_pass(TheoremAudit& a, bool use_safe) {
  double tol_raw = a.slack * std::abs(a.rhs_raw);
  a.margin_raw = a.rhs_raw - a.lhs;
  bool ok = a.margin_raw >= -tol_raw;
  if (use_safe) {
    a.margin_safe = a.rhs_safe - a.lhs;
    ok = ok && a.margin_safe >= -a.slack * std::abs(a.rhs_safe);
  } else {
    a.margin_safe = a.margin_raw;
  }
  return ok;
}

}  // namespace

TheoremAudit audit_theorem1(const ScalarField& v, const BFunction& bfun,
                            const DeficitReport& report, double slack) {
  TheoremAudit a;
  a.theorem = 1;
  a.slack = slack;
  a.triple = report.argmax;
  AuditSetup s = prepare(v, report);
  a.floor = s.floor;
  if (s.vacuous) {
    a.status = "vacuous";
    return a;
  }
  if (s.boundary) {
    a.status = "boundary-maximum";
    a.pass = false;
    return a;
  }
  a.xi = s.xi;
  a.s1 = s.s1;
  a.s3 = s.s3;
  a.sn = sigma_nu_estimate(bfun, s.t.x1, s.t.x3, s.s1, s.s3, s.xi);
  if (!(a.sn.sigma_raw > 0)) {
    a.status = "hypothesis-failure";
    a.pass = false;
    return a;
  }
  auto g = [&](const Point& x, double sv) { return bfun.b(x, sv, a.xi); };
  a.jc = joint_concavity_fn(g, s.t, s.s1, s.s3);
  a.eps_xi = epsilon_of_xi(bfun.coeffs, bfun, s.t.x1, s.t.x3, a.xi);
  a.c_val = c_const(v, s.t.x1, s.t.x3, *v.grid().domain);
  a.lhs = concavity_fn(v, s.t);

  double numer = -a.jc + a.c_val * a.eps_xi;
  a.rhs_raw = numer / a.sn.sigma_raw;
  bool use_safe = a.sn.sigma_safe > 0;
  a.rhs_safe = use_safe ? numer / a.sn.sigma_safe : a.rhs_raw;
  a.pass = margins_pass(a, use_safe);
  a.status = a.pass ? "pass" : "fail";
  return a;
}

TheoremAudit audit_theorem2(const ScalarField& v, const BFunction& bfun,
                            const DeficitReport& report, double slack) {
  TheoremAudit a;
  a.theorem = 2;
  a.slack = slack;
  a.triple = report.argmax;
  AuditSetup s = prepare(v, report);
  a.floor = s.floor;
  if (s.vacuous) {
    a.status = "vacuous";
    return a;
  }
  if (s.boundary) {
    a.status = "boundary-maximum";
    a.pass = false;
    return a;
  }
  a.xi = s.xi;
  a.s1 = s.s1;
  a.s3 = s.s3;
  a.sn = sigma_nu_estimate(bfun, s.t.x1, s.t.x3, s.s1, s.s3, s.xi);
  if (!(a.sn.sigma_raw > 0) || !(a.sn.nu_raw > 0)) {
    a.status = "hypothesis-failure";
    a.pass = false;
    return a;
  }
  auto g = [&](const Point& x, double sv) { return bfun.b(x, sv, a.xi); };
  a.jc = joint_concavity_fn(g, s.t, s.s1, s.s3);
  auto hc = harmonic_concavity_fn(g, s.t, s.s1, s.s3);
  if (!hc) {
    a.status = "undefined-harmonic-concavity";
    a.pass = false;
    return a;
  }
  a.hc = *hc;
  a.hc_defined = true;
  a.eps_xi = epsilon_of_xi(bfun.coeffs, bfun, s.t.x1, s.t.x3, a.xi);
  a.c_val = c_const(v, s.t.x1, s.t.x3, *v.grid().domain);
  a.lhs = concavity_fn(v, s.t);

  double ce = a.c_val * a.eps_xi;
  auto rhs_with = [&](double sigma, double nu) {
    if (a.jc >= 0) return (ce + ce * ce / nu) / sigma;
    return (-a.hc + ce * (1.0 - a.jc / nu) + ce * ce / nu) / sigma;
  };
  a.rhs_raw = rhs_with(a.sn.sigma_raw, a.sn.nu_raw);
  bool use_safe = a.sn.sigma_safe > 0 && a.sn.nu_safe > 0;
  a.rhs_safe = use_safe ? rhs_with(a.sn.sigma_safe, a.sn.nu_safe) : a.rhs_raw;
  a.pass = margins_pass(a, use_safe);
  a.status = a.pass ? "pass" : "fail";
  return a;
}

RemarkWitness audit_remark_noconc(const Expr& g0, double lo, double hi) {
  auto b = [&](const Point& p, double s) { return 1.0 / (s * g0.eval(p.x(), 0.0, 0.0)); };
  const int nx = 13, ns = 9, nl = 9;
  RemarkWitness w;
  w.value = std::numeric_limits<double>::infinity();
  for (int i1 = 0; i1 < nx; ++i1)
    for (int i3 = 0; i3 < nx; ++i3)
      for (int k1 = 0; k1 < ns; ++k1)
        for (int k3 = 0; k3 < ns; ++k3)
          for (int l = 1; l <= nl; ++l) {
            Triple t;
            t.x1 = Point(lo + (hi - lo) * i1 / (nx - 1), 0.0);
            t.x3 = Point(lo + (hi - lo) * i3 / (nx - 1), 0.0);
            t.lambda = static_cast<double>(l) / (nl + 1);
            double s1 = 0.5 + 1.5 * k1 / (ns - 1);
            double s3 = 0.5 + 1.5 * k3 / (ns - 1);
            auto hc = harmonic_concavity_fn(b, t, s1, s3);
            if (hc && *hc < w.value) {
              w.value = *hc;
              w.x1 = t.x1.x();
              w.x3 = t.x3.x();
              w.s1 = s1;
              w.s3 = s3;
              w.lambda = t.lambda;
            }
          }
  if (!std::isfinite(w.value)) fail("search-exhausted", "no admissible sample point");
  w.found = w.value < -1e-10;
  return w;
}

PropositionRecord audit_propositions(const ProblemSpec& spec, const ScalarField& u,
                                     const DeficitReport& report) {
  (void)u;
  PropositionRecord rec;
  rec.eps_meas = spec.coeffs.eps_measure(spec.domain, spec.eps);
  rec.deficit = report.deficit;
  if (rec.eps_meas > 0) {
    rec.ratio = rec.deficit / rec.eps_meas;
    rec.ratio_defined = true;
  }
  if (!spec.domain.strongly_convex()) rec.warning = "domain-not-strongly-convex";
  return rec;
}

nlohmann::json TheoremAudit::to_json() const {
  nlohmann::json j;
  j["theorem"] = theorem;
  j["status"] = status;
  j["pass"] = pass;
  j["x1"] = {triple.x1.x(), triple.x1.y()};
  j["x3"] = {triple.x3.x(), triple.x3.y()};
  j["lambda"] = triple.lambda;
  j["xi"] = {xi.x(), xi.y()};
  j["s1"] = s1;
  j["s3"] = s3;
  j["sigma"] = sn.sigma_raw;
  j["sigma_safe"] = sn.sigma_safe;
  j["nu"] = sn.nu_raw;
  j["nu_safe"] = sn.nu_safe;
  j["eps_xi"] = eps_xi;
  j["C"] = c_val;
  j["jc"] = jc;
  if (hc_defined) j["hc"] = hc;
  j["lhs"] = lhs;
  j["rhs"] = rhs_raw;
  j["rhs_safe"] = rhs_safe;
  j["margin"] = margin_raw;
  j["margin_safe"] = margin_safe;
  j["floor"] = floor;
  j["slack"] = slack;
  return j;
}

}  // namespace concavlab
