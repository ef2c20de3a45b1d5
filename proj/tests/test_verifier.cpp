#include <doctest.h>

#include <cmath>

#include "concavlab/harness.hpp"
#include "concavlab/verifier.hpp"

using namespace concavlab;

namespace {

CoefficientSet sweep_coeffs() {
  return CoefficientSet(Expr::parse("1 + eps*sin(2*x + y)"), Expr::parse("1 + eps*sin(x)"),
                        Expr::parse("0"), Expr::parse("1 + eps*cos(y)"), 0.5);
}

}  // namespace

TEST_CASE("b-function formulas against finite differences") {
  BFunction bp = BFunction::power_transform(sweep_coeffs(), 0.1, 0.5);
  BFunction bl =
      BFunction::log_transform(sweep_coeffs(), 0.1, PhiKind::InverseShift, 0.0, 0.2);
  Point x(0.3, -0.1);
  Eigen::Vector2d xi(0.4, -0.7);
  double ds = 1e-6;
  for (double s : {-2.0, -0.5, -0.1}) {
    double fd = (bp.b(x, s + ds, xi) - bp.b(x, s - ds, xi)) / (2 * ds);
    CHECK(bp.db_ds(x, s, xi) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(bp.db_ds(x, s, xi) > 0);  // f_xi > 0 under ellipticity
  }
  for (double s : {-1.5, 0.0, 2.0}) {
    double fd = (bl.b(x, s + ds, xi) - bl.b(x, s - ds, xi)) / (2 * ds);
    CHECK(bl.db_ds(x, s, xi) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(bl.db_ds(x, s, xi) >= 0);  // phi non-increasing
  }
  CHECK_THROWS_AS(bp.b(x, 0.0, xi), Error);
  CHECK_THROWS_AS(bp.b(x, 1.0, xi), Error);
}

TEST_CASE("epsilon of xi") {
  Point x1(-0.5, 0.0), x3(0.5, 0.0);
  Eigen::Vector2d xi(1.0, 0.0);

  CoefficientSet constant;
  BFunction b0 = BFunction::power_transform(constant, 0.0, 0.5);
  CHECK(epsilon_of_xi(constant, b0, x1, x3, xi) == doctest::Approx(0.0));

  // alpha11 = 1 + eps x on a horizontal segment: |grad| = eps everywhere.
  CoefficientSet linear(Expr::parse("1"), Expr::parse("1 + eps*x"), Expr::parse("0"),
                        Expr::parse("1"), 0.5);
  BFunction bl = BFunction::power_transform(linear, 0.25, 0.5);
  CHECK(epsilon_of_xi(linear, bl, x1, x3, xi) == doctest::Approx(0.25).epsilon(1e-12));

  // alpha11 = 1 + eps sin(3x): dense-sampling oracle for the segment sup.
  CoefficientSet wavy(Expr::parse("1"), Expr::parse("1 + eps*sin(3*x)"), Expr::parse("0"),
                      Expr::parse("1"), 0.5);
  BFunction bw = BFunction::power_transform(wavy, 0.25, 0.5);
  double oracle = 0.0;
  for (int k = 0; k < 100000; ++k) {
    double t = static_cast<double>(k) / 99999;
    Point p = (1 - t) * x1 + t * x3;
    oracle = std::max(oracle, std::abs(0.25 * 3 * std::cos(3 * p.x())));
  }
  CHECK(epsilon_of_xi(wavy, bw, x1, x3, xi) == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("epsilon of xi converges in the sample count") {
  CoefficientSet wavy(Expr::parse("1"), Expr::parse("1 + eps*sin(3*x)*cos(2*y)"),
                      Expr::parse("0"), Expr::parse("1"), 0.5);
  BFunction b = BFunction::power_transform(wavy, 0.2, 0.5);
  Point x1(-0.5, -0.2), x3(0.6, 0.4);
  Eigen::Vector2d xi(0.1, 0.0);
  double e1 = epsilon_of_xi(wavy, b, x1, x3, xi, 257);
  double e2 = epsilon_of_xi(wavy, b, x1, x3, xi, 514);
  CHECK(std::abs(e1 - e2) < 1e-3 * e2);
}

TEST_CASE("c constant") {
  ConvexDomain disk = ConvexDomain::disk(Point(0, 0), 1.0);
  auto g = Grid::over_domain(disk, 65);
  ScalarField v =
      ScalarField::from_function(g, [](const Point& p) { return -p.squaredNorm(); });
  // |v_ij| = 2, n^2 = 4, diam = 2.
  CHECK(c_const(v, Point(0.25, 0.1), Point(-0.3, 0.2), disk) ==
        doctest::Approx(16.0).epsilon(1e-9));

  ScalarField affine =
      ScalarField::from_function(g, [](const Point& p) { return 3 * p.x() - p.y(); });
  CHECK(c_const(affine, Point(0.25, 0.1), Point(-0.3, 0.2), disk) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // Torsion transform: compare against the symbolic second derivatives.
  Expr vt = Expr::parse("-((1 - x*x - y*y)^0.5)/2");
  ScalarField vts = ScalarField::from_function(
      g, [&](const Point& p) { return vt.eval(p.x(), p.y(), 0.0); }, std::nullopt);
  Point a(0.25, 0.0), b(-0.125, 0.25);
  double measured = c_const(vts, a, b, disk);
  double exact = 0.0;
  for (const Point& p : {a, b}) {
    double vxx = vt.derivative(Var::X).derivative(Var::X).eval(p.x(), p.y(), 0);
    double vxy = vt.derivative(Var::X).derivative(Var::Y).eval(p.x(), p.y(), 0);
    double vyy = vt.derivative(Var::Y).derivative(Var::Y).eval(p.x(), p.y(), 0);
    exact = std::max({exact, std::abs(vxx), std::abs(vxy), std::abs(vyy)});
  }
  exact *= 4.0 * disk.diameter();
  // Node snapping moves the evaluation point by up to h/sqrt(2), so allow
  // the O(h) drift of the exact Hessian on top of the O(h^2) stencil error.
  CHECK(measured == doctest::Approx(exact).epsilon(5 * g->h));
}

TEST_CASE("sigma and nu estimates") {
  CoefficientSet iso;
  Point x1(-0.2, 0.0), x3(0.4, 0.1);

  // Log transform with phi = 1: db/ds = eps e^s, inf at the smallest s.
  BFunction bl = BFunction::log_transform(iso, 0.0, PhiKind::One, 0.0, 0.3);
  SigmaNu sl = sigma_nu_estimate(bl, x1, x3, -1.0, 0.5, Eigen::Vector2d(0, 0));
  CHECK(sl.sigma_raw == doctest::Approx(0.3 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(sl.sigma_safe <= sl.sigma_raw);

  // Power transform, constant coefficients, xi = 0: b = a(1-beta)/(2|s|),
  // the infimum sits at the most negative s.
  BFunction bp = BFunction::power_transform(iso, 0.0, 0.5);
  SigmaNu sp = sigma_nu_estimate(bp, x1, x3, -2.0, -0.5, Eigen::Vector2d(0, 0));
  CHECK(sp.nu_raw == doctest::Approx(1.0 * 0.5 / (2.0 * 2.0)).epsilon(1e-12));

  // eps_phi = 0 reproduces the excluded pure eigenvalue case: sigma = 0.
  BFunction b0 = BFunction::log_transform(iso, 0.0, PhiKind::One, 0.0, 0.0);
  SigmaNu s0 = sigma_nu_estimate(b0, x1, x3, -1.0, 1.0, Eigen::Vector2d(0, 0));
  CHECK(s0.sigma_raw == doctest::Approx(0.0));

  CHECK_THROWS_AS(sigma_nu_estimate(bp, x1, x3, -1.0, 1.0, Eigen::Vector2d(0, 0)), Error);
}

TEST_CASE("sigma estimates tighten with sampling density") {
  CoefficientSet c = sweep_coeffs();
  BFunction b = BFunction::power_transform(c, 0.15, 0.5);
  Point x1(-0.4, -0.2), x3(0.5, 0.3);
  Eigen::Vector2d xi(0.2, -0.1);
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {9, 17, 33, 65}) {
    SigmaNu sn = sigma_nu_estimate(b, x1, x3, -1.5, -0.25, xi, m);
    CHECK(sn.sigma_raw <= prev + 1e-12);  // infima over nested-ish samples
    prev = sn.sigma_raw;
  }
}

TEST_CASE("hypothesis failure for the eigenvalue-like case") {
  auto g = Grid::over_domain(ConvexDomain::square(Point(0, 0), M_PI), 49);
  ScalarField u = ScalarField::from_function(
      g, [](const Point& p) { return std::sin(p.x()) * std::sin(p.y()); }, 0.0);
  DeficitOptions opts;
  opts.threads = 1;
  DeficitReport rep = max_deficit(u, opts);
  REQUIRE(rep.deficit > 0.05);
  ScalarField v = negate(u);
  BFunction b0 = BFunction::log_transform(CoefficientSet(), 0.0, PhiKind::One, 0.0, 0.0);
  TheoremAudit audit = audit_theorem1(v, b0, rep);
  CHECK(audit.status == "hypothesis-failure");
  CHECK_FALSE(audit.pass);
}

TEST_CASE("remark falsification witnesses") {
  CHECK(audit_remark_noconc(Expr::parse("1 + x"), 0.0, 1.0).found);
  CHECK(audit_remark_noconc(Expr::parse("exp(x)"), 0.0, 1.0).found);
  CHECK(audit_remark_noconc(Expr::parse("2 + sin(x)"), 0.0, 1.0).found);
  RemarkWitness flat = audit_remark_noconc(Expr::parse("1"), 0.0, 1.0);
  CHECK_FALSE(flat.found);
  CHECK(std::abs(flat.value) < 1e-10);
}

TEST_CASE("proposition record") {
  ExperimentConfig cfg;
  cfg.resolution = 33;
  cfg.coeffs = CoefficientSet(Expr::parse("1 + eps*sin(2*x + y)"), Expr::parse("1"),
                              Expr::parse("0"), Expr::parse("1"), 0.5);
  cfg.nonlinearity.kind = NonlinearitySpec::Kind::Power;
  cfg.nonlinearity.beta = 0.5;
  cfg.eps = 0.1;
  cfg.threads = 1;
  RunResult r = run_instance(cfg, 0.1);
  CHECK(r.props.eps_meas == doctest::Approx(0.1 * std::sqrt(5.0)).epsilon(1e-3));
  CHECK(r.props.deficit == r.deficit.deficit);

  // Isotropic instance: zero measured variation, deficit under the floor.
  ExperimentConfig iso = cfg;
  iso.coeffs = CoefficientSet();
  RunResult ri = run_instance(iso, 0.0);
  CHECK(ri.props.eps_meas == doctest::Approx(0.0));
  CHECK_FALSE(ri.props.ratio_defined);
  CHECK(ri.deficit.deficit <= ri.floor);
}

TEST_CASE("full pipeline audits do not fail their inequalities") {
  // Power case on the disk with the anisotropic sweep template.
  ExperimentConfig cfg;
  cfg.resolution = 65;
  cfg.coeffs = sweep_coeffs();
  cfg.nonlinearity.kind = NonlinearitySpec::Kind::Power;
  cfg.nonlinearity.beta = 0.5;
  cfg.threads = 2;
  RunResult rp = run_instance(cfg, 0.05);
  CHECK(rp.audit1.status != "fail");
  CHECK(rp.audit2.status != "fail");

  // Log case with phi = 1.
  ExperimentConfig lcfg = cfg;
  lcfg.nonlinearity.kind = NonlinearitySpec::Kind::EigenPerturbed;
  lcfg.nonlinearity.phi = PhiKind::One;
  lcfg.nonlinearity.eps_phi = 0.1;
  RunResult rl = run_instance(lcfg, 0.05);
  CHECK(rl.audit1.status != "fail");
  CHECK(rl.audit2.status != "fail");
}
