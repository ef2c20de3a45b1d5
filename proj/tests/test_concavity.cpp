#include <doctest.h>

#include <cmath>
#include <random>

#include "concavlab/concavity.hpp"

using namespace concavlab;

namespace {

std::shared_ptr<const Grid> box_grid(int n) {
  // n = 37 puts 0, 1 and 2 exactly on nodes (h = 1/12).
  return Grid::over_domain(ConvexDomain::square(Point(-0.5, -0.5), 3.0), n);
}

Triple random_triple(const ConvexDomain& dom, std::mt19937_64& rng, double margin) {
  Eigen::Vector4d bb = dom.bounding_box();
  std::uniform_real_distribution<double> ux(bb[0], bb[1]), uy(bb[2], bb[3]), ul(0.0, 1.0);
  auto draw = [&]() {
    for (;;) {
      Point p(ux(rng), uy(rng));
      if (dom.contains(p) && dom.boundary_distance(p) > margin) return p;
    }
  };
  return Triple{draw(), draw(), ul(rng)};
}

}  // namespace

TEST_CASE("concavity function on reference fields") {
  auto g = box_grid(37);
  ScalarField affine =
      ScalarField::from_function(g, [](const Point& p) { return 1 + 2 * p.x() - p.y(); });
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    Triple t = random_triple(*g->domain, rng, 3 * g->h);
    CHECK(std::abs(concavity_fn(affine, t)) < 1e-12);
  }

  // f = x^2 along a horizontal segment: C = f(1) - f(2)/2 - f(0)/2 = -1.
  ScalarField sq = ScalarField::from_function(g, [](const Point& p) { return p.x() * p.x(); });
  Triple t{Point(0, 0.5), Point(2, 0.5), 0.5};
  CHECK(concavity_fn(sq, t) == doctest::Approx(-1.0).epsilon(1e-12));

  Triple t0{Point(0.1, 0.2), Point(1.7, 0.9), 0.0};
  CHECK(concavity_fn(sq, t0) == doctest::Approx(0.0));
  t0.lambda = 1.0;
  CHECK(concavity_fn(sq, t0) == doctest::Approx(0.0));
}

TEST_CASE("joint concavity function") {
  Triple t{Point(0, 0), Point(1, 0), 0.5};
  auto linear = [](const Point&, double s) { return s; };
  CHECK(joint_concavity_fn(linear, t, -2.0, 5.0) == doctest::Approx(0.0));

  auto neg_square = [](const Point&, double s) { return -s * s; };
  CHECK(joint_concavity_fn(neg_square, t, 0.0, 2.0) == doctest::Approx(1.0));

  // Direct three-term evaluation as the oracle for a genuinely joint g.
  auto mixed = [](const Point& p, double s) { return s * (1.0 + p.x()); };
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1), ul(0, 1);
  for (int k = 0; k < 200; ++k) {
    Triple tr{Point(u(rng), u(rng)), Point(u(rng), u(rng)), ul(rng)};
    double s1 = u(rng), s3 = u(rng);
    double s2 = tr.lambda * s3 + (1 - tr.lambda) * s1;
    double direct = mixed(tr.x2(), s2) - tr.lambda * mixed(tr.x3, s3) -
                    (1 - tr.lambda) * mixed(tr.x1, s1);
    CHECK(joint_concavity_fn(mixed, tr, s1, s3) == doctest::Approx(direct).epsilon(1e-14));
  }
}

TEST_CASE("harmonic concavity case split") {
  Triple t{Point(0, 0), Point(1, 0), 0.5};
  auto constant = [](const Point&, double) { return 3.0; };
  CHECK(*harmonic_concavity_fn(constant, t, 0, 1) == doctest::Approx(0.0));

  // Both endpoint values zero: HC equals the middle value.
  auto vanish = [](const Point& p, double) { return 0.3 * (p.x() > 0.25 && p.x() < 0.75); };
  CHECK(*harmonic_concavity_fn(vanish, t, 0, 1) == doctest::Approx(0.3));

  auto negative = [](const Point&, double) { return -1.0; };
  CHECK_FALSE(harmonic_concavity_fn(negative, t, 0, 1).has_value());
  CHECK_THROWS_AS(hc_minus_jc(negative, t, 0, 1), Error);
}

TEST_CASE("hc minus jc is the arithmetic-harmonic gap") {
  Triple t{Point(0, 0), Point(1, 0), 0.5};
  auto constant = [](const Point&, double) { return 3.0; };
  CHECK(hc_minus_jc(constant, t, 0, 1) == doctest::Approx(0.0));

  // g1 = 1, g3 = 4, lambda = 1/2: arithmetic 2.5, harmonic 1.6, gap 0.9.
  auto steps = [](const Point& p, double) { return p.x() < 0.5 ? 1.0 : 4.0; };
  CHECK(hc_minus_jc(steps, t, 0, 1) == doctest::Approx(0.9).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ug(1e-6, 10.0), ul(1e-6, 1.0 - 1e-6);
  for (int k = 0; k < 100000; ++k) {
    double g1 = ug(rng), g3 = ug(rng), lam = ul(rng);
    double am = lam * g3 + (1 - lam) * g1;
    double hm = g1 * g3 / (lam * g1 + (1 - lam) * g3);
    CHECK(am - hm >= -1e-12);
  }
}

TEST_CASE("symmetry and scale equivariance of the concavity function") {
  auto g = box_grid(48);
  ScalarField f = ScalarField::from_function(g, [](const Point& p) {
    return std::sin(1.3 * p.x()) * std::cos(0.7 * p.y()) + 0.2 * p.x();
  });
  ScalarField cf(f.grid_ptr(), 2.5 * f.values(), f.trace());
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10000; ++k) {
    Triple t = random_triple(*g->domain, rng, 3 * g->h);
    Triple swapped{t.x3, t.x1, 1.0 - t.lambda};
    double c = concavity_fn(f, t);
    CHECK(std::abs(c - concavity_fn(f, swapped)) < 1e-14);
    CHECK(concavity_fn(cf, t) == doctest::Approx(2.5 * c).epsilon(1e-12));
  }
}

TEST_CASE("max deficit on a concave quadratic is zero") {
  auto g = Grid::over_domain(ConvexDomain::disk(Point(0, 0), 1.0), 65);
  ScalarField f =
      ScalarField::from_function(g, [](const Point& p) { return -p.squaredNorm(); });
  DeficitOptions opts;
  opts.threads = 2;
  DeficitReport rep = max_deficit(f, opts);
  CHECK(rep.deficit <= 1e-12);
  CHECK(rep.coarse_value <= 1e-12);
  CHECK(rep.classification == "interior");
}

TEST_CASE("max deficit flags the square eigenfunction") {
  auto g = Grid::over_domain(ConvexDomain::square(Point(0, 0), M_PI), 65);
  ScalarField u = ScalarField::from_function(
      g, [](const Point& p) { return std::sin(p.x()) * std::sin(p.y()); }, 0.0);
  DeficitOptions opts;
  opts.threads = 2;
  DeficitReport rep = max_deficit(u, opts);
  CHECK(rep.deficit > 0.05);
  CHECK(rep.interior);
  CHECK(rep.refined_value >= rep.coarse_value - 1e-12);
  CHECK(rep.deficit > 10.0 * g->h * g->h * u.max_abs());
}

TEST_CASE("argmax is invariant under positive scaling") {
  auto g = Grid::over_domain(ConvexDomain::square(Point(0, 0), M_PI), 49);
  ScalarField u = ScalarField::from_function(
      g, [](const Point& p) { return std::sin(p.x()) * std::sin(p.y()); }, 0.0);
  ScalarField u3(u.grid_ptr(), 3.0 * u.values(), 0.0);
  DeficitOptions opts;
  opts.threads = 1;
  DeficitReport r1 = max_deficit(u, opts);
  DeficitReport r3 = max_deficit(u3, opts);
  CHECK(r3.deficit == doctest::Approx(3.0 * r1.deficit).epsilon(1e-9));
  CHECK((r1.argmax.x1 - r3.argmax.x1).norm() < 1e-9);
  CHECK((r1.argmax.x3 - r3.argmax.x3).norm() < 1e-9);
  CHECK(std::abs(r1.argmax.lambda - r3.argmax.lambda) < 1e-9);
}

TEST_CASE("concave witness floor on random concave fields") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  auto g = Grid::over_domain(ConvexDomain::disk(Point(0, 0), 1.0), 33);
  for (int trial = 0; trial < 5; ++trial) {
    double a = 0.5 + std::abs(u(rng)), b = 0.5 + std::abs(u(rng));
    double c = 0.5 * std::min(a, b) * u(rng);  // keeps the Hessian negative definite
    double dx = u(rng), dy = u(rng);
    ScalarField f = ScalarField::from_function(g, [&](const Point& p) {
      return -(a * p.x() * p.x() + b * p.y() * p.y() + 2 * c * p.x() * p.y()) + dx * p.x() +
             dy * p.y();
    });
    DeficitOptions opts;
    opts.threads = 2;
    DeficitReport rep = max_deficit(f, opts);
    CHECK(rep.deficit <= 10.0 * g->h * g->h * f.max_abs());
  }
}

TEST_CASE("boundary audit classifications") {
  // A convex kink 1.5h from the right side: node triples straddling it see
  // the chord above the field, and the located maximizer hugs the boundary.
  auto g = Grid::over_domain(ConvexDomain::square(Point(0, 0), 1.0), 17);
  double h = g->h;
  double kink = 1.0 - 1.5 * h;
  ScalarField f = ScalarField::from_function(
      g, [&](const Point& p) { return 5.0 * std::max(p.x() - kink, 0.0); });
  DeficitOptions opts;
  opts.rho = 0.0;  // audit the unrestricted scan
  opts.threads = 1;
  DeficitReport rep = max_deficit(f, opts);
  CHECK(rep.deficit > 10.0 * h * h * f.max_abs());
  CHECK(rep.classification == "near-boundary-warning");

  auto gd = Grid::over_domain(ConvexDomain::disk(Point(0, 0), 1.0), 33);
  ScalarField conc =
      ScalarField::from_function(gd, [](const Point& p) { return -p.squaredNorm(); });
  DeficitReport vac = max_deficit(conc, DeficitOptions{});
  CHECK(boundary_audit(vac, conc) == "interior");  // vacuous: deficit under the floor
}

TEST_CASE("deficit report serialization") {
  auto g = Grid::over_domain(ConvexDomain::square(Point(0, 0), M_PI), 33);
  ScalarField u = ScalarField::from_function(
      g, [](const Point& p) { return std::sin(p.x()) * std::sin(p.y()); }, 0.0);
  DeficitOptions opts;
  opts.threads = 1;
  DeficitReport rep = max_deficit(u, opts);
  auto j = rep.to_json();
  CHECK(j["x1"].size() == 2);
  CHECK(j["deficit"].get<double>() == rep.deficit);
  CHECK(j.contains("stride"));
  CHECK(j.contains("rho"));
}
