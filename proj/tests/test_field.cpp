#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "concavlab/field.hpp"

using namespace concavlab;

namespace {

std::shared_ptr<const Grid> unit_square_grid(int n) {
  // Domain chosen so the closed unit square lies strictly inside the mask.
  return Grid::over_domain(ConvexDomain::square(Point(-0.5, -0.5), 2.0), n);
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("grid construction") {
  auto g = Grid::over_domain(ConvexDomain::disk(Point(0, 0), 1.0), 65);
  CHECK(g->nx == 65);
  CHECK(g->ny == 65);
  CHECK(g->h == doctest::Approx(1.0 / 32).epsilon(1e-15));
  CHECK(g->mask(32, 32));        // center
  CHECK_FALSE(g->mask(0, 0));    // corner outside the disk
  CHECK_FALSE(g->mask(64, 32));  // boundary node excluded

  auto sq = Grid::over_domain(ConvexDomain::square(Point(0, 0), M_PI), 129);
  CHECK(sq->h == doctest::Approx(M_PI / 128));

  auto ell = Grid::over_domain(ConvexDomain::ellipse(Point(0, 0), 2.0, 1.0), 65);
  CHECK(ell->nx == 65);
  CHECK(std::abs((ell->ymax - ell->ymin) / (ell->ny - 1) - ell->h) < 1e-14);

  CHECK_THROWS_AS(Grid::over_domain(ConvexDomain::disk(Point(0, 0), 1.0), 5), Error);
}

TEST_CASE("bilinear interpolation") {
  auto g = unit_square_grid(17);  // h = 0.125 over [-0.5, 1.5]
  ScalarField affine =
      ScalarField::from_function(g, [](const Point& p) { return 2 * p.x() + 3 * p.y(); });
  CHECK(interpolate(affine, Point(0.37, 0.41)) == doctest::Approx(1.97).epsilon(1e-12));

  ScalarField five = ScalarField::constant(g, 5.0);
  CHECK(interpolate(five, Point(0.2, 0.9)) == doctest::Approx(5.0));

  auto g9 = Grid::over_domain(ConvexDomain::square(Point(-0.5, -0.5), 2.0), 9);  // h = 0.25
  ScalarField xy = ScalarField::from_function(g9, [](const Point& p) { return p.x() * p.y(); });
  CHECK(interpolate(xy, Point(0.125, 0.125)) == doctest::Approx(0.015625).epsilon(1e-14));
}

TEST_CASE("interpolation near the boundary") {
  auto g = Grid::over_domain(ConvexDomain::disk(Point(0, 0), 1.0), 33);
  ScalarField f = ScalarField::from_function(g, [](const Point& p) { return p.x(); });
  // A point just inside the rim: its own cell is cut, the nearest interior
  // cell extends the bilinear.
  Point near_rim(0.97, 0.0);
  CHECK(interpolate(f, near_rim) == doctest::Approx(0.97).epsilon(1e-10));
  // field_value falls back to the trace exactly on the closure.
  CHECK(field_value(f, Point(1.0, 0.0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(field_value(f, Point(1.5, 0.0)), Error);
}

TEST_CASE("derivative stencils reproduce low-degree fields") {
  auto g = unit_square_grid(33);
  ScalarField affine =
      ScalarField::from_function(g, [](const Point& p) { return 2 * p.x() + 3 * p.y(); });
  Eigen::Vector2d gr = gradient_at(affine, 16, 16);
  CHECK(gr.x() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gr.y() == doctest::Approx(3.0).epsilon(1e-12));

  ScalarField c = ScalarField::constant(g, 4.0);
  CHECK(gradient_at(c, 16, 16).norm() == doctest::Approx(0.0));

  ScalarField x2 = ScalarField::from_function(g, [](const Point& p) { return p.x() * p.x(); });
  Eigen::Matrix2d H = hessian_at(x2, 16, 16);
  CHECK(H(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(H(1, 1) == doctest::Approx(0.0));
  CHECK(H(0, 1) == doctest::Approx(0.0));

  ScalarField xy = ScalarField::from_function(g, [](const Point& p) { return p.x() * p.y(); });
  CHECK(hessian_at(xy, 16, 16)(0, 1) == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(gradient_at(affine, 0, 0), Error);
}

TEST_CASE("stencils at the sine critical point") {
  auto g = Grid::over_domain(ConvexDomain::square(Point(-0.5, -0.5), 2.0), 129);  // h = 1/64
  ScalarField f = ScalarField::from_function(
      g, [](const Point& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); });
  int i = static_cast<int>(std::lround((0.5 - g->xmin) / g->h));
  CHECK(gradient_at(f, i, i).norm() < 1e-10);
  Eigen::Matrix2d H = hessian_at(f, i, i);
  double pi2 = M_PI * M_PI;
  CHECK(std::abs(H(0, 0) + pi2) < 10 * g->h * g->h * pi2 * pi2);
  CHECK(std::abs(H(1, 1) + pi2) < 10 * g->h * g->h * pi2 * pi2);
  CHECK(std::abs(H(0, 1)) < 1e-9);
}

TEST_CASE("stencil convergence under refinement") {
  auto err_at = [](int n) {
    auto g = Grid::over_domain(ConvexDomain::square(Point(-0.5, -0.5), 2.0), n);
    ScalarField f = ScalarField::from_function(
        g, [](const Point& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); });
    double eg = 0.0, eh = 0.0;
    for (int j = 2; j < g->ny - 2; ++j) {
      for (int i = 2; i < g->nx - 2; ++i) {
        Point p = g->node(i, j);
        double sx = std::sin(M_PI * p.x()), sy = std::sin(M_PI * p.y());
        double cx = std::cos(M_PI * p.x()), cy = std::cos(M_PI * p.y());
        Eigen::Vector2d grad_exact(M_PI * cx * sy, M_PI * sx * cy);
        eg = std::max(eg, (gradient_at(f, i, j) - grad_exact).norm());
        Eigen::Matrix2d H_exact;
        H_exact << -M_PI * M_PI * sx * sy, M_PI * M_PI * cx * cy, M_PI * M_PI * cx * cy,
            -M_PI * M_PI * sx * sy;
        eh = std::max(eh, (hessian_at(f, i, j) - H_exact).cwiseAbs().maxCoeff());
      }
    }
    return std::pair<double, double>(eg, eh);
  };
  auto [g1, h1] = err_at(33);
  auto [g2, h2] = err_at(65);
  CHECK(g1 / g2 >= 3.5);
  CHECK(h1 / h2 >= 3.5);
}

TEST_CASE("transforms") {
  auto g = unit_square_grid(17);
  ScalarField u4 = ScalarField::constant(g, 4.0);
  CHECK(transform_power(u4, 0.0).value(8, 8) == doctest::Approx(2.0));
  ScalarField u16 = ScalarField::constant(g, 16.0);
  CHECK(transform_power(u16, 0.5).value(8, 8) == doctest::Approx(2.0));
  ScalarField u1 = ScalarField::constant(g, 1.0);
  CHECK(transform_power(u1, 0.77).value(8, 8) == doctest::Approx(1.0));
  CHECK(transform_log(u1).value(8, 8) == doctest::Approx(0.0));
  ScalarField ue = ScalarField::constant(g, std::exp(1.0));
  CHECK(transform_log(ue).value(8, 8) == doctest::Approx(1.0));

  ScalarField gauss = ScalarField::from_function(
      g, [](const Point& p) { return std::exp(-p.squaredNorm()); });
  ScalarField lg = transform_log(gauss);
  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i)
      if (g->mask(i, j))
        CHECK(std::exp(lg.value(i, j)) == doctest::Approx(gauss.value(i, j)).epsilon(1e-12));

  ScalarField bad = ScalarField::from_function(g, [](const Point& p) { return p.x(); });
  CHECK_THROWS_AS(transform_power(bad, 0.5), Error);
  CHECK_THROWS_AS(transform_log(bad), Error);
  CHECK_THROWS_AS(transform_power(u4, 1.0), Error);
}

TEST_CASE("field file round trip") {
  auto g = Grid::over_domain(ConvexDomain::disk(Point(0.1, -0.2), 0.9), 21);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField f = ScalarField::from_function(g, [&](const Point&) { return u(rng); });

  std::string path = tmp_path("concavlab_roundtrip.field");
  write_field(f, path);
  ScalarField back = read_field(path, *g->domain);
  REQUIRE(back.grid().nx == g->nx);
  REQUIRE(back.grid().ny == g->ny);
  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i) {
      CHECK(back.grid().mask(i, j) == g->mask(i, j));
      if (g->mask(i, j)) CHECK(back.value(i, j) == f.value(i, j));  // bitwise
    }
  std::remove(path.c_str());
}

TEST_CASE("field file error paths") {
  std::string path = tmp_path("concavlab_bad.field");
  {
    std::ofstream out(path);
    out << "#FIELD v2\n1 1 0 1 0 1\n0\n";
  }
  CHECK_THROWS_AS(read_field(path), Error);
  {
    std::ofstream out(path);
    out << "#FIELD v1\n3 2 0 1 0 0.5\n0 1 2\n3 4\n";  // short row
  }
  CHECK_THROWS_AS(read_field(path), Error);
  {
    std::ofstream out(path);
    out << "#FIELD v1\n2 2 0 1 0 2\n0 1\n2 3\n";  // cells not square
  }
  CHECK_THROWS_AS(read_field(path), Error);
  std::remove(path.c_str());
}
