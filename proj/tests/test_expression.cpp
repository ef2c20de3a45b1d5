#include <doctest.h>

#include <cmath>

#include "concavlab/expression.hpp"

using namespace concavlab;

TEST_CASE("parse and evaluate") {
  Expr e = Expr::parse("1 + eps*sin(2*x + y)");
  CHECK(e.eval(0.3, 0.7, 0.1) ==
        doctest::Approx(1.0 + 0.1 * std::sin(2 * 0.3 + 0.7)).epsilon(1e-15));
  CHECK(Expr::parse("2^3").eval(0, 0, 0) == doctest::Approx(8.0));
  CHECK(Expr::parse("(1 - x*x - y*y)/4").eval(0.5, 0.5, 0) == doctest::Approx(0.125));
  CHECK(Expr::parse("cos(pi)").eval(0, 0, 0) == doctest::Approx(-1.0));
  CHECK(Expr::parse("exp(0) - 1").eval(0, 0, 0) == doctest::Approx(0.0));
  CHECK(Expr::parse("-x^2").eval(3, 0, 0) == doctest::Approx(-9.0));
}

TEST_CASE("symbolic derivatives match finite differences") {
  const char* sources[] = {
      "1 + eps*sin(2*x + y)",
      "x*y + cos(x)*exp(y/2)",
      "(1 - x*x - y*y)^2 / (2 + x)",
      "exp(-x*x) + (1 + y*y)^0.5",
  };
  for (const char* src : sources) {
    Expr e = Expr::parse(src);
    Expr dx = e.derivative(Var::X);
    Expr dy = e.derivative(Var::Y);
    double h = 1e-6;
    for (double x : {-0.4, 0.1, 0.6}) {
      for (double y : {-0.3, 0.2}) {
        double fd_x = (e.eval(x + h, y, 0.1) - e.eval(x - h, y, 0.1)) / (2 * h);
        double fd_y = (e.eval(x, y + h, 0.1) - e.eval(x, y - h, 0.1)) / (2 * h);
        CHECK(dx.eval(x, y, 0.1) == doctest::Approx(fd_x).epsilon(1e-7));
        CHECK(dy.eval(x, y, 0.1) == doctest::Approx(fd_y).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("second derivatives stay symbolic") {
  Expr e = Expr::parse("(1 - x*x - y*y)/4");
  CHECK(e.derivative(Var::X).derivative(Var::X).eval(0.3, 0.9, 0) == doctest::Approx(-0.5));
  CHECK(e.derivative(Var::X).derivative(Var::Y).eval(0.3, 0.9, 0) == doctest::Approx(0.0));
}

TEST_CASE("grammar restrictions") {
  CHECK_THROWS_AS(Expr::parse("x ^ y"), Error);     // exponent depends on y
  CHECK_THROWS_AS(Expr::parse("2 ^ eps"), Error);   // exponent depends on eps
  CHECK_THROWS_AS(Expr::parse("tan(x)"), Error);    // outside the grammar
  CHECK_THROWS_AS(Expr::parse("1 + "), Error);
  CHECK_THROWS_AS(Expr::parse("(1 + x"), Error);
  CHECK_THROWS_AS(Expr::parse("1 2"), Error);
}

TEST_CASE("depends_on and programmatic construction") {
  Expr e = Expr::parse("1 + eps*x");
  CHECK(e.depends_on(Var::X));
  CHECK(e.depends_on(Var::Eps));
  CHECK_FALSE(e.depends_on(Var::Y));

  Expr built = Expr::constant(2) * Expr::var(Var::X) + pow(Expr::var(Var::Y), 2.0);
  CHECK(built.eval(3, 4, 0) == doctest::Approx(22.0));
  CHECK((-built).eval(3, 4, 0) == doctest::Approx(-22.0));
  CHECK(sin(Expr::var(Var::X)).eval(M_PI / 2, 0, 0) == doctest::Approx(1.0));
}
