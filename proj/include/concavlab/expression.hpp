#pragma once

#include <memory>
#include <string>

#include "concavlab/common.hpp"

namespace concavlab {

enum class Var { X, Y, Eps };

/// Immutable arithmetic expression over x, y and the parameter eps,
/// restricted to the safe grammar: + - * /, sin, cos, exp, ^ (constant
/// exponent), numeric literals. Supports exact symbolic partials in x and y,
/// which keeps coefficient gradients analytic instead of finite-differenced.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr parse(const std::string& source);  // throws config-parse
  static Expr constant(double value);
  static Expr var(Var v);

  double eval(double x, double y, double eps) const;
  Expr derivative(Var v) const;  // d/dx or d/dy; eps treated as a constant
  bool depends_on(Var v) const;
  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr pow(const Expr& base, double exponent);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace concavlab
