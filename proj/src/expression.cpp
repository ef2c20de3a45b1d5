#include "concavlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace concavlab {

enum class Op { Num, X, Y, Eps, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp, Pow };

struct Expr::Node {
  Op op;
  double value = 0.0;  // Num payload, or the exponent for Pow
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->value = value;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr num(double v) { return make(Op::Num, nullptr, nullptr, v); }

bool is_const(const NodePtr& n, double v) { return n->op == Op::Num && n->value == v; }

double eval_node(const Expr::Node& n, double x, double y, double eps) {
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::X: return x;
    case Op::Y: return y;
    case Op::Eps: return eps;
    case Op::Add: return eval_node(*n.a, x, y, eps) + eval_node(*n.b, x, y, eps);
    case Op::Sub: return eval_node(*n.a, x, y, eps) - eval_node(*n.b, x, y, eps);
    case Op::Mul: return eval_node(*n.a, x, y, eps) * eval_node(*n.b, x, y, eps);
    case Op::Div: return eval_node(*n.a, x, y, eps) / eval_node(*n.b, x, y, eps);
    case Op::Neg: return -eval_node(*n.a, x, y, eps);
    case Op::Sin: return std::sin(eval_node(*n.a, x, y, eps));
    case Op::Cos: return std::cos(eval_node(*n.a, x, y, eps));
    case Op::Exp: return std::exp(eval_node(*n.a, x, y, eps));
    case Op::Pow: return std::pow(eval_node(*n.a, x, y, eps), n.value);
  }
  return 0.0;
}

bool depends(const Expr::Node& n, Var v) {
  switch (n.op) {
    case Op::Num: return false;
    case Op::X: return v == Var::X;
    case Op::Y: return v == Var::Y;
    case Op::Eps: return v == Var::Eps;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Pow: {
      bool d = depends(*n.a, v);
      if (n.op == Op::Pow) return d;
      return d;
    }
    default: return depends(*n.a, v) || depends(*n.b, v);
  }
}

// Light simplification keeps derivative trees readable and cheap to evaluate.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value + b->value);
  return make(Op::Add, a, b);
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value - b->value);
  if (is_const(a, 0)) return make(Op::Neg, b);
  return make(Op::Sub, a, b);
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0) || is_const(b, 0)) return num(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value * b->value);
  return make(Op::Mul, a, b);
}
NodePtr dvd(NodePtr a, NodePtr b) {
  if (is_const(a, 0)) return num(0);
  if (is_const(b, 1)) return a;
  return make(Op::Div, a, b);
}

NodePtr diff(const NodePtr& n, Var v) {
  switch (n->op) {
    case Op::Num: return num(0);
    case Op::X: return num(v == Var::X ? 1 : 0);
    case Op::Y: return num(v == Var::Y ? 1 : 0);
    case Op::Eps: return num(v == Var::Eps ? 1 : 0);
    case Op::Add: return add(diff(n->a, v), diff(n->b, v));
    case Op::Sub: return sub(diff(n->a, v), diff(n->b, v));
    case Op::Mul: return add(mul(diff(n->a, v), n->b), mul(n->a, diff(n->b, v)));
    case Op::Div:
      return dvd(sub(mul(diff(n->a, v), n->b), mul(n->a, diff(n->b, v))), mul(n->b, n->b));
    case Op::Neg: return make(Op::Neg, diff(n->a, v));
    case Op::Sin: return mul(make(Op::Cos, n->a), diff(n->a, v));
    case Op::Cos: return make(Op::Neg, mul(make(Op::Sin, n->a), diff(n->a, v)));
    case Op::Exp: return mul(make(Op::Exp, n->a), diff(n->a, v));
    case Op::Pow:
      return mul(mul(num(n->value), make(Op::Pow, n->a, nullptr, n->value - 1.0)),
                 diff(n->a, v));
  }
  return num(0);
}

void print(const Expr::Node& n, std::ostringstream& os) {
  switch (n.op) {
    case Op::Num: os << n.value; break;
    case Op::X: os << "x"; break;
    case Op::Y: os << "y"; break;
    case Op::Eps: os << "eps"; break;
    case Op::Add: os << "("; print(*n.a, os); os << " + "; print(*n.b, os); os << ")"; break;
    case Op::Sub: os << "("; print(*n.a, os); os << " - "; print(*n.b, os); os << ")"; break;
    case Op::Mul: os << "("; print(*n.a, os); os << "*"; print(*n.b, os); os << ")"; break;
    case Op::Div: os << "("; print(*n.a, os); os << "/"; print(*n.b, os); os << ")"; break;
    case Op::Neg: os << "(-"; print(*n.a, os); os << ")"; break;
    case Op::Sin: os << "sin("; print(*n.a, os); os << ")"; break;
    case Op::Cos: os << "cos("; print(*n.a, os); os << ")"; break;
    case Op::Exp: os << "exp("; print(*n.a, os); os << ")"; break;
    case Op::Pow: os << "("; print(*n.a, os); os << ")^" << n.value; break;
  }
}

class Parser {
 public:
  explicit Parser(const std::string& s) : src_(s) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) error("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) {
    fail("config-parse",
         "expression error at offset " + std::to_string(pos_) + ": " + what +
             " in \"" + src_ + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+'))
        e = add(e, term());
      else if (eat('-'))
        e = sub(e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (eat('*'))
        e = mul(e, unary());
      else if (eat('/'))
        e = dvd(e, unary());
      else
        return e;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) {
      NodePtr e = unary();
      if (depends(*e, Var::X) || depends(*e, Var::Y))
        error("exponent must not depend on x or y");
      double ev = eval_node(*e, 0, 0, 0);
      if (depends(*e, Var::Eps)) error("exponent must not depend on eps");
      return make(Op::Pow, base, nullptr, ev);
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) error("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) error("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = std::stod(src_.substr(pos_), &used);
      pos_ += used;
      return num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             std::isalnum(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
      std::string name = src_.substr(start, pos_ - start);
      if (name == "x") return make(Op::X);
      if (name == "y") return make(Op::Y);
      if (name == "eps") return make(Op::Eps);
      if (name == "pi") return num(M_PI);
      Op f;
      if (name == "sin")
        f = Op::Sin;
      else if (name == "cos")
        f = Op::Cos;
      else if (name == "exp")
        f = Op::Exp;
      else
        error("unknown identifier '" + name + "'");
      if (!eat('(')) error("expected '(' after " + name);
      NodePtr arg = expr();
      if (!eat(')')) error("expected ')'");
      return make(f, arg);
    }
    error(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : node_(num(0)) {}

Expr Expr::parse(const std::string& source) { return Expr(Parser(source).run()); }

Expr Expr::constant(double value) { return Expr(num(value)); }

Expr Expr::var(Var v) {
  switch (v) {
    case Var::X: return Expr(make(Op::X));
    case Var::Y: return Expr(make(Op::Y));
    case Var::Eps: return Expr(make(Op::Eps));
  }
  return Expr();
}

double Expr::eval(double x, double y, double eps) const { return eval_node(*node_, x, y, eps); }

Expr Expr::derivative(Var v) const { return Expr(diff(node_, v)); }

bool Expr::depends_on(Var v) const { return depends(*node_, v); }

std::string Expr::str() const {
  std::ostringstream os;
  print(*node_, os);
  return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(add(a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(sub(a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(mul(a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(dvd(a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make(Op::Neg, a.node_)); }
Expr sin(const Expr& a) { return Expr(make(Op::Sin, a.node_)); }
Expr cos(const Expr& a) { return Expr(make(Op::Cos, a.node_)); }
Expr exp(const Expr& a) { return Expr(make(Op::Exp, a.node_)); }
Expr pow(const Expr& base, double exponent) {
  return Expr(make(Op::Pow, base.node_, nullptr, exponent));
}

}  // namespace concavlab
