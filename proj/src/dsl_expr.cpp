#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "omtk/dsl.hpp"
#include "omtk/error.hpp"

namespace omtk::dsl {

// A null node is the constant zero; this keeps default construction of Node
// (whose children are Exprs) non-recursive.

Expr::Expr() = default;

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::number(double value) {
  if (value < 0.0) return unary(NodeKind::neg, constant(-value));
  return constant(value == 0.0 ? 0.0 : value);
}

Expr Expr::state(int index) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::state;
  n->index = index;
  return Expr(std::move(n));
}

Expr Expr::time() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::time;
  return Expr(std::move(n));
}

Expr Expr::moment(int order) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::moment;
  n->index = order;
  return Expr(std::move(n));
}

Expr Expr::unary(NodeKind kind, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(arg);
  return Expr(std::move(n));
}

Expr Expr::binary(NodeKind kind, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::pow;
  n->index = exponent;
  n->lhs = std::move(base);
  return Expr(std::move(n));
}

NodeKind Expr::kind() const {
  return node_ ? node_->kind : NodeKind::constant;
}
double Expr::value() const { return node_ ? node_->value : 0.0; }
int Expr::index() const { return node_ ? node_->index : 0; }
int Expr::exponent() const { return node_ ? node_->index : 0; }

const Expr& Expr::lhs() const {
  static const Expr zero;
  return node_ ? node_->lhs : zero;
}

const Expr& Expr::rhs() const {
  static const Expr zero;
  return node_ ? node_->rhs : zero;
}

bool Expr::is_number(double* out) const {
  if (kind() == NodeKind::constant) {
    if (out) *out = value();
    return true;
  }
  if (kind() == NodeKind::neg && lhs().kind() == NodeKind::constant) {
    if (out) *out = -lhs().value();
    return true;
  }
  return false;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::constant: return a.value() == b.value();
    case NodeKind::state:
    case NodeKind::moment: return a.index() == b.index();
    case NodeKind::time: return true;
    case NodeKind::pow:
      return a.exponent() == b.exponent() && a.lhs() == b.lhs();
    case NodeKind::neg:
    case NodeKind::sin:
    case NodeKind::cos:
    case NodeKind::exp:
    case NodeKind::tanh: return a.lhs() == b.lhs();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

double ipow(double x, int n) {
  if (n < 0) return 1.0 / ipow(x, -n);
  double result = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(n);
  while (e != 0) {
    if (e & 1u) result *= base;
    e >>= 1u;
    if (e != 0) base *= base;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Printer

namespace {

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::neg: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
  }
}

const char* function_name(NodeKind k) {
  switch (k) {
    case NodeKind::sin: return "sin";
    case NodeKind::cos: return "cos";
    case NodeKind::exp: return "exp";
    case NodeKind::tanh: return "tanh";
    default: return "?";
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print(const Expr& e, std::string& out);

void print_operand(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::constant: out += format_number(e.value()); return;
    case NodeKind::state: out += 'x' + std::to_string(e.index()); return;
    case NodeKind::time: out += 't'; return;
    case NodeKind::moment: out += 'M' + std::to_string(e.index()); return;
    case NodeKind::neg:
      out += '-';
      print_operand(e.lhs(), 3, out);
      return;
    case NodeKind::pow:
      print_operand(e.lhs(), 4, out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case NodeKind::sin:
    case NodeKind::cos:
    case NodeKind::exp:
    case NodeKind::tanh:
      out += function_name(e.kind());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
    default: break;
  }
  const int p = precedence(e);
  const char op = e.kind() == NodeKind::add   ? '+'
                  : e.kind() == NodeKind::sub ? '-'
                  : e.kind() == NodeKind::mul ? '*'
                                              : '/';
  print_operand(e.lhs(), p, out);
  out += op;
  print_operand(e.rhs(), p + 1, out);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void fail_eval(const Expr& e, const std::string& why) {
  throw EvalError(why + " in subexpression '" + to_string(e) + "'");
}

double checked(const Expr& e, double v) {
  if (!std::isfinite(v)) fail_eval(e, "non-finite value");
  return v;
}

}  // namespace

double eval(const Expr& e, const EvalPoint& at) {
  switch (e.kind()) {
    case NodeKind::constant: return e.value();
    case NodeKind::state: {
      const auto i = static_cast<std::size_t>(e.index() - 1);
      if (i >= at.x.size()) fail_eval(e, "state index out of range");
      return checked(e, at.x[i]);
    }
    case NodeKind::time: return checked(e, at.t);
    case NodeKind::moment: {
      const auto k = static_cast<std::size_t>(e.index() - 1);
      if (k >= at.moments.size()) fail_eval(e, "moment not supplied");
      return checked(e, at.moments[k]);
    }
    case NodeKind::neg: return -eval(e.lhs(), at);
    case NodeKind::add: return checked(e, eval(e.lhs(), at) + eval(e.rhs(), at));
    case NodeKind::sub: return checked(e, eval(e.lhs(), at) - eval(e.rhs(), at));
    case NodeKind::mul: return checked(e, eval(e.lhs(), at) * eval(e.rhs(), at));
    case NodeKind::div: {
      const double num = eval(e.lhs(), at);
      const double den = eval(e.rhs(), at);
      if (den == 0.0) fail_eval(e, "division by zero");
      return checked(e, num / den);
    }
    case NodeKind::pow: {
      const double base = eval(e.lhs(), at);
      if (e.exponent() < 0 && base == 0.0) fail_eval(e, "division by zero");
      return checked(e, ipow(base, e.exponent()));
    }
    case NodeKind::sin: return checked(e, std::sin(eval(e.lhs(), at)));
    case NodeKind::cos: return checked(e, std::cos(eval(e.lhs(), at)));
    case NodeKind::exp: return checked(e, std::exp(eval(e.lhs(), at)));
    case NodeKind::tanh: return checked(e, std::tanh(eval(e.lhs(), at)));
  }
  fail_eval(e, "unknown node");
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr make_neg(const Expr& a) {
  double v;
  if (a.is_number(&v)) return Expr::number(-v);
  if (a.kind() == NodeKind::neg) return a.lhs();
  return Expr::unary(NodeKind::neg, a);
}

Expr make_add(const Expr& a, const Expr& b) {
  double va = 0.0, vb = 0.0;
  const bool na = a.is_number(&va), nb = b.is_number(&vb);
  if (na && nb && std::isfinite(va + vb)) return Expr::number(va + vb);
  if (na && va == 0.0) return b;
  if (nb && vb == 0.0) return a;
  return Expr::binary(NodeKind::add, a, b);
}

Expr make_sub(const Expr& a, const Expr& b) {
  double va = 0.0, vb = 0.0;
  const bool na = a.is_number(&va), nb = b.is_number(&vb);
  if (na && nb && std::isfinite(va - vb)) return Expr::number(va - vb);
  if (nb && vb == 0.0) return a;
  if (na && va == 0.0) return make_neg(b);
  return Expr::binary(NodeKind::sub, a, b);
}

Expr make_mul(const Expr& a, const Expr& b) {
  double va = 0.0, vb = 0.0;
  const bool na = a.is_number(&va), nb = b.is_number(&vb);
  if (na && nb && std::isfinite(va * vb)) return Expr::number(va * vb);
  if ((na && va == 0.0) || (nb && vb == 0.0)) return Expr::constant(0.0);
  if (na && va == 1.0) return b;
  if (nb && vb == 1.0) return a;
  if (na && va == -1.0) return make_neg(b);
  if (nb && vb == -1.0) return make_neg(a);
  return Expr::binary(NodeKind::mul, a, b);
}

Expr make_div(const Expr& a, const Expr& b) {
  double va = 0.0, vb = 0.0;
  const bool na = a.is_number(&va), nb = b.is_number(&vb);
  if (na && nb && vb != 0.0 && std::isfinite(va / vb)) {
    return Expr::number(va / vb);
  }
  if (na && va == 0.0) return Expr::constant(0.0);
  if (nb && vb == 1.0) return a;
  return Expr::binary(NodeKind::div, a, b);
}

Expr make_pow(const Expr& base, int n) {
  if (n == 0) return Expr::constant(1.0);
  if (n == 1) return base;
  double v;
  if (base.is_number(&v) && !(v == 0.0 && n < 0)) {
    const double r = ipow(v, n);
    if (std::isfinite(r)) return Expr::number(r);
  }
  return Expr::power(base, n);
}

}  // namespace

Expr partial(const Expr& e, Variable v) {
  switch (e.kind()) {
    case NodeKind::constant: return Expr::constant(0.0);
    case NodeKind::state:
      return Expr::constant(v.kind == VarKind::state && v.index == e.index()
                                ? 1.0
                                : 0.0);
    case NodeKind::time:
      return Expr::constant(v.kind == VarKind::time ? 1.0 : 0.0);
    case NodeKind::moment:
      return Expr::constant(v.kind == VarKind::moment && v.index == e.index()
                                ? 1.0
                                : 0.0);
    case NodeKind::neg: return make_neg(partial(e.lhs(), v));
    case NodeKind::add:
      return make_add(partial(e.lhs(), v), partial(e.rhs(), v));
    case NodeKind::sub:
      return make_sub(partial(e.lhs(), v), partial(e.rhs(), v));
    case NodeKind::mul:
      return make_add(make_mul(partial(e.lhs(), v), e.rhs()),
                      make_mul(e.lhs(), partial(e.rhs(), v)));
    case NodeKind::div: {
      const Expr da = partial(e.lhs(), v);
      const Expr db = partial(e.rhs(), v);
      return make_div(make_sub(make_mul(da, e.rhs()), make_mul(e.lhs(), db)),
                      make_pow(e.rhs(), 2));
    }
    case NodeKind::pow: {
      const int n = e.exponent();
      return make_mul(
          make_mul(Expr::number(static_cast<double>(n)), make_pow(e.lhs(), n - 1)),
          partial(e.lhs(), v));
    }
    case NodeKind::sin:
      return make_mul(Expr::unary(NodeKind::cos, e.lhs()), partial(e.lhs(), v));
    case NodeKind::cos:
      return make_mul(make_neg(Expr::unary(NodeKind::sin, e.lhs())),
                      partial(e.lhs(), v));
    case NodeKind::exp: return make_mul(e, partial(e.lhs(), v));
    case NodeKind::tanh:
      return make_mul(make_sub(Expr::constant(1.0), make_pow(e, 2)),
                      partial(e.lhs(), v));
  }
  return Expr::constant(0.0);
}

Usage usage(const Expr& e) {
  Usage u;
  std::set<int> states;
  auto walk = [&](auto&& self, const Expr& n) -> void {
    switch (n.kind()) {
      case NodeKind::constant: return;
      case NodeKind::state: states.insert(n.index()); return;
      case NodeKind::time: u.time = true; return;
      case NodeKind::moment: u.max_moment = std::max(u.max_moment, n.index()); return;
      case NodeKind::neg:
      case NodeKind::pow:
      case NodeKind::sin:
      case NodeKind::cos:
      case NodeKind::exp:
      case NodeKind::tanh: self(self, n.lhs()); return;
      default:
        self(self, n.lhs());
        self(self, n.rhs());
        return;
    }
  };
  walk(walk, e);
  u.states.assign(states.begin(), states.end());
  u.max_state = states.empty() ? 0 : *states.rbegin();
  return u;
}

}  // namespace omtk::dsl
