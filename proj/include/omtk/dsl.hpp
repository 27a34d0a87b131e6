#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace omtk::dsl {

/// Declared state dimensions: x1..xd is the first component, x{d+1}..x{d+m}
/// the noisy second component.
struct Dims {
  int d = 1;
  int m = 1;

  int state() const { return d + m; }
};

enum class NodeKind : std::uint8_t {
  constant,
  state,   // x<index>, 1-based
  time,    // t
  moment,  // M<index>, raw moment of order index
  neg,
  add,
  sub,
  mul,
  div,
  pow,     // integer exponent
  sin,
  cos,
  exp,
  tanh,
};

struct Node;

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr();  // constant zero

  static Expr constant(double value);
  /// Non-negative literal, or negation of one when value < 0.
  static Expr number(double value);
  static Expr state(int index);
  static Expr time();
  static Expr moment(int order);
  static Expr unary(NodeKind kind, Expr arg);
  static Expr binary(NodeKind kind, Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);

  NodeKind kind() const;
  double value() const;   // constant
  int index() const;      // state index or moment order
  int exponent() const;   // pow
  const Expr& lhs() const;  // also the argument of unary nodes
  const Expr& rhs() const;

  /// True when this is a literal or the negation of one.
  bool is_number(double* out = nullptr) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;
  int index = 0;
  Expr lhs;
  Expr rhs;
};

/// Parses a single expression. Precedence: ^ binds tightest, then unary
/// minus, then * and /, then + and -. Exponents are integer literals.
/// Throws ParseError on malformed input or variables outside `dims`.
Expr parse(std::string_view source, Dims dims);

/// Canonical printer; parse(to_string(e)) reproduces e exactly.
std::string to_string(const Expr& e);

struct EvalPoint {
  double t = 0.0;
  std::span<const double> x;        // length >= highest referenced state index
  std::span<const double> moments;  // moments[k-1] = M_k
};

/// Exact tree-walk evaluation. Throws EvalError naming the offending
/// subexpression on division by zero or any non-finite intermediate.
double eval(const Expr& e, const EvalPoint& at);

enum class VarKind : std::uint8_t { state, time, moment };

struct Variable {
  VarKind kind = VarKind::state;
  int index = 1;

  static Variable x(int i) { return {VarKind::state, i}; }
  static Variable t() { return {VarKind::time, 0}; }
  static Variable m(int k) { return {VarKind::moment, k}; }
};

/// Symbolic partial derivative with light algebraic simplification. Moment
/// symbols are independent of state variables.
Expr partial(const Expr& e, Variable v);

struct Usage {
  int max_state = 0;       // highest x index, 0 if none
  int max_moment = 0;      // highest moment order, 0 if none
  bool time = false;
  std::vector<int> states;  // sorted distinct state indices
};

Usage usage(const Expr& e);

/// Flat postfix program for repeated evaluation in inner loops. Produces
/// bit-identical values to eval(); on any non-finite intermediate it defers
/// to eval() for the diagnostic.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(Expr e);

  double operator()(const EvalPoint& at) const;
  const Expr& expr() const { return expr_; }

 private:
  struct Instr {
    NodeKind op;
    int index;
    double value;
  };

  void emit(const Expr& e, int depth);

  Expr expr_;
  std::vector<Instr> code_;
  int max_depth_ = 0;
};

/// x^n by repeated squaring; shared by both evaluators.
double ipow(double x, int n);

}  // namespace omtk::dsl
