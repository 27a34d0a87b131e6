#include <array>
#include <cmath>

#include "omtk/dsl.hpp"
#include "omtk/error.hpp"

namespace omtk::dsl {

namespace {
constexpr int kStackLimit = 64;
}

CompiledExpr::CompiledExpr(Expr e) : expr_(std::move(e)) {
  emit(expr_, 1);
  if (max_depth_ > kStackLimit) {
    throw InputError("expression nesting too deep to compile: " + to_string(expr_));
  }
}

void CompiledExpr::emit(const Expr& e, int depth) {
  max_depth_ = std::max(max_depth_, depth);
  switch (e.kind()) {
    case NodeKind::constant:
    case NodeKind::state:
    case NodeKind::time:
    case NodeKind::moment: break;
    case NodeKind::neg:
    case NodeKind::pow:
    case NodeKind::sin:
    case NodeKind::cos:
    case NodeKind::exp:
    case NodeKind::tanh: emit(e.lhs(), depth); break;
    default:
      emit(e.lhs(), depth);
      emit(e.rhs(), depth + 1);
      break;
  }
  code_.push_back({e.kind(), e.index(), e.value()});
}

double CompiledExpr::operator()(const EvalPoint& at) const {
  std::array<double, kStackLimit> stack;
  int sp = 0;
  bool ok = true;
  for (const Instr& in : code_) {
    switch (in.op) {
      case NodeKind::constant: stack[sp++] = in.value; break;
      case NodeKind::state: {
        const auto i = static_cast<std::size_t>(in.index - 1);
        if (i >= at.x.size()) return eval(expr_, at);
        stack[sp++] = at.x[i];
        break;
      }
      case NodeKind::time: stack[sp++] = at.t; break;
      case NodeKind::moment: {
        const auto k = static_cast<std::size_t>(in.index - 1);
        if (k >= at.moments.size()) return eval(expr_, at);
        stack[sp++] = at.moments[k];
        break;
      }
      case NodeKind::neg: stack[sp - 1] = -stack[sp - 1]; break;
      case NodeKind::add: --sp; stack[sp - 1] = stack[sp - 1] + stack[sp]; break;
      case NodeKind::sub: --sp; stack[sp - 1] = stack[sp - 1] - stack[sp]; break;
      case NodeKind::mul: --sp; stack[sp - 1] = stack[sp - 1] * stack[sp]; break;
      case NodeKind::div:
        --sp;
        ok = ok && stack[sp] != 0.0;
        stack[sp - 1] = stack[sp - 1] / stack[sp];
        break;
      case NodeKind::pow: stack[sp - 1] = ipow(stack[sp - 1], in.index); break;
      case NodeKind::sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
      case NodeKind::cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
      case NodeKind::exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
      case NodeKind::tanh: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
    }
    ok = ok && std::isfinite(stack[sp - 1]);
  }
  // The tree walker throws with the offending subexpression.
  if (!ok) return eval(expr_, at);
  return stack[0];
}

}  // namespace omtk::dsl
