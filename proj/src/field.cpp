#include "omtk/field.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace omtk {

struct Field::Impl {
  bool symbolic = true;
  dsl::CompiledExpr compiled;
  FieldFunction function;
  dsl::Usage usage;
  std::string label;
};

namespace {

constexpr double kRelativeStep = 1e-5;

FieldFunction central_difference(FieldFunction f, dsl::Variable v) {
  return [f = std::move(f), v](double t, std::span<const double> x,
                               std::span<const double> moments) {
    std::vector<double> xs(x.begin(), x.end());
    std::vector<double> ms(moments.begin(), moments.end());
    double* slot = nullptr;
    switch (v.kind) {
      case dsl::VarKind::time: slot = &t; break;
      case dsl::VarKind::state:
        if (static_cast<std::size_t>(v.index - 1) >= xs.size()) return 0.0;
        slot = &xs[v.index - 1];
        break;
      case dsl::VarKind::moment:
        if (static_cast<std::size_t>(v.index - 1) >= ms.size()) return 0.0;
        slot = &ms[v.index - 1];
        break;
    }
    const double center = *slot;
    const double h = kRelativeStep * (1.0 + std::abs(center));
    *slot = center + h;
    const double up = f(t, xs, ms);
    *slot = center - h;
    const double down = f(t, xs, ms);
    return (up - down) / (2.0 * h);
  };
}

}  // namespace

Field::Field() : Field(symbolic(dsl::Expr::constant(0.0))) {}

Field Field::symbolic(dsl::Expr e) {
  auto impl = std::make_shared<Impl>();
  impl->usage = dsl::usage(e);
  impl->label = dsl::to_string(e);
  impl->compiled = dsl::CompiledExpr(std::move(e));
  return Field(std::move(impl));
}

Field Field::parse(std::string_view source, dsl::Dims dims) {
  return symbolic(dsl::parse(source, dims));
}

Field Field::callable(FieldFunction f, dsl::Usage usage, std::string label) {
  auto impl = std::make_shared<Impl>();
  impl->symbolic = false;
  impl->function = std::move(f);
  impl->usage = std::move(usage);
  impl->label = std::move(label);
  return Field(std::move(impl));
}

double Field::operator()(const dsl::EvalPoint& at) const {
  if (impl_->symbolic) return impl_->compiled(at);
  return impl_->function(at.t, at.x, at.moments);
}

Field Field::partial(dsl::Variable v) const {
  if (impl_->symbolic) return symbolic(dsl::partial(impl_->compiled.expr(), v));
  std::string name = v.kind == dsl::VarKind::time    ? "t"
                     : v.kind == dsl::VarKind::state ? "x" + std::to_string(v.index)
                                                     : "M" + std::to_string(v.index);
  return callable(central_difference(impl_->function, v), impl_->usage,
                  "d(" + impl_->label + ")/d" + name);
}

bool Field::is_symbolic() const { return impl_->symbolic; }

const dsl::Expr* Field::expr() const {
  return impl_->symbolic ? &impl_->compiled.expr() : nullptr;
}

const dsl::Usage& Field::usage() const { return impl_->usage; }

std::string Field::label() const { return impl_->label; }

bool Field::uses_state(int index) const {
  const auto& s = impl_->usage.states;
  return std::binary_search(s.begin(), s.end(), index);
}

}  // namespace omtk
