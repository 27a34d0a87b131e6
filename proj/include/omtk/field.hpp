#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "omtk/dsl.hpp"

namespace omtk {

using FieldFunction = std::function<double(
    double t, std::span<const double> x, std::span<const double> moments)>;

/// A scalar drift component f(t, x, M1..Mk). Either a parsed expression
/// (exact symbolic partials) or a compiled-in callable (partials by central
/// differences with step 1e-5 * (1 + |arg|)).
class Field {
 public:
  Field();  // constant zero

  static Field symbolic(dsl::Expr e);
  static Field parse(std::string_view source, dsl::Dims dims);
  /// `usage` declares which arguments the callable reads; it drives structure
  /// checks (e.g. whether p touches the second component).
  static Field callable(FieldFunction f, dsl::Usage usage, std::string label);

  double operator()(const dsl::EvalPoint& at) const;
  double operator()(double t, std::span<const double> x,
                    std::span<const double> moments = {}) const {
    return (*this)(dsl::EvalPoint{t, x, moments});
  }

  Field partial(dsl::Variable v) const;

  bool is_symbolic() const;
  /// Null for callables.
  const dsl::Expr* expr() const;
  const dsl::Usage& usage() const;
  std::string label() const;

  bool uses_state(int index) const;
  bool uses_moments() const { return usage().max_moment > 0; }

 private:
  struct Impl;
  explicit Field(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace omtk
