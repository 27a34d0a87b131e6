#pragma once

#include <span>
#include <string>
#include <vector>

#include "omtk/field.hpp"
#include "omtk/linalg.hpp"

namespace omtk {

inline constexpr int kMaxMomentOrder = 4;

/// dX1 = p(X) dt, dX2 = q(X, law of X2) dt + dW with X1 in R^d, X2 in R^m.
/// q[j] reads the raw moments of coordinate j of the second component.
struct DegenerateSystem {
  int d = 1;
  int m = 1;
  std::vector<Field> p;  // d components, moment free
  std::vector<Field> q;  // m components
  int moment_order = 1;
  Vector x0;             // initial point in R^{d+m}

  static DegenerateSystem parse(int d, int m, const std::vector<std::string>& p,
                                const std::vector<std::string>& q, int moment_order,
                                std::vector<double> x0);

  /// Throws SchemaError naming the offending component.
  void validate() const;

  dsl::Dims dims() const { return {d, m}; }
  int state_dim() const { return d + m; }
  bool uses_moments() const;
  /// p_i(x) == x_{d+i} with d == m, the second-order form dX1 = X2 dt.
  bool is_hamiltonian() const;
  /// p depends on the first component (and time) only.
  bool first_block_autonomous() const;
  bool symbolic() const;

  /// b = (p, q) at x; `moments` is order x m column-major (MomentVector layout).
  void drift(double t, std::span<const double> x, std::span<const double> moments,
             std::span<double> out) const;
  void drift_p(double t, std::span<const double> x, std::span<double> out) const;
  void drift_q(double t, std::span<const double> x, std::span<const double> moments,
               std::span<double> out) const;

  /// Stable identity for manifests: component labels, dims, order, x0.
  std::string describe() const;
};

/// A scalar component g_j evaluated with the Dirac law of a single state
/// coordinate: M_k = x_c^k. Provides the total state gradient including the
/// moment chain rule.
class DiracField {
 public:
  DiracField() = default;
  DiracField(Field g, int coordinate, int state_dim, int order);

  double value(double t, std::span<const double> x) const;
  /// out[i] = dg/dx_i + [i == coordinate] sum_k dg/dM_k * k x_c^(k-1).
  double gradient(double t, std::span<const double> x, std::span<double> out) const;

  const Field& field() const { return g_; }

 private:
  void fill_moments(std::span<const double> x, double* m) const;

  Field g_;
  int coordinate_ = 0;  // 0-based state index whose law enters g
  int order_ = 1;
  std::vector<Field> dx_;
  std::vector<Field> dm_;
};

/// Moment-free component used for p: value and gradient in the state.
class StateField {
 public:
  StateField() = default;
  StateField(Field g, int state_dim);

  double value(double t, std::span<const double> x) const { return g_(t, x); }
  void gradient(double t, std::span<const double> x, std::span<double> out) const;
  const Field& field() const { return g_; }

 private:
  Field g_;
  std::vector<Field> dx_;
};

}  // namespace omtk
