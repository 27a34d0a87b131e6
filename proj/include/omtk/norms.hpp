#pragma once

#include <string>

#include "omtk/grid.hpp"
#include "omtk/kernels.hpp"
#include "omtk/linalg.hpp"

namespace omtk {

/// Path norms on grid samples (rows are nodes, columns coordinates; the
/// pointwise magnitude is Euclidean).
///
///   sup    max_n |f_n|
///   Lp     (dt sum_n |f_n|^p)^(1/p), p >= 2, all nodes
///   holder sup + max_{i<j} |f_j - f_i| / (t_j - t_i)^alpha, 0 < alpha < 1/2
///
/// With the discrete L2 norm (dt sum_n |f_n|^2)^(1/2) over the same nodes,
/// |f| >= c |f|_L2 where c = (T + dt)^(-1/2) for sup and holder and
/// c = (T + dt)^(1/p - 1/2) for Lp.
struct PathNorm {
  enum class Kind { sup, lp, holder };
  Kind kind = Kind::sup;
  double p = 2.0;
  double alpha = 0.25;

  static PathNorm sup() { return {}; }
  static PathNorm lp(double p);
  static PathNorm holder(double alpha);
  /// "sup", "lp:<p>" or "holder:<alpha>".
  static PathNorm parse(const std::string& text);

  void validate() const;
  std::string name() const;
  double l2_constant(const Grid& grid) const;
};

double path_norm(const PathNorm& norm, const Matrix& f, double dt,
                 Exec exec = Exec::parallel);

double discrete_l2(const Matrix& f, double dt);

}  // namespace omtk
