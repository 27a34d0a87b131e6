#pragma once

#include <span>

#include "omtk/grid.hpp"
#include "omtk/linalg.hpp"

namespace omtk {

/// Weighted particle cloud over R^m. Rows of `particles` are points.
class EmpiricalMeasure {
 public:
  /// Uniform weights.
  explicit EmpiricalMeasure(Matrix particles);
  /// Weights must be non-negative and sum to 1 within 1e-12.
  EmpiricalMeasure(Matrix particles, Vector weights);

  static EmpiricalMeasure dirac(std::span<const double> point);

  const Matrix& particles() const { return particles_; }
  const Vector& weights() const { return weights_; }
  Eigen::Index size() const { return particles_.rows(); }
  Eigen::Index dim() const { return particles_.cols(); }

 private:
  void validate() const;

  Matrix particles_;
  Vector weights_;
};

/// Coordinatewise raw moments M_j = sum_i w_i y_i^j, j = 1..order. Stored
/// order x m, column-major, so each coordinate's moments are contiguous.
struct MomentVector {
  int order = 0;
  Matrix values;

  std::span<const double> coordinate(int j) const {
    return {values.data() + static_cast<std::ptrdiff_t>(j) * order,
            static_cast<std::size_t>(order)};
  }
  double at(int k, int j) const { return values(k - 1, j); }
};

MomentVector moments(const EmpiricalMeasure& mu, int order);

/// Moments of the Dirac mass at y: M_k = y^k coordinatewise.
MomentVector dirac_moments(std::span<const double> y, int order);

/// Exact 1-d W2 by monotone (quantile) coupling. Handles general weights;
/// for equal counts with uniform weights this is sorted matching.
/// Throws UnsupportedError for m != 1.
double wasserstein2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Dirac at the linearly interpolated value of a sampled path at time t.
/// `samples` has one row per grid node.
EmpiricalMeasure dirac_path_measure(const Grid& grid, const Matrix& samples,
                                    double t);

}  // namespace omtk
