#include "omtk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "omtk/dsl.hpp"
#include "omtk/error.hpp"

namespace omtk {

EmpiricalMeasure::EmpiricalMeasure(Matrix particles)
    : particles_(std::move(particles)) {
  if (particles_.rows() < 1) throw InputError("empirical measure needs a particle");
  weights_ = Vector::Constant(particles_.rows(),
                              1.0 / static_cast<double>(particles_.rows()));
  validate();
}

EmpiricalMeasure::EmpiricalMeasure(Matrix particles, Vector weights)
    : particles_(std::move(particles)), weights_(std::move(weights)) {
  validate();
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::span<const double> point) {
  Matrix p(1, static_cast<Eigen::Index>(point.size()));
  for (std::size_t j = 0; j < point.size(); ++j) p(0, static_cast<Eigen::Index>(j)) = point[j];
  return EmpiricalMeasure(std::move(p));
}

void EmpiricalMeasure::validate() const {
  if (particles_.rows() < 1) throw InputError("empirical measure needs a particle");
  if (weights_.size() != particles_.rows()) {
    throw InputError("weight count does not match particle count");
  }
  if (!particles_.allFinite()) throw InputError("particle coordinates must be finite");
  if ((weights_.array() < 0.0).any() || !weights_.allFinite()) {
    throw InputError("weights must be finite and non-negative");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw InputError("weights must sum to 1");
  }
}

MomentVector moments(const EmpiricalMeasure& mu, int order) {
  if (order < 1) throw InputError("moment order must be >= 1");
  const Matrix& y = mu.particles();
  const Vector& w = mu.weights();
  MomentVector out;
  out.order = order;
  out.values = Matrix::Zero(order, y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double power = 1.0;
      for (int k = 0; k < order; ++k) {
        power *= y(i, j);
        out.values(k, j) += w(i) * power;
      }
    }
  }
  return out;
}

MomentVector dirac_moments(std::span<const double> y, int order) {
  MomentVector out;
  out.order = order;
  out.values.resize(order, static_cast<Eigen::Index>(y.size()));
  for (std::size_t j = 0; j < y.size(); ++j) {
    for (int k = 1; k <= order; ++k) {
      out.values(k - 1, static_cast<Eigen::Index>(j)) = dsl::ipow(y[j], k);
    }
  }
  return out;
}

double wasserstein2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) {
    throw UnsupportedError("W2 is only implemented for one-dimensional measures");
  }
  auto sorted = [](const EmpiricalMeasure& m) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return m.particles()(a, 0) < m.particles()(b, 0);
    });
    return idx;
  };
  const auto a = sorted(mu);
  const auto b = sorted(nu);

  // Walk both quantile functions, transporting the smaller remaining mass.
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double left_a = mu.weights()(a[0]);
  double left_b = nu.weights()(b[0]);
  while (i < a.size() && j < b.size()) {
    const double mass = std::min(left_a, left_b);
    const double gap = mu.particles()(a[i], 0) - nu.particles()(b[j], 0);
    cost += mass * gap * gap;
    left_a -= mass;
    left_b -= mass;
    if (left_a <= 0.0 && ++i < a.size()) left_a = mu.weights()(a[i]);
    if (left_b <= 0.0 && ++j < b.size()) left_b = nu.weights()(b[j]);
  }
  return std::sqrt(std::max(cost, 0.0));
}

EmpiricalMeasure dirac_path_measure(const Grid& grid, const Matrix& samples,
                                    double t) {
  if (samples.rows() != static_cast<Eigen::Index>(grid.nodes())) {
    throw InputError("path samples do not match the grid");
  }
  const double clamped = std::clamp(t, 0.0, grid.horizon);
  const double pos = clamped / grid.dt();
  auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo >= grid.steps) lo = grid.steps - 1;
  const double frac = pos - static_cast<double>(lo);
  Matrix point(1, samples.cols());
  if (frac == 0.0) {
    point = samples.row(static_cast<Eigen::Index>(lo));
  } else if (frac == 1.0) {
    point = samples.row(static_cast<Eigen::Index>(lo + 1));
  } else {
    point = (1.0 - frac) * samples.row(static_cast<Eigen::Index>(lo)) +
            frac * samples.row(static_cast<Eigen::Index>(lo + 1));
  }
  return EmpiricalMeasure(std::move(point));
}

}  // namespace omtk
