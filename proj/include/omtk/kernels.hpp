#pragma once

#include <cstdint>
#include <span>

#include "omtk/linalg.hpp"
#include "omtk/system.hpp"

namespace omtk {

/// One particle per row.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Exec { serial, parallel };

/// Caps OpenMP workers for subsequent parallel kernels; 0 restores the default.
void set_workers(int workers);
int workers();

namespace kernels {

/// Particles are summed in fixed blocks of this size and the block partials
/// are added in index order, so the result does not depend on thread count.
inline constexpr Eigen::Index kReductionBlock = 1024;

/// Coordinatewise raw moments of the columns [offset, offset + m) of `state`
/// under uniform weights. `out` is order x m.
void moments(const StateMatrix& state, Eigen::Index offset, Eigen::Index m, int order,
             Matrix& out, Exec exec = Exec::parallel);

/// Fills row i of `dw` with sqrt(dt) * N(0, 1) draws addressed by
/// (seed, first_path + i, step).
void brownian_increments(std::uint64_t seed, std::uint64_t first_path, std::uint64_t step,
                         double dt, StateMatrix& dw, Exec exec = Exec::parallel);

/// One Euler-Maruyama update of a single particle. `scratch` holds d + m
/// doubles. Shared by the particle and single-path simulators so both produce
/// identical bits.
inline void euler_particle(const DegenerateSystem& system, double t, double dt,
                           std::span<const double> x, std::span<const double> moments,
                           std::span<const double> dw, std::span<double> next,
                           std::span<double> scratch) {
  system.drift(t, x, moments, scratch);
  const int d = system.d;
  for (int k = 0; k < d; ++k) next[k] = x[k] + scratch[k] * dt;
  for (int j = 0; j < system.m; ++j) next[d + j] = x[d + j] + scratch[d + j] * dt + dw[j];
}

/// Euler-Maruyama: X1 += p dt, X2 += q dt + dW. Drift errors are rethrown
/// with the step and lowest failing particle index.
void euler_step(const DegenerateSystem& system, std::size_t step, double t, double dt,
                const StateMatrix& state, const Matrix& moments, const StateMatrix& dw,
                StateMatrix& next, Exec exec = Exec::parallel);

/// max over node pairs of |f_j - f_i| / ((j - i) dt)^alpha, Euclidean rows.
double holder_seminorm(const Matrix& f, double dt, double alpha, Exec exec = Exec::parallel);

/// Sum with pairwise splitting; order fixed by length only.
double pairwise_sum(std::span<const double> values);

}  // namespace kernels

/// Plain loops used as the reference in tests and benchmarks.
namespace serial {

void moments(const StateMatrix& state, Eigen::Index offset, Eigen::Index m, int order,
             Matrix& out);
double holder_seminorm(const Matrix& f, double dt, double alpha);

}  // namespace serial

}  // namespace omtk
