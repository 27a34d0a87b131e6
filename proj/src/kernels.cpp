#include "omtk/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <vector>

#include "omtk/error.hpp"
#include "omtk/rng.hpp"

namespace omtk {

namespace {
int g_workers = 0;
}

void set_workers(int workers) {
  g_workers = std::max(0, workers);
  if (g_workers > 0) omp_set_num_threads(g_workers);
}

int workers() { return g_workers > 0 ? g_workers : omp_get_max_threads(); }

namespace kernels {

void moments(const StateMatrix& state, Eigen::Index offset, Eigen::Index m, int order,
             Matrix& out, Exec exec) {
  const Eigen::Index n = state.rows();
  const Eigen::Index blocks = (n + kReductionBlock - 1) / kReductionBlock;
  // partial(b) holds order*m sums for block b.
  Matrix partial = Matrix::Zero(order * m, blocks);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel && blocks > 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index lo = b * kReductionBlock;
    const Eigen::Index hi = std::min(n, lo + kReductionBlock);
    for (Eigen::Index i = lo; i < hi; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double y = state(i, offset + j);
        double power = 1.0;
        for (int k = 0; k < order; ++k) {
          power *= y;
          partial(j * order + k, b) += power;
        }
      }
    }
  }
  out.resize(order, m);
  const double inv = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (int k = 0; k < order; ++k) {
      double s = 0.0;
      for (Eigen::Index b = 0; b < blocks; ++b) s += partial(j * order + k, b);
      out(k, j) = s * inv;
    }
  }
}

void brownian_increments(std::uint64_t seed, std::uint64_t first_path, std::uint64_t step,
                         double dt, StateMatrix& dw, Exec exec) {
  const double scale = std::sqrt(dt);
  const auto cols = static_cast<std::size_t>(dw.cols());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index i = 0; i < dw.rows(); ++i) {
    std::span<double> row(dw.row(i).data(), cols);
    normals(seed, Stream::brownian, first_path + static_cast<std::uint64_t>(i), step, row);
    for (double& v : row) v *= scale;
  }
}

void euler_step(const DegenerateSystem& system, std::size_t step, double t, double dt,
                const StateMatrix& state, const Matrix& moments, const StateMatrix& dw,
                StateMatrix& next, Exec exec) {
  const int m = system.m;
  const auto dim = static_cast<std::size_t>(system.state_dim());
  next.resize(state.rows(), state.cols());
  const std::span<const double> mom(moments.data(), static_cast<std::size_t>(moments.size()));
  const Eigen::Index n = state.rows();
  Eigen::Index failed = n;
  std::string message;
#pragma omp parallel if (exec == Exec::parallel)
  {
    std::vector<double> b(dim);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      try {
        euler_particle(system, t, dt, {state.row(i).data(), dim}, mom,
                       {dw.row(i).data(), static_cast<std::size_t>(m)},
                       {next.row(i).data(), dim}, b);
      } catch (const std::exception& e) {
#pragma omp critical(omtk_euler_error)
        if (i < failed) {
          failed = i;
          message = e.what();
        }
      }
    }
  }
  if (failed < n) {
    throw EvalError("drift failed at step " + std::to_string(step) + ", particle " +
                    std::to_string(failed) + ": " + message);
  }
}

double holder_seminorm(const Matrix& f, double dt, double alpha, Exec exec) {
  const Eigen::Index nodes = f.rows();
  std::vector<double> lag_pow(static_cast<std::size_t>(nodes));
  for (Eigen::Index l = 1; l < nodes; ++l) {
    lag_pow[l] = std::pow(static_cast<double>(l) * dt, alpha);
  }
  double best = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best) if (exec == Exec::parallel)
  for (Eigen::Index i = 0; i < nodes; ++i) {
    for (Eigen::Index j = i + 1; j < nodes; ++j) {
      const double gap = (f.row(j) - f.row(i)).norm();
      best = std::max(best, gap / lag_pow[j - i]);
    }
  }
  return best;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace kernels

namespace serial {

void moments(const StateMatrix& state, Eigen::Index offset, Eigen::Index m, int order,
             Matrix& out) {
  out = Matrix::Zero(order, m);
  for (Eigen::Index i = 0; i < state.rows(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (int k = 1; k <= order; ++k) out(k - 1, j) += std::pow(state(i, offset + j), k);
    }
  }
  out /= static_cast<double>(state.rows());
}

double holder_seminorm(const Matrix& f, double dt, double alpha) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < f.rows(); ++j) {
      const double gap = (f.row(j) - f.row(i)).norm();
      best = std::max(best, gap / std::pow(static_cast<double>(j - i) * dt, alpha));
    }
  }
  return best;
}

}  // namespace serial

}  // namespace omtk
