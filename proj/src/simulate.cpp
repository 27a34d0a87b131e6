#include "omtk/simulate.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "omtk/error.hpp"
#include "omtk/rng.hpp"
#include "parallel_error.hpp"

namespace omtk {

namespace {

constexpr double kMaxStoredBytes = 3.0e9;

void apply_workers(const SimConfig& cfg) {
  if (cfg.workers > 0) set_workers(cfg.workers);
}

void increments_for(const SimConfig& cfg, std::uint64_t path, std::uint64_t step,
                    double scale, std::span<double> out) {
  if (!cfg.noise) {
    for (double& v : out) v = 0.0;
    return;
  }
  normals(cfg.seed, Stream::brownian, path, step, out);
  for (double& v : out) v *= scale;
}

void run_single(const DegenerateSystem& system, const SimConfig& cfg, const Grid& grid,
                std::uint64_t path_index, Matrix& out, std::vector<double>& work) {
  const int dim = system.state_dim();
  const int m = system.m;
  const double dt = grid.dt();
  const double scale = std::sqrt(dt);
  out.resize(static_cast<Eigen::Index>(grid.nodes()), dim);
  work.resize(static_cast<std::size_t>(3 * dim + m));
  std::span<double> x(work.data(), dim);
  std::span<double> next(work.data() + dim, dim);
  std::span<double> scratch(work.data() + 2 * dim, dim);
  std::span<double> dw(work.data() + 3 * dim, m);
  for (int c = 0; c < dim; ++c) x[c] = system.x0(c);
  out.row(0) = system.x0.transpose();
  for (std::size_t n = 0; n < grid.steps; ++n) {
    increments_for(cfg, path_index, n, scale, dw);
    try {
      kernels::euler_particle(system, grid.time(n), dt, x, {}, dw, next, scratch);
    } catch (const Error& e) {
      throw EvalError("drift failed at step " + std::to_string(n) + ": " + e.what());
    }
    std::swap_ranges(next.begin(), next.end(), x.begin());
    for (int c = 0; c < dim; ++c) out(static_cast<Eigen::Index>(n + 1), c) = x[c];
  }
}

}  // namespace

Grid SimConfig::grid() const {
  if (particles < 1) throw InputError("particle count must be >= 1");
  return Grid::uniform(horizon, dt);
}

PathBundle simulate_mv(const DegenerateSystem& system, const SimConfig& cfg,
                       const StepObserver& observer, Exec exec) {
  system.validate();
  apply_workers(cfg);
  const Grid grid = cfg.grid();
  const auto n_particles = static_cast<Eigen::Index>(cfg.particles);
  const int d = system.d;
  const int m = system.m;
  const int dim = system.state_dim();
  const double dt = grid.dt();
  const bool mean_field = system.uses_moments();

  const double stored = static_cast<double>(n_particles) * static_cast<double>(grid.nodes()) *
                        (cfg.store_paths ? dim : 0) * 8.0;
  if (stored > kMaxStoredBytes) {
    throw InputError("storing " + std::to_string(n_particles) +
                     " trajectories exceeds the memory budget; disable store_paths");
  }

  PathBundle bundle;
  bundle.grid = grid;
  bundle.d = d;
  bundle.m = m;
  bundle.seed = cfg.seed;
  if (cfg.store_paths) {
    bundle.paths.assign(static_cast<std::size_t>(n_particles),
                        Matrix(static_cast<Eigen::Index>(grid.nodes()), dim));
  }
  if (cfg.store_increments) {
    bundle.increments.assign(static_cast<std::size_t>(n_particles),
                             Matrix(static_cast<Eigen::Index>(grid.steps), m));
  }

  StateMatrix x(n_particles, dim);
  for (Eigen::Index i = 0; i < n_particles; ++i) x.row(i) = system.x0.transpose();
  StateMatrix next(n_particles, dim);
  StateMatrix dw(n_particles, m);
  Matrix mom(0, m);

  auto record = [&](std::size_t n) {
    if (mean_field) {
      kernels::moments(x, d, m, system.moment_order, mom, exec);
      bundle.moments.push_back(mom);
    }
    if (cfg.store_paths) {
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
      for (Eigen::Index i = 0; i < n_particles; ++i) {
        bundle.paths[static_cast<std::size_t>(i)].row(static_cast<Eigen::Index>(n)) = x.row(i);
      }
    }
    if (observer) observer(n, grid.time(n), x, mom);
  };

  record(0);
  for (std::size_t n = 0; n < grid.steps; ++n) {
    if (cfg.noise) {
      kernels::brownian_increments(cfg.seed, cfg.first_path, n, dt, dw, exec);
    } else {
      dw.setZero();
    }
    if (cfg.store_increments) {
      for (Eigen::Index i = 0; i < n_particles; ++i) {
        bundle.increments[static_cast<std::size_t>(i)].row(static_cast<Eigen::Index>(n)) =
            dw.row(i);
      }
    }
    kernels::euler_step(system, n, grid.time(n), dt, x, mom, dw, next, exec);
    x.swap(next);
    record(n + 1);
  }
  bundle.final_state = std::move(x);
  return bundle;
}

Matrix simulate_single(const DegenerateSystem& system, const SimConfig& cfg,
                       std::uint64_t path_index) {
  system.validate();
  if (system.uses_moments()) {
    throw UnsupportedError("single-path simulation needs a moment-free q");
  }
  Matrix out;
  std::vector<double> work;
  run_single(system, cfg, cfg.grid(), path_index, out, work);
  return out;
}

void for_each_sample_path(const DegenerateSystem& system, const SimConfig& cfg,
                          std::size_t count,
                          const std::function<void(std::size_t, const Matrix&)>& visit) {
  system.validate();
  apply_workers(cfg);
  const Grid grid = cfg.grid();
  FirstError error;
  if (!system.uses_moments()) {
#pragma omp parallel
    {
      Matrix path;
      std::vector<double> work;
#pragma omp for schedule(static, 64)
      for (std::size_t i = 0; i < count; ++i) {
        try {
          run_single(system, cfg, grid, cfg.first_path + i, path, work);
          visit(i, path);
        } catch (const std::exception& e) {
          error.record(i, e);
        }
      }
    }
    error.rethrow("sample path");
    return;
  }
  const std::size_t batch = cfg.particles;
  for (std::size_t start = 0; start < count; start += batch) {
    SimConfig sub = cfg;
    sub.first_path = cfg.first_path + start;
    sub.store_paths = true;
    sub.store_increments = false;
    const PathBundle bundle = simulate_mv(system, sub);
    const std::size_t used = std::min(batch, count - start);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < used; ++i) {
      try {
        visit(start + i, bundle.paths[i]);
      } catch (const std::exception& e) {
        error.record(start + i, e);
      }
    }
    error.rethrow("sample path");
  }
}

Matrix brownian_path(const SimConfig& cfg, int m, std::uint64_t path_index) {
  const Grid grid = cfg.grid();
  const double scale = std::sqrt(grid.dt());
  Matrix w(static_cast<Eigen::Index>(grid.nodes()), m);
  w.row(0).setZero();
  std::vector<double> dw(static_cast<std::size_t>(m));
  for (std::size_t n = 0; n < grid.steps; ++n) {
    increments_for(cfg, path_index, n, scale, dw);
    for (int j = 0; j < m; ++j) {
      w(static_cast<Eigen::Index>(n + 1), j) = w(static_cast<Eigen::Index>(n), j) + dw[j];
    }
  }
  return w;
}

PathBundle simulate_auxiliary(const DegenerateSystem& system, const ReferencePath& phi,
                              const SimConfig& cfg) {
  system.validate();
  phi.require_admissible(system);
  apply_workers(cfg);
  const Grid grid = cfg.grid();
  if (!(grid == phi.grid)) throw InputError("reference path grid differs from the simulation grid");
  const int d = system.d;
  const int m = system.m;
  const int dim = d + m;
  const double dt = grid.dt();
  const double scale = std::sqrt(dt);
  const auto nodes = static_cast<Eigen::Index>(grid.nodes());

  Matrix p_phi(nodes, d);
  {
    std::vector<double> row(dim), p(d);
    for (Eigen::Index n = 0; n < nodes; ++n) {
      for (int c = 0; c < dim; ++c) row[c] = phi.phi(n, c);
      system.drift_p(grid.time(static_cast<std::size_t>(n)), row, p);
      for (int i = 0; i < d; ++i) p_phi(n, i) = p[i];
    }
  }

  PathBundle bundle;
  bundle.grid = grid;
  bundle.d = d;
  bundle.m = m;
  bundle.seed = cfg.seed;
  bundle.paths.assign(cfg.particles, Matrix(nodes, dim));
  bundle.increments.assign(cfg.particles, Matrix(static_cast<Eigen::Index>(grid.steps), m));
  FirstError error;
#pragma omp parallel
  {
    std::vector<double> x(dim), p(d), dw(m), w(m);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < cfg.particles; ++i) {
      Matrix& path = bundle.paths[i];
      Matrix& inc = bundle.increments[i];
      try {
        for (int c = 0; c < dim; ++c) x[c] = phi.phi(0, c);
        std::fill(w.begin(), w.end(), 0.0);
        path.row(0) = phi.phi.row(0);
        for (std::size_t n = 0; n < grid.steps; ++n) {
          const auto k = static_cast<Eigen::Index>(n);
          increments_for(cfg, cfg.first_path + i, n, scale, dw);
          system.drift_p(grid.time(n), x, p);
          for (int a = 0; a < d; ++a) {
            x[a] = x[a] + (phi.phi(k + 1, a) - phi.phi(k, a)) + dt * (p[a] - p_phi(k, a));
          }
          for (int j = 0; j < m; ++j) {
            w[j] += dw[j];
            inc(k, j) = dw[j];
            x[d + j] = phi.phi(k + 1, d + j) + w[j];
          }
          for (int c = 0; c < dim; ++c) path(k + 1, c) = x[c];
        }
      } catch (const std::exception& e) {
        error.record(i, e);
      }
    }
  }
  error.rethrow("auxiliary path");
  return bundle;
}

std::vector<double> girsanov_log_density(const DegenerateSystem& system,
                                         const ReferencePath& phi, const PathBundle& bundle,
                                         const std::vector<Matrix>* law_moments) {
  if (bundle.increments.size() != bundle.paths.size() || bundle.paths.empty()) {
    throw InputError("Girsanov density needs a bundle with retained increments");
  }
  if (!(bundle.grid == phi.grid)) throw InputError("bundle and path grids differ");
  const int d = system.d;
  const int m = system.m;
  const int dim = d + m;
  const Grid& grid = bundle.grid;
  const double dt = grid.dt();
  const std::size_t count = bundle.paths.size();

  std::vector<Matrix> own_law;
  if (system.uses_moments() && law_moments == nullptr) {
    StateMatrix cloud(static_cast<Eigen::Index>(count), dim);
    for (std::size_t n = 0; n < grid.steps; ++n) {
      for (std::size_t i = 0; i < count; ++i) {
        cloud.row(static_cast<Eigen::Index>(i)) = bundle.paths[i].row(static_cast<Eigen::Index>(n));
      }
      Matrix mom;
      kernels::moments(cloud, d, m, system.moment_order, mom);
      own_law.push_back(std::move(mom));
    }
    law_moments = &own_law;
  }
  if (law_moments != nullptr && law_moments->size() < grid.steps) {
    throw InputError("law moments must cover every grid step");
  }

  std::vector<double> out(count, 0.0);
  FirstError error;
#pragma omp parallel
  {
    std::vector<double> x(dim), q(m);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < count; ++i) {
      try {
        double stochastic = 0.0;
        double energy = 0.0;
        for (std::size_t n = 0; n < grid.steps; ++n) {
          const auto k = static_cast<Eigen::Index>(n);
          for (int c = 0; c < dim; ++c) x[c] = bundle.paths[i](k, c);
          std::span<const double> mom;
          if (law_moments != nullptr && system.uses_moments()) {
            const Matrix& mm = (*law_moments)[n];
            mom = {mm.data(), static_cast<std::size_t>(mm.size())};
          }
          system.drift_q(grid.time(n), x, mom, q);
          for (int j = 0; j < m; ++j) {
            const double zeta = q[j] - phi.dphi(k, d + j);
            stochastic += zeta * bundle.increments[i](k, j);
            energy += zeta * zeta * dt;
          }
        }
        out[i] = stochastic - 0.5 * energy;
      } catch (const std::exception& e) {
        error.record(i, e);
      }
    }
  }
  error.rethrow("Girsanov density of path");
  return out;
}

}  // namespace omtk
