#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "omtk/grid.hpp"
#include "omtk/kernels.hpp"
#include "omtk/path.hpp"
#include "omtk/system.hpp"

namespace omtk {

struct SimConfig {
  std::size_t particles = 1000;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: library default
  /// Test hook: false replaces every Brownian increment by zero.
  bool noise = true;
  bool store_paths = true;
  bool store_increments = false;
  /// Path index of particle 0 in the RNG address space.
  std::uint64_t first_path = 0;

  /// Validates dt, horizon and N and returns the grid.
  Grid grid() const;
};

/// Trajectories are nodes x (d + m); increments are steps x m.
struct PathBundle {
  Grid grid;
  int d = 1;
  int m = 1;
  std::uint64_t seed = 0;
  std::vector<Matrix> paths;
  std::vector<Matrix> increments;
  /// Empirical moments of the second component per node (order x m each);
  /// empty for moment-free systems.
  std::vector<Matrix> moments;
  StateMatrix final_state;
};

/// Called after every node is reached, including n = 0.
using StepObserver = std::function<void(std::size_t n, double t, const StateMatrix& state,
                                        const Matrix& moments)>;

/// Interacting-particle Euler-Maruyama for the degenerate system. q sees the
/// per-step empirical moments of the N particles.
PathBundle simulate_mv(const DegenerateSystem& system, const SimConfig& cfg,
                       const StepObserver& observer = {}, Exec exec = Exec::parallel);

/// One path of a moment-free system driven by the increments of path
/// `path_index`. Equals row `path_index - cfg.first_path` of simulate_mv.
Matrix simulate_single(const DegenerateSystem& system, const SimConfig& cfg,
                       std::uint64_t path_index);

/// Calls visit(i, path) for `count` sample paths of X, possibly concurrently
/// for distinct i. Moment-free systems run every path on its own; otherwise
/// batches of cfg.particles interacting particles each contribute their
/// particle trajectories.
void for_each_sample_path(const DegenerateSystem& system, const SimConfig& cfg,
                          std::size_t count,
                          const std::function<void(std::size_t, const Matrix&)>& visit);

/// W at the grid nodes for path `path_index` (nodes x m, W_0 = 0): the
/// Brownian motion that drives that path in every simulator.
Matrix brownian_path(const SimConfig& cfg, int m, std::uint64_t path_index);

/// Auxiliary process: X2~ = phi2 + W and
/// X1~_{n+1} = X1~_n + (phi1_{n+1} - phi1_n) + dt [p(X~_n) - p(phi_n)],
/// so W = 0 reproduces phi exactly. Increments are always retained.
PathBundle simulate_auxiliary(const DegenerateSystem& system, const ReferencePath& phi,
                              const SimConfig& cfg);

/// log R = sum <zeta_n, dW_n> - 1/2 sum |zeta_n|^2 dt with
/// zeta = q(X~, law) - phi2'. The law defaults to the empirical moments of the
/// bundle's second component; pass per-node moments to override.
std::vector<double> girsanov_log_density(const DegenerateSystem& system,
                                         const ReferencePath& phi, const PathBundle& bundle,
                                         const std::vector<Matrix>* law_moments = nullptr);

}  // namespace omtk
