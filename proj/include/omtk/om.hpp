#pragma once

#include <span>
#include <string>
#include <vector>

#include "omtk/path.hpp"
#include "omtk/system.hpp"

namespace omtk {

/// L = kinetic + divergence, kinetic = -1/2 int |phi2' - q|^2 and
/// divergence = -1/2 int div_{x2} q, both with the Dirac law of phi2(t).
struct ActionValue {
  double kinetic = 0.0;
  double divergence = 0.0;
  double total = 0.0;
  /// |I_h - I_2h| / 3 summed over both integrals.
  double quad_error = 0.0;
  std::vector<std::string> warnings;
};

struct Quadrature {
  double value = 0.0;
  double error = 0.0;
};

/// Composite trapezoid over grid samples with the Richardson estimate
/// |I_h - I_2h| / 3 from the every-other-node grid.
Quadrature trapezoid(std::span<const double> f, double dt);

struct ActionOptions {
  RoughnessPolicy roughness = RoughnessPolicy::warn;
};

/// Reduced form over the second component.
ActionValue om_action(const DegenerateSystem& system, const ReferencePath& phi,
                      const ActionOptions& opts = {});

/// -1/2 int |N+(phi' - b)|^2 - 1/2 int sum_ij N+_ij d_i b_j with N the noise
/// matrix and N+ from the partitioned pseudoinverse formula.
ActionValue om_action_global(const DegenerateSystem& system, const ReferencePath& phi,
                             const ActionOptions& opts = {});

/// Position, velocity and acceleration of phi1 for the second-order form.
struct HamiltonianPath {
  Grid grid;
  Matrix position;      // nodes x d
  Matrix velocity;      // nodes x d
  Matrix acceleration;  // nodes x d

  /// Derivatives by finite differences (second order throughout).
  static HamiltonianPath from_samples(const Grid& grid, Matrix position);
  static HamiltonianPath from_functions(const Grid& grid, int d, const PathFunction& q,
                                        const PathFunction& dq, const PathFunction& ddq);
  ReferencePath lift() const;
};

/// Second differences inside, one-sided second order at both ends. Needs at
/// least 4 nodes.
Matrix second_difference(const Matrix& samples, double dt);

/// -1/2 int |phi1'' - f(phi1, phi1', law of phi1')|^2 - 1/2 int div_{phi1'} f
/// for systems with p = x2. Throws UnsupportedError otherwise.
ActionValue om_action_hamiltonian(const DegenerateSystem& system, const HamiltonianPath& path);

/// For p = g(x1) the first component is the deterministic solution x1(t) of
/// x1' = g(x1) (RK4 here), and the action is the non-degenerate one for
/// dX2 = q(x1(t), X2, law) dt + dW evaluated on phi2.
ActionValue om_action_nondegenerate_reduction(const DegenerateSystem& system,
                                              const ReferencePath& phi);

/// RK4 solution of x1' = p(t, x1) on the grid, `substeps` per interval.
Matrix integrate_first_block(const DegenerateSystem& system, const Grid& grid,
                             int substeps = 8);

}  // namespace omtk
