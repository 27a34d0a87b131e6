#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "omtk/grid.hpp"
#include "omtk/linalg.hpp"
#include "omtk/system.hpp"

namespace omtk {

using PathFunction = std::function<void(double t, std::span<double> out)>;

enum class RoughnessPolicy { warn, reject };

/// Centered differences inside, one-sided second order at both ends.
/// Rows are grid nodes; needs at least 3 nodes.
Matrix finite_difference(const Matrix& samples, double dt);

/// Tube centre phi = (phi1, phi2) sampled on a uniform grid, with phi'.
struct ReferencePath {
  Grid grid;
  int d = 1;
  int m = 1;
  Matrix phi;   // nodes x (d + m)
  Matrix dphi;  // nodes x (d + m)
  bool analytic = false;

  static ReferencePath from_samples(const Grid& grid, int d, int m, Matrix phi);
  /// Derivatives supplied by the caller are treated as exact.
  static ReferencePath from_samples(const Grid& grid, int d, int m, Matrix phi, Matrix dphi);
  static ReferencePath from_functions(const Grid& grid, int d, int m, const PathFunction& phi,
                                      const PathFunction& dphi);

  /// Given phi2 and its derivative, integrates phi1' = p(phi) from x0 with RK4
  /// (`substeps` per grid interval) and sets phi1' = p(phi) at the nodes.
  static ReferencePath constrained(const DegenerateSystem& system, const Grid& grid,
                                   const PathFunction& phi2, const PathFunction& dphi2,
                                   int substeps = 8);

  /// Second-order form: phi2 = phi1', phi2' = phi1''.
  static ReferencePath hamiltonian_lift(const Grid& grid, int d, const PathFunction& q,
                                        const PathFunction& dq, const PathFunction& ddq);

  Eigen::Index nodes() const { return phi.rows(); }
  auto first() const { return phi.leftCols(d); }
  auto second() const { return phi.rightCols(m); }
  auto dfirst() const { return dphi.leftCols(d); }
  auto dsecond() const { return dphi.rightCols(m); }
  std::vector<double> state(Eigen::Index n) const;

  /// max_n |phi1'(t_n) - p(phi(t_n))|.
  double structural_residual(const DegenerateSystem& system) const;
  /// 1e-8 for analytic derivatives, 10 dt for finite-differenced ones.
  double structural_tolerance() const;
  /// Throws InputError citing the residual when it exceeds the tolerance, or
  /// when phi(0) differs from x0 or the shapes disagree with the system.
  void require_admissible(const DegenerateSystem& system) const;

  /// dt * sum |(phi_{n+1} - phi_n) / dt|^2 for phi - x0.
  double discrete_energy() const;
  /// Compares the discrete energy with its value on the coarsened grid. A
  /// sampled path with finite Cameron-Martin energy keeps the ratio near 1;
  /// Brownian-like samples roughly double it. Returns warnings or throws.
  std::vector<std::string> check_regularity(RoughnessPolicy policy) const;
};

}  // namespace omtk
