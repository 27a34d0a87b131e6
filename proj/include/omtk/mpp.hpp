#pragma once

#include <Eigen/SparseCore>

#include <memory>
#include <string>
#include <vector>

#include "omtk/om.hpp"
#include "omtk/path.hpp"
#include "omtk/system.hpp"

namespace omtk {

/// Second-order form: left = (phi1(0), phi1'(0)), right = (phi1(T), phi1'(T)),
/// each of length 2d. General form: left = phi2(0), right = phi2(T), length m.
struct BoundaryConditions {
  enum class Kind { hamiltonian, general };
  Kind kind = Kind::hamiltonian;
  Vector left;
  Vector right;
};

/// Discretised -L as a function of the free interior samples.
///
/// Second-order form: the unknowns are phi1 at nodes 1..K-1. Ghost nodes
/// phi_{-1} = phi_1 - 2 dt v(0) and phi_{K+1} = phi_{K-1} + 2 dt v(T) impose the
/// velocity data, so v_n and a_n are centred differences at every node.
///
/// General form: the unknowns are phi2 at nodes 1..K-1, phi1 follows from
/// explicit Euler on phi1' = p, and phi2' uses the ReferencePath differences.
///
/// Both use J = sum_n w_n dt (|r_n|^2 + div_n) / 2 with trapezoid weights w_n.
class DiscreteAction {
 public:
  virtual ~DiscreteAction() = default;

  static std::unique_ptr<DiscreteAction> make(const DegenerateSystem& system,
                                              const BoundaryConditions& bc, const Grid& grid);

  virtual Eigen::Index size() const = 0;
  virtual double value(const Vector& z) const = 0;
  virtual double gradient(const Vector& z, Vector& g) const = 0;
  /// Unknowns from a full sample matrix (nodes x d or nodes x m); the
  /// boundary rows are ignored.
  virtual Vector pack(const Matrix& samples) const = 0;
  /// Full sampled path with derivatives consistent with the discretisation.
  virtual ReferencePath path(const Vector& z) const = 0;
  /// -J split into its two parts.
  virtual ActionValue action(const Vector& z) const = 0;
  /// Column width of the sample matrix accepted by pack().
  virtual int sample_dim() const = 0;
  /// Hessian of J, assembled from the exact difference stencils with the
  /// local drift curvature by central differences. Second-order form only.
  virtual Eigen::SparseMatrix<double> hessian(const Vector& z) const;

  const Grid& grid() const { return grid_; }

 protected:
  explicit DiscreteAction(const Grid& grid) : grid_(grid) {}
  Grid grid_;
};

struct MppOptions {
  enum class Method { newton, lbfgs };
  /// Newton on the assembled Hessian is the default for the second-order
  /// form; the general form always uses L-BFGS.
  Method method = Method::newton;
  double gradient_tolerance = 1e-6;  // on |g|_inf / (1 + |J|)
  std::size_t max_iterations = 10000;
  int lbfgs_memory = 12;
};

struct MppSolution {
  ReferencePath path;
  ActionValue action;           // of the returned path, second-order or reduced form
  double objective = 0.0;       // J = -L of the discretisation
  double gradient_norm = 0.0;   // inf-norm at termination
  std::size_t iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> objective_history;  // accepted iterates
  Vector unknowns;
};

/// Never throws for non-convergence; NaN in the objective raises EvalError
/// carrying the offending iterate summary.
MppSolution minimize_action(const DegenerateSystem& system, const BoundaryConditions& bc,
                            const Grid& grid, const Matrix& init, const MppOptions& opts = {});

/// Runs every start in parallel and returns solutions ordered by objective.
std::vector<MppSolution> minimize_action_multistart(const DegenerateSystem& system,
                                                    const BoundaryConditions& bc,
                                                    const Grid& grid,
                                                    const std::vector<Matrix>& inits,
                                                    const MppOptions& opts = {});

/// Linear interpolation of the boundary positions (second-order form) or of
/// phi2 (general form).
Matrix linear_initial_guess(const DegenerateSystem& system, const BoundaryConditions& bc,
                            const Grid& grid);
/// tanh-shaped switch between the boundary states centred at T/2.
Matrix tanh_initial_guess(const DegenerateSystem& system, const BoundaryConditions& bc,
                          const Grid& grid, double width);

struct LandscapeRow {
  std::size_t id = 0;
  ActionValue action;
};

/// Discrete action of each sample (same discretisation as the minimiser),
/// sorted by total, largest first.
std::vector<LandscapeRow> action_landscape(const DegenerateSystem& system,
                                           const BoundaryConditions& bc, const Grid& grid,
                                           const std::vector<Matrix>& samples);

/// Residuals of the fourth-order Euler-Lagrange equation for q = M1 (x1^2 - 1)
/// at interior nodes 2..K-2, all measure integrals against Dirac laws.
struct ElResidual {
  std::vector<double> times;
  /// phi'''' + 2 phi phi' phi'' - 2 phi phi' - (2 phi'^2 + phi'') phi'
  ///   - 2 phi^2 (phi^2 - 1) phi'
  std::vector<double> verbatim;
  /// Variational derivative of int |phi'' - phi' (phi^2 - 1)|^2 / 2:
  /// phi'''' - 6 phi phi' phi'' - 2 phi'^3 - phi'' (phi^2 - 1)^2
  ///   - 2 phi phi'^2 (phi^2 - 1)
  std::vector<double> derived;
  double l2_verbatim = 0.0;  // sqrt(dt sum r^2)
  double l2_derived = 0.0;
};

/// Needs K >= 9. `position` is nodes x 1.
ElResidual el_residual_example(const Grid& grid, const Matrix& position);

}  // namespace omtk
