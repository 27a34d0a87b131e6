#include "omtk/om.hpp"

#include <cmath>
#include <sstream>

#include "omtk/error.hpp"
#include "omtk/kernels.hpp"
#include "omtk/linalg.hpp"
#include "parallel_error.hpp"

namespace omtk {

namespace {

/// Dirac moments of each second-component coordinate, order x m column-major.
void dirac_moments_of(std::span<const double> x2, int order, std::span<double> out) {
  for (std::size_t j = 0; j < x2.size(); ++j) {
    double power = 1.0;
    for (int k = 0; k < order; ++k) {
      power *= x2[j];
      out[j * order + k] = power;
    }
  }
}

EvalError located(double t, const std::exception& e) {
  std::ostringstream os;
  os << "action integrand at t = " << t << ": " << e.what();
  return EvalError(os.str());
}

/// Integrands of the reduced form at every node. `state` rows are the full
/// state, `drift2` rows are phi2'.
void reduced_integrands(const DegenerateSystem& system, const Grid& grid, const Matrix& state,
                        const Matrix& velocity2, std::vector<double>& kinetic,
                        std::vector<double>& divergence) {
  const int d = system.d;
  const int m = system.m;
  const int dim = d + m;
  const int order = system.moment_order;
  std::vector<Field> dq;
  for (int j = 0; j < m; ++j) dq.push_back(system.q[j].partial(dsl::Variable::x(d + j + 1)));
  const auto nodes = static_cast<std::size_t>(state.rows());
  kinetic.assign(nodes, 0.0);
  divergence.assign(nodes, 0.0);
  FirstError error;
#pragma omp parallel
  {
    std::vector<double> x(dim), q(m), mom(static_cast<std::size_t>(order * m));
#pragma omp for schedule(static)
    for (std::size_t n = 0; n < nodes; ++n) {
      const double t = grid.time(n);
      try {
        for (int c = 0; c < dim; ++c) x[c] = state(static_cast<Eigen::Index>(n), c);
        dirac_moments_of(std::span<const double>(x).subspan(d), order, mom);
        system.drift_q(t, x, mom, q);
        double kin = 0.0;
        double div = 0.0;
        for (int j = 0; j < m; ++j) {
          const double r = velocity2(static_cast<Eigen::Index>(n), j) - q[j];
          kin += r * r;
          div += dq[j](t, x, std::span<const double>(mom).subspan(j * order, order));
        }
        if (!std::isfinite(kin) || !std::isfinite(div)) {
          throw EvalError("non-finite integrand");
        }
        kinetic[n] = kin;
        divergence[n] = div;
      } catch (const std::exception& e) {
        error.record(n, located(t, e));
      }
    }
  }
  error.rethrow("node");
}

ActionValue assemble(const std::vector<double>& kinetic, const std::vector<double>& divergence,
                     double dt) {
  const Quadrature k = trapezoid(kinetic, dt);
  const Quadrature v = trapezoid(divergence, dt);
  ActionValue out;
  out.kinetic = -0.5 * k.value;
  out.divergence = -0.5 * v.value;
  out.total = out.kinetic + out.divergence;
  out.quad_error = 0.5 * (k.error + v.error);
  return out;
}

void validate_path(const DegenerateSystem& system, const ReferencePath& phi,
                   const ActionOptions& opts, ActionValue& out) {
  system.validate();
  phi.require_admissible(system);
  out.warnings = phi.check_regularity(opts.roughness);
}

}  // namespace

Quadrature trapezoid(std::span<const double> f, double dt) {
  if (f.size() < 2) throw InputError("trapezoid rule needs two nodes");
  const std::size_t k = f.size() - 1;
  std::vector<double> fine(f.size());
  for (std::size_t n = 0; n <= k; ++n) fine[n] = (n == 0 || n == k) ? 0.5 * f[n] : f[n];
  const double value = dt * kernels::pairwise_sum(fine);
  if (k < 2) return {value, 0.0};
  // Coarse rule on pairs of intervals; a trailing odd interval keeps step dt.
  const std::size_t pairs = k / 2;
  std::vector<double> coarse;
  coarse.reserve(pairs + 1);
  for (std::size_t i = 0; i < pairs; ++i) {
    coarse.push_back(dt * (f[2 * i] + f[2 * i + 2]));
  }
  if (k % 2 == 1) coarse.push_back(0.5 * dt * (f[k - 1] + f[k]));
  const double coarse_value = kernels::pairwise_sum(coarse);
  return {value, std::abs(value - coarse_value) / 3.0};
}

ActionValue om_action(const DegenerateSystem& system, const ReferencePath& phi,
                      const ActionOptions& opts) {
  ActionValue checks;
  validate_path(system, phi, opts, checks);
  std::vector<double> kinetic, divergence;
  const Matrix velocity2 = phi.dsecond();
  reduced_integrands(system, phi.grid, phi.phi, velocity2, kinetic, divergence);
  ActionValue out = assemble(kinetic, divergence, phi.grid.dt());
  out.warnings = std::move(checks.warnings);
  return out;
}

ActionValue om_action_global(const DegenerateSystem& system, const ReferencePath& phi,
                             const ActionOptions& opts) {
  ActionValue checks;
  validate_path(system, phi, opts, checks);
  const int d = system.d;
  const int m = system.m;
  const int dim = d + m;
  const int order = system.moment_order;
  const Matrix noise_pinv = pinv_partitioned(degenerate_noise_matrix(d, m));

  // Partials d_i b_j for every pair with a nonzero weight in N+.
  struct Term {
    int i;
    int j;
    double weight;
    Field partial;
  };
  std::vector<Term> terms;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double w = noise_pinv(i, j);
      if (w == 0.0) continue;
      const Field& b = j < d ? system.p[j] : system.q[j - d];
      terms.push_back({i, j, w, b.partial(dsl::Variable::x(i + 1))});
    }
  }

  const auto nodes = static_cast<std::size_t>(phi.nodes());
  std::vector<double> kinetic(nodes), divergence(nodes);
  FirstError error;
#pragma omp parallel
  {
    std::vector<double> x(dim), b(dim), mom(static_cast<std::size_t>(order * m));
    Vector residual(dim);
#pragma omp for schedule(static)
    for (std::size_t n = 0; n < nodes; ++n) {
      const double t = phi.grid.time(n);
      try {
        const auto row = static_cast<Eigen::Index>(n);
        for (int c = 0; c < dim; ++c) x[c] = phi.phi(row, c);
        dirac_moments_of(std::span<const double>(x).subspan(d), order, mom);
        system.drift(t, x, mom, b);
        for (int c = 0; c < dim; ++c) residual(c) = phi.dphi(row, c) - b[c];
        kinetic[n] = (noise_pinv * residual).squaredNorm();
        double div = 0.0;
        for (const Term& term : terms) {
          std::span<const double> moments;
          if (term.j >= d) {
            moments = std::span<const double>(mom).subspan((term.j - d) * order, order);
          }
          div += term.weight * term.partial(t, x, moments);
        }
        if (!std::isfinite(kinetic[n]) || !std::isfinite(div)) {
          throw EvalError("non-finite integrand");
        }
        divergence[n] = div;
      } catch (const std::exception& e) {
        error.record(n, located(t, e));
      }
    }
  }
  error.rethrow("node");
  ActionValue out = assemble(kinetic, divergence, phi.grid.dt());
  out.warnings = std::move(checks.warnings);
  return out;
}

Matrix second_difference(const Matrix& f, double dt) {
  const Eigen::Index k = f.rows() - 1;
  if (k < 3) throw InputError("second differences need at least 4 grid nodes");
  const double h2 = dt * dt;
  Matrix out(f.rows(), f.cols());
  out.row(0) = (2.0 * f.row(0) - 5.0 * f.row(1) + 4.0 * f.row(2) - f.row(3)) / h2;
  for (Eigen::Index n = 1; n < k; ++n) {
    out.row(n) = (f.row(n + 1) - 2.0 * f.row(n) + f.row(n - 1)) / h2;
  }
  out.row(k) = (2.0 * f.row(k) - 5.0 * f.row(k - 1) + 4.0 * f.row(k - 2) - f.row(k - 3)) / h2;
  return out;
}

HamiltonianPath HamiltonianPath::from_samples(const Grid& grid, Matrix position) {
  if (position.rows() != static_cast<Eigen::Index>(grid.nodes())) {
    throw InputError("path samples do not match the grid");
  }
  require_finite(position, "path samples");
  HamiltonianPath out{grid, std::move(position), Matrix(), Matrix()};
  out.velocity = finite_difference(out.position, grid.dt());
  out.acceleration = second_difference(out.position, grid.dt());
  return out;
}

HamiltonianPath HamiltonianPath::from_functions(const Grid& grid, int d, const PathFunction& q,
                                                const PathFunction& dq,
                                                const PathFunction& ddq) {
  const ReferencePath lifted = ReferencePath::hamiltonian_lift(grid, d, q, dq, ddq);
  return {grid, lifted.phi.leftCols(d), lifted.phi.rightCols(d), lifted.dphi.rightCols(d)};
}

ReferencePath HamiltonianPath::lift() const {
  const Eigen::Index d = position.cols();
  Matrix phi(position.rows(), 2 * d);
  Matrix dphi(position.rows(), 2 * d);
  phi << position, velocity;
  dphi << velocity, acceleration;
  return ReferencePath::from_samples(grid, static_cast<int>(d), static_cast<int>(d),
                                     std::move(phi), std::move(dphi));
}

ActionValue om_action_hamiltonian(const DegenerateSystem& system, const HamiltonianPath& path) {
  system.validate();
  if (!system.is_hamiltonian()) {
    throw UnsupportedError("second-order form needs p_i = x_{d+i}");
  }
  if (path.position.cols() != system.d) throw InputError("path dimension differs from d");
  // State (phi1, phi1'); f reads the Dirac law of phi1'.
  Matrix state(path.position.rows(), 2 * system.d);
  state << path.position, path.velocity;
  std::vector<double> kinetic, divergence;
  reduced_integrands(system, path.grid, state, path.acceleration, kinetic, divergence);
  return assemble(kinetic, divergence, path.grid.dt());
}

Matrix integrate_first_block(const DegenerateSystem& system, const Grid& grid, int substeps) {
  const int d = system.d;
  const int dim = system.state_dim();
  Matrix out(static_cast<Eigen::Index>(grid.nodes()), d);
  std::vector<double> y(dim, 0.0), stage(dim, 0.0), k1(d), k2(d), k3(d), k4(d);
  for (int i = 0; i < d; ++i) y[i] = system.x0(i);
  // The second block is irrelevant to p here but keeps the state length.
  for (int j = 0; j < system.m; ++j) stage[d + j] = y[d + j] = system.x0(d + j);
  auto slope = [&](double t, const std::vector<double>& at, std::vector<double>& k) {
    system.drift_p(t, at, k);
  };
  const double h = grid.dt() / substeps;
  for (std::size_t n = 0; n < grid.nodes(); ++n) {
    if (n > 0) {
      double s = grid.time(n - 1);
      for (int sub = 0; sub < substeps; ++sub, s += h) {
        slope(s, y, k1);
        for (int i = 0; i < d; ++i) stage[i] = y[i] + 0.5 * h * k1[i];
        slope(s + 0.5 * h, stage, k2);
        for (int i = 0; i < d; ++i) stage[i] = y[i] + 0.5 * h * k2[i];
        slope(s + 0.5 * h, stage, k3);
        for (int i = 0; i < d; ++i) stage[i] = y[i] + h * k3[i];
        slope(s + h, stage, k4);
        for (int i = 0; i < d; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    for (int i = 0; i < d; ++i) out(static_cast<Eigen::Index>(n), i) = y[i];
  }
  return out;
}

ActionValue om_action_nondegenerate_reduction(const DegenerateSystem& system,
                                              const ReferencePath& phi) {
  system.validate();
  if (!system.first_block_autonomous()) {
    throw UnsupportedError("reduction needs p independent of the second component");
  }
  if (phi.m != system.m || phi.d != system.d) throw InputError("path dimensions differ");
  const Matrix first = integrate_first_block(system, phi.grid);
  Matrix state(phi.nodes(), system.state_dim());
  state << first, phi.second();
  std::vector<double> kinetic, divergence;
  const Matrix velocity2 = phi.dsecond();
  reduced_integrands(system, phi.grid, state, velocity2, kinetic, divergence);
  return assemble(kinetic, divergence, phi.grid.dt());
}

}  // namespace omtk
