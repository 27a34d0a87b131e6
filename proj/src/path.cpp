#include "omtk/path.hpp"

#include <cmath>
#include <sstream>

#include "omtk/error.hpp"

namespace omtk {

namespace {

constexpr double kRoughEnergyRatio = 1.5;

void require_shape(const Grid& grid, int d, int m, const Matrix& phi, const char* what) {
  if (d < 0 || m < 1) throw InputError("path dimensions need d >= 0, m >= 1");
  if (phi.rows() != static_cast<Eigen::Index>(grid.nodes()) || phi.cols() != d + m) {
    throw InputError(std::string(what) + " has shape " + std::to_string(phi.rows()) + "x" +
                     std::to_string(phi.cols()) + ", expected " +
                     std::to_string(grid.nodes()) + "x" + std::to_string(d + m));
  }
  require_finite(phi, what);
}

Matrix sample(const Grid& grid, int cols, const PathFunction& f) {
  Matrix out(static_cast<Eigen::Index>(grid.nodes()), cols);
  std::vector<double> row(static_cast<std::size_t>(cols));
  for (std::size_t n = 0; n < grid.nodes(); ++n) {
    f(grid.time(n), row);
    for (int c = 0; c < cols; ++c) out(static_cast<Eigen::Index>(n), c) = row[c];
  }
  return out;
}

}  // namespace

Matrix finite_difference(const Matrix& f, double dt) {
  const Eigen::Index k = f.rows() - 1;
  if (k < 2) throw InputError("finite differences need at least 3 grid nodes");
  Matrix out(f.rows(), f.cols());
  out.row(0) = (-3.0 * f.row(0) + 4.0 * f.row(1) - f.row(2)) / (2.0 * dt);
  for (Eigen::Index n = 1; n < k; ++n) out.row(n) = (f.row(n + 1) - f.row(n - 1)) / (2.0 * dt);
  out.row(k) = (3.0 * f.row(k) - 4.0 * f.row(k - 1) + f.row(k - 2)) / (2.0 * dt);
  return out;
}

ReferencePath ReferencePath::from_samples(const Grid& grid, int d, int m, Matrix phi) {
  require_shape(grid, d, m, phi, "path samples");
  ReferencePath out{grid, d, m, std::move(phi), Matrix(), false};
  out.dphi = finite_difference(out.phi, grid.dt());
  return out;
}

ReferencePath ReferencePath::from_samples(const Grid& grid, int d, int m, Matrix phi,
                                          Matrix dphi) {
  require_shape(grid, d, m, phi, "path samples");
  require_shape(grid, d, m, dphi, "path derivative");
  return ReferencePath{grid, d, m, std::move(phi), std::move(dphi), true};
}

ReferencePath ReferencePath::from_functions(const Grid& grid, int d, int m,
                                            const PathFunction& phi,
                                            const PathFunction& dphi) {
  return from_samples(grid, d, m, sample(grid, d + m, phi), sample(grid, d + m, dphi));
}

ReferencePath ReferencePath::constrained(const DegenerateSystem& system, const Grid& grid,
                                         const PathFunction& phi2, const PathFunction& dphi2,
                                         int substeps) {
  const int d = system.d;
  const int m = system.m;
  const int dim = d + m;
  Matrix phi(static_cast<Eigen::Index>(grid.nodes()), dim);
  Matrix dphi(phi.rows(), dim);
  std::vector<double> x(dim), stage(dim), k1(d), k2(d), k3(d), k4(d), y(d);

  auto slope = [&](double t, const std::vector<double>& first, std::vector<double>& out) {
    for (int i = 0; i < d; ++i) stage[i] = first[i];
    phi2(t, std::span<double>(stage).subspan(d, m));
    system.drift_p(t, stage, out);
  };

  for (int i = 0; i < d; ++i) y[i] = system.x0(i);
  const double h = grid.dt() / substeps;
  std::vector<double> tmp(d);
  for (std::size_t n = 0; n < grid.nodes(); ++n) {
    const double t = grid.time(n);
    if (n > 0) {
      double s = grid.time(n - 1);
      for (int sub = 0; sub < substeps; ++sub, s += h) {
        slope(s, y, k1);
        for (int i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        slope(s + 0.5 * h, tmp, k2);
        for (int i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        slope(s + 0.5 * h, tmp, k3);
        for (int i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
        slope(s + h, tmp, k4);
        for (int i = 0; i < d; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    for (int i = 0; i < d; ++i) x[i] = y[i];
    phi2(t, std::span<double>(x).subspan(d, m));
    std::span<double> dx(stage);
    dphi2(t, dx.subspan(d, m));
    system.drift_p(t, x, dx.first(d));
    for (int c = 0; c < dim; ++c) {
      phi(static_cast<Eigen::Index>(n), c) = x[c];
      dphi(static_cast<Eigen::Index>(n), c) = dx[c];
    }
  }
  return from_samples(grid, d, m, std::move(phi), std::move(dphi));
}

ReferencePath ReferencePath::hamiltonian_lift(const Grid& grid, int d, const PathFunction& q,
                                              const PathFunction& dq,
                                              const PathFunction& ddq) {
  const Matrix a = sample(grid, d, q);
  const Matrix v = sample(grid, d, dq);
  const Matrix acc = sample(grid, d, ddq);
  Matrix phi(a.rows(), 2 * d);
  Matrix dphi(a.rows(), 2 * d);
  phi << a, v;
  dphi << v, acc;
  return from_samples(grid, d, d, std::move(phi), std::move(dphi));
}

std::vector<double> ReferencePath::state(Eigen::Index n) const {
  std::vector<double> x(static_cast<std::size_t>(d + m));
  for (int c = 0; c < d + m; ++c) x[c] = phi(n, c);
  return x;
}

double ReferencePath::structural_residual(const DegenerateSystem& system) const {
  double worst = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d + m)), p(static_cast<std::size_t>(d));
  for (Eigen::Index n = 0; n < nodes(); ++n) {
    for (int c = 0; c < d + m; ++c) x[c] = phi(n, c);
    system.drift_p(grid.time(static_cast<std::size_t>(n)), x, p);
    for (int i = 0; i < d; ++i) worst = std::max(worst, std::abs(dphi(n, i) - p[i]));
  }
  return worst;
}

double ReferencePath::structural_tolerance() const {
  return analytic ? 1e-8 : 10.0 * grid.dt();
}

void ReferencePath::require_admissible(const DegenerateSystem& system) const {
  if (d != system.d || m != system.m) {
    throw InputError("path dimensions (" + std::to_string(d) + "," + std::to_string(m) +
                     ") do not match the system (" + std::to_string(system.d) + "," +
                     std::to_string(system.m) + ")");
  }
  const double start_gap = (phi.row(0).transpose() - system.x0).cwiseAbs().maxCoeff();
  if (start_gap > 1e-9 * (1.0 + system.x0.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "path does not start at x0 (max gap " << start_gap << ")";
    throw InputError(os.str());
  }
  const double residual = structural_residual(system);
  if (!(residual <= structural_tolerance())) {
    std::ostringstream os;
    os << "path violates phi1' = p(phi): max residual " << residual << " exceeds "
       << structural_tolerance();
    throw InputError(os.str());
  }
}

double ReferencePath::discrete_energy() const {
  const double dt = grid.dt();
  double e = 0.0;
  for (Eigen::Index n = 0; n + 1 < nodes(); ++n) {
    e += (phi.row(n + 1) - phi.row(n)).squaredNorm() / dt;
  }
  return e;
}

std::vector<std::string> ReferencePath::check_regularity(RoughnessPolicy policy) const {
  std::vector<std::string> warnings;
  if (!phi.allFinite() || !dphi.allFinite()) {
    throw InputError("path samples are not finite");
  }
  if (nodes() < 5) return warnings;
  const double fine = discrete_energy();
  const double coarse_dt = 2.0 * grid.dt();
  double coarse = 0.0;
  Eigen::Index n = 0;
  for (; n + 2 < nodes(); n += 2) {
    coarse += (phi.row(n + 2) - phi.row(n)).squaredNorm() / coarse_dt;
  }
  if (n + 1 < nodes()) coarse += (phi.row(n + 1) - phi.row(n)).squaredNorm() / grid.dt();
  if (fine > 1e-12 && fine > kRoughEnergyRatio * coarse) {
    std::ostringstream os;
    os << "discrete energy grows under refinement (" << fine << " vs " << coarse
       << " on the coarse grid); path may lie outside the Cameron-Martin class";
    if (policy == RoughnessPolicy::reject) throw InputError(os.str());
    warnings.push_back(os.str());
  }
  return warnings;
}

}  // namespace omtk
