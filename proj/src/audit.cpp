#include "omtk/audit.hpp"

#include <algorithm>
#include <cmath>

#include "omtk/error.hpp"
#include "omtk/rng.hpp"
#include "parallel_error.hpp"

namespace omtk {

namespace {

constexpr double kSegmentPoints[] = {0.0, 0.25, 0.5, 0.75, 1.0};

double gronwall_constant(const PathNorm& norm, double k, const Grid& grid) {
  const double t = grid.horizon;
  const double c_sup = k * t * std::exp(k * t);
  switch (norm.kind) {
    case PathNorm::Kind::sup:
      return c_sup;
    case PathNorm::Kind::lp:
      return k * std::exp(k * t) * std::pow(t, 1.0 - 1.0 / norm.p) *
             std::pow(t + grid.dt(), 1.0 / norm.p);
    case PathNorm::Kind::holder:
      return c_sup + k * std::pow(t, 1.0 - norm.alpha) * (1.0 + c_sup);
  }
  return c_sup;
}

double appendix_lp_constant(double p, double k, double t) {
  const double tau1 = std::pow(2.0, p - 1.0) * std::pow(k, p) * std::pow(t, p - 1.0);
  const double tau2 = t * tau1 * std::exp(tau1 * t);
  return std::pow(tau2, 1.0 / p);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

H4Report h4_audit(const DegenerateSystem& system, const ReferencePath& phi,
                  const std::vector<PathNorm>& norms, const SimConfig& cfg,
                  std::size_t samples) {
  for (const PathNorm& n : norms) n.validate();
  if (samples < 1) throw InputError("audit needs at least one sample path");
  SimConfig run = cfg;
  run.particles = samples;
  const PathBundle bundle = simulate_auxiliary(system, phi, run);
  const Grid& grid = bundle.grid;
  const int d = system.d;
  const int dim = system.state_dim();
  const double dt = grid.dt();

  std::vector<StateField> p;
  for (int i = 0; i < d; ++i) p.emplace_back(system.p[i], dim);

  double k = 0.0;
  FirstError error;
#pragma omp parallel reduction(max : k)
  {
    std::vector<double> x(dim), g(dim);
#pragma omp for schedule(static)
    for (std::size_t s = 0; s < samples; ++s) {
      try {
        const Matrix& path = bundle.paths[s];
        for (Eigen::Index n = 0; n < path.rows(); ++n) {
          const double t = grid.time(static_cast<std::size_t>(n));
          for (double theta : kSegmentPoints) {
            for (int c = 0; c < dim; ++c) {
              x[c] = theta * path(n, c) + (1.0 - theta) * phi.phi(n, c);
            }
            double frob = 0.0;
            for (int i = 0; i < d; ++i) {
              p[i].gradient(t, x, g);
              for (double v : g) frob += v * v;
            }
            k = std::max(k, std::sqrt(frob));
          }
        }
      } catch (const std::exception& e) {
        error.record(s, e);
      }
    }
  }
  error.rethrow("audit path");

  H4Report report;
  report.lipschitz = k;
  report.samples = samples;
  for (const PathNorm& norm : norms) {
    H4Row row;
    row.norm = norm;
    for (std::size_t s = 0; s < samples; ++s) {
      const Matrix& path = bundle.paths[s];
      const Matrix e1 = path.leftCols(d) - phi.first();
      const Matrix e2 = path.rightCols(system.m) - phi.second();
      const double den = path_norm(norm, e2, dt, Exec::serial);
      if (den == 0.0) continue;
      row.ratios.push_back(path_norm(norm, e1, dt, Exec::serial) / den);
    }
    for (double r : row.ratios) row.max_ratio = std::max(row.max_ratio, r);
    row.median_ratio = median(row.ratios);
    row.gronwall = gronwall_constant(norm, k, grid);
    row.bound = norm.kind == PathNorm::Kind::lp ? appendix_lp_constant(norm.p, k, grid.horizon)
                                                : row.gronwall;
    row.bounded = row.max_ratio <= row.bound * (1.0 + 1e-12);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double h1_sign_flip_defect(const PathNorm& norm, const Grid& grid, int dim, std::size_t trials,
                           std::uint64_t seed) {
  norm.validate();
  if (dim < 1) throw InputError("dimension must be >= 1");
  const auto nodes = static_cast<Eigen::Index>(grid.nodes());
  const double dt = grid.dt();
  double worst = 0.0;
  FirstError error;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::size_t i = 0; i < trials; ++i) {
    try {
      Matrix f(nodes, dim);
      std::vector<double> z(static_cast<std::size_t>(dim));
      for (Eigen::Index n = 0; n < nodes; ++n) {
        normals(seed, Stream::property, i, static_cast<std::uint64_t>(n), z);
        for (int c = 0; c < dim; ++c) f(n, c) = (n > 0 ? f(n - 1, c) : 0.0) + std::sqrt(dt) * z[c];
      }
      Matrix flipped = f;
      for (int c = 0; c < dim; ++c) {
        const double u = uniform(seed, Stream::directions, i, static_cast<std::uint64_t>(c));
        if (u < 0.5) flipped.col(c) = -flipped.col(c);
      }
      worst = std::max(worst, std::abs(path_norm(norm, f, dt, Exec::serial) -
                                       path_norm(norm, flipped, dt, Exec::serial)));
    } catch (const std::exception& e) {
      error.record(i, e);
    }
  }
  error.rethrow("trial");
  return worst;
}

}  // namespace omtk
