#include "omtk/generator.hpp"

#include <cmath>
#include <limits>

#include "omtk/error.hpp"
#include "omtk/field.hpp"
#include "parallel_error.hpp"

namespace omtk {

namespace {

double mean(const std::vector<double>& v) {
  return kernels::pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

GeneratorReport generator_check(const DegenerateSystem& system, const dsl::Expr& h,
                                const SimConfig& cfg, std::size_t checkpoints) {
  system.validate();
  const int d = system.d;
  const int m = system.m;
  const int dim = d + m;
  const dsl::Usage use = dsl::usage(h);
  if (use.max_state > dim) throw InputError("test functional references x" +
                                            std::to_string(use.max_state));
  const int order = use.max_moment;
  if (order > kMaxMomentOrder) throw InputError("test functional moment order above 4");
  if (order > 0 && m != 1) {
    throw UnsupportedError("measure-dependent test functionals need m = 1");
  }
  const Grid grid = cfg.grid();
  if (checkpoints < 1 || checkpoints > grid.steps || grid.steps % checkpoints != 0) {
    throw InputError("checkpoint count must divide the number of steps");
  }

  const Field hf = Field::symbolic(h);
  const Field ht = hf.partial(dsl::Variable::t());
  std::vector<Field> hx, hxx, hm;
  for (int a = 1; a <= dim; ++a) hx.push_back(hf.partial(dsl::Variable::x(a)));
  for (int j = 1; j <= m; ++j) hxx.push_back(hx[d + j - 1].partial(dsl::Variable::x(d + j)));
  for (int k = 1; k <= order; ++k) hm.push_back(hf.partial(dsl::Variable::m(k)));

  const std::size_t n_particles = cfg.particles;
  const double dt = grid.dt();
  std::vector<double> hv(n_particles), gv(n_particles), qv(n_particles);
  std::vector<std::vector<double>> dmk(order, std::vector<double>(n_particles));
  std::vector<std::vector<double>> ak(order, std::vector<double>(n_particles));

  GeneratorReport report;
  const std::size_t stride = grid.steps / checkpoints;
  double h0 = 0.0;
  double integral = 0.0;  // sum_{j<n} G_j dt
  double variance = 0.0;  // sum_{j<n} sum_i |c_i|^2 dt

  auto observe = [&](std::size_t n, double t, const StateMatrix& state, const Matrix& mom) {
    Matrix hmom(0, 1);
    if (order > 0) kernels::moments(state, d, 1, order, hmom);
    const std::span<const double> hms(hmom.data(), static_cast<std::size_t>(hmom.size()));
    const std::span<const double> sms(mom.data(), static_cast<std::size_t>(mom.size()));
    FirstError error;
#pragma omp parallel
    {
      std::vector<double> b(dim);
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n_particles; ++i) try {
        const std::span<const double> x(state.row(static_cast<Eigen::Index>(i)).data(),
                                        static_cast<std::size_t>(dim));
        system.drift(t, x, sms, b);
        hv[i] = hf(t, x, hms);
        double g = ht(t, x, hms);
        for (int a = 0; a < dim; ++a) g += b[a] * hx[a](t, x, hms);
        for (int j = 0; j < m; ++j) g += 0.5 * hxx[j](t, x, hms);
        gv[i] = g;
        if (order > 0) {
          const double y = x[d];
          for (int k = 1; k <= order; ++k) {
            dmk[k - 1][i] = hm[k - 1](t, x, hms);
            const double up = k >= 2 ? std::pow(y, k - 2) : 0.0;
            ak[k - 1][i] = b[d] * k * std::pow(y, k - 1) + 0.5 * k * (k - 1) * up;
          }
        }
      } catch (const std::exception& e) {
        error.record(i, e);
      }
    }
    error.rethrow("test functional failed at particle");
    const double h_mean = mean(hv);
    double g_mean = mean(gv);
    std::vector<double> dm_mean(order);
    for (int k = 0; k < order; ++k) {
      dm_mean[k] = mean(dmk[k]);
      g_mean += dm_mean[k] * mean(ak[k]);
    }
    // Quadratic variation of the particle mean over the coming step.
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_particles; ++i) try {
      const std::span<const double> x(state.row(static_cast<Eigen::Index>(i)).data(),
                                      static_cast<std::size_t>(dim));
      double total = 0.0;
      for (int j = 0; j < m; ++j) {
        double c = hx[d + j](t, x, hms);
        if (j == 0) {
          for (int k = 1; k <= order; ++k) c += dm_mean[k - 1] * k * std::pow(x[d], k - 1);
        }
        total += c * c;
      }
      qv[i] = total;
    } catch (const std::exception& e) {
      error.record(i, e);
    }
    error.rethrow("test functional gradient failed at particle");
    if (n == 0) h0 = h_mean;
    if (n > 0 && n % stride == 0) {
      const double disc = h_mean - h0 - integral;
      const double se = std::sqrt(variance) / static_cast<double>(n_particles);
      report.times.push_back(t);
      report.mean_h.push_back(h_mean);
      report.integrated.push_back(h0 + integral);
      report.discrepancy.push_back(disc);
      report.standard_error.push_back(se);
      report.max_abs_discrepancy = std::max(report.max_abs_discrepancy, std::abs(disc));
      const double z = se > 0.0 ? std::abs(disc) / se
                                : (std::abs(disc) <= 1e-12 * (1.0 + std::abs(h_mean))
                                       ? 0.0
                                       : std::numeric_limits<double>::infinity());
      report.max_z = std::max(report.max_z, z);
    }
    integral += g_mean * dt;
    variance += kernels::pairwise_sum(qv) * dt;
  };

  SimConfig run = cfg;
  run.store_paths = false;
  run.store_increments = false;
  simulate_mv(system, run, observe);
  return report;
}

}  // namespace omtk
