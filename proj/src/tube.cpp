#include "omtk/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omtk/error.hpp"
#include "parallel_error.hpp"

namespace omtk {

namespace {

constexpr double kZ = 1.96;
constexpr double kZOneSided = 1.645;

void check_grid(const ReferencePath& phi, const TubeConfig& cfg) {
  const Grid grid = cfg.sim.grid();
  if (!(phi.grid == grid)) {
    throw InputError("tube centre grid differs from the simulation grid");
  }
  if (cfg.samples < 1) throw InputError("tube estimate needs at least one sample");
}

Matrix difference(const Matrix& x, const ReferencePath& phi, TubeComponent component) {
  if (component == TubeComponent::second) {
    return x.rightCols(phi.m) - phi.phi.rightCols(phi.m);
  }
  return x - phi.phi;
}

std::size_t count_below(const std::vector<double>& values, double epsilon) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                [&](double v) { return v < epsilon; }));
}

std::vector<double> sorted_descending(std::vector<double> epsilons) {
  for (double e : epsilons) {
    if (!(e >= 0.0) || std::isnan(e)) throw InputError("tube radii must be non-negative");
  }
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  epsilons.erase(std::unique(epsilons.begin(), epsilons.end()), epsilons.end());
  return epsilons;
}

/// Least-squares line y = a + b x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double b = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - b * mx, b};
}

double fit_residual(const std::vector<double>& eps, const std::vector<double>& logp, double q,
                    double* c3) {
  std::vector<double> x(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) x[i] = std::pow(eps[i], -q);
  const auto [a, b] = fit_line(x, logp);
  double sse = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) sse += std::pow(logp[i] - a - b * x[i], 2);
  if (c3 != nullptr) *c3 = -b;
  return sse;
}

}  // namespace

TubeEstimate wilson_estimate(std::size_t hits, std::size_t trials, double epsilon,
                             const PathNorm& norm) {
  if (trials == 0) throw InputError("tube estimate needs at least one trial");
  if (hits > trials) throw InputError("more hits than trials");
  TubeEstimate out;
  out.epsilon = epsilon;
  out.norm = norm;
  out.hits = hits;
  out.trials = trials;
  const double n = static_cast<double>(trials);
  out.p_hat = static_cast<double>(hits) / n;
  if (hits == 0) {
    out.low_information = true;
    out.ci_hi = kZOneSided * kZOneSided / (n + kZOneSided * kZOneSided);
    return out;
  }
  const double z2 = kZ * kZ;
  const double denom = 1.0 + z2 / n;
  const double centre = (out.p_hat + z2 / (2.0 * n)) / denom;
  const double half =
      kZ / denom * std::sqrt(out.p_hat * (1.0 - out.p_hat) / n + z2 / (4.0 * n * n));
  out.ci_lo = std::max(0.0, std::min(out.p_hat, centre - half));
  out.ci_hi = std::min(1.0, std::max(out.p_hat, centre + half));
  return out;
}

std::vector<double> tube_distances(const DegenerateSystem& system, const ReferencePath& phi,
                                   const PathNorm& norm, const TubeConfig& cfg) {
  norm.validate();
  check_grid(phi, cfg);
  if (phi.d != system.d || phi.m != system.m) throw InputError("tube centre dimensions differ");
  const double dt = phi.grid.dt();
  std::vector<double> out(cfg.samples);
  for_each_sample_path(system, cfg.sim, cfg.samples, [&](std::size_t i, const Matrix& x) {
    out[i] = path_norm(norm, difference(x, phi, cfg.component), dt, Exec::serial);
  });
  return out;
}

TubeEstimate tube_probability(const DegenerateSystem& system, const ReferencePath& phi,
                              const PathNorm& norm, double epsilon, const TubeConfig& cfg) {
  if (!(epsilon >= 0.0)) throw InputError("tube radius must be non-negative");
  const std::vector<double> dist = tube_distances(system, phi, norm, cfg);
  return wilson_estimate(count_below(dist, epsilon), dist.size(), epsilon, norm);
}

std::vector<TubeEstimate> tube_curve(const std::vector<double>& distances,
                                     const std::vector<double>& epsilons, const PathNorm& norm) {
  std::vector<TubeEstimate> out;
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw InputError("tube radii must be non-negative");
    out.push_back(wilson_estimate(count_below(distances, e), distances.size(), e, norm));
  }
  return out;
}

RatioReport om_ratio_experiment(const DegenerateSystem& system, const ReferencePath& phi,
                                const ReferencePath& psi, const PathNorm& norm,
                                const std::vector<double>& epsilons, const TubeConfig& cfg) {
  norm.validate();
  check_grid(phi, cfg);
  check_grid(psi, cfg);
  if ((phi.phi.row(0) - psi.phi.row(0)).cwiseAbs().maxCoeff() > 0.0) {
    throw InputError("tube centres must share the initial point");
  }
  RatioReport report;
  report.norm = norm;
  report.samples = cfg.samples;
  report.action_phi = om_action(system, phi);
  report.action_psi = om_action(system, psi);
  report.delta_action = report.action_phi.total - report.action_psi.total;
  report.prediction = std::exp(report.delta_action);
  report.prediction_phi_w = std::exp(report.action_phi.total);
  report.prediction_psi_w = std::exp(report.action_psi.total);

  const double dt = phi.grid.dt();
  std::vector<double> dist_phi(cfg.samples), dist_psi(cfg.samples), dist_w(cfg.samples);
  for_each_sample_path(system, cfg.sim, cfg.samples, [&](std::size_t i, const Matrix& x) {
    dist_phi[i] = path_norm(norm, difference(x, phi, cfg.component), dt, Exec::serial);
    dist_psi[i] = path_norm(norm, difference(x, psi, cfg.component), dt, Exec::serial);
    const Matrix w = brownian_path(cfg.sim, system.m, cfg.sim.first_path + i);
    dist_w[i] = path_norm(norm, w, dt, Exec::serial);
  });

  const double n = static_cast<double>(cfg.samples);
  bool all_agree = true;
  for (double eps : sorted_descending(epsilons)) {
    RatioRow row;
    row.epsilon = eps;
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const bool a = dist_phi[i] < eps;
      const bool b = dist_psi[i] < eps;
      row.hits_phi += a;
      row.hits_psi += b;
      row.hits_both += a && b;
      row.hits_w += dist_w[i] < eps;
    }
    if (row.hits_phi == 0 && row.hits_psi == 0) {
      report.notices.push_back("epsilon " + std::to_string(eps) +
                               " dropped: neither tube was hit");
      continue;
    }
    const double ha = static_cast<double>(row.hits_phi);
    const double hb = static_cast<double>(row.hits_psi);
    if (row.hits_w > 0) {
      row.ratio_phi_w = ha / static_cast<double>(row.hits_w);
      row.ratio_psi_w = hb / static_cast<double>(row.hits_w);
    }
    if (row.hits_phi == 0 || row.hits_psi == 0) {
      row.low_information = true;
      row.ratio = row.hits_psi == 0 ? std::numeric_limits<double>::infinity() : 0.0;
      row.log_ratio = row.hits_psi == 0 ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity();
      row.log_se = std::numeric_limits<double>::infinity();
      row.ci_lo = 0.0;
      row.ci_hi = std::numeric_limits<double>::infinity();
      row.log_error = std::numeric_limits<double>::infinity();
      row.agrees = false;
    } else {
      const double pa = ha / n, pb = hb / n, pab = static_cast<double>(row.hits_both) / n;
      const double var =
          ((1.0 - pa) / pa + (1.0 - pb) / pb - 2.0 * (pab - pa * pb) / (pa * pb)) / n;
      row.ratio = ha / hb;
      row.log_ratio = std::log(ha) - std::log(hb);
      row.log_se = std::sqrt(std::max(0.0, var));
      row.ci_lo = std::exp(row.log_ratio - kZ * row.log_se);
      row.ci_hi = std::exp(row.log_ratio + kZ * row.log_se);
      row.log_error = std::abs(row.log_ratio - report.delta_action);
      row.agrees = row.log_error <= 2.0 * (2.0 * kZ * row.log_se);
      row.low_information = row.hits_phi < 10 || row.hits_psi < 10;
    }
    all_agree = all_agree && row.agrees;
    report.rows.push_back(row);
  }
  report.all_agree = all_agree && !report.rows.empty();
  report.trend_ok = !report.rows.empty();
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const RatioRow& prev = report.rows[i - 1];
    const RatioRow& cur = report.rows[i];
    if (!(cur.log_error <= prev.log_error + kZ * cur.log_se)) report.trend_ok = false;
  }
  return report;
}

H3Report h3_probe(const PathNorm& norm, const std::vector<double>& epsilons, int m,
                  const TubeConfig& cfg, std::size_t min_hits) {
  norm.validate();
  if (m < 1) throw InputError("Brownian dimension must be >= 1");
  const Grid grid = cfg.sim.grid();
  const double dt = grid.dt();
  std::vector<double> dist(cfg.samples), quartic(cfg.samples);
  FirstError error;
#pragma omp parallel for schedule(static, 64)
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    try {
      const Matrix w = brownian_path(cfg.sim, m, cfg.sim.first_path + i);
      dist[i] = path_norm(norm, w, dt, Exec::serial);
      double q = 0.0;
      for (Eigen::Index n = 0; n < w.rows(); ++n) {
        const double weight = (n == 0 || n == w.rows() - 1) ? 0.5 : 1.0;
        q += weight * std::pow(w.row(n).squaredNorm(), 2);
      }
      quartic[i] = q * dt;
    } catch (const std::exception& e) {
      error.record(i, e);
    }
  }
  error.rethrow("Brownian path");

  H3Report report;
  report.norm = norm;
  for (double eps : sorted_descending(epsilons)) {
    H3Row row;
    row.estimate = wilson_estimate(count_below(dist, eps), cfg.samples, eps, norm);
    if (row.estimate.hits < min_hits) {
      report.notices.push_back("epsilon " + std::to_string(eps) + " dropped: " +
                               std::to_string(row.estimate.hits) + " conditioned samples");
      continue;
    }
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      if (dist[i] < eps) row.max_quartic = std::max(row.max_quartic, quartic[i]);
    }
    report.rows.push_back(row);
  }
  report.monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].estimate.p_hat > report.rows[i - 1].estimate.p_hat) {
      report.monotone = false;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.q = report.c3 = report.p = report.c2 = nan;
  if (report.rows.size() < 3) {
    report.notices.push_back("fewer than three radii kept: exponents not fitted");
    return report;
  }
  std::vector<double> eps, logp, logeps, logquart;
  for (const H3Row& r : report.rows) {
    eps.push_back(r.estimate.epsilon);
    logp.push_back(std::log(r.estimate.p_hat));
    logeps.push_back(std::log(r.estimate.epsilon));
    logquart.push_back(std::log(r.max_quartic));
  }
  // Coarse scan then golden section on q.
  double best_q = 0.1, best = std::numeric_limits<double>::infinity();
  for (double q = 0.1; q <= 8.0 + 1e-12; q += 0.05) {
    const double sse = fit_residual(eps, logp, q, nullptr);
    if (sse < best) {
      best = sse;
      best_q = q;
    }
  }
  double lo = std::max(0.05, best_q - 0.05), hi = best_q + 0.05;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (fit_residual(eps, logp, a, nullptr) < fit_residual(eps, logp, b, nullptr)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  report.q = 0.5 * (lo + hi);
  fit_residual(eps, logp, report.q, &report.c3);
  report.p = fit_line(logeps, logquart).second;
  report.c2 = 0.0;
  for (const H3Row& r : report.rows) {
    report.c2 = std::max(report.c2, r.max_quartic / std::pow(r.estimate.epsilon, report.p));
  }
  report.q_below = report.q > 0.0 && report.q < std::min(report.p, 4.0) && report.c3 > 0.0;
  return report;
}

}  // namespace omtk
