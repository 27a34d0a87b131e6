#pragma once

// Reference computations written without the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense transpose(const Dense& a) {
  if (a.empty()) return {};
  Dense t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

/// One-sided Jacobi SVD pseudoinverse. Orthogonalises the columns of a
/// (transposed first when wide), then inverts the column norms above
/// max(r, c) * eps * sigma_max.
inline Dense jacobi_pinv(const Dense& input) {
  const bool wide = input.size() < input[0].size();
  Dense a = wide ? transpose(input) : input;
  const std::size_t r = a.size(), c = a[0].size();
  Dense v = zeros(c, c);
  for (std::size_t i = 0; i < c; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < c; ++p) {
      for (std::size_t q = p + 1; q < c; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t i = 0; i < r; ++i) {
          alpha += a[i][p] * a[i][p];
          beta += a[i][q] * a[i][q];
          gamma += a[i][p] * a[i][q];
        }
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t), sn = cs * t;
        for (std::size_t i = 0; i < r; ++i) {
          const double x = a[i][p], y = a[i][q];
          a[i][p] = cs * x - sn * y;
          a[i][q] = sn * x + cs * y;
        }
        for (std::size_t i = 0; i < c; ++i) {
          const double x = v[i][p], y = v[i][q];
          v[i][p] = cs * x - sn * y;
          v[i][q] = sn * x + cs * y;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<double> sigma(c);
  double smax = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < r; ++i) s += a[i][j] * a[i][j];
    sigma[j] = std::sqrt(s);
    smax = std::max(smax, sigma[j]);
  }
  const double cutoff = static_cast<double>(std::max(r, c)) *
                        std::numeric_limits<double>::epsilon() * smax;
  // pinv(a) = V diag(1/sigma^2) A_rotᵀ, since A_rot = U diag(sigma).
  Dense out = zeros(c, r);
  for (std::size_t j = 0; j < c; ++j) {
    if (sigma[j] <= cutoff) continue;
    const double inv2 = 1.0 / (sigma[j] * sigma[j]);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t i = 0; i < r; ++i) out[k][i] += v[k][j] * a[i][j] * inv2;
  }
  return wide ? transpose(out) : out;
}

/// P(sup_{[0,T]} |W| < a), eigenfunction series of the absorbed heat equation.
inline double brownian_sup_below(double a, double horizon) {
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double n = 2.0 * k + 1.0;
    s += (k % 2 == 0 ? 1.0 : -1.0) / n *
         std::exp(-n * n * std::numbers::pi * std::numbers::pi * horizon / (8.0 * a * a));
  }
  return 4.0 / std::numbers::pi * s;
}

/// Barrier shift beta sqrt(dt) that maps a discretely monitored sup onto the
/// continuous one, beta = -zeta(1/2) / sqrt(2 pi).
inline constexpr double kDiscreteMonitoringBeta = 0.5825971579390106;

/// min over permutations pi of sqrt(mean (x_i - y_pi(i))^2).
inline double w2_bruteforce(std::vector<double> x, const std::vector<double>& y) {
  std::vector<std::size_t> perm(y.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[perm[i]]) * (x[i] - y[perm[i]]);
    best = std::min(best, s / static_cast<double>(x.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Dense a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

/// Minimiser of sum_n w_n (y'_n + y_n)^2 over interior samples of y on K + 1
/// nodes with y_0, y_K fixed, where y' is the centred difference inside and
/// the one-sided second-order difference at the ends; w are trapezoid weights.
inline std::vector<double> ou_quadratic_mpp(std::size_t k, double dt, double y0, double yk) {
  const std::size_t nodes = k + 1;
  Dense op = zeros(nodes, nodes);  // y' + y as a linear map of all samples
  for (std::size_t n = 0; n < nodes; ++n) {
    op[n][n] += 1.0;
    if (n == 0) {
      op[0][0] += -1.5 / dt;
      op[0][1] += 2.0 / dt;
      op[0][2] += -0.5 / dt;
    } else if (n == k) {
      op[k][k] += 1.5 / dt;
      op[k][k - 1] += -2.0 / dt;
      op[k][k - 2] += 0.5 / dt;
    } else {
      op[n][n + 1] += 0.5 / dt;
      op[n][n - 1] += -0.5 / dt;
    }
  }
  const std::size_t u = k - 1;
  Dense normal = zeros(u, u);
  std::vector<double> rhs(u, 0.0);
  for (std::size_t n = 0; n < nodes; ++n) {
    const double w = (n == 0 || n == k) ? 0.5 : 1.0;
    const double fixed = op[n][0] * y0 + op[n][k] * yk;
    for (std::size_t i = 0; i < u; ++i) {
      rhs[i] -= w * op[n][i + 1] * fixed;
      for (std::size_t j = 0; j < u; ++j) normal[i][j] += w * op[n][i + 1] * op[n][j + 1];
    }
  }
  std::vector<double> z = solve(normal, rhs);
  z.insert(z.begin(), y0);
  z.push_back(yk);
  return z;
}

}  // namespace oracle
