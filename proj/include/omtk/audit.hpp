#pragma once

#include <string>
#include <vector>

#include "omtk/norms.hpp"
#include "omtk/path.hpp"
#include "omtk/simulate.hpp"
#include "omtk/system.hpp"

namespace omtk {

/// Controllability check on the auxiliary process X~ (X~2 = phi2 + W):
/// ratio_i = |X~1_i - phi1| / |X~2_i - phi2| per sampled path.
///
/// K is the largest Frobenius norm of dp/dx sampled along the segments
/// between X~_n and phi_n. Discrete Gronwall on the Euler recursion gives
///   sup     C = K T e^{KT}
///   Lp      C = K e^{KT} T^{1-1/p} (T + dt)^{1/p}
///   holder  C = C_sup + K T^{1-alpha} (1 + C_sup)
/// and for Lp the appendix constant tau2^{1/p}, tau1 = 2^{p-1} K^p T^{p-1},
/// tau2 = T tau1 e^{tau1 T}. `bound` is tau2^{1/p} for Lp and C otherwise.
struct H4Row {
  PathNorm norm;
  std::vector<double> ratios;  // paths with W = 0 are skipped
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double gronwall = 0.0;
  double bound = 0.0;
  bool bounded = false;
};

struct H4Report {
  double lipschitz = 0.0;
  std::size_t samples = 0;
  std::vector<H4Row> rows;
};

H4Report h4_audit(const DegenerateSystem& system, const ReferencePath& phi,
                  const std::vector<PathNorm>& norms, const SimConfig& cfg,
                  std::size_t samples);

/// Largest |norm(f) - norm(S f)| over `trials` random grid paths and random
/// per-coordinate sign flips S. Exact invariance gives 0.
double h1_sign_flip_defect(const PathNorm& norm, const Grid& grid, int dim, std::size_t trials,
                           std::uint64_t seed);

}  // namespace omtk
