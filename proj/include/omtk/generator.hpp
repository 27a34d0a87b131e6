#pragma once

#include <vector>

#include "omtk/dsl.hpp"
#include "omtk/simulate.hpp"

namespace omtk {

/// Itô-formula check for a test functional h(t, x, M1..Mk) along the particle
/// simulation. With H(t) the particle mean of h and G the particle mean of
/// (d/dt + L)h, the discrepancy D(t_n) = H(t_n) - H(0) - sum_{j<n} G(t_j) dt
/// is a martingale; its standard error comes from the quadratic variation of
/// the particle mean.
struct GeneratorReport {
  std::vector<double> times;           // checkpoint times
  std::vector<double> mean_h;          // H(t)
  std::vector<double> integrated;      // H(0) + sum G dt
  std::vector<double> discrepancy;     // D(t)
  std::vector<double> standard_error;  // sqrt(QV) / N
  double max_abs_discrepancy = 0.0;
  double max_z = 0.0;                  // max |D| / SE over checkpoints
};

/// Moment symbols in h refer to the law of the second component, which must
/// then be scalar (m = 1). `checkpoints` evenly spaced times exclude t = 0.
GeneratorReport generator_check(const DegenerateSystem& system, const dsl::Expr& h,
                                const SimConfig& cfg, std::size_t checkpoints = 10);

}  // namespace omtk
