#pragma once

#include <string>
#include <vector>

#include "omtk/norms.hpp"
#include "omtk/om.hpp"
#include "omtk/path.hpp"
#include "omtk/simulate.hpp"
#include "omtk/system.hpp"

namespace omtk {

/// Hits count paths with |X - phi| < eps. With no hits the interval is the
/// one-sided 95% bound [0, z^2 / (n + z^2)], z = 1.645, and the estimate is
/// flagged low-information; otherwise the Wilson 95% interval.
struct TubeEstimate {
  double epsilon = 0.0;
  PathNorm norm;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool low_information = false;
};

TubeEstimate wilson_estimate(std::size_t hits, std::size_t trials, double epsilon,
                             const PathNorm& norm);

/// Which coordinates enter |X - phi|. `second` measures X2 - phi2 only.
enum class TubeComponent { full, second };

struct TubeConfig {
  /// Grid, seed and, for interacting systems, the particles per batch.
  SimConfig sim;
  std::size_t samples = 100000;
  TubeComponent component = TubeComponent::full;
};

/// |X_i - phi| for every sample path i, in path order.
std::vector<double> tube_distances(const DegenerateSystem& system, const ReferencePath& phi,
                                   const PathNorm& norm, const TubeConfig& cfg);

TubeEstimate tube_probability(const DegenerateSystem& system, const ReferencePath& phi,
                              const PathNorm& norm, double epsilon, const TubeConfig& cfg);

/// Estimates for several radii from one set of distances.
std::vector<TubeEstimate> tube_curve(const std::vector<double>& distances,
                                     const std::vector<double>& epsilons, const PathNorm& norm);

struct RatioRow {
  double epsilon = 0.0;
  std::size_t hits_phi = 0;
  std::size_t hits_psi = 0;
  std::size_t hits_both = 0;
  std::size_t hits_w = 0;  // |W| < eps on the driving Brownian paths
  double ratio = 0.0;      // hits_phi / hits_psi
  double log_ratio = 0.0;
  /// Delta-method standard error of log ratio including the covariance of
  /// the shared samples.
  double log_se = 0.0;
  double ci_lo = 0.0;  // exp(log_ratio -+ 1.96 log_se)
  double ci_hi = 0.0;
  double log_error = 0.0;  // |log_ratio - (L(phi) - L(psi))|
  bool agrees = false;     // log_error <= 2 * (ci width in log space)
  bool low_information = false;
  /// W-normalised form: hits_phi / hits_w against exp(L(phi)), same for psi.
  double ratio_phi_w = 0.0;
  double ratio_psi_w = 0.0;
};

struct RatioReport {
  PathNorm norm;
  std::size_t samples = 0;
  ActionValue action_phi;
  ActionValue action_psi;
  double delta_action = 0.0;  // L(phi) - L(psi)
  double prediction = 0.0;    // exp(delta_action)
  double prediction_phi_w = 0.0;
  double prediction_psi_w = 0.0;
  /// Rows in decreasing epsilon; radii where neither tube was hit are dropped.
  std::vector<RatioRow> rows;
  std::vector<std::string> notices;
  bool all_agree = false;
  /// log_error at each radius is at most the previous (larger) radius's
  /// log_error plus its own 95% half-width.
  bool trend_ok = false;
};

/// phi and psi share every simulated path of X and the Brownian motion that
/// drives it.
RatioReport om_ratio_experiment(const DegenerateSystem& system, const ReferencePath& phi,
                                const ReferencePath& psi, const PathNorm& norm,
                                const std::vector<double>& epsilons, const TubeConfig& cfg);

struct H3Row {
  TubeEstimate estimate;
  /// max of int |W|^4 dt over the paths inside the ball.
  double max_quartic = 0.0;
};

/// Fits log P(|W| <= eps) = a - C3 eps^-q and int |W|^4 <= C2 eps^p over the
/// kept radii.
struct H3Report {
  PathNorm norm;
  std::vector<H3Row> rows;  // decreasing epsilon
  double q = 0.0;
  double c3 = 0.0;
  double p = 0.0;
  double c2 = 0.0;
  bool q_below = false;  // 0 < q < min(p, 4)
  bool monotone = false;
  std::vector<std::string> notices;
};

/// `cfg.sim` gives grid and seed; m is the Brownian dimension. Radii with
/// fewer than `min_hits` conditioned samples are dropped.
H3Report h3_probe(const PathNorm& norm, const std::vector<double>& epsilons, int m,
                  const TubeConfig& cfg, std::size_t min_hits = 30);

}  // namespace omtk
