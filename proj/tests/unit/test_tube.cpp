#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "omtk/audit.hpp"
#include "omtk/config.hpp"
#include "omtk/tube.hpp"
#include "oracles/oracles.hpp"

namespace omtk {
namespace {

TubeConfig tube_cfg(double dt, double horizon, std::size_t samples, std::uint64_t seed = 1) {
  TubeConfig c;
  c.sim.dt = dt;
  c.sim.horizon = horizon;
  c.sim.seed = seed;
  c.samples = samples;
  return c;
}

ReferencePath ou_path(const DegenerateSystem& sys, const Grid& g, double amplitude) {
  const double T = g.horizon;
  return ReferencePath::constrained(
      sys, g,
      [=](double t, std::span<double> o) { o[0] = amplitude * std::sin(std::numbers::pi * t / T); },
      [=](double t, std::span<double> o) {
        o[0] = amplitude * std::numbers::pi / T * std::cos(std::numbers::pi * t / T);
      });
}

TEST(Wilson, IntervalsContainEstimate) {
  for (std::size_t hits : {1u, 5u, 50u, 99u, 100u}) {
    const TubeEstimate e = wilson_estimate(hits, 100, 0.3, PathNorm::sup());
    EXPECT_GE(e.p_hat, 0.0);
    EXPECT_LE(e.p_hat, 1.0);
    EXPECT_LE(e.ci_lo, e.p_hat);
    EXPECT_GE(e.ci_hi, e.p_hat);
    EXPECT_FALSE(e.low_information);
  }
  const TubeEstimate z = wilson_estimate(0, 1000, 0.1, PathNorm::sup());
  EXPECT_EQ(z.p_hat, 0.0);
  EXPECT_EQ(z.ci_lo, 0.0);
  EXPECT_NEAR(z.ci_hi, 1.645 * 1.645 / (1000 + 1.645 * 1.645), 1e-15);
  EXPECT_TRUE(z.low_information);
}

TEST(Tube, ExtremeRadii) {
  const DegenerateSystem sys = preset_config("ou").system;
  const TubeConfig cfg = tube_cfg(0.01, 1.0, 2000);
  const ReferencePath phi = ou_path(sys, cfg.sim.grid(), 0.0);
  const auto rows = tube_curve(tube_distances(sys, phi, PathNorm::sup(), cfg), {0.0, 1e6},
                               PathNorm::sup());
  EXPECT_EQ(rows[0].p_hat, 0.0);
  EXPECT_TRUE(rows[0].low_information);
  EXPECT_EQ(rows[1].p_hat, 1.0);
}

TEST(Tube, BrownianSupAgainstSeries) {
  // p = q = 0: the second component is W itself.
  const DegenerateSystem sys = DegenerateSystem::parse(1, 1, {"0"}, {"0"}, 1, {0.0, 0.0});
  const double dt = 1e-3;
  TubeConfig cfg = tube_cfg(dt, 1.0, 100000, 5);
  cfg.component = TubeComponent::second;
  const ReferencePath zero = ou_path(sys, cfg.sim.grid(), 0.0);
  const auto rows =
      tube_curve(tube_distances(sys, zero, PathNorm::sup(), cfg), {1.0, 0.5}, PathNorm::sup());
  for (const TubeEstimate& e : rows) {
    // The grid maximum misses excursions between nodes; shift the barrier.
    const double p = oracle::brownian_sup_below(
        e.epsilon + oracle::kDiscreteMonitoringBeta * std::sqrt(dt), 1.0);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(e.trials));
    EXPECT_NEAR(e.p_hat, p, 3 * se) << e.epsilon;
  }
}

TEST(Tube, DistancesDeterministic) {
  const DegenerateSystem sys = preset_config("mean-field-coupled").system;
  TubeConfig cfg = tube_cfg(0.01, 0.5, 700, 3);
  cfg.sim.particles = 256;
  Matrix phi = Matrix::Zero(51, 3);
  for (Eigen::Index n = 0; n < 51; ++n) phi.row(n) = sys.x0.transpose();
  const ReferencePath c = ReferencePath::from_samples(cfg.sim.grid(), 1, 2, phi);
  const auto a = tube_distances(sys, c, PathNorm::lp(4), cfg);
  const auto b = tube_distances(sys, c, PathNorm::lp(4), cfg);
  ASSERT_EQ(a.size(), 700u);
  EXPECT_EQ(a, b);
}

class RatioTest : public ::testing::Test {
 protected:
  DegenerateSystem sys = preset_config("ou").system;
  TubeConfig cfg = tube_cfg(0.01, 0.25, 20000, 7);
  Grid g = cfg.sim.grid();
  ReferencePath phi = ou_path(sys, g, 0.0);
  ReferencePath psi = ou_path(sys, g, 0.25);
  std::vector<double> eps = {0.6, 0.5, 0.4};
};

TEST_F(RatioTest, IdenticalCentresGiveUnitRatios) {
  const RatioReport r = om_ratio_experiment(sys, phi, phi, PathNorm::sup(), eps, cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const RatioRow& row : r.rows) {
    EXPECT_EQ(row.ratio, 1.0);
    EXPECT_EQ(row.log_ratio, 0.0);
  }
  EXPECT_EQ(r.delta_action, 0.0);
}

TEST_F(RatioTest, SwappingCentresInvertsRatios) {
  const RatioReport a = om_ratio_experiment(sys, phi, psi, PathNorm::sup(), eps, cfg);
  const RatioReport b = om_ratio_experiment(sys, psi, phi, PathNorm::sup(), eps, cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].hits_phi, b.rows[k].hits_psi);
    EXPECT_EQ(a.rows[k].hits_psi, b.rows[k].hits_phi);
    EXPECT_EQ(a.rows[k].log_ratio, -b.rows[k].log_ratio);
    EXPECT_NEAR(a.rows[k].ratio * b.rows[k].ratio, 1.0, 1e-15);
    EXPECT_EQ(a.rows[k].log_se, b.rows[k].log_se);
  }
  EXPECT_EQ(a.delta_action, -b.delta_action);
}

TEST_F(RatioTest, HitsNestedInRadius) {
  const auto d = tube_distances(sys, psi, PathNorm::sup(), cfg);
  for (std::size_t i = 0; i < eps.size(); ++i)
    for (std::size_t j = 0; j < eps.size(); ++j)
      if (eps[i] < eps[j])
        for (double v : d) EXPECT_TRUE(!(v < eps[i]) || v < eps[j]);
  const RatioReport r = om_ratio_experiment(sys, phi, psi, PathNorm::sup(), eps, cfg);
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    EXPECT_LE(r.rows[k].hits_phi, r.rows[k - 1].hits_phi);
    EXPECT_LE(r.rows[k].hits_psi, r.rows[k - 1].hits_psi);
    EXPECT_LE(r.rows[k].hits_both, r.rows[k - 1].hits_both);
  }
}

TEST_F(RatioTest, DropsRadiiWithoutHits) {
  const RatioReport r = om_ratio_experiment(sys, phi, psi, PathNorm::sup(), {0.5, 1e-4}, cfg);
  EXPECT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.notices.size(), 1u);
}

TEST_F(RatioTest, PredictionFromActions) {
  const RatioReport r = om_ratio_experiment(sys, phi, psi, PathNorm::sup(), eps, cfg);
  EXPECT_EQ(r.delta_action, r.action_phi.total - r.action_psi.total);
  EXPECT_DOUBLE_EQ(r.prediction, std::exp(r.delta_action));
  EXPECT_GT(r.delta_action, 0.0);
}

TEST(H3, SupNormExponentNearTwo) {
  TubeConfig cfg = tube_cfg(0.01, 1.0, 40000, 9);
  const H3Report r = h3_probe(PathNorm::sup(), {1.2, 1.0, 0.8, 0.7, 0.6}, 1, cfg);
  EXPECT_TRUE(r.monotone);
  EXPECT_GT(r.q, 1.4);
  EXPECT_LT(r.q, 2.6);
  EXPECT_TRUE(r.q_below);
  for (const H3Row& row : r.rows) EXPECT_LE(row.max_quartic, r.c2 * std::pow(row.estimate.epsilon, r.p) * (1 + 1e-12));
}

TEST(H4, FrozenFirstComponentGivesZeroRatio) {
  const DegenerateSystem sys = preset_config("ou").system;
  SimConfig sim;
  sim.dt = 0.01;
  sim.horizon = 1.0;
  const ReferencePath phi = ou_path(sys, sim.grid(), 0.3);
  const H4Report r = h4_audit(sys, phi, {PathNorm::sup(), PathNorm::lp(4), PathNorm::holder(0.25)},
                              sim, 200);
  EXPECT_EQ(r.lipschitz, 0.0);
  for (const H4Row& row : r.rows) {
    EXPECT_EQ(row.max_ratio, 0.0);
    EXPECT_TRUE(row.bounded);
  }
}

TEST(H4, GronwallBoundsHold) {
  const DegenerateSystem sys = DegenerateSystem::parse(1, 1, {"x2 + 0.5*sin(x1)"}, {"-x2"}, 1, {0, 0});
  SimConfig sim;
  sim.dt = 0.01;
  sim.horizon = 1.0;
  const ReferencePath phi = ou_path(sys, sim.grid(), 0.3);
  const H4Report r = h4_audit(sys, phi, {PathNorm::sup(), PathNorm::lp(2), PathNorm::lp(4),
                                         PathNorm::holder(0.25)}, sim, 500);
  EXPECT_GT(r.lipschitz, 1.0);
  EXPECT_LE(r.lipschitz, std::sqrt(1.25) + 1e-12);
  for (const H4Row& row : r.rows) {
    EXPECT_EQ(row.ratios.size(), 500u);
    EXPECT_TRUE(row.bounded) << row.norm.name() << " " << row.max_ratio << " > " << row.bound;
    EXPECT_LE(row.median_ratio, row.max_ratio);
  }
}

}  // namespace
}  // namespace omtk
