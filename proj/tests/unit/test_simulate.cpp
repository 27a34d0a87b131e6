#include <gtest/gtest.h>

#include <cmath>

#include "omtk/generator.hpp"
#include "omtk/simulate.hpp"

namespace omtk {
namespace {

DegenerateSystem make(const std::string& p, const std::string& q, std::vector<double> x0,
                      int order = 1) {
  return DegenerateSystem::parse(1, 1, {p}, {q}, order, std::move(x0));
}

SimConfig config(std::size_t n, double dt, double horizon, std::uint64_t seed = 1) {
  SimConfig c;
  c.particles = n;
  c.dt = dt;
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

ReferencePath constant_second(const DegenerateSystem& sys, const Grid& g, double value) {
  return ReferencePath::constrained(
      sys, g, [&](double, std::span<double> o) { o[0] = value; },
      [](double, std::span<double> o) { o[0] = 0.0; });
}

struct Stats {
  double mean = 0, var = 0;
};
Stats stats(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.var += (x - s.mean) * (x - s.mean);
  s.var /= static_cast<double>(v.size() - 1);
  return s;
}

TEST(SimulateMv, NoiselessConstantVelocity) {
  SimConfig cfg = config(3, 0.01, 1.0);
  cfg.noise = false;
  const PathBundle b = simulate_mv(make("x2", "0", {0, 1}), cfg);
  for (const Matrix& p : b.paths) {
    for (Eigen::Index n = 0; n < p.rows(); ++n) {
      EXPECT_NEAR(p(n, 0), b.grid.time(static_cast<std::size_t>(n)), 1e-12);
      EXPECT_EQ(p(n, 1), 1.0);
    }
  }
}

TEST(SimulateMv, PaperDriftVanishesAtStart) {
  SimConfig cfg = config(4, 0.01, 0.1);
  cfg.noise = false;
  const PathBundle b = simulate_mv(make("x2", "M1*(x1^2-1)", {1, 0.5}), cfg);
  EXPECT_EQ(b.paths[0](1, 1), 0.5);
}

TEST(SimulateMv, OrnsteinUhlenbeckMoments) {
  SimConfig cfg = config(100000, 1e-3, 1.0, 3);
  cfg.store_paths = false;
  const PathBundle b = simulate_mv(make("0", "-x2", {0, 1}), cfg);
  std::vector<double> x2(cfg.particles);
  for (std::size_t i = 0; i < x2.size(); ++i) x2[i] = b.final_state(static_cast<Eigen::Index>(i), 1);
  const Stats s = stats(x2);
  const double mean = std::exp(-1.0), var = (1 - std::exp(-2.0)) / 2;
  const double n = static_cast<double>(x2.size());
  EXPECT_NEAR(s.mean, mean, 3 * std::sqrt(var / n));
  EXPECT_NEAR(s.var, var, 3 * var * std::sqrt(2 / (n - 1)));
}

TEST(SimulateMv, IncrementVariance) {
  SimConfig cfg = config(20000, 0.01, 0.1, 4);
  cfg.store_increments = true;
  cfg.store_paths = false;
  const PathBundle b = simulate_mv(make("0", "0", {0, 0}), cfg);
  std::vector<double> all;
  for (const Matrix& inc : b.increments)
    for (Eigen::Index k = 0; k < inc.rows(); ++k) all.push_back(inc(k, 0));
  const Stats s = stats(all);
  const double n = static_cast<double>(all.size());
  EXPECT_NEAR(s.var, 0.01, 3 * 0.01 * std::sqrt(2 / (n - 1)));
}

TEST(SimulateMv, DeterministicAcrossRunsAndWorkers) {
  const DegenerateSystem sys = make("x2", "-x2 + M1 - 0.2*x1^3", {0.3, -0.2});
  SimConfig cfg = config(3000, 0.01, 0.5, 9);
  const PathBundle a = simulate_mv(sys, cfg);
  for (int w : {1, 3}) {
    cfg.workers = w;
    const PathBundle b = simulate_mv(sys, cfg);
    ASSERT_EQ(a.paths.size(), b.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i) ASSERT_EQ(a.paths[i], b.paths[i]) << w;
  }
  set_workers(0);
  const PathBundle serial = simulate_mv(sys, config(3000, 0.01, 0.5, 9), {}, Exec::serial);
  for (std::size_t i = 0; i < a.paths.size(); ++i) ASSERT_EQ(a.paths[i], serial.paths[i]);
}

TEST(SimulateMv, FirstComponentIsNoiseFree) {
  const PathBundle b = simulate_mv(make("x2", "-x2", {0, 0}), config(200, 0.01, 1.0, 5));
  for (const Matrix& p : b.paths) {
    const double sup_p = p.col(1).cwiseAbs().maxCoeff();
    for (Eigen::Index n = 0; n + 1 < p.rows(); ++n) {
      EXPECT_LE(std::abs(p(n + 1, 0) - p(n, 0)), sup_p * 0.01 * (1 + 1e-12));
    }
  }
}

TEST(SimulateMv, MomentFreeDecouplesIntoSinglePaths) {
  const DegenerateSystem sys = make("x2", "sin(x1) - x2", {0.1, 0.2});
  SimConfig cfg = config(64, 0.005, 0.5, 21);
  cfg.first_path = 1000;
  const PathBundle b = simulate_mv(sys, cfg);
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    ASSERT_EQ(b.paths[i], simulate_single(sys, cfg, cfg.first_path + i));
  }
}

TEST(SimulateMv, DriftFailureNamesStepAndParticle) {
  SimConfig cfg = config(2, 0.1, 1.0);
  cfg.noise = false;
  try {
    simulate_mv(make("x2", "1/(x1 - 0.5)", {0, 5}), cfg);
    FAIL();
  } catch (const EvalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step"), std::string::npos) << msg;
    EXPECT_NE(msg.find("particle 0"), std::string::npos) << msg;
  }
}

TEST(BrownianPath, MatchesSimulatorIncrements) {
  SimConfig cfg = config(5, 0.01, 0.2, 8);
  cfg.store_increments = true;
  const PathBundle b = simulate_mv(make("0", "0", {0, 0}), cfg);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const Matrix w = brownian_path(cfg, 1, i);
    EXPECT_EQ(w(0, 0), 0.0);
    for (Eigen::Index n = 0; n < w.rows(); ++n) EXPECT_NEAR(w(n, 0), b.paths[i](n, 1), 1e-14);
  }
}

TEST(Auxiliary, NoiselessReproducesReference) {
  const DegenerateSystem sys = make("x2 + 0.3*sin(x1)", "-x2", {0.2, 0.1});
  const Grid g = Grid::uniform(1.0, 0.01);
  const ReferencePath phi = ReferencePath::constrained(
      sys, g, [](double t, std::span<double> o) { o[0] = 0.1 + t * t; },
      [](double t, std::span<double> o) { o[0] = 2 * t; });
  SimConfig cfg = config(3, 0.01, 1.0);
  cfg.noise = false;
  const PathBundle b = simulate_auxiliary(sys, phi, cfg);
  for (const Matrix& p : b.paths) EXPECT_LE((p - phi.phi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Auxiliary, SecondComponentIsShiftedBrownianMotion) {
  const DegenerateSystem sys = make("0", "-x2", {0, 0.4});
  const Grid g = Grid::uniform(1.0, 0.01);
  const PathBundle b = simulate_auxiliary(sys, constant_second(sys, g, 0.4), config(20000, 0.01, 1.0, 6));
  std::vector<double> end(b.paths.size());
  for (std::size_t i = 0; i < end.size(); ++i) end[i] = b.paths[i](100, 1) - 0.4;
  const Stats s = stats(end);
  const double n = static_cast<double>(end.size());
  EXPECT_NEAR(s.mean, 0.0, 3 * std::sqrt(1 / n));
  EXPECT_NEAR(s.var, 1.0, 3 * std::sqrt(2 / (n - 1)));
}

TEST(Auxiliary, RejectsUnconstrainedPath) {
  const DegenerateSystem sys = make("x2", "-x2", {0, 0});
  const Grid g = Grid::uniform(1.0, 0.01);
  const ReferencePath bad = ReferencePath::from_functions(
      g, 1, 1, [](double t, std::span<double> o) { o[0] = 0; o[1] = t; },
      [](double, std::span<double> o) { o[0] = 0; o[1] = 1; });
  EXPECT_THROW(simulate_auxiliary(sys, bad, config(2, 0.01, 1.0)), InputError);
}

TEST(Girsanov, ZeroDriftGivesZeroDensity) {
  const DegenerateSystem sys = make("0", "0", {0, 0.7});
  const Grid g = Grid::uniform(1.0, 0.01);
  const PathBundle b = simulate_auxiliary(sys, constant_second(sys, g, 0.7), config(50, 0.01, 1.0));
  for (double v : girsanov_log_density(sys, constant_second(sys, g, 0.7), b)) EXPECT_EQ(v, 0.0);
}

TEST(Girsanov, ConstantDriftExponentialMartingale) {
  const double c = 0.8;
  const DegenerateSystem sys = make("0", "0.8", {0, 0});
  const Grid g = Grid::uniform(1.0, 0.01);
  const ReferencePath phi = constant_second(sys, g, 0.0);
  const PathBundle b = simulate_auxiliary(sys, phi, config(100000, 0.01, 1.0, 12));
  const std::vector<double> logr = girsanov_log_density(sys, phi, b);
  std::vector<double> r(logr.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(logr[i]);
  const double n = static_cast<double>(r.size());
  const Stats sr = stats(r), sl = stats(logr);
  EXPECT_NEAR(sr.mean, 1.0, 3 * std::sqrt(sr.var / n));
  EXPECT_NEAR(sl.var, c * c, 3 * c * c * std::sqrt(2 / (n - 1)));
  EXPECT_NEAR(sl.mean, -0.5 * c * c, 3 * std::sqrt(sl.var / n));
}

TEST(Girsanov, NeedsIncrements) {
  const DegenerateSystem sys = make("0", "0", {0, 0});
  const Grid g = Grid::uniform(1.0, 0.1);
  PathBundle b = simulate_auxiliary(sys, constant_second(sys, g, 0.0), config(3, 0.1, 1.0));
  b.increments.clear();
  EXPECT_THROW(girsanov_log_density(sys, constant_second(sys, g, 0.0), b), InputError);
}

TEST(Girsanov, NovikovMeanForMeanFieldSystem) {
  const DegenerateSystem sys = make("x2", "-x2 + 0.5*M1", {0, 0});
  const Grid g = Grid::uniform(0.5, 0.01);
  const ReferencePath phi = ReferencePath::constrained(
      sys, g, [](double t, std::span<double> o) { o[0] = 0.5 * t; },
      [](double, std::span<double> o) { o[0] = 0.5; });
  const PathBundle b = simulate_auxiliary(sys, phi, config(50000, 0.01, 0.5, 13));
  std::vector<double> r;
  for (double v : girsanov_log_density(sys, phi, b)) r.push_back(std::exp(v));
  const Stats s = stats(r);
  EXPECT_NEAR(s.mean, 1.0, 4 * std::sqrt(s.var / static_cast<double>(r.size())));
}

TEST(Generator, MartingaleFixtures) {
  SimConfig cfg = config(20000, 0.01, 1.0, 14);
  cfg.store_paths = false;
  const auto check = [&](const DegenerateSystem& sys, const char* h) {
    const GeneratorReport r = generator_check(sys, dsl::parse(h, sys.dims()), cfg);
    EXPECT_LE(r.max_z, 4.0) << h;
    return r;
  };
  check(make("0", "0", {0, 0}), "x2");
  check(make("0", "0", {0, 0}), "x2^2");
  const GeneratorReport r = check(make("0", "-x2", {0, 1}), "M1");
  EXPECT_NEAR(r.mean_h.back(), std::exp(-1.0), 0.02);
}

}  // namespace
}  // namespace omtk
