#include <gtest/gtest.h>

#include <cmath>

#include "cmm/errors.hpp"
#include "cmm/solvers.hpp"

using namespace cmm;

namespace {

double sup_all(const Potentials& p) {
  double m = 0.0;
  for (const auto& c : p)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Solvers, TorusConvergesToFlatSolution) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16, 1.5)}, {0}, {1.0});
  SolveConfig cfg;
  cfg.tolerance = 1e-9;
  const SolveState s = solve(m, m.random(3, 0.05, 2), cfg);
  EXPECT_EQ(s.status, SolveStatus::Converged);
  EXPECT_TRUE(s.gauge_fixed);
  EXPECT_LT(s.max_linf(), 1e-9);
  // Flat metrics are the only solutions, so the gauge-fixed potentials vanish.
  EXPECT_LT(sup_all(m.fix_gauge(s.potentials)), 1e-8);
  // Calabi never increases along accepted steps.
  for (std::size_t i = 1; i < s.history.size(); ++i) EXPECT_LE(s.history[i].calabi, s.history[i - 1].calabi * (1 + 1e-12));
}

TEST(Solvers, Cp1ConvergesToFubiniStudy) {
  const ToricModel m({ToricCP1Geometry(1.0, 64), ToricCP1Geometry(1.0, 64)}, {0}, {1.0});
  SolveConfig cfg;
  cfg.tolerance = 1e-9;
  const SolveState s = solve(m, m.random(5, 0.05, 3), cfg);
  ASSERT_EQ(s.status, SolveStatus::Converged);
  for (int i = 0; i < 2; ++i) {
    double worst = 0.0;
    for (double v : m.potential_deviation(s.potentials, i)) worst = std::max(worst, std::abs(v));
    EXPECT_LT(worst, 1e-7) << "component " << i;
  }
}

TEST(Solvers, NewtonNeedsGaugeFixedState) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16)}, {0}, {1.0});
  const SolveConfig cfg;
  const SolveState s = initial_state(m, m.random(1, 0.01, 2), cfg);
  EXPECT_FALSE(s.gauge_fixed);
  EXPECT_THROW(newton_refine(m, s, cfg), GaugeNotFixedError);
  EXPECT_NO_THROW(newton_refine(m, fix_automorphism_gauge(m, s), cfg));
}

TEST(Solvers, FlowStepReducesCalabi) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16)}, {0}, {1.0});
  const SolveConfig cfg;
  const SolveState s0 = initial_state(m, m.random(2, 0.05, 2), cfg);
  const SolveState s1 = flow_step(m, s0, cfg);
  EXPECT_EQ(s1.iteration, s0.iteration + 1);
  EXPECT_LT(s1.calabi(), s0.calabi());
}

TEST(Solvers, InvalidConfigRejected) {
  SolveConfig cfg;
  cfg.tolerance = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SolveConfig{};
  cfg.min_step = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SolveConfig{};
  cfg.max_iterations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Solvers, IterationBudgetGivesDiverged) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16)}, {0}, {1.0});
  SolveConfig cfg;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-14;
  EXPECT_THROW(solve(m, m.random(4, 0.05, 2), cfg), DivergedError);
  cfg.throw_on_failure = false;
  EXPECT_EQ(solve(m, m.random(4, 0.05, 2), cfg).status, SolveStatus::Diverged);
}

TEST(Solvers, NonKahlerStartIsReported) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16)}, {0}, {1.0});
  SolveConfig cfg;
  cfg.throw_on_failure = false;
  EXPECT_THROW(solve(m, m.random(1, 5.0, 2), cfg), NotKahlerError);
}

TEST(Solvers, LinearizationIsLinear) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16, 1.2)}, {0}, {1.0});
  const Potentials phi = m.random(6, 0.05, 2), a = m.random(7, 0.01, 2), b = m.random(8, 0.01, 2);
  Potentials sum = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) sum[i][j] = a[i][j] + 2.0 * b[i][j];
  const Potentials la = apply_linearization(m, phi, a), lb = apply_linearization(m, phi, b),
                   ls = apply_linearization(m, phi, sum);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < ls.size(); ++i)
    for (std::size_t j = 0; j < ls[i].size(); ++j) {
      worst = std::max(worst, std::abs(ls[i][j] - la[i][j] - 2.0 * lb[i][j]));
      scale = std::max(scale, std::abs(ls[i][j]));
    }
  EXPECT_LT(worst, 1e-5 * scale);
}
