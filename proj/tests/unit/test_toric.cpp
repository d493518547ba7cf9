#include <gtest/gtest.h>

#include <cmath>

#include "cmm/coupled_model.hpp"
#include "cmm/errors.hpp"
#include "cmm/toric.hpp"

using namespace cmm;

TEST(Toric, FejerWeightsIntegratePolynomials) {
  const double a = 1.7;
  const ToricCP1Geometry g(a, 64);
  for (int k = 0; k <= 12; ++k) {
    double s = 0.0;
    for (int j = 0; j < g.M(); ++j) s += g.weights()[j] * std::pow(g.nodes()[j], k);
    EXPECT_NEAR(s, std::pow(a, k + 1) / (k + 1), 1e-13) << "k=" << k;
  }
  EXPECT_NEAR(g.volume(), 2.0 * M_PI * a, 1e-14);
}

TEST(Toric, ChebyshevDerivativeOfCubic) {
  const double a = 2.0;
  const ToricCP1Geometry g(a, 64);
  std::vector<double> v(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double x = g.nodes()[j];
    v[j] = x * x * x - 2.0 * x;
  }
  const auto c = g.to_coefficients(v);
  const auto back = g.to_values(c);
  for (int j = 0; j < g.M(); ++j) EXPECT_NEAR(back[j], v[j], 1e-13);
  const auto d = g.differentiate(c);
  for (double x : {0.0, 0.37, 1.0, 1.99}) EXPECT_NEAR(g.evaluate(d, x), 3.0 * x * x - 2.0, 1e-11);
}

TEST(Toric, FubiniStudyReference) {
  const double a = 1.3;
  const ToricCP1Geometry g(a, 64);
  const ToricMetric m(g, std::vector<double>(g.M(), 0.0));
  std::vector<double> s(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double x = g.nodes()[j];
    EXPECT_NEAR(m.v()[j], 2.0 * x * (a - x) / a, 1e-14);
    EXPECT_NEAR(m.scalar_curvature()[j], 2.0 / a, 1e-9);
    s[j] = m.ricci_density()[j];
  }
  EXPECT_NEAR(g.integrate(s), 4.0 * M_PI, 1e-9);
}

TEST(Toric, SolveGradientInvertsUPrime) {
  const ToricCP1Geometry g(1.0, 64);
  std::vector<double> psi(g.M());
  for (int j = 0; j < g.M(); ++j) psi[j] = 0.03 * std::cos(3.0 * g.nodes()[j]);
  const ToricMetric m(g, psi);
  for (double x : {1e-6, 0.01, 0.4, 0.93, 1.0 - 1e-7}) EXPECT_NEAR(m.solve_gradient(m.u_d(x)), x, 1e-12 * (1 + x));
}

TEST(Toric, NonConvexPotentialThrows) {
  const ToricCP1Geometry g(1.0, 64);
  std::vector<double> psi(g.M());
  for (int j = 0; j < g.M(); ++j) psi[j] = -2.0 * g.nodes()[j] * g.nodes()[j];
  EXPECT_THROW(ToricMetric(g, psi), NotKahlerError);
}

// ∫ S·(x − a/2) dx is a boundary term fixed by the Guillemin conditions, so
// it vanishes for every potential; at high M it exposes round-off growth in
// the repeated spectral derivatives.
TEST(Toric, LinearMomentOfCurvatureVanishesAtHighResolution) {
  for (int M : {128, 512, 1024}) {
    const ToricCP1Geometry g(1.0, M);
    ToricModel model({g, g}, {0}, {1.0});
    const auto phi = model.random(3, 0.05, 3);
    const auto metrics = model.metrics(phi);
    std::vector<double> f(M);
    for (int j = 0; j < M; ++j) f[j] = metrics[0].scalar_curvature()[j] * (g.nodes()[j] - 0.5);
    EXPECT_LT(std::abs(g.integrate(f)), 1e-9) << "M=" << M;
  }
}

TEST(Toric, TooFewNodesRejected) { EXPECT_THROW(ToricCP1Geometry(1.0, 16), DomainError); }
