#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "cmm/errors.hpp"
#include "cmm/fft.hpp"
#include "cmm/torus.hpp"
#include "cmm/trig.hpp"
#include "oracles.hpp"

using namespace cmm;

namespace {

TrigPoly single_mode(int dim, std::initializer_list<int> k, double a, double b) {
  TrigPoly::Term t;
  int i = 0;
  for (int v : k) t.k[i++] = v;
  t.a = a;
  t.b = b;
  return TrigPoly(dim, {t});
}

}  // namespace

TEST(Fft, ForwardMatchesDirectDft) {
  const int N = 16;
  std::vector<std::complex<double>> f(N);
  for (int x = 0; x < N; ++x) f[x] = {std::sin(0.7 * x) + 0.1 * x, std::cos(1.3 * x)};
  auto g = f;
  fft::forward(1, N, g.data());
  const auto ref = oracle::dft(f);
  for (int k = 0; k < N; ++k) EXPECT_LT(std::abs(g[k] - ref[k]), 1e-12);
  fft::backward(1, N, g.data());
  for (int x = 0; x < N; ++x) EXPECT_LT(std::abs(g[x] / double(N) - f[x]), 1e-13);
}

TEST(Fft, TwoDimensionalIsSeparable) {
  const int N = 16;
  std::vector<std::complex<double>> f(N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) f[i * N + j] = std::polar(1.0, 2.0 * M_PI * (3.0 * i + 5.0 * j) / N);
  fft::forward(2, N, f.data());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double expect = (i == 3 && j == 5) ? N * N : 0.0;
      EXPECT_NEAR(std::abs(f[i * N + j]), expect, 1e-9);
    }
}

TEST(Torus, GridGeometry) {
  const TorusGrid g{2, 16};
  EXPECT_EQ(g.size(), 65536u);
  EXPECT_DOUBLE_EQ(g.spacing(), 2.0 * M_PI / 16);
  EXPECT_NEAR(g.cell_volume() * g.size(), std::pow(2.0 * M_PI, 4), 1e-9);
  EXPECT_EQ(wavenumber(9, 16), -7);
  EXPECT_EQ(wavenumber(8, 16), 8);
}

TEST(Torus, FlatVolumeScalesWithClass) {
  for (int n : {1, 2}) {
    const auto g = TorusGeometry::flat(n, 16, 1.5);
    EXPECT_NEAR(g.volume(), std::pow(1.5, n) * std::pow(2.0 * M_PI, 2 * n), 1e-9);
    ScalarField one(g.grid(), 1.0);
    EXPECT_NEAR(integrate(one), std::pow(2.0 * M_PI, 2 * n), 1e-9);
  }
}

TEST(Torus, SpectralGradientMatchesAnalytic) {
  const TrigPoly h = TrigPoly::random(4, 9, 1.0, 2);
  const TorusGrid grid{2, 16};
  const ScalarField f = h.sample(grid);
  const auto grad = gradient(f);
  double x[4], g[4];
  double worst = 0.0;
  for (std::size_t node = 0; node < grid.size(); node += 37) {
    grid.coords(node, x);
    h.gradient(x, g);
    for (int a = 0; a < 4; ++a) worst = std::max(worst, std::abs(grad[a][node] - g[a]));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Torus, NyquistModeHasNoDerivative) {
  const TorusGrid grid{1, 16};
  const ScalarField f = single_mode(2, {8, 0}, 1.0, 0.0).sample(grid);
  const ScalarField d = derivative(f, 0);
  for (double v : d.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

// g = 1 + 2∂∂̄φ = 1 + ½Δφ on T²; S = −½ Δ log g / g.
TEST(Torus, ScalarCurvatureOfConformalMetric) {
  const double eps = 0.4;
  const TorusGeometry geom = TorusGeometry::flat(1, 64);
  const ScalarField phi = single_mode(2, {1, 0}, eps, 0.0).sample(geom.grid());
  const HermitianField g = metric_from_potential(geom, phi);
  const ScalarField S = scalar_curvature(g);
  double x[2];
  double worst_g = 0.0, worst_s = 0.0;
  for (std::size_t node = 0; node < geom.grid().size(); ++node) {
    geom.grid().coords(node, x);
    const double gv = 1.0 - 0.5 * eps * std::cos(x[0]);
    const double g1 = 0.5 * eps * std::sin(x[0]), g2 = 0.5 * eps * std::cos(x[0]);
    const double loggpp = (g2 * gv - g1 * g1) / (gv * gv);
    worst_g = std::max(worst_g, std::abs(g.at(node)(0, 0).real() - gv));
    worst_s = std::max(worst_s, std::abs(S[node] + 0.5 * loggpp / gv));
  }
  EXPECT_LT(worst_g, 1e-13);
  EXPECT_LT(worst_s, 1e-10);
  // Gauss–Bonnet on the torus.
  const ScalarField det = determinant(g);
  ScalarField sd(geom.grid());
  for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = S[i] * det[i];
  EXPECT_NEAR(integrate(sd), 0.0, 1e-10);
}

TEST(Torus, NonPositiveMetricReportsNode) {
  const TorusGeometry geom = TorusGeometry::flat(1, 16);
  const ScalarField phi = single_mode(2, {1, 1}, 5.0, 0.0).sample(geom.grid());
  try {
    metric_from_potential(geom, phi);
    FAIL() << "expected NotKahlerError";
  } catch (const NotKahlerError& e) {
    EXPECT_LT(e.value(), 0.0);
    EXPECT_LT(e.node(), geom.grid().size());
  }
}

TEST(Torus, HermitianToFormMatchesOracleConvention) {
  Eigen::MatrixXcd G(2, 2);
  G << 2.0, std::complex<double>(0.3, 0.4), std::complex<double>(0.3, -0.4), 1.5;
  EXPECT_TRUE(hermitian_to_form(G).to_matrix().isApprox(oracle::hermitian_form(G), 1e-14));
}

TEST(Trig, JetMatchesFiniteDifferences) {
  const TrigPoly h = TrigPoly::random(4, 21, 1.0, 2);
  const double x[4] = {0.3, 1.1, -0.7, 2.5};
  double v, g[4], H[16];
  h.jet(x, &v, g, H);
  EXPECT_NEAR(v, h.value(x), 1e-14);
  auto grad = [&](const double* y, double* out) { h.gradient(y, out); };
  const auto J = oracle::fd_jacobian(grad, x, 4);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(H[i], J[i], 1e-8);
}

TEST(Trig, RandomPolyIsMeanZeroAndNormalized) {
  const TrigPoly h = TrigPoly::random(2, 4, 0.7, 3);
  EXPECT_DOUBLE_EQ(h.constant_term(), 0.0);
  double s = 0.0;
  for (const auto& t : h.terms()) s += std::abs(t.a) + std::abs(t.b);
  EXPECT_NEAR(s, 0.7, 1e-12);
}

TEST(Trig, FromFieldRecoversPolynomial) {
  const TrigPoly h = TrigPoly::random(2, 5, 1.0, 3);
  const TorusGrid grid{1, 32};
  const TrigPoly back = TrigPoly::from_field(h.sample(grid));
  const double x[2] = {0.123, 4.56};
  EXPECT_NEAR(back.value(x), h.value(x), 1e-13);
}
