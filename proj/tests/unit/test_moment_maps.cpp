#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "cmm/diffeo.hpp"
#include "cmm/errors.hpp"
#include "cmm/moment_maps.hpp"
#include "cmm/verification.hpp"
#include "oracles.hpp"

using namespace cmm;

namespace {

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

TorusGeometry random_geometry(std::uint64_t seed, int n, int N, double scale) {
  Rng rng(seed);
  return TorusGeometry(n, N, scale * random_hermitian(rng, n, 0.3));
}

// μ_p on X from definitions: f^*ω_Y = Dfᵀ B_Y Df with a finite-difference
// Jacobian, mixed volumes from the Pfaffian pencil, c₁ from the grid mean.
std::vector<double> x_density_oracle(const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f, int p) {
  const int n = X.n(), d = 2 * n;
  const Eigen::MatrixXd WX = oracle::hermitian_form(X.base_metric()), BY = oracle::hermitian_form(Y.base_metric());
  const double vol = oracle::mixed_volumes(WX, Eigen::MatrixXd::Zero(d, d))[n];
  const std::size_t nodes = X.grid().size();
  std::vector<double> m(nodes);
  std::vector<double> x(d);
  for (std::size_t node = 0; node < nodes; ++node) {
    X.grid().coords(node, x.data());
    const auto J = oracle::fd_jacobian([&](const double* a, double* b) { f.forward().eval(a, b, nullptr); }, x.data(), d);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Jm(J.data(), d, d);
    const Eigen::MatrixXd P = Jm.transpose() * BY * Jm;
    m[node] = oracle::mixed_volumes(WX, P)[n - 1 - p];
  }
  double mean = 0.0;
  for (double v : m) mean += v;
  mean /= double(nodes);
  const double c1 = mean / vol;
  std::vector<double> out(nodes);
  for (std::size_t i = 0; i < nodes; ++i) out[i] = double(n) / (n - p) * (c1 * vol - m[i]);
  return out;
}

}  // namespace

TEST(MomentMaps, PointwiseDensityMatchesDefinitionOnT2) {
  const TorusGeometry X = random_geometry(1, 1, 16, 1.0), Y = random_geometry(2, 1, 16, 1.3);
  const DiffeoField f = DiffeoField::displacement(X.grid(), VectorTrigField::random(2, 3, 0.3, 2));
  const MomentMapValue m = mu_p(X, Y, f, 0);
  const auto expect = x_density_oracle(X, Y, f, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < expect.size(); ++i) worst = std::max(worst, std::abs(m.x_density[i] - expect[i]));
  EXPECT_LT(worst, 1e-8 * sup_abs(expect));
}

TEST(MomentMaps, PointwiseDensityMatchesDefinitionOnT4) {
  const TorusGeometry X = random_geometry(4, 2, 16, 1.0), Y = random_geometry(5, 2, 16, 1.2);
  const DiffeoField f = DiffeoField::displacement(X.grid(), VectorTrigField::random(4, 6, 0.2, 1));
  for (int p : {0, 1}) {
    const MomentMapValue m = mu_p(X, Y, f, p);
    const auto expect = x_density_oracle(X, Y, f, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < expect.size(); i += 7) worst = std::max(worst, std::abs(m.x_density[i] - expect[i]));
    // The finite-difference Jacobian limits the oracle to about 1e-10.
    EXPECT_LT(worst, 1e-7 * sup_abs(expect)) << "p=" << p;
  }
}

TEST(MomentMaps, IdentityMapIsAZero) {
  for (int n : {1, 2}) {
    const TorusGeometry X = TorusGeometry::flat(n, 16);
    for (int p = 0; p < n; ++p) {
      const MomentMapValue m = mu_p(X, X, DiffeoField::identity(X.grid()), p);
      EXPECT_LT(sup_abs(m.x_density.values), 1e-12);
      EXPECT_LT(sup_abs(m.y_density.values), 1e-12);
      EXPECT_NEAR(m.c1, double(binomial(n, p + 1)), 1e-12);
      EXPECT_NEAR(m.c2, double(binomial(n, p)), 1e-12);
    }
  }
}

TEST(MomentMaps, DensitiesIntegrateToZero) {
  const TorusGeometry X = random_geometry(7, 1, 32, 1.0), Y = random_geometry(8, 1, 32, 1.5);
  const DiffeoField f = hamiltonian_flow(X, TrigPoly::random(2, 9, 1.0, 2), 0.3, 16)
                            .compose(DiffeoField::displacement(X.grid(), VectorTrigField::random(2, 10, 0.2, 2)));
  const MomentMapValue m = mu_p(X, Y, f, 0);
  EXPECT_NEAR(integrate(m.x_density), 0.0, 1e-10);
  EXPECT_NEAR(integrate(m.y_density), 0.0, 1e-10);
}

// Swapping roles: μ*_p(f⁻¹) = −((n−p)/(p+1)) μ_p(f) componentwise (see the
// duality suite for the stated factor, which agrees only when n − p = p + 1).
TEST(MomentMaps, DualityFactorOnT4) {
  const TorusGeometry X = random_geometry(11, 2, 16, 1.0), Y = random_geometry(12, 2, 16, 1.3);
  const DiffeoField f = DiffeoField::displacement(X.grid(), VectorTrigField::random(4, 13, 0.15, 1));
  for (int p : {0, 1}) {
    const MomentMapValue primal = mu_p(X, Y, f, p);
    const MomentMapValue dual = mu_p_dual(Y, X, f.inverse(), p);
    const double factor = -(2.0 - p) / (p + 1.0);
    double ex = 0.0, ey = 0.0;
    for (std::size_t i = 0; i < primal.x_density.size(); ++i) {
      ex = std::max(ex, std::abs(dual.y_density[i] - factor * primal.x_density[i]));
      ey = std::max(ey, std::abs(dual.x_density[i] - factor * primal.y_density[i]));
    }
    EXPECT_LT(ex, 1e-9 * sup_abs(primal.x_density.values)) << "p=" << p;
    EXPECT_LT(ey, 1e-9 * sup_abs(primal.y_density.values)) << "p=" << p;
  }
}

TEST(MomentMaps, ConstantsAreInvariantUnderHamiltonianFlows) {
  const TorusGeometry X = random_geometry(14, 1, 32, 1.0), Y = random_geometry(15, 1, 32, 1.4);
  const DiffeoField f0 = DiffeoField::displacement(X.grid(), VectorTrigField::random(2, 16, 0.2, 2));
  const auto [c1, c2] = normalizing_constants(X, Y, f0, 0);
  const DiffeoField ft = hamiltonian_flow(Y, TrigPoly::random(2, 17, 1.0, 2), 0.3, 16).compose(f0);
  const auto [d1, d2] = normalizing_constants(X, Y, ft, 0);
  EXPECT_NEAR(d1, c1, 1e-10);
  EXPECT_NEAR(d2, c2, 1e-10);
}

TEST(MomentMaps, PairingRejectsNonMeanZeroPotentials) {
  const TorusGeometry X = TorusGeometry::flat(1, 16);
  const MomentMapValue m = mu_p(X, X, DiffeoField::identity(X.grid()), 0);
  EXPECT_THROW(moment_pairing(m, ScalarField(X.grid(), 1.0), ScalarField(X.grid(), 0.0)), GaugeError);
}

TEST(MomentMaps, DegreeOutOfRangeThrows) {
  const TorusGeometry X = TorusGeometry::flat(1, 16);
  EXPECT_THROW(mu_p(X, X, DiffeoField::identity(X.grid()), 1), DegreeError);
}

// Appendix pairing ∫φ ω_X^{n−1}∧f^*ω_Y/(n−1)! − ∫ψ∘f ω_X^n/n! along
// f1_t = f1 ∘ (id + tV) for symplectic f1 and ψ = −φ∘f1⁻¹: stationary at
// t = 0, and not stationary with the opposite sign of ψ.
TEST(MomentMaps, GraphPairingIsStationaryForMatchedPotentials) {
  const TorusGeometry X = TorusGeometry::flat(1, 32);
  const DiffeoField f1 = hamiltonian_flow(X, TrigPoly::random(2, 18, 1.0, 2), 0.3, 16);
  const TrigPoly phi_poly = TrigPoly::random(2, 19, 1.0, 2);
  const VectorTrigField V = VectorTrigField::random(2, 20, 0.5, 2);
  const ScalarField phi = phi_poly.sample(X.grid());

  auto Q = [&](double t, double sign) {
    const DiffeoField ft = f1.compose(DiffeoField::displacement(X.grid(), V.scaled(t)));
    // ψ∘f1_t(x) = −sign·φ(x + tV(x)), since f1⁻¹∘f1_t = id + tV.
    ScalarField psi(X.grid());
    double x[2], v[2];
    for (std::size_t node = 0; node < psi.size(); ++node) {
      X.grid().coords(node, x);
      V.value(x, v);
      const double y[2] = {x[0] + t * v[0], x[1] + t * v[1]};
      psi[node] = -sign * phi_poly.value(y);
    }
    return graph_pairing(graph_mu_p(X, X, ft, 0), phi, psi);
  };
  const double h = 1e-3;
  const double matched = (Q(h, 1.0) - Q(-h, 1.0)) / (2 * h);
  const double opposite = (Q(h, -1.0) - Q(-h, -1.0)) / (2 * h);
  EXPECT_GT(std::abs(opposite), 1e-2);
  EXPECT_LT(std::abs(matched), 1e-6 * std::abs(opposite));
  EXPECT_LT(std::abs(Q(h, 1.0) - Q(0.0, 1.0)), 1e-5);
}

TEST(MomentMaps, DhymConstantMatchesDeterminant) {
  Rng rng(21);
  for (int n : {1, 2, 3}) {
    const Eigen::MatrixXcd w = random_hermitian(rng, n, 0.4);
    Eigen::MatrixXcd a = random_hermitian(rng, n, 0.9) - Eigen::MatrixXcd::Identity(n, n);
    const double theta = 0.37;
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    const std::complex<double> z =
        std::polar(1.0, theta) * fact * Eigen::MatrixXcd(w + std::complex<double>(0, 1) * a).determinant();
    const auto [im, re] = dhym_constant(w, a, theta);
    EXPECT_NEAR(im, z.imag(), 1e-12 * std::abs(z));
    EXPECT_NEAR(re, z.real(), 1e-12 * std::abs(z));
  }
}

TEST(MomentMaps, DhymOutsideConeThrows) {
  const int n = 2;
  const Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(n, n), a = 0.5 * Eigen::MatrixXcd::Identity(n, n);
  const double theta = -std::arg(Eigen::MatrixXcd(w + std::complex<double>(0, 1) * a).determinant()) + M_PI;
  const TorusGrid grid{n, 16};
  EXPECT_THROW(dhym_residual({constant_metric(grid, w), constant_metric(grid, a), theta}), NotInConeError);
}

TEST(MomentMaps, CcsckResidualVanishesForEqualFlatClasses) {
  const TorusGeometry g = TorusGeometry::flat(1, 16);
  const CoupledResidual r = ccsck_residual({g, g}, {ScalarField(g.grid()), ScalarField(g.grid())}, {0}, {1.0});
  for (int i = 0; i < r.components(); ++i) EXPECT_LT(r.linf(i), 1e-12);
}

TEST(MomentMaps, MuJIntegratesToZeroAndFlips) {
  const TorusGeometry g = TorusGeometry::flat(1, 32);
  const ScalarField phi = TrigPoly::random(2, 22, 0.1, 2).sample(g.grid());
  const ScalarField a = mu_j_density(g, phi), b = mu_j_density(g, phi, MuJSign::Flipped);
  EXPECT_NEAR(integrate(a), 0.0, 1e-10);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i], -b[i]);
  EXPECT_GT(sup_abs(a.values), 1e-3);
}
