#include <gtest/gtest.h>

#include <cmath>

#include "cmm/diffeo.hpp"
#include "cmm/errors.hpp"
#include "oracles.hpp"

using namespace cmm;

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

// h = cos x on T² with ω = dx∧dy: X_h = −Ω⁻¹∇h = (0, sin x), so the flow is a shear.
TEST(Diffeo, ShearFlowClosedForm) {
  const TorusGeometry geom = TorusGeometry::flat(1, 16);
  TrigPoly::Term term;
  term.k[0] = 1;
  term.a = 1.0;
  const double t = 0.7;
  const DiffeoField f = hamiltonian_flow(geom, TrigPoly(2, {term}), t, 16);
  const auto& img = f.image();
  double x[2], worst = 0.0;
  for (std::size_t node = 0; node < geom.grid().size(); ++node) {
    geom.grid().coords(node, x);
    worst = std::max(worst, std::abs(img[2 * node] - x[0]));
    worst = std::max(worst, std::abs(img[2 * node + 1] - x[1] - t * std::sin(x[0])));
  }
  EXPECT_LT(worst, 1e-13);
}

TEST(Diffeo, FlowJacobianMatchesFiniteDifferencesAndIsSymplectic) {
  Eigen::MatrixXcd G(2, 2);
  G << 1.2, std::complex<double>(0.1, 0.2), std::complex<double>(0.1, -0.2), 0.9;
  const TorusGeometry geom(2, 16, G);
  const HamiltonianFlowMap map(TrigPoly::random(4, 3, 0.8, 2), geom.omega_matrix(), 0.4, 32);
  const double x[4] = {0.2, 1.4, -2.0, 0.9};
  double y[4], J[16];
  map.eval(x, y, J);
  const auto fd = oracle::fd_jacobian([&](const double* p, double* q) { map.eval(p, q, nullptr); }, x, 4);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(J[i], fd[i], 1e-8);
  const Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>> Jm(J);
  const Eigen::MatrixXd B = oracle::hermitian_form(G);
  EXPECT_TRUE((Jm.transpose() * B * Jm).isApprox(B, 1e-10));
}

TEST(Diffeo, DisplacementJacobianMatchesFiniteDifferences) {
  const DisplacementMap map(VectorTrigField::random(4, 8, 0.2, 2));
  const double x[4] = {0.5, -0.3, 2.2, 1.0};
  double y[4], J[16];
  map.eval(x, y, J);
  const auto fd = oracle::fd_jacobian([&](const double* p, double* q) { map.eval(p, q, nullptr); }, x, 4);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(J[i], fd[i], 1e-9);
}

TEST(Diffeo, InverseRoundTrip) {
  const TorusGeometry geom = TorusGeometry::flat(1, 32);
  const DiffeoField f = hamiltonian_flow(geom, TrigPoly::random(2, 4, 1.0, 2), 0.3, 16);
  const DiffeoField g = f.inverse();
  const auto& x = g.image();  // f⁻¹ at the nodes
  double y[2], node_x[2], worst = 0.0;
  for (std::size_t node = 0; node < geom.grid().size(); ++node) {
    f.forward().eval(&x[2 * node], y, nullptr);
    geom.grid().coords(node, node_x);
    worst = std::max({worst, std::abs(y[0] - node_x[0]), std::abs(y[1] - node_x[1])});
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Diffeo, PushforwardAndPullbackPreserveIntegrals) {
  const TorusGeometry geom = TorusGeometry::flat(1, 32);
  const DiffeoField f = DiffeoField::displacement(geom.grid(), VectorTrigField::random(2, 6, 0.2, 2));
  ScalarField rho = TrigPoly::random(2, 7, 0.5, 2).sample(geom.grid());
  for (double& v : rho.values) v += 1.0;
  EXPECT_NEAR(integrate(pushforward(f, rho)), integrate(rho), 1e-9);
  EXPECT_NEAR(integrate(pullback_density(f, rho)), integrate(rho), 1e-9);
}

TEST(Diffeo, ComposeFunctionEvaluatesAtImage) {
  const TorusGeometry geom = TorusGeometry::flat(1, 32);
  const TrigPoly psi = TrigPoly::random(2, 10, 1.0, 3);
  const DiffeoField f = DiffeoField::displacement(geom.grid(), VectorTrigField::random(2, 11, 0.3, 2));
  const ScalarField c = compose_function(psi.sample(geom.grid()), f);
  std::vector<double> expect(c.size());
  for (std::size_t node = 0; node < c.size(); ++node) expect[node] = psi.value(&f.image()[2 * node]);
  EXPECT_LT(sup_diff(c.values, expect), 1e-12);
}

TEST(Diffeo, PullbackOfConstantFormUsesJacobian) {
  const TorusGeometry geom = TorusGeometry::flat(1, 16);
  const DiffeoField f = DiffeoField::displacement(geom.grid(), VectorTrigField::random(2, 12, 0.3, 2));
  const TwoFormField pb = pullback_2form(f, TwoFormField::constant(geom.grid(), geom.omega()));
  double worst = 0.0;
  for (std::size_t node = 0; node < geom.grid().size(); ++node) {
    const double* J = &f.jacobian()[4 * node];
    worst = std::max(worst, std::abs(pb.at(node)[0] - (J[0] * J[3] - J[1] * J[2])));
  }
  EXPECT_LT(worst, 1e-14);
}

TEST(Diffeo, ComposeIsOuterAfterInner) {
  const TorusGeometry geom = TorusGeometry::flat(1, 16);
  const DiffeoField a = DiffeoField::displacement(geom.grid(), VectorTrigField::random(2, 13, 0.2, 1));
  const DiffeoField b = hamiltonian_flow(geom, TrigPoly::random(2, 14, 1.0, 1), 0.2, 8);
  const DiffeoField ab = a.compose(b);
  double z[2];
  for (std::size_t node = 0; node < geom.grid().size(); node += 11) {
    a.forward().eval(&b.image()[2 * node], z, nullptr);
    EXPECT_NEAR(ab.image()[2 * node], z[0], 1e-13);
    EXPECT_NEAR(ab.image()[2 * node + 1], z[1], 1e-13);
  }
}
