#include <gtest/gtest.h>

#include <cmath>

#include "cmm/coupled_model.hpp"
#include "cmm/errors.hpp"
#include "cmm/functionals.hpp"

using namespace cmm;

namespace {

TorusModel torus_model(int N, double a1 = 1.0) {
  return TorusModel({TorusGeometry::flat(1, N), TorusGeometry::flat(1, N, a1)}, {0}, {1.0});
}

ToricModel cp1(int M, double a0 = 1.0, double a1 = 1.0) {
  return ToricModel({ToricCP1Geometry(a0, M), ToricCP1Geometry(a1, M)}, {0}, {1.0});
}

Potentials lerp(const Potentials& a, const Potentials& b, double t) {
  Potentials out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] = (1 - t) * a[i][j] + t * b[i][j];
  return out;
}

}  // namespace

TEST(Functionals, CalabiIsSumOfSquaredNorms) {
  const TorusModel m = torus_model(16);
  EXPECT_LT(calabi(m, m.zero()).value, 1e-24);
  const Potentials phi = m.random(1, 0.05, 2);
  const FunctionalReport r = calabi(m, phi);
  const CoupledResidual res = m.evaluate(phi);
  double s = 0.0;
  for (const auto& [k, v] : r.breakdown) s += v;
  EXPECT_DOUBLE_EQ(s, r.value);
  EXPECT_NEAR(r.value, res.l2(0) * res.l2(0) + res.l2(1) * res.l2(1), 1e-14 * (1 + r.value));
  EXPECT_GT(r.value, 0.0);
}

TEST(Functionals, FutakiOnTorusOnlyAcceptsConstants) {
  const TorusModel m = torus_model(16);
  Potentials h = m.random(2, 0.1, 1);
  EXPECT_THROW(futaki(m, m.zero(), HolomorphicFieldData{h}), NotHolomorphicError);
  for (auto& c : h) std::fill(c.begin(), c.end(), 2.0);
  EXPECT_LT(std::abs(futaki(m, m.random(3, 0.05, 2), HolomorphicFieldData{h}).value), 1e-12);
}

TEST(Functionals, FutakiVanishesForSolvableCp1AndIsClassInvariant) {
  const ToricModel same = cp1(128);
  const HolomorphicFieldData xi{same.rotation_field(1.0)};
  for (std::uint64_t s : {1u, 2u, 3u}) EXPECT_LT(std::abs(futaki(same, same.random(s, 0.05, 3), xi).value), 1e-8);

  const ToricModel unequal = cp1(128, 1.0, 2.0);
  const HolomorphicFieldData xu{unequal.rotation_field(1.0)};
  const double f0 = futaki(unequal, unequal.zero(), xu).value;
  for (std::uint64_t s : {4u, 5u}) EXPECT_NEAR(futaki(unequal, unequal.random(s, 0.05, 3), xu).value, f0, 1e-6);
}

// dM/dt along a segment equals the pairing of the residual with the velocity.
TEST(Functionals, MabuchiDerivativeMatchesIncrement) {
  const TorusModel m = torus_model(16, 1.3);
  const Potentials a = m.random(4, 0.05, 2), b = m.random(5, 0.05, 2);
  Potentials dir = b;
  for (std::size_t i = 0; i < dir.size(); ++i)
    for (std::size_t j = 0; j < dir[i].size(); ++j) dir[i][j] = b[i][j] - a[i][j];
  const double h = 1e-4;
  const double fd = (mabuchi_segment(m, a, lerp(a, b, h)) - mabuchi_segment(m, a, lerp(a, b, -h))) / (2 * h);
  const double exact = mabuchi_pairing(m, m.evaluate(a), dir);
  EXPECT_NEAR(fd, exact, 1e-7 * (1 + std::abs(exact)));
}

TEST(Functionals, MabuchiIsPathIndependent) {
  for (int which = 0; which < 2; ++which) {
    const TorusModel tm = torus_model(16, 1.2);
    const ToricModel cm = cp1(64, 1.0, 1.5);
    const CoupledModel& m = which == 0 ? static_cast<const CoupledModel&>(tm) : cm;
    const Potentials a = m.random(6, 0.05, 2), b = m.random(7, 0.05, 2), w = m.random(8, 0.05, 2);
    const double direct = mabuchi_path(m, PotentialPath::segment(a, b, PathType::Generic)).value;
    const double via = mabuchi_path(m, PotentialPath::through({a, w, b})).value;
    EXPECT_NEAR(direct, via, 1e-6 * (1 + std::abs(direct))) << (which ? "cp1" : "torus");
  }
}

TEST(Functionals, MabuchiIsConvexAlongToricGeodesics) {
  const ToricModel m = cp1(64);
  const PotentialPath path = PotentialPath::segment(m.zero(), m.random(9, 0.05, 3), PathType::ToricGeodesic);
  const FunctionalReport r = geodesic_convexity_check(m, path, 33);
  EXPECT_EQ(r.samples.size(), 33u);
  EXPECT_GE(r.value, -1e-6);
}

TEST(Functionals, PathSamplesMustBeIncreasing) {
  const TorusModel m = torus_model(16);
  PotentialPath p;
  p.times = {0.0, 0.5, 0.4};
  p.samples = {m.zero(), m.zero(), m.zero()};
  EXPECT_THROW(mabuchi_path(m, p), DomainError);
}
