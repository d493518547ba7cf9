#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmm/errors.hpp"
#include "cmm/exterior.hpp"
#include "oracles.hpp"

using namespace cmm;

namespace {

Eigen::MatrixXd random_antisymmetric(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      A(i, j) = nd(gen);
      A(j, i) = -A(i, j);
    }
  return A;
}

AlternatingForm random_form(std::mt19937_64& gen, int dim, int degree) {
  std::normal_distribution<double> nd;
  AlternatingForm a(dim, degree);
  for (auto& c : a.coeffs()) c = nd(gen);
  return a;
}

AlternatingForm one_form(const Eigen::VectorXd& v) {
  AlternatingForm a(static_cast<int>(v.size()), 1);
  for (int i = 0; i < v.size(); ++i) a[i] = v[i];
  return a;
}

}  // namespace

TEST(Exterior, BinomialAndSizes) {
  EXPECT_EQ(binomial(6, 2), 15u);
  EXPECT_EQ(binomial(8, 4), 70u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(AlternatingForm(6, 3).size(), 20u);
}

TEST(Exterior, TopOfOneFormsIsDeterminant) {
  std::mt19937_64 gen(3);
  for (int d : {2, 4, 6, 8}) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(d, d);
    AlternatingForm w = one_form(M.row(0).transpose());
    for (int i = 1; i < d; ++i) w = wedge(w, one_form(M.row(i).transpose()));
    EXPECT_NEAR(w.top(), M.determinant(), 1e-12) << "d=" << d;
  }
}

TEST(Exterior, BasisSignsFollowPermutationParity) {
  EXPECT_DOUBLE_EQ(AlternatingForm::basis(4, {0, 1, 2, 3}).top(), 1.0);
  EXPECT_DOUBLE_EQ(AlternatingForm::basis(4, {1, 0, 2, 3}).top(), -1.0);
  EXPECT_DOUBLE_EQ(AlternatingForm::basis(4, {2, 0, 1, 3}).top(), 1.0);
  EXPECT_DOUBLE_EQ(AlternatingForm::basis(4, {3, 2, 1, 0}).top(), 1.0);
  EXPECT_DOUBLE_EQ(AlternatingForm::basis(4, {0, 0, 1, 2}).top(), 0.0);
}

TEST(Exterior, GradedCommutativityAndAssociativity) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 6;
    const int p = 1 + trial % 3, q = 1 + (trial / 3) % 2, r = 1;
    const auto a = random_form(gen, dim, p), b = random_form(gen, dim, q), c = random_form(gen, dim, r);
    const auto ab = wedge(a, b), ba = wedge(b, a);
    const double sign = ((p * q) % 2) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < ab.size(); ++i) EXPECT_NEAR(ab[i], sign * ba[i], 1e-12);
    const auto l = wedge(wedge(a, b), c), rr = wedge(a, wedge(b, c));
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], rr[i], 1e-12);
  }
}

TEST(Exterior, InteriorIsAnAntiderivation) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 6, p = 3, q = 2;
    const auto a = random_form(gen, dim, p), b = random_form(gen, dim, q);
    TangentVector u{std::vector<double>(dim)};
    for (auto& x : u.components) x = nd(gen);
    const auto lhs = interior(u, wedge(a, b));
    const auto rhs = wedge(interior(u, a), b) + ((p % 2) ? -1.0 : 1.0) * wedge(a, interior(u, b));
    for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
  }
}

TEST(Exterior, TwoFormEvaluationIsBilinearForm) {
  std::mt19937_64 gen(11);
  const Eigen::MatrixXd A = random_antisymmetric(gen, 4);
  const auto a = AlternatingForm::from_matrix(A);
  EXPECT_TRUE(a.to_matrix().isApprox(A, 1e-14));
  TangentVector u({0.3, -1.0, 2.0, 0.5}), v({1.0, 0.2, -0.4, 0.7});
  const Eigen::Map<const Eigen::VectorXd> U(u.components.data(), 4), V(v.components.data(), 4);
  EXPECT_NEAR(evaluate(a, u, v), U.dot(A * V), 1e-13);
  // ι_u a is the one-form A^T u: (ι_u a)(v) = a(u, v).
  const auto iu = interior(u, a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += iu[i] * v.components[i];
  EXPECT_NEAR(s, evaluate(a, u, v), 1e-13);
}

TEST(Exterior, PowerTopIsPfaffian) {
  std::mt19937_64 gen(13);
  for (int n : {1, 2, 3, 4}) {
    const Eigen::MatrixXd A = random_antisymmetric(gen, 2 * n);
    const auto m = oracle::mixed_volumes(A, Eigen::MatrixXd::Zero(2 * n, 2 * n));
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    const double top = power(AlternatingForm::from_matrix(A), n).top() / fact;
    EXPECT_NEAR(top, m[n], 1e-11 * (1.0 + std::abs(m[n])));
    EXPECT_NEAR(top * top, A.determinant(), 1e-10 * (1.0 + std::abs(A.determinant())));
  }
}

TEST(Exterior, MixedVolumesMatchPfaffianPencil) {
  std::mt19937_64 gen(17);
  for (int n : {1, 2, 3, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd A = random_antisymmetric(gen, 2 * n), B = random_antisymmetric(gen, 2 * n);
      const auto a = AlternatingForm::from_matrix(A), b = AlternatingForm::from_matrix(B);
      const auto expect = oracle::mixed_volumes(A, B);
      std::vector<double> got(n + 1);
      mixed_volumes(2 * n, a.coeffs().data(), b.coeffs().data(), got.data());
      for (int k = 0; k <= n; ++k) {
        const double tol = 1e-11 * (1.0 + std::abs(expect[k]));
        EXPECT_NEAR(got[k], expect[k], tol) << "n=" << n << " k=" << k;
        EXPECT_NEAR(mixed_volume(a, k, b, n - k), expect[k], tol) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Exterior, HermitianFormsFollowInterleavedConvention) {
  std::mt19937_64 gen(19);
  std::normal_distribution<double> nd;
  for (int n : {1, 2, 3}) {
    Eigen::MatrixXcd R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = {nd(gen), nd(gen)};
    const Eigen::MatrixXcd G = R * R.adjoint() + Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd H = 0.5 * (R + R.adjoint());
    EXPECT_TRUE(AlternatingForm::from_matrix(oracle::hermitian_form(G)).to_matrix().isApprox(oracle::hermitian_form(G)));
    const auto g = AlternatingForm::from_matrix(oracle::hermitian_form(G));
    const auto h = AlternatingForm::from_matrix(oracle::hermitian_form(H));
    for (int k = 0; k <= n; ++k) {
      const double expect = oracle::hermitian_mixed_volume(G, H, k);
      EXPECT_NEAR(mixed_volume(g, n - k, h, k), expect, 1e-10 * (1.0 + std::abs(expect))) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Exterior, TopRatioIsHalfTraceForAlphaPower) {
  std::mt19937_64 gen(23);
  for (int n : {1, 2, 3}) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Random(n, n);
    Eigen::MatrixXcd G = (S * S.transpose() + Eigen::MatrixXd::Identity(n, n)).cast<std::complex<double>>();
    const Eigen::MatrixXd A = oracle::hermitian_form(G), D = random_antisymmetric(gen, 2 * n);
    const auto alpha = AlternatingForm::from_matrix(A);
    const auto gamma = power(alpha, n - 1);
    EXPECT_NEAR(top_ratio(alpha, alpha, gamma), n, 1e-12);
    EXPECT_NEAR(top_ratio(AlternatingForm::from_matrix(D), alpha, gamma), 0.5 * (D * A.inverse()).trace(), 1e-10);
  }
}

// The literal identity n ι_uα∧ι_vβ∧γ_p = −β(u,v) α∧γ_p; see the counterexample below.
TEST(Exterior, InteriorIdentityAtP0HoldsWithOppositeSign) {
  std::mt19937_64 gen(29);
  std::normal_distribution<double> nd;
  for (int n : {2, 3}) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Random(n, n);
    const auto alpha = AlternatingForm::from_matrix(
        oracle::hermitian_form((S * S.transpose() + Eigen::MatrixXd::Identity(n, n)).cast<std::complex<double>>()));
    const auto beta = AlternatingForm::from_matrix(random_antisymmetric(gen, 2 * n));
    TangentVector u(std::vector<double>(2 * n)), v(std::vector<double>(2 * n));
    for (auto& x : u.components) x = nd(gen);
    for (auto& x : v.components) x = nd(gen);
    const InteriorIdentity r = check_interior_identity(alpha, beta, u, v, 0);
    EXPECT_NEAR(r.lhs, -r.rhs, 1e-11 * (1.0 + std::abs(r.rhs)));
  }
}

TEST(Exterior, InteriorIdentityCounterexampleAtP1) {
  const double l1 = 2.0, l2 = 3.0;
  const auto alpha = AlternatingForm::standard_symplectic(2);
  AlternatingForm beta = l1 * AlternatingForm::basis(4, {0, 1}) + l2 * AlternatingForm::basis(4, {2, 3});
  const InteriorIdentity r = check_interior_identity(alpha, beta, TangentVector::basis(4, 0), TangentVector::basis(4, 1), 1);
  EXPECT_NEAR(r.lhs, 2.0 * l1 * l2, 1e-13);
  EXPECT_NEAR(r.rhs, -l1 * (l1 + l2), 1e-13);
}

TEST(Exterior, DegenerateVolumeIsRejected) {
  const auto alpha = AlternatingForm::standard_symplectic(2);
  const auto beta = AlternatingForm::basis(4, {0, 1}) - AlternatingForm::basis(4, {2, 3});  // α∧β = 0
  EXPECT_THROW(check_interior_identity(alpha, beta, TangentVector::basis(4, 0), TangentVector::basis(4, 1), 1),
               DegenerateVolumeError);
}

TEST(Exterior, MismatchedDimensionsThrow) {
  EXPECT_THROW(wedge(AlternatingForm(4, 1), AlternatingForm(6, 1)), DimensionError);
}
