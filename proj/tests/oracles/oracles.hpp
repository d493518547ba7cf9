#pragma once

// Reference computations for the unit tests. Everything here is written
// directly from definitions and shares no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Polynomial in s, coefficients low to high.
using Poly = std::vector<double>;

inline Poly mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

inline void axpy(Poly& acc, double s, const Poly& x) {
  if (acc.size() < x.size()) acc.resize(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) acc[i] += s * x[i];
}

// Pfaffian of s·A + B by expansion along the first row.
inline Poly pfaffian_pencil(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::vector<int> idx) {
  if (idx.empty()) return {1.0};
  const int i = idx[0];
  Poly total{0.0};
  for (std::size_t t = 1; t < idx.size(); ++t) {
    const int j = idx[t];
    std::vector<int> rest;
    for (std::size_t u = 1; u < idx.size(); ++u)
      if (u != t) rest.push_back(idx[u]);
    const Poly entry{B(i, j), A(i, j)};
    axpy(total, (t % 2 == 1) ? 1.0 : -1.0, mul(entry, pfaffian_pencil(A, B, rest)));
  }
  return total;
}

// m[k] = top(a^k ∧ b^{n−k})/(k!(n−k)!) for 2-forms given by antisymmetric
// matrices (a = Σ_{i<j} A_ij e^i∧e^j); equals the s^k coefficient of Pf(sA + B).
inline std::vector<double> mixed_volumes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  std::vector<int> idx(A.rows());
  std::iota(idx.begin(), idx.end(), 0);
  Poly p = pfaffian_pencil(A, B, idx);
  p.resize(A.rows() / 2 + 1, 0.0);
  return p;
}

// Real antisymmetric matrix of (i/2) H dz∧dz̄ in interleaved coordinates
// (x1, y1, x2, y2, …): ω(e_xa, e_yb) = Re H_ab, ω(e_xa, e_xb) = ω(e_ya, e_yb) = −Im H_ab.
inline Eigen::MatrixXd hermitian_form(const Eigen::MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      W(2 * a, 2 * b + 1) = H(a, b).real();
      W(2 * a + 1, 2 * b) = -H(b, a).real();
      W(2 * a, 2 * b) = -H(a, b).imag();
      W(2 * a + 1, 2 * b + 1) = -H(a, b).imag();
    }
  return W;
}

// Elementary symmetric polynomial e_k of the values.
inline double elementary_symmetric(const std::vector<double>& v, int k) {
  std::vector<double> e(k + 1, 0.0);
  e[0] = 1.0;
  for (double x : v)
    for (int j = k; j >= 1; --j) e[j] += x * e[j - 1];
  return e[k];
}

// For Hermitian G > 0 and H: ω_G^{n−k}∧ω_H^k/((n−k)!k!) = det G · e_k(eig G⁻¹H).
inline double hermitian_mixed_volume(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& H, int k) {
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  const Eigen::MatrixXcd L = llt.matrixL();
  const Eigen::MatrixXcd Li = L.inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Li * H * Li.adjoint());
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return G.determinant().real() * elementary_symmetric(ev, k);
}

// Central-difference Jacobian of x ↦ f(x), row-major J[i*d + j] = ∂_j f_i.
inline std::vector<double> fd_jacobian(const std::function<void(const double*, double*)>& f, const double* x, int d,
                                       double h = 1e-5) {
  std::vector<double> J(d * d), xp(x, x + d), xm(x, x + d), fp(d), fm(d);
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    f(xp.data(), fp.data());
    f(xm.data(), fm.data());
    for (int i = 0; i < d; ++i) J[i * d + j] = (fp[i] - fm[i]) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

// Direct O(N²) one-dimensional DFT, forward sign e^{−ikx}.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& f) {
  const std::size_t N = f.size();
  std::vector<std::complex<double>> F(N);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t x = 0; x < N; ++x) F[k] += f[x] * std::polar(1.0, -2.0 * M_PI * double(k * x) / double(N));
  return F;
}

// FNV-1a 64 of a byte string, as 16 lowercase hex digits.
inline std::string fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xF];
  return out;
}

}  // namespace oracle
