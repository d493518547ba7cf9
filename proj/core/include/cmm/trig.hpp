#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "cmm/torus.hpp"

namespace cmm {

inline constexpr int kMaxTrigDim = 6;
using Wavevector = std::array<int, kMaxTrigDim>;

// Small deterministic generator (splitmix64); the same seed gives the same
// stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();                   // [0, 1)
  double uniform(double lo, double hi);
  double normal();

 private:
  std::uint64_t state_;
};

// Σ_m a_m cos(k_m·x) + b_m sin(k_m·x) on the torus of real dimension dim.
class TrigPoly {
 public:
  struct Term {
    Wavevector k{};
    double a = 0.0;
    double b = 0.0;
  };

  TrigPoly() = default;
  explicit TrigPoly(int dim) : dim_(dim) {}
  TrigPoly(int dim, std::vector<Term> terms);

  // Mean-zero random polynomial with modes 0 < |k|_∞ ≤ band, coefficients
  // decaying like 1/(1+|k|²), scaled so Σ(|a|+|b|) = amplitude.
  static TrigPoly random(int dim, std::uint64_t seed, double amplitude, int band);
  // Spectral projection of a grid field. Throws DomainError when the
  // spectrum does not decay (non-periodic or under-resolved input).
  static TrigPoly from_field(const ScalarField& f, double prune = 1e-15, double tail_tol = 1e-8);

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  void add(const Wavevector& k, double a, double b);
  bool is_zero() const { return terms_.empty(); }
  double constant_term() const;

  double value(const double* x) const;
  void gradient(const double* x, double* grad) const;
  // value, gradient (dim) and Hessian (dim×dim row-major) together.
  void jet(const double* x, double* value, double* grad, double* hess) const;

  ScalarField sample(const TorusGrid& grid) const;
  TrigPoly scaled(double s) const;

 private:
  int dim_ = 0;
  std::vector<Term> terms_;
};

// Vector-valued trigonometric field R^dim → R^dim sharing its wavevectors.
class VectorTrigField {
 public:
  struct Term {
    Wavevector k{};
    std::array<double, kMaxTrigDim> a{};
    std::array<double, kMaxTrigDim> b{};
  };

  VectorTrigField() = default;
  explicit VectorTrigField(int dim) : dim_(dim) {}

  // Random field with |k|_∞ ≤ band and C¹ size about `amplitude`.
  static VectorTrigField random(int dim, std::uint64_t seed, double amplitude, int band);

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::vector<Term>& terms() { return terms_; }

  void value(const double* x, double* out) const;
  // value and Jacobian (row-major, J[i*dim+j] = ∂_j V_i)
  void jet(const double* x, double* out, double* jac) const;
  VectorTrigField scaled(double s) const;

 private:
  int dim_ = 0;
  std::vector<Term> terms_;
};

// Fourier interpolant of a grid field, evaluated at arbitrary points with
// separable per-axis phase tables.
class SpectralInterpolant {
 public:
  // Throws InterpolationError if the field is under-resolved (relative
  // spectral energy above tail_tol in the outer band).
  explicit SpectralInterpolant(const ScalarField& f, double tail_tol = 1e-10);

  double operator()(const double* x) const;
  void evaluate(const std::vector<double>& points, std::vector<double>& out) const;
  bool is_constant() const { return constant_; }
  double constant_value() const { return mean_; }

 private:
  TorusGrid grid_;
  struct Mode {
    Wavevector k;
    std::complex<double> c;
  };
  std::vector<Mode> modes_;
  double mean_ = 0.0;
  bool constant_ = false;
};

}  // namespace cmm
