#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace cmm {

inline constexpr int kMaxFormDim = 12;

// Alternating k-form on R^dim. Coefficients are stored over strictly
// increasing multi-indices in lexicographic order.
class AlternatingForm {
 public:
  AlternatingForm() = default;
  AlternatingForm(int dim, int degree);

  static AlternatingForm scalar(int dim, double value);
  // e^{i1} ∧ ... ∧ e^{ik}; indices in any order, repeated indices give zero.
  static AlternatingForm basis(int dim, std::initializer_list<int> indices);
  // a = Σ_{i<j} A_ij e^i ∧ e^j for antisymmetric A (only the upper triangle is read).
  static AlternatingForm from_matrix(const Eigen::MatrixXd& a);
  // Σ_i e^{2i} ∧ e^{2i+1} (interleaved) or Σ_i e^i ∧ e^{n+i} (split).
  static AlternatingForm standard_symplectic(int n, bool interleaved = true);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return coeffs_.size(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::vector<double>& coeffs() { return coeffs_; }
  double operator[](std::size_t rank) const { return coeffs_[rank]; }
  double& operator[](std::size_t rank) { return coeffs_[rank]; }

  // Coefficient of the basis element whose index set is the bitmask.
  double at_mask(std::uint32_t mask) const;
  std::uint32_t mask_of(std::size_t rank) const;
  std::size_t rank_of(std::uint32_t mask) const;

  double top() const;
  Eigen::MatrixXd to_matrix() const;  // degree 2 only

  AlternatingForm& operator+=(const AlternatingForm& other);
  AlternatingForm& operator-=(const AlternatingForm& other);
  AlternatingForm& operator*=(double s);

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::vector<double> coeffs_;
};

AlternatingForm operator+(AlternatingForm a, const AlternatingForm& b);
AlternatingForm operator-(AlternatingForm a, const AlternatingForm& b);
AlternatingForm operator*(double s, AlternatingForm a);

struct TangentVector {
  std::vector<double> components;

  TangentVector() = default;
  explicit TangentVector(std::vector<double> c) : components(std::move(c)) {}
  static TangentVector basis(int dim, int i);
  int dim() const { return static_cast<int>(components.size()); }
};

std::size_t binomial(int n, int k);

AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b);
AlternatingForm power(const AlternatingForm& a, int m);
AlternatingForm interior(const TangentVector& u, const AlternatingForm& a);
// a(u, v) for a 2-form.
double evaluate(const AlternatingForm& a, const TangentVector& u, const TangentVector& v);

// n · top(η∧γ) / top(α∧γ) with γ of degree 2n−2.
double top_ratio(const AlternatingForm& eta, const AlternatingForm& alpha,
                 const AlternatingForm& gamma);

struct InteriorIdentity {
  double lhs;     // n · top(ι_u α ∧ ι_v β ∧ γ_p)
  double rhs;     // −β(u,v) · top(α ∧ γ_p)
  double volume;  // top(α ∧ γ_p) = top(α^{n−p} ∧ β^p)
};

// γ_p = α^{n−1−p} ∧ β^p. Throws DegenerateVolumeError unless the volume is
// above the positivity floor.
InteriorIdentity check_interior_identity(const AlternatingForm& alpha, const AlternatingForm& beta,
                                         const TangentVector& u, const TangentVector& v, int p);

// top(a^ka ∧ b^kb) / (ka! kb!), the normalized mixed volume used by every
// field-level wedge expression.
double mixed_volume(const AlternatingForm& a, int ka, const AlternatingForm& b, int kb);

// All mixed volumes of a pair of 2-forms on R^dim at once: m[k] for
// k = 0..dim/2 equals mixed_volume(a, k, b, dim/2 − k). a and b are raw
// coefficient arrays in the AlternatingForm order; this is the coefficient
// list of Pf(s·A + B) in s.
void mixed_volumes(int dim, const double* a, const double* b, double* m);

}  // namespace cmm
