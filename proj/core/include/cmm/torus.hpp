#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cmm/exterior.hpp"

namespace cmm {

// Uniform grid on the real torus (R/2πZ)^{2n}, N points per axis, axes
// ordered (x1, y1, x2, y2, ...), row-major with axis 0 slowest.
struct TorusGrid {
  int n = 1;
  int N = 16;

  int dim() const { return 2 * n; }
  std::size_t size() const;
  double spacing() const;
  double cell_volume() const;
  void coords(std::size_t node, double* x) const;
  std::size_t index(const int* j) const;
  bool operator==(const TorusGrid& o) const { return n == o.n && N == o.N; }
};

// Signed wavenumber of FFT index j; the Nyquist index maps to N/2.
int wavenumber(int j, int N);

struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// Hermitian n×n matrix per node, entries stored row-major.
struct HermitianField {
  TorusGrid grid;
  std::vector<std::complex<double>> entries;

  HermitianField() = default;
  explicit HermitianField(const TorusGrid& g) : grid(g), entries(g.size() * g.n * g.n) {}
  Eigen::MatrixXcd at(std::size_t node) const;
  void set(std::size_t node, const Eigen::MatrixXcd& m);
};

// Real 2-form per node as C(2n,2) coefficients in exterior-kernel order.
struct TwoFormField {
  TorusGrid grid;
  std::vector<double> coeffs;

  TwoFormField() = default;
  explicit TwoFormField(const TorusGrid& g);
  std::size_t stride() const;
  AlternatingForm at(std::size_t node) const;
  const double* data(std::size_t node) const { return coeffs.data() + node * stride(); }
  void set(std::size_t node, const AlternatingForm& a);
  static TwoFormField constant(const TorusGrid& g, const AlternatingForm& a);
};

// (X, ω) = ((R/2πZ)^{2n}, (i/2) g⁰_{ab̄} dz^a∧dz̄^b) with constant positive g⁰.
class TorusGeometry {
 public:
  TorusGeometry(int n, int N, Eigen::MatrixXcd base_metric);
  static TorusGeometry flat(int n, int N, double scale = 1.0);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n; }
  const Eigen::MatrixXcd& base_metric() const { return base_; }
  AlternatingForm omega() const;
  Eigen::MatrixXd omega_matrix() const;
  double volume() const;  // ∫ ω^n/n!

 private:
  TorusGrid grid_;
  Eigen::MatrixXcd base_;
};

// Real 2-form of a Hermitian matrix in the (i/2) g dz∧dz̄ convention.
AlternatingForm hermitian_to_form(const Eigen::MatrixXcd& g);
Eigen::MatrixXd hermitian_to_real(const Eigen::MatrixXcd& g);
TwoFormField to_form_field(const HermitianField& g);

// Spectral derivatives (Nyquist mode dropped).
ScalarField derivative(const ScalarField& f, int axis);
std::vector<ScalarField> gradient(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);
// Matrix field of ∂_a ∂_b̄ f.
HermitianField ddbar(const ScalarField& f);

// g⁰ + 2∂∂̄φ; throws NotKahlerError at the worst node if not positive.
HermitianField metric_from_potential(const TorusGeometry& geom, const ScalarField& phi, int component = 0);
HermitianField constant_metric(const TorusGrid& grid, const Eigen::MatrixXcd& g);
// Smallest eigenvalue per node and the node where it is smallest.
double min_eigenvalue(const HermitianField& g, std::size_t* worst_node = nullptr);
ScalarField determinant(const HermitianField& g);

// Ricci matrix field −2∂∂̄ log det g (same convention as the metric).
HermitianField ricci(const HermitianField& g);
// S = tr(g⁻¹ Ric).
ScalarField scalar_curvature(const HermitianField& g);
ScalarField scalar_curvature(const HermitianField& g, const HermitianField& ric);

// Trapezoidal quadrature of a top-degree density relative to dx^{2n}.
double integrate(const ScalarField& density);
double mean(const ScalarField& f);

}  // namespace cmm
