#pragma once

#include <memory>
#include <vector>

namespace cmm {

// Toric ℂP¹ with ω = dx∧dθ on the moment interval [0, a] × S¹, sampled on M
// Chebyshev–Gauss nodes (interior, increasing) with Fejér quadrature.
class ToricCP1Geometry {
 public:
  ToricCP1Geometry(double a, int M);

  double a() const { return a_; }
  int M() const { return M_; }
  const std::vector<double>& nodes() const { return data_->nodes; }
  const std::vector<double>& weights() const { return data_->weights; }  // Σ w = a

  // Guillemin reference potential and derivatives.
  double u_ref(double x) const;
  double u_ref_d(double x) const;
  double u_ref_dd(double x) const;

  // Chebyshev coefficients in s = 2x/a − 1 from node values, and back.
  std::vector<double> to_coefficients(const std::vector<double>& values) const;
  std::vector<double> to_values(const std::vector<double>& coeffs) const;
  // Coefficients of d/dx.
  std::vector<double> differentiate(const std::vector<double>& coeffs) const;
  double evaluate(const std::vector<double>& coeffs, double x) const;

  // ∫ f dx∧dθ for node values f.
  double integrate(const std::vector<double>& density) const;
  double volume() const;  // 2πa

 private:
  struct Data {
    std::vector<double> nodes, weights;
  };
  double a_;
  int M_;
  std::shared_ptr<const Data> data_;
};

// Metric of the symplectic potential u = u_ref + ψ.
class ToricMetric {
 public:
  // Throws NotKahlerError (worst node) unless u'' > 0 at every node.
  ToricMetric(const ToricCP1Geometry& geom, const std::vector<double>& psi, int component = 0);

  const ToricCP1Geometry& geometry() const { return geom_; }
  const std::vector<double>& psi() const { return psi_; }
  // Node values.
  const std::vector<double>& u_dd() const { return u_dd_; }
  const std::vector<double>& v() const { return v_; }  // 1/u''
  // Ricci density ρ = −½ v'' (coefficient of dx∧dθ); equal to S here.
  const std::vector<double>& ricci_density() const { return ricci_; }
  const std::vector<double>& scalar_curvature() const { return ricci_; }

  // Pointwise at arbitrary x in (0, a).
  double u_d(double x) const;
  double v_at(double x) const;
  // Solves u'(x) = target for x in (0, a).
  double solve_gradient(double target) const;

 private:
  ToricCP1Geometry geom_;
  std::vector<double> psi_;
  std::vector<double> c_d_, c_dd_;
  std::vector<double> u_dd_, v_, ricci_;
};

}  // namespace cmm
