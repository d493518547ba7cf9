#pragma once

#include <utility>
#include <vector>

#include "cmm/diffeo.hpp"
#include "cmm/torus.hpp"

namespace cmm {

struct MomentMapValue {
  ScalarField x_density;  // on the domain
  ScalarField y_density;  // on the target
  double c1 = 0.0;
  double c2 = 0.0;
  int p = 0;
  double prefactor = 1.0;
};

// Theorem-2.5 constants: c1 = ∫ ω_X^{n−1−p}∧f^*ω_Y^{p+1}/((n−1−p)!(p+1)!) / ∫ω_X^n/n!,
// c2 = ∫ f_*ω_X^{n−p}∧ω_Y^p/((n−p)!p!) / ∫ω_Y^n/n!.
std::pair<double, double> normalizing_constants(const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f,
                                                int p);

// prefactor·(c1 ω_X^n/n! − ω_X^{n−1−p}∧f^*ω_Y^{p+1}/…) on X and
// prefactor·(f_*ω_X^{n−p}∧ω_Y^p/… − c2 ω_Y^n/n!) on Y, prefactor n/(n−p).
MomentMapValue mu_p(const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f, int p);

// μ_{n−p−1; ω_Y, ω_X}(g) for g: Y → X with prefactor n/(p+1). Its
// x_density lives on Y and its y_density on X.
MomentMapValue mu_p_dual(const TorusGeometry& Y, const TorusGeometry& X, const DiffeoField& g, int p);

// ∫_X φ x_density + ∫_Y ψ y_density; φ and ψ must be mean-zero.
double moment_pairing(const MomentMapValue& m, const ScalarField& phi, const ScalarField& psi);

// Graph embedding x ↦ (x, f1(x)) into X × W with f^*ω_Y = ω_X + f1^*ω_W.
// x_density pairs with φ, y_density (on X) pairs with ψ∘f.
MomentMapValue graph_mu_p(const TorusGeometry& X, const TorusGeometry& W, const DiffeoField& f1, int p);
double graph_pairing(const MomentMapValue& m, const ScalarField& phi, const ScalarField& psi_on_graph);

// Residual system on one or more components sharing a grid or interval.
// density: top-form density per node; volume: ω_i^n/n! per node;
// weight: quadrature weight per node (so ∫ρ = Σ weight·density).
struct CoupledResidual {
  std::vector<std::vector<double>> density;
  std::vector<std::vector<double>> volume;
  std::vector<std::vector<double>> weight;
  std::vector<double> constants;
  std::vector<int> p;

  int components() const { return static_cast<int>(density.size()); }
  // density / volume
  std::vector<double> scalar(int i) const;
  double integral(int i) const;
  double l2(int i) const;    // (∫ scalar² dV)^{1/2}
  double linf(int i) const;  // max |scalar|
};

// Potential-picture ccscK system on a torus. geoms[0] carries ω₀; each
// geoms[i] supplies the base class of ω_i. All share one grid.
CoupledResidual ccsck_residual(const std::vector<TorusGeometry>& geoms, const std::vector<ScalarField>& potentials,
                               const std::vector<int>& p, const std::vector<double>& weights,
                               bool include_self_term = false);

enum class MuJSign { Standard = 1, Flipped = -1 };
// sign·(Ric∧ω^{n−1}/(n−1)! − S̄ ω^n/n!) for ω = ω_φ.
ScalarField mu_j_density(const TorusGeometry& geom, const ScalarField& phi, MuJSign sign = MuJSign::Standard);

struct KymResidual {
  CoupledResidual residual;
  double c = 0.0;
  double d = 0.0;
  double z = 0.0;
  double alpha1 = 0.0;  // the value fixed by c₂₀α₁ = c₂₁α₂
};

// U(1) Kähler–Yang–Mills residuals (n ≥ 2), potential picture with f = id.
KymResidual kym_u1_residual(const TorusGeometry& X, const TorusGeometry& Y, const ScalarField& phi_x,
                            const ScalarField& phi_y, double alpha0, double alpha1, double alpha2);

struct DhymData {
  HermitianField omega;
  HermitianField alpha;  // real (1,1)-form as a Hermitian matrix field, not necessarily positive
  double theta = 0.0;
};

struct DhymParts {
  ScalarField imaginary;
  ScalarField real_part;
};

// Top coefficients of Im/Re e^{iθ}(ω + iα)^n. Throws NotInConeError if
// the real part is not positive at some node.
DhymParts dhym_residual(const DhymData& data, bool check_cone = true);
// Same for constant forms, returning (Im, Re).
std::pair<double, double> dhym_constant(const Eigen::MatrixXcd& omega, const Eigen::MatrixXcd& alpha, double theta);

// Coupled dHYM system of the potentials (φ for ω, ψ for α) on a torus.
CoupledResidual coupled_dhym_residual(const TorusGeometry& geom, const Eigen::MatrixXcd& alpha_base,
                                      const ScalarField& phi, const ScalarField& psi, double theta);

}  // namespace cmm
