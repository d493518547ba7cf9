#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cmm/moment_maps.hpp"
#include "cmm/toric.hpp"
#include "cmm/torus.hpp"

namespace cmm {

enum class Backend { Torus = 1, ToricCP1 = 2 };
const char* backend_name(Backend b);

// Node values of φ₀,…,φ_k.
using Potentials = std::vector<std::vector<double>>;

// A generalized ccscK system in the potential picture (all f_i = id),
// evaluated on one backend. Component 0 is X₀; component i ≥ 1 is X_i with
// coupling power p_i and weight a_i.
class CoupledModel {
 public:
  CoupledModel(std::vector<int> p, std::vector<double> weights, bool include_self_term);
  virtual ~CoupledModel() = default;

  virtual Backend backend() const = 0;
  virtual int complex_dim() const = 0;
  virtual std::size_t nodes() const = 0;  // per component
  int components() const { return static_cast<int>(p_.size()) + 1; }
  const std::vector<int>& p() const { return p_; }
  const std::vector<double>& weights() const { return weights_; }
  bool include_self_term() const { return self_; }
  // Weight of component i in the Lie-algebra pairing: 1 for X₀, a_i otherwise.
  double pairing_weight(int i) const { return i == 0 ? 1.0 : weights_[i - 1]; }

  virtual CoupledResidual evaluate(const Potentials& phi) const = 0;

  Potentials zero() const;
  // Smooth band-limited perturbation with sup norm `amplitude` per component.
  virtual Potentials random(std::uint64_t seed, double amplitude, int band) const = 0;

  // Removes constants and the automorphism freedom (torus: translations fixed
  // by the phase of the first Fourier modes of φ₀; ℂP¹: the common linear
  // term, fixed by ∫(x − a₀/2) φ₀ dx = 0).
  virtual Potentials fix_gauge(const Potentials& phi) const = 0;
  // Subtracts the dV_i-weighted mean of each component of a direction.
  void project_mean_zero(Potentials& dir, const CoupledResidual& at) const;

  // Projection of solver iterates onto the resolved subspace (identity by default).
  virtual Potentials filter(const Potentials& phi) const { return phi; }

  // Checks h_i generate holomorphic Hamiltonian fields; throws NotHolomorphicError.
  virtual void validate_holomorphic(const Potentials& h) const = 0;

  // Model coordinates of a node (torus: 2n angles; ℂP¹: the moment coordinate).
  virtual std::vector<double> node_coordinates(int component, std::size_t node) const = 0;

 protected:
  void check_shape(const Potentials& phi) const;

 private:
  std::vector<int> p_;
  std::vector<double> weights_;
  bool self_;
};

class TorusModel final : public CoupledModel {
 public:
  TorusModel(std::vector<TorusGeometry> geoms, std::vector<int> p, std::vector<double> weights,
             bool include_self_term = false);

  Backend backend() const override { return Backend::Torus; }
  int complex_dim() const override { return geoms_[0].n(); }
  std::size_t nodes() const override { return geoms_[0].grid().size(); }
  const TorusGrid& grid() const { return geoms_[0].grid(); }
  const std::vector<TorusGeometry>& geometries() const { return geoms_; }

  CoupledResidual evaluate(const Potentials& phi) const override;
  Potentials random(std::uint64_t seed, double amplitude, int band) const override;
  Potentials fix_gauge(const Potentials& phi) const override;
  void validate_holomorphic(const Potentials& h) const override;
  std::vector<double> node_coordinates(int component, std::size_t node) const override;
  // Drops Nyquist modes, which the spectral derivatives do not see.
  Potentials filter(const Potentials& phi) const override;

  std::vector<ScalarField> fields(const Potentials& phi) const;
  // Translates every potential by τ (φ ↦ φ(· + τ)); an automorphism of the system.
  Potentials translate(const Potentials& phi, const std::vector<double>& tau) const;

 private:
  std::vector<TorusGeometry> geoms_;
};

// ℂP¹ components in symplectic coordinates. The state variable is φ_i = −(u_i − u_ref,i);
// the coupling map x₀ ↦ x_i solves u_i'(x_i) = u₀'(x₀).
class ToricModel final : public CoupledModel {
 public:
  ToricModel(std::vector<ToricCP1Geometry> geoms, std::vector<int> p, std::vector<double> weights,
             bool include_self_term = false);

  Backend backend() const override { return Backend::ToricCP1; }
  int complex_dim() const override { return 1; }
  std::size_t nodes() const override { return static_cast<std::size_t>(geoms_[0].M()); }
  const std::vector<ToricCP1Geometry>& geometries() const { return geoms_; }

  CoupledResidual evaluate(const Potentials& phi) const override;
  Potentials random(std::uint64_t seed, double amplitude, int band) const override;
  Potentials fix_gauge(const Potentials& phi) const override;
  void validate_holomorphic(const Potentials& h) const override;
  std::vector<double> node_coordinates(int component, std::size_t node) const override;

  // Drops Chebyshev modes at and above M/2.
  Potentials filter(const Potentials& phi) const override;

  std::vector<ToricMetric> metrics(const Potentials& phi) const;
  // The one-parameter automorphism u_i ↦ u_i − s x (common to all components).
  Potentials apply_automorphism(const Potentials& phi, double s) const;
  // Rotation Hamiltonians h_i = slope·(x_i − a_i/2).
  Potentials rotation_field(double slope = 1.0) const;
  // u_i − u_ref,i at the nodes after gauge fixing.
  std::vector<double> potential_deviation(const Potentials& phi, int component) const;

 private:
  std::vector<ToricCP1Geometry> geoms_;
};

// H_j^{i,p} = n!/((n−p)!p!) ω_i^{n−p}∧ω_j^p / ω_j^n per node.
std::vector<double> H_function(const CoupledModel& model, const Potentials& phi, int i, int j, int p);

}  // namespace cmm
