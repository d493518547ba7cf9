#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "cmm/torus.hpp"
#include "cmm/trig.hpp"

namespace cmm {

// Exact pointwise evaluator of a torus map, lifted to R^dim (the image is
// not reduced mod 2π). jac, when non-null, receives the row-major Jacobian.
class MapEvaluator {
 public:
  virtual ~MapEvaluator() = default;
  virtual int dim() const = 0;
  virtual void eval(const double* x, double* y, double* jac) const = 0;
};

class IdentityMap final : public MapEvaluator {
 public:
  explicit IdentityMap(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  void eval(const double* x, double* y, double* jac) const override;

 private:
  int dim_;
};

// x ↦ x + V(x).
class DisplacementMap final : public MapEvaluator {
 public:
  explicit DisplacementMap(VectorTrigField v) : v_(std::move(v)) {}
  int dim() const override { return v_.dim(); }
  void eval(const double* x, double* y, double* jac) const override;
  const VectorTrigField& field() const { return v_; }

 private:
  VectorTrigField v_;
};

// Time-t flow of X_h = −Ω⁻¹∇h by fixed-step RK4 on position and Jacobian.
class HamiltonianFlowMap final : public MapEvaluator {
 public:
  HamiltonianFlowMap(TrigPoly h, const Eigen::MatrixXd& omega, double t, int steps);
  int dim() const override { return h_.dim(); }
  void eval(const double* x, double* y, double* jac) const override;

 private:
  TrigPoly h_;
  Eigen::MatrixXd omega_inv_;
  double t_;
  int steps_;
};

// Inverse by damped Newton-preconditioned fixed point on the forward map.
class InverseMap final : public MapEvaluator {
 public:
  explicit InverseMap(std::shared_ptr<const MapEvaluator> forward, double tol = 1e-10, int max_iter = 200)
      : fwd_(std::move(forward)), tol_(tol), max_iter_(max_iter) {}
  int dim() const override { return fwd_->dim(); }
  void eval(const double* y, double* x, double* jac) const override;
  const std::shared_ptr<const MapEvaluator>& forward() const { return fwd_; }

 private:
  std::shared_ptr<const MapEvaluator> fwd_;
  double tol_;
  int max_iter_;
};

// outer ∘ inner
class ComposedMap final : public MapEvaluator {
 public:
  ComposedMap(std::shared_ptr<const MapEvaluator> outer, std::shared_ptr<const MapEvaluator> inner)
      : outer_(std::move(outer)), inner_(std::move(inner)) {}
  int dim() const override { return inner_->dim(); }
  void eval(const double* x, double* y, double* jac) const override;

 private:
  std::shared_ptr<const MapEvaluator> outer_, inner_;
};

// Torus diffeomorphism with node caches of the forward map, its Jacobian, the
// inverse and the inverse Jacobian. Caches fill on first use under a
// once-flag, so a DiffeoField is safely shareable read-only.
class DiffeoField {
 public:
  DiffeoField(const TorusGrid& grid, std::shared_ptr<const MapEvaluator> forward,
              std::shared_ptr<const MapEvaluator> inverse = nullptr);
  static DiffeoField identity(const TorusGrid& grid);
  static DiffeoField displacement(const TorusGrid& grid, VectorTrigField v);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  const MapEvaluator& forward() const { return *fwd_; }
  const MapEvaluator& backward() const { return *inv_; }
  std::shared_ptr<const MapEvaluator> forward_ptr() const { return fwd_; }
  std::shared_ptr<const MapEvaluator> backward_ptr() const { return inv_; }

  // Per node: dim values (image) and dim² values (Jacobian, row-major).
  const std::vector<double>& image() const;
  const std::vector<double>& jacobian() const;
  const std::vector<double>& inverse_image() const;
  const std::vector<double>& inverse_jacobian() const;

  DiffeoField inverse() const;
  DiffeoField compose(const DiffeoField& inner) const;  // this ∘ inner
  double min_jacobian_determinant() const;

 private:
  struct Cache {
    std::once_flag fwd_flag, inv_flag;
    std::vector<double> image, jac, inv_image, inv_jac;
  };
  void fill(bool inverse) const;

  TorusGrid grid_;
  std::shared_ptr<const MapEvaluator> fwd_, inv_;
  std::shared_ptr<Cache> cache_;
};

// h must be mean-zero up to its constant, which is dropped. A grid field h
// is converted through TrigPoly::from_field (rejects non-periodic input).
DiffeoField hamiltonian_flow(const TorusGeometry& geom, const TrigPoly& h, double t, int steps);
DiffeoField hamiltonian_flow(const TorusGeometry& geom, const ScalarField& h, double t, int steps);

// (f^*β)(x) = Df(x)^T B(f(x)) Df(x); β interpolated spectrally unless constant.
TwoFormField pullback_2form(const DiffeoField& f, const TwoFormField& beta);
// f_*β = (f⁻¹)^*β.
TwoFormField pushforward_2form(const DiffeoField& f, const TwoFormField& beta);
// (f_*ρ)(y) = ρ(f⁻¹(y)) det D(f⁻¹)(y) for a top-degree density ρ.
ScalarField pushforward(const DiffeoField& f, const ScalarField& density);
// (f^*ρ)(x) = ρ(f(x)) det Df(x).
ScalarField pullback_density(const DiffeoField& f, const ScalarField& density);
// Scalar function composition ψ∘f at the nodes (spectral interpolation).
ScalarField compose_function(const ScalarField& psi, const DiffeoField& f);

}  // namespace cmm
