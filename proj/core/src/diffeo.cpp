#include "cmm/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmm/errors.hpp"
#include "cmm/parallel.hpp"

namespace cmm {
namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxTrigDim, kMaxTrigDim>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxTrigDim, 1>;

double max_abs(const double* v, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace

void IdentityMap::eval(const double* x, double* y, double* jac) const {
  for (int r = 0; r < dim_; ++r) y[r] = x[r];
  if (jac)
    for (int r = 0; r < dim_ * dim_; ++r) jac[r] = (r % (dim_ + 1) == 0) ? 1.0 : 0.0;
}

void DisplacementMap::eval(const double* x, double* y, double* jac) const {
  const int d = v_.dim();
  if (jac) {
    v_.jet(x, y, jac);
    for (int r = 0; r < d; ++r) jac[r * d + r] += 1.0;
  } else {
    v_.value(x, y);
  }
  for (int r = 0; r < d; ++r) y[r] += x[r];
}

HamiltonianFlowMap::HamiltonianFlowMap(TrigPoly h, const Eigen::MatrixXd& omega, double t, int steps)
    : h_(std::move(h)), omega_inv_(omega.inverse()), t_(t), steps_(steps) {
  if (steps_ < 1) throw DomainError("flow needs at least one step");
  if (omega.rows() != h_.dim()) throw DimensionError("Hamiltonian and symplectic form dimensions differ");
}

void HamiltonianFlowMap::eval(const double* x0, double* y, double* jac) const {
  const int d = h_.dim();
  SmallVec x = Eigen::Map<const SmallVec>(x0, d);
  SmallMat J = SmallMat::Identity(d, d);
  const double dt = t_ / steps_;
  double val, grad[kMaxTrigDim], hess[kMaxTrigDim * kMaxTrigDim];
  auto field = [&](const SmallVec& p, SmallVec& v, SmallMat* dv) {
    h_.jet(p.data(), &val, grad, hess);
    v = -omega_inv_ * Eigen::Map<const SmallVec>(grad, d);
    if (dv) *dv = -omega_inv_ * Eigen::Map<const SmallMat>(hess, d, d);
  };
  SmallVec k1, k2, k3, k4;
  SmallMat A1, A2, A3, A4;
  const bool track = jac != nullptr;
  for (int s = 0; s < steps_; ++s) {
    field(x, k1, track ? &A1 : nullptr);
    SmallVec x2 = x + 0.5 * dt * k1;
    field(x2, k2, track ? &A2 : nullptr);
    SmallVec x3 = x + 0.5 * dt * k2;
    field(x3, k3, track ? &A3 : nullptr);
    SmallVec x4 = x + dt * k3;
    field(x4, k4, track ? &A4 : nullptr);
    if (track) {
      SmallMat J1 = A1 * J;
      SmallMat J2 = A2 * (J + 0.5 * dt * J1);
      SmallMat J3 = A3 * (J + 0.5 * dt * J2);
      SmallMat J4 = A4 * (J + dt * J3);
      J += (dt / 6.0) * (J1 + 2.0 * J2 + 2.0 * J3 + J4);
    }
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  for (int r = 0; r < d; ++r) y[r] = x[r];
  if (track) Eigen::Map<SmallMat>(jac, d, d) = J;
}

void InverseMap::eval(const double* y, double* x, double* jac) const {
  const int d = fwd_->dim();
  double fx[kMaxTrigDim], J[kMaxTrigDim * kMaxTrigDim], r[kMaxTrigDim], trial[kMaxTrigDim];
  fwd_->eval(y, fx, nullptr);
  for (int i = 0; i < d; ++i) x[i] = 2.0 * y[i] - fx[i];
  fwd_->eval(x, fx, J);
  for (int i = 0; i < d; ++i) r[i] = fx[i] - y[i];
  double res = max_abs(r, d);
  int iter = 0;
  while (res > tol_) {
    if (++iter > max_iter_)
      throw FlowBlowupError("map inversion did not converge (residual " + std::to_string(res) + ")");
    Eigen::Map<const SmallMat> Jm(J, d, d);
    SmallVec step = Jm.partialPivLu().solve(Eigen::Map<const SmallVec>(r, d));
    double lambda = 1.0;
    double new_res = INFINITY;
    // The full step is almost always accepted, so the trial carries its Jacobian.
    double Jt[kMaxTrigDim * kMaxTrigDim];
    for (int k = 0; k < 30; ++k) {
      for (int i = 0; i < d; ++i) trial[i] = x[i] - lambda * step[i];
      fwd_->eval(trial, fx, Jt);
      double m = 0.0;
      for (int i = 0; i < d; ++i) m = std::max(m, std::abs(fx[i] - y[i]));
      if (m < res) {
        new_res = m;
        break;
      }
      lambda *= 0.5;
    }
    if (!(new_res < res)) {
      if (res <= 10.0 * tol_) break;
      throw FlowBlowupError("map inversion stalled (residual " + std::to_string(res) + ")");
    }
    for (int i = 0; i < d; ++i) {
      x[i] = trial[i];
      r[i] = fx[i] - y[i];
    }
    std::copy_n(Jt, d * d, J);
    res = new_res;
  }
  if (jac) {
    Eigen::Map<const SmallMat> Jm(J, d, d);
    Eigen::Map<SmallMat>(jac, d, d) = Jm.inverse();
  }
}

void ComposedMap::eval(const double* x, double* y, double* jac) const {
  const int d = inner_->dim();
  double mid[kMaxTrigDim], Ji[kMaxTrigDim * kMaxTrigDim], Jo[kMaxTrigDim * kMaxTrigDim];
  inner_->eval(x, mid, jac ? Ji : nullptr);
  outer_->eval(mid, y, jac ? Jo : nullptr);
  if (jac)
    Eigen::Map<SmallMat>(jac, d, d) = Eigen::Map<const SmallMat>(Jo, d, d) * Eigen::Map<const SmallMat>(Ji, d, d);
}

DiffeoField::DiffeoField(const TorusGrid& grid, std::shared_ptr<const MapEvaluator> forward,
                         std::shared_ptr<const MapEvaluator> inverse)
    : grid_(grid), fwd_(std::move(forward)), inv_(std::move(inverse)), cache_(std::make_shared<Cache>()) {
  if (fwd_->dim() != grid_.dim()) throw DimensionError("map dimension does not match grid");
  if (!inv_) inv_ = std::make_shared<InverseMap>(fwd_);
}

DiffeoField DiffeoField::identity(const TorusGrid& grid) {
  auto id = std::make_shared<IdentityMap>(grid.dim());
  return DiffeoField(grid, id, id);
}

DiffeoField DiffeoField::displacement(const TorusGrid& grid, VectorTrigField v) {
  return DiffeoField(grid, std::make_shared<DisplacementMap>(std::move(v)));
}

void DiffeoField::fill(bool inverse) const {
  auto& flag = inverse ? cache_->inv_flag : cache_->fwd_flag;
  std::call_once(flag, [&] {
    const int d = dim();
    const std::size_t n = grid_.size();
    auto& img = inverse ? cache_->inv_image : cache_->image;
    auto& jac = inverse ? cache_->inv_jac : cache_->jac;
    img.assign(n * d, 0.0);
    jac.assign(n * d * d, 0.0);
    const MapEvaluator& m = inverse ? *inv_ : *fwd_;
    parallel_for(
        n,
        [&](std::size_t b, std::size_t e) {
          double x[kMaxTrigDim];
          for (std::size_t node = b; node < e; ++node) {
            grid_.coords(node, x);
            m.eval(x, img.data() + node * d, jac.data() + node * d * d);
          }
        },
        512);
    for (std::size_t node = 0; node < n; ++node) {
      double det = Eigen::Map<const SmallMat>(jac.data() + node * d * d, d, d).determinant();
      if (!(det > 0.0))
        throw FlowBlowupError("Jacobian determinant " + std::to_string(det) + " at node " + std::to_string(node));
    }
  });
}

const std::vector<double>& DiffeoField::image() const {
  fill(false);
  return cache_->image;
}
const std::vector<double>& DiffeoField::jacobian() const {
  fill(false);
  return cache_->jac;
}
const std::vector<double>& DiffeoField::inverse_image() const {
  fill(true);
  return cache_->inv_image;
}
const std::vector<double>& DiffeoField::inverse_jacobian() const {
  fill(true);
  return cache_->inv_jac;
}

DiffeoField DiffeoField::inverse() const { return DiffeoField(grid_, inv_, fwd_); }

DiffeoField DiffeoField::compose(const DiffeoField& inner) const {
  if (!(inner.grid_ == grid_)) throw DimensionError("composition of maps on different grids");
  return DiffeoField(grid_, std::make_shared<ComposedMap>(fwd_, inner.fwd_),
                     std::make_shared<ComposedMap>(inner.inv_, inv_));
}

double DiffeoField::min_jacobian_determinant() const {
  const auto& jac = jacobian();
  const int d = dim();
  double m = INFINITY;
  for (std::size_t node = 0; node < grid_.size(); ++node)
    m = std::min(m, Eigen::Map<const SmallMat>(jac.data() + node * d * d, d, d).determinant());
  return m;
}

DiffeoField hamiltonian_flow(const TorusGeometry& geom, const TrigPoly& h, double t, int steps) {
  if (h.dim() != geom.grid().dim()) throw DimensionError("Hamiltonian dimension does not match geometry");
  std::vector<TrigPoly::Term> terms;
  for (const auto& term : h.terms()) {
    bool zero = true;
    for (int r = 0; r < h.dim(); ++r) zero = zero && term.k[r] == 0;
    if (!zero) terms.push_back(term);
  }
  if (terms.empty()) return DiffeoField::identity(geom.grid());
  return DiffeoField(geom.grid(),
                     std::make_shared<HamiltonianFlowMap>(TrigPoly(h.dim(), terms), geom.omega_matrix(), t, steps));
}

DiffeoField hamiltonian_flow(const TorusGeometry& geom, const ScalarField& h, double t, int steps) {
  return hamiltonian_flow(geom, TrigPoly::from_field(h), t, steps);
}

namespace {

bool is_constant_form(const TwoFormField& beta) {
  const std::size_t s = beta.stride();
  for (std::size_t node = 1; node < beta.grid.size(); ++node)
    for (std::size_t i = 0; i < s; ++i)
      if (beta.coeffs[node * s + i] != beta.coeffs[i]) return false;
  return true;
}

// Coefficients of β at arbitrary points, row per point.
std::vector<double> sample_form(const TwoFormField& beta, const std::vector<double>& points) {
  const std::size_t s = beta.stride();
  const int d = beta.grid.dim();
  const std::size_t count = points.size() / d;
  std::vector<double> out(count * s);
  if (is_constant_form(beta)) {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t c = 0; c < s; ++c) out[i * s + c] = beta.coeffs[c];
    return out;
  }
  for (std::size_t c = 0; c < s; ++c) {
    ScalarField comp(beta.grid);
    for (std::size_t node = 0; node < beta.grid.size(); ++node) comp.values[node] = beta.coeffs[node * s + c];
    SpectralInterpolant interp(comp);
    std::vector<double> vals;
    interp.evaluate(points, vals);
    for (std::size_t i = 0; i < count; ++i) out[i * s + c] = vals[i];
  }
  return out;
}

TwoFormField pull(const TorusGrid& grid, const std::vector<double>& image, const std::vector<double>& jac,
                  const TwoFormField& beta) {
  if (!(beta.grid == grid)) throw DimensionError("form and map live on different grids");
  const int d = grid.dim();
  const std::size_t s = beta.stride();
  std::vector<double> b = sample_form(beta, image);
  TwoFormField out(grid);
  parallel_for(grid.size(), [&](std::size_t lo, std::size_t hi) {
    AlternatingForm form(d, 2);
    for (std::size_t node = lo; node < hi; ++node) {
      for (std::size_t c = 0; c < s; ++c) form[c] = b[node * s + c];
      Eigen::MatrixXd B = form.to_matrix();
      Eigen::Map<const SmallMat> J(jac.data() + node * d * d, d, d);
      Eigen::MatrixXd P = J.transpose() * B * J;
      out.set(node, AlternatingForm::from_matrix(P));
    }
  });
  return out;
}

ScalarField pull_density(const TorusGrid& grid, const std::vector<double>& image, const std::vector<double>& jac,
                         const ScalarField& rho) {
  if (!(rho.grid == grid)) throw DimensionError("density and map live on different grids");
  const int d = grid.dim();
  std::vector<double> vals;
  SpectralInterpolant(rho).evaluate(image, vals);
  ScalarField out(grid);
  for (std::size_t node = 0; node < grid.size(); ++node)
    out.values[node] = vals[node] * Eigen::Map<const SmallMat>(jac.data() + node * d * d, d, d).determinant();
  return out;
}

}  // namespace

TwoFormField pullback_2form(const DiffeoField& f, const TwoFormField& beta) {
  return pull(f.grid(), f.image(), f.jacobian(), beta);
}

TwoFormField pushforward_2form(const DiffeoField& f, const TwoFormField& beta) {
  return pull(f.grid(), f.inverse_image(), f.inverse_jacobian(), beta);
}

ScalarField pushforward(const DiffeoField& f, const ScalarField& density) {
  return pull_density(f.grid(), f.inverse_image(), f.inverse_jacobian(), density);
}

ScalarField pullback_density(const DiffeoField& f, const ScalarField& density) {
  return pull_density(f.grid(), f.image(), f.jacobian(), density);
}

ScalarField compose_function(const ScalarField& psi, const DiffeoField& f) {
  std::vector<double> vals;
  SpectralInterpolant(psi).evaluate(f.image(), vals);
  ScalarField out(f.grid());
  out.values = std::move(vals);
  return out;
}

}  // namespace cmm
