#include "cmm/coupled_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "cmm/errors.hpp"
#include "cmm/fft.hpp"
#include "cmm/parallel.hpp"
#include "cmm/trig.hpp"

namespace cmm {

const char* backend_name(Backend b) { return b == Backend::Torus ? "torus" : "toric-cp1"; }

CoupledModel::CoupledModel(std::vector<int> p, std::vector<double> weights, bool include_self_term)
    : p_(std::move(p)), weights_(std::move(weights)), self_(include_self_term) {
  if (p_.empty()) throw DimensionError("coupled system needs at least one coupled component");
  if (p_.size() != weights_.size()) throw DimensionError("p-vector and weights differ in length");
  for (double a : weights_)
    if (!(a > 0.0)) throw DomainError("coupling weights must be positive");
}

Potentials CoupledModel::zero() const { return Potentials(components(), std::vector<double>(nodes(), 0.0)); }

void CoupledModel::check_shape(const Potentials& phi) const {
  if (static_cast<int>(phi.size()) != components()) throw DimensionError("wrong number of potentials");
  for (const auto& v : phi)
    if (v.size() != nodes()) throw DimensionError("potential has the wrong number of nodes");
}

void CoupledModel::project_mean_zero(Potentials& dir, const CoupledResidual& at) const {
  check_shape(dir);
  for (int i = 0; i < components(); ++i) {
    const auto& w = at.weight[i];
    const auto& v = at.volume[i];
    auto& d = dir[i];
    const double num = deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * v[j] * d[j]; });
    const double den = deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * v[j]; });
    const double m = num / den;
    for (double& x : d) x -= m;
  }
}

// ---------------------------------------------------------------- torus

TorusModel::TorusModel(std::vector<TorusGeometry> geoms, std::vector<int> p, std::vector<double> weights,
                       bool include_self_term)
    : CoupledModel(std::move(p), std::move(weights), include_self_term), geoms_(std::move(geoms)) {
  if (static_cast<int>(geoms_.size()) != components())
    throw DimensionError("need one geometry per component");
  for (const auto& g : geoms_)
    if (!(g.grid() == geoms_[0].grid())) throw DimensionError("all components must share one grid");
  for (int pi : this->p())
    if (pi < 0 || pi > geoms_[0].n() - 1) throw DegreeError("p_i must lie in [0, n−1]");
}

std::vector<ScalarField> TorusModel::fields(const Potentials& phi) const {
  check_shape(phi);
  std::vector<ScalarField> out;
  for (const auto& v : phi) {
    ScalarField f(grid());
    f.values = v;
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

// Zeroes every Fourier coefficient with a Nyquist index on some axis.
void drop_nyquist(const TorusGrid& g, std::vector<double>& v) {
  std::vector<std::complex<double>> buf(v.begin(), v.end());
  fft::forward(g.dim(), g.N, buf.data());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t rest = i;
    for (int r = 0; r < g.dim(); ++r) {
      if (static_cast<int>(rest % g.N) == g.N / 2) {
        buf[i] = 0.0;
        break;
      }
      rest /= g.N;
    }
  }
  fft::backward(g.dim(), g.N, buf.data());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = buf[i].real() / static_cast<double>(g.size());
}

}  // namespace

// Spectral derivatives annihilate Nyquist modes, so aliased Nyquist content of
// the residual is unreachable; the discrete equation is posed without it.
CoupledResidual TorusModel::evaluate(const Potentials& phi) const {
  CoupledResidual r = ccsck_residual(geoms_, fields(phi), p(), weights(), include_self_term());
  for (int i = 0; i < components(); ++i) {
    std::vector<double> s(nodes());
    for (std::size_t x = 0; x < nodes(); ++x) s[x] = r.density[i][x] / r.volume[i][x];
    drop_nyquist(grid(), s);
    double num = 0.0, den = 0.0;
    for (std::size_t x = 0; x < nodes(); ++x) {
      num += s[x] * r.volume[i][x];
      den += r.volume[i][x];
    }
    for (std::size_t x = 0; x < nodes(); ++x) r.density[i][x] = (s[x] - num / den) * r.volume[i][x];
  }
  return r;
}

Potentials TorusModel::filter(const Potentials& phi) const {
  Potentials out = phi;
  for (auto& v : out) drop_nyquist(grid(), v);
  return out;
}

Potentials TorusModel::random(std::uint64_t seed, double amplitude, int band) const {
  Potentials out;
  for (int i = 0; i < components(); ++i) {
    auto f = TrigPoly::random(grid().dim(), seed + 7919ULL * i, 1.0, band).sample(grid());
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    const double avg = mean(f);
    for (double& v : f.values) v = amplitude * (v - avg) / m;
    out.push_back(std::move(f.values));
  }
  return out;
}

Potentials TorusModel::translate(const Potentials& phi, const std::vector<double>& tau) const {
  check_shape(phi);
  const TorusGrid& g = grid();
  const int d = g.dim();
  if (static_cast<int>(tau.size()) != d) throw DimensionError("translation vector has the wrong size");
  Potentials out;
  std::vector<std::complex<double>> buf(g.size());
  std::vector<int> j(d);
  for (const auto& v : phi) {
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] = v[i];
    fft::forward(d, g.N, buf.data());
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::size_t rest = i;
      double phase = 0.0;
      for (int r = d - 1; r >= 0; --r) {
        phase += wavenumber(static_cast<int>(rest % g.N), g.N) * tau[r];
        rest /= g.N;
      }
      buf[i] *= std::polar(1.0, phase);
    }
    fft::backward(d, g.N, buf.data());
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = buf[i].real() / static_cast<double>(g.size());
    out.push_back(std::move(w));
  }
  return out;
}

Potentials TorusModel::fix_gauge(const Potentials& phi) const {
  check_shape(phi);
  const TorusGrid& g = grid();
  const int d = g.dim();
  // Phase of the unit modes of φ₀ along each axis.
  std::vector<double> tau(d, 0.0);
  bool any = false;
  std::vector<double> x(d);
  for (int r = 0; r < d; ++r) {
    const auto sums = deterministic_sums(g.size(), 2, [&](std::size_t i, double* out) {
      double xi[kMaxFormDim];
      g.coords(i, xi);
      out[0] = phi[0][i] * std::cos(xi[r]);
      out[1] = -phi[0][i] * std::sin(xi[r]);
    });
    const double mag = std::hypot(sums[0], sums[1]) / static_cast<double>(g.size());
    if (mag > 1e-8) {
      tau[r] = -std::atan2(sums[1], sums[0]);
      any = true;
    }
  }
  Potentials out = any ? translate(phi, tau) : phi;
  for (auto& v : out) {
    const double m = deterministic_sum(v.size(), [&](std::size_t i) { return v[i]; }) / static_cast<double>(v.size());
    for (double& a : v) a -= m;
  }
  return out;
}

void TorusModel::validate_holomorphic(const Potentials& h) const {
  check_shape(h);
  for (int i = 0; i < components(); ++i) {
    const auto [lo, hi] = std::minmax_element(h[i].begin(), h[i].end());
    if (*hi - *lo > 1e-12 * (1.0 + std::abs(*hi)))
      throw NotHolomorphicError("on a torus only constant Hamiltonians generate holomorphic fields (component " +
                                std::to_string(i) + ")");
  }
}

std::vector<double> TorusModel::node_coordinates(int, std::size_t node) const {
  std::vector<double> x(grid().dim());
  grid().coords(node, x.data());
  return x;
}

// ---------------------------------------------------------------- toric ℂP¹

ToricModel::ToricModel(std::vector<ToricCP1Geometry> geoms, std::vector<int> p, std::vector<double> weights,
                       bool include_self_term)
    : CoupledModel(std::move(p), std::move(weights), include_self_term), geoms_(std::move(geoms)) {
  if (static_cast<int>(geoms_.size()) != components())
    throw DimensionError("need one geometry per component");
  for (const auto& g : geoms_)
    if (g.M() != geoms_[0].M()) throw DimensionError("all components must use the same node count");
  for (int pi : this->p())
    if (pi != 0) throw DegreeError("on ℂP¹ every p_i must be 0");
}

std::vector<ToricMetric> ToricModel::metrics(const Potentials& phi) const {
  check_shape(phi);
  std::vector<ToricMetric> out;
  for (int i = 0; i < components(); ++i) {
    std::vector<double> psi(phi[i].size());
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = -phi[i][j];
    out.emplace_back(geoms_[i], psi, i);
  }
  return out;
}

CoupledResidual ToricModel::evaluate(const Potentials& phi) const {
  const auto m = metrics(phi);
  const int K = components();
  const std::size_t M = nodes();
  CoupledResidual r;
  r.p = p();
  r.density.assign(K, std::vector<double>(M));
  r.volume.assign(K, std::vector<double>(M, 1.0));
  r.weight.resize(K);
  for (int i = 0; i < K; ++i) {
    r.weight[i] = geoms_[i].weights();
    for (double& w : r.weight[i]) w *= 2.0 * M_PI;
  }
  const auto& x0 = geoms_[0].nodes();
  const auto& S0 = m[0].scalar_curvature();
  const auto& v0 = m[0].v();
  for (std::size_t j = 0; j < M; ++j) {
    const double t = m[0].u_d(x0[j]);
    double raw = -S0[j] + (include_self_term() ? 1.0 : 0.0);
    for (int i = 1; i < K; ++i) {
      const double xi = m[i].solve_gradient(t);
      raw += weights()[i - 1] * m[i].v_at(xi) / v0[j];
    }
    r.density[0][j] = raw;
  }
  for (int i = 1; i < K; ++i) {
    const auto& xi = geoms_[i].nodes();
    const auto& vi = m[i].v();
    for (std::size_t j = 0; j < M; ++j) {
      const double y = m[0].solve_gradient(m[i].u_d(xi[j]));
      r.density[i][j] = m[0].v_at(y) / vi[j];
    }
  }
  for (int i = 0; i < K; ++i) {
    auto& d = r.density[i];
    const auto& w = r.weight[i];
    const double num = deterministic_sum(M, [&](std::size_t j) { return w[j] * d[j]; });
    const double den = deterministic_sum(M, [&](std::size_t j) { return w[j]; });
    const double c = num / den;
    for (double& v : d) v -= c;
    r.constants.push_back(c);
  }
  return r;
}

Potentials ToricModel::random(std::uint64_t seed, double amplitude, int band) const {
  Potentials out;
  for (int i = 0; i < components(); ++i) {
    Rng rng(seed + 7919ULL * i);
    std::vector<double> c(nodes(), 0.0);
    for (int k = 1; k <= band && k < static_cast<int>(nodes()); ++k) c[k] = rng.normal() / (k * k);
    auto v = geoms_[i].to_values(c);
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    for (double& a : v) a *= amplitude / m;
    out.push_back(std::move(v));
  }
  return out;
}

Potentials ToricModel::filter(const Potentials& phi) const {
  check_shape(phi);
  Potentials out;
  for (int i = 0; i < components(); ++i) {
    auto c = geoms_[i].to_coefficients(phi[i]);
    std::fill(c.begin() + c.size() / 2, c.end(), 0.0);
    out.push_back(geoms_[i].to_values(c));
  }
  return out;
}

Potentials ToricModel::apply_automorphism(const Potentials& phi, double s) const {
  check_shape(phi);
  Potentials out = phi;
  for (int i = 0; i < components(); ++i)
    for (std::size_t j = 0; j < nodes(); ++j) out[i][j] += s * geoms_[i].nodes()[j];
  return out;
}

Potentials ToricModel::fix_gauge(const Potentials& phi) const {
  check_shape(phi);
  const auto& g0 = geoms_[0];
  const auto& x0 = g0.nodes();
  const auto& w0 = g0.weights();
  const double half = 0.5 * g0.a();
  const double L = deterministic_sum(nodes(), [&](std::size_t j) { return w0[j] * (x0[j] - half) * phi[0][j]; });
  const double D = deterministic_sum(nodes(), [&](std::size_t j) { return w0[j] * (x0[j] - half) * x0[j]; });
  Potentials out = apply_automorphism(phi, -L / D);
  for (int i = 0; i < components(); ++i) {
    const auto& w = geoms_[i].weights();
    auto& v = out[i];
    const double m = deterministic_sum(nodes(), [&](std::size_t j) { return w[j] * v[j]; }) / geoms_[i].a();
    for (double& a : v) a -= m;
  }
  return out;
}

void ToricModel::validate_holomorphic(const Potentials& h) const {
  check_shape(h);
  double slope0 = 0.0;
  for (int i = 0; i < components(); ++i) {
    const auto& g = geoms_[i];
    // Holomorphic Hamiltonians on toric ℂP¹ are affine in the moment coordinate.
    const auto c = g.to_coefficients(h[i]);
    double tail = 0.0, scale = std::abs(c[0]) + std::abs(c[1]);
    for (std::size_t k = 2; k < c.size(); ++k) tail = std::max(tail, std::abs(c[k]));
    if (tail > 1e-10 * (1.0 + scale))
      throw NotHolomorphicError("Hamiltonian is not affine in the moment coordinate (component " +
                                std::to_string(i) + ")");
    const double slope = c[1] * 2.0 / g.a();
    if (i == 0)
      slope0 = slope;
    else if (std::abs(slope - slope0) > 1e-10 * (1.0 + std::abs(slope0)))
      throw NotHolomorphicError("components do not share one rotation field (component " + std::to_string(i) + ")");
  }
}

std::vector<double> ToricModel::node_coordinates(int component, std::size_t node) const {
  return {geoms_[component].nodes()[node]};
}

Potentials ToricModel::rotation_field(double slope) const {
  Potentials h;
  for (const auto& g : geoms_) {
    std::vector<double> v(g.M());
    for (int j = 0; j < g.M(); ++j) v[j] = slope * (g.nodes()[j] - 0.5 * g.a());
    h.push_back(std::move(v));
  }
  return h;
}

std::vector<double> ToricModel::potential_deviation(const Potentials& phi, int component) const {
  const Potentials fixed = fix_gauge(phi);
  std::vector<double> out(fixed[component].size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -fixed[component][j];
  return out;
}

// ---------------------------------------------------------------- H

std::vector<double> H_function(const CoupledModel& model, const Potentials& phi, int i, int j, int p) {
  const int K = model.components();
  if (i < 0 || j < 0 || i >= K || j >= K) throw DimensionError("component index out of range");
  const int n = model.complex_dim();
  if (p < 0 || p > n) throw DegreeError("p must lie in [0, n]");
  if (const auto* tm = dynamic_cast<const TorusModel*>(&model)) {
    const auto fields = tm->fields(phi);
    const auto wi = to_form_field(metric_from_potential(tm->geometries()[i], fields[i], i));
    const auto wj = to_form_field(metric_from_potential(tm->geometries()[j], fields[j], j));
    std::vector<double> out(tm->nodes());
    parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t node = lo; node < hi; ++node) {
        const AlternatingForm a = wi.at(node), b = wj.at(node);
        out[node] = mixed_volume(a, n - p, b, p) / mixed_volume(b, n, b, 0);
      }
    });
    return out;
  }
  const auto& km = dynamic_cast<const ToricModel&>(model);
  const auto m = km.metrics(phi);
  const auto& xj = km.geometries()[j].nodes();
  std::vector<double> out(km.nodes());
  for (std::size_t node = 0; node < out.size(); ++node) {
    if (p == 1 || i == j) {
      out[node] = 1.0;
      continue;
    }
    const double xi = m[i].solve_gradient(m[j].u_d(xj[node]));
    out[node] = m[i].v_at(xi) / m[j].v()[node];
  }
  return out;
}

}  // namespace cmm
