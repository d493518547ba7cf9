#include "cmm/torus.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "cmm/errors.hpp"
#include "cmm/fft.hpp"
#include "cmm/parallel.hpp"

namespace cmm {

using cplx = std::complex<double>;

std::size_t TorusGrid::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim(); ++i) s *= static_cast<std::size_t>(N);
  return s;
}

double TorusGrid::spacing() const { return 2.0 * std::numbers::pi / N; }

double TorusGrid::cell_volume() const { return std::pow(spacing(), dim()); }

void TorusGrid::coords(std::size_t node, double* x) const {
  const double h = spacing();
  for (int r = dim() - 1; r >= 0; --r) {
    x[r] = h * static_cast<double>(node % N);
    node /= N;
  }
}

std::size_t TorusGrid::index(const int* j) const {
  std::size_t idx = 0;
  for (int r = 0; r < dim(); ++r) idx = idx * N + static_cast<std::size_t>(((j[r] % N) + N) % N);
  return idx;
}

int wavenumber(int j, int N) { return j <= N / 2 ? j : j - N; }

Eigen::MatrixXcd HermitianField::at(std::size_t node) const {
  const int n = grid.n;
  Eigen::MatrixXcd m(n, n);
  const cplx* e = entries.data() + node * n * n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = e[a * n + b];
  return m;
}

void HermitianField::set(std::size_t node, const Eigen::MatrixXcd& m) {
  const int n = grid.n;
  cplx* e = entries.data() + node * n * n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) e[a * n + b] = m(a, b);
}

TwoFormField::TwoFormField(const TorusGrid& g) : grid(g), coeffs(g.size() * binomial(g.dim(), 2), 0.0) {}

std::size_t TwoFormField::stride() const { return binomial(grid.dim(), 2); }

AlternatingForm TwoFormField::at(std::size_t node) const {
  AlternatingForm a(grid.dim(), 2);
  const std::size_t s = stride();
  for (std::size_t i = 0; i < s; ++i) a[i] = coeffs[node * s + i];
  return a;
}

void TwoFormField::set(std::size_t node, const AlternatingForm& a) {
  const std::size_t s = stride();
  for (std::size_t i = 0; i < s; ++i) coeffs[node * s + i] = a[i];
}

TwoFormField TwoFormField::constant(const TorusGrid& g, const AlternatingForm& a) {
  TwoFormField f(g);
  for (std::size_t node = 0; node < g.size(); ++node) f.set(node, a);
  return f;
}

TorusGeometry::TorusGeometry(int n, int N, Eigen::MatrixXcd base_metric) : grid_{n, N}, base_(std::move(base_metric)) {
  if (n < 1 || n > 3) throw DimensionError("torus complex dimension must be 1, 2 or 3");
  if (N < 16 || (N & (N - 1)) != 0) throw DomainError("torus grid must be a power of two >= 16, got " + std::to_string(N));
  if (base_.rows() != n || base_.cols() != n) throw DimensionError("base metric must be n×n");
  if ((base_ - base_.adjoint()).norm() > 1e-12 * (1.0 + base_.norm()))
    throw DomainError("base metric must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(base_);
  if (es.eigenvalues().minCoeff() <= kVolumeEpsilon)
    throw NotKahlerError("base metric is not positive definite", 0, 0, es.eigenvalues().minCoeff());
}

TorusGeometry TorusGeometry::flat(int n, int N, double scale) {
  return TorusGeometry(n, N, scale * Eigen::MatrixXcd::Identity(n, n));
}

AlternatingForm TorusGeometry::omega() const { return hermitian_to_form(base_); }

Eigen::MatrixXd TorusGeometry::omega_matrix() const { return hermitian_to_real(base_); }

double TorusGeometry::volume() const {
  return base_.determinant().real() * std::pow(2.0 * std::numbers::pi, 2 * n());
}

Eigen::MatrixXd hermitian_to_real(const Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double P = g(a, b).real();
      const double Q = g(a, b).imag();
      w(2 * a, 2 * b + 1) += P;
      w(2 * b + 1, 2 * a) -= P;
      if (a != b) {
        w(2 * a, 2 * b) = -Q;
        w(2 * a + 1, 2 * b + 1) = -Q;
      }
    }
  }
  return w;
}

AlternatingForm hermitian_to_form(const Eigen::MatrixXcd& g) { return AlternatingForm::from_matrix(hermitian_to_real(g)); }

// Same layout as hermitian_to_form, without per-node allocation.
TwoFormField to_form_field(const HermitianField& g) {
  TwoFormField out(g.grid);
  const int n = g.grid.n, dim = 2 * n;
  const std::size_t stride = out.stride();
  parallel_for(g.grid.size(), [&](std::size_t lo, std::size_t hi) {
    double w[kMaxFormDim][kMaxFormDim];
    for (std::size_t node = lo; node < hi; ++node) {
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) w[i][j] = 0.0;
      const cplx* e = g.entries.data() + node * n * n;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const double P = e[a * n + b].real(), Q = e[a * n + b].imag();
          w[2 * a][2 * b + 1] += P;
          w[2 * b + 1][2 * a] -= P;
          if (a != b) {
            w[2 * a][2 * b] = -Q;
            w[2 * a + 1][2 * b + 1] = -Q;
          }
        }
      }
      double* c = out.coeffs.data() + node * stride;
      for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) *c++ = w[i][j];
    }
  });
  return out;
}

namespace {

std::vector<cplx> spectrum(const ScalarField& f) {
  std::vector<cplx> c(f.values.begin(), f.values.end());
  fft::forward(f.grid.dim(), f.grid.N, c.data());
  return c;
}

// Signed wavenumbers per axis of spectral index idx, Nyquist set to zero
// (so derivative symbols vanish there).
void wavevector(const TorusGrid& g, std::size_t idx, int* k) {
  for (int r = g.dim() - 1; r >= 0; --r) {
    int j = static_cast<int>(idx % g.N);
    idx /= g.N;
    k[r] = (j == g.N / 2) ? 0 : wavenumber(j, g.N);
  }
}

// Wavevectors of every spectral index, dim entries each; built once per grid shape.
const std::vector<int>& wave_table(const TorusGrid& g) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<int>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& t = cache[{g.dim(), g.N}];
  if (t.empty()) {
    t.resize(g.size() * g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) wavevector(g, i, t.data() + i * g.dim());
  }
  return t;
}

template <class Symbol>
std::vector<cplx> apply_symbol(const TorusGrid& g, const std::vector<cplx>& spec, Symbol symbol) {
  std::vector<cplx> out(spec.size());
  const std::vector<int>& table = wave_table(g);
  const std::size_t d = g.dim();
  for (std::size_t i = 0; i < spec.size(); ++i) out[i] = symbol(table.data() + i * d) * spec[i];
  fft::backward(g.dim(), g.N, out.data());
  const double inv = 1.0 / static_cast<double>(spec.size());
  for (auto& v : out) v *= inv;
  return out;
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
  auto spec = spectrum(f);
  auto d = apply_symbol(f.grid, spec, [axis](const int* k) { return cplx(0.0, k[axis]); });
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < d.size(); ++i) out.values[i] = d[i].real();
  return out;
}

std::vector<ScalarField> gradient(const ScalarField& f) {
  auto spec = spectrum(f);
  std::vector<ScalarField> out;
  for (int r = 0; r < f.grid.dim(); ++r) {
    auto d = apply_symbol(f.grid, spec, [r](const int* k) { return cplx(0.0, k[r]); });
    ScalarField g(f.grid);
    for (std::size_t i = 0; i < d.size(); ++i) g.values[i] = d[i].real();
    out.push_back(std::move(g));
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  auto spec = spectrum(f);
  const int dim = f.grid.dim();
  auto d = apply_symbol(f.grid, spec, [dim](const int* k) {
    double s = 0.0;
    for (int r = 0; r < dim; ++r) s -= static_cast<double>(k[r]) * k[r];
    return cplx(s, 0.0);
  });
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < d.size(); ++i) out.values[i] = d[i].real();
  return out;
}

HermitianField ddbar(const ScalarField& f) {
  const TorusGrid& g = f.grid;
  const int n = g.n;
  auto spec = spectrum(f);
  HermitianField out(g);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      // ∂_a∂_b̄ = ¼[(∂xa∂xb + ∂ya∂yb) + i(∂xa∂yb − ∂ya∂xb)]
      auto d = apply_symbol(g, spec, [a, b](const int* k) {
        const double kxa = k[2 * a], kya = k[2 * a + 1], kxb = k[2 * b], kyb = k[2 * b + 1];
        return 0.25 * cplx(-(kxa * kxb + kya * kyb), -(kxa * kyb - kya * kxb));
      });
      for (std::size_t node = 0; node < g.size(); ++node) {
        cplx v = d[node];
        if (a == b) v = cplx(v.real(), 0.0);
        out.entries[node * n * n + a * n + b] = v;
        out.entries[node * n * n + b * n + a] = std::conj(v);
      }
    }
  }
  return out;
}

HermitianField constant_metric(const TorusGrid& grid, const Eigen::MatrixXcd& g) {
  HermitianField out(grid);
  for (std::size_t node = 0; node < grid.size(); ++node) out.set(node, g);
  return out;
}

namespace {

double min_eig(const cplx* e, int n) {
  if (n == 1) return e[0].real();
  if (n == 2) {
    const double a = e[0].real(), d = e[3].real();
    const double off = std::norm(e[1]);
    const double tr = a + d, det = a * d - off;
    return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  }
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = e[i * n + j];
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

double min_eigenvalue(const HermitianField& g, std::size_t* worst_node) {
  const int n = g.grid.n;
  double worst = INFINITY;
  std::size_t where = 0;
  for (std::size_t node = 0; node < g.grid.size(); ++node) {
    double m = min_eig(g.entries.data() + node * n * n, n);
    if (m < worst) {
      worst = m;
      where = node;
    }
  }
  if (worst_node) *worst_node = where;
  return worst;
}

HermitianField metric_from_potential(const TorusGeometry& geom, const ScalarField& phi, int component) {
  if (!(phi.grid == geom.grid())) throw DimensionError("potential is not defined on this geometry's grid");
  HermitianField g = ddbar(phi);
  const int n = geom.n();
  const Eigen::MatrixXcd base = geom.base_metric();
  for (std::size_t node = 0; node < g.grid.size(); ++node)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx& e = g.entries[node * n * n + a * n + b];
        e = base(a, b) + 2.0 * e;
      }
  std::size_t worst = 0;
  double m = min_eigenvalue(g, &worst);
  if (!(m > kVolumeEpsilon)) throw NotKahlerError("metric is not positive definite", component, worst, m);
  return g;
}

ScalarField determinant(const HermitianField& g) {
  const int n = g.grid.n;
  ScalarField out(g.grid);
  for (std::size_t node = 0; node < g.grid.size(); ++node) {
    const cplx* e = g.entries.data() + node * n * n;
    if (n == 1)
      out.values[node] = e[0].real();
    else if (n == 2)
      out.values[node] = (e[0] * e[3] - e[1] * e[2]).real();
    else
      out.values[node] = g.at(node).determinant().real();
  }
  return out;
}

HermitianField ricci(const HermitianField& g) {
  std::size_t worst = 0;
  double m = min_eigenvalue(g, &worst);
  if (!(m > kVolumeEpsilon)) throw NotKahlerError("metric is not positive definite", 0, worst, m);
  ScalarField logdet = determinant(g);
  for (double& v : logdet.values) v = std::log(v);
  HermitianField r = ddbar(logdet);
  for (auto& e : r.entries) e *= -2.0;
  return r;
}

ScalarField scalar_curvature(const HermitianField& g, const HermitianField& ric) {
  const int n = g.grid.n;
  ScalarField s(g.grid);
  for (std::size_t node = 0; node < g.grid.size(); ++node) {
    if (n == 1) {
      s.values[node] = ric.entries[node].real() / g.entries[node].real();
      continue;
    }
    Eigen::MatrixXcd gi = g.at(node).inverse();
    Eigen::MatrixXcd r = ric.at(node);
    s.values[node] = (gi.transpose().cwiseProduct(r)).sum().real();
  }
  return s;
}

ScalarField scalar_curvature(const HermitianField& g) { return scalar_curvature(g, ricci(g)); }

double integrate(const ScalarField& density) {
  const auto& v = density.values;
  return deterministic_sum(v.size(), [&](std::size_t i) { return v[i]; }) * density.grid.cell_volume();
}

double mean(const ScalarField& f) {
  const auto& v = f.values;
  return deterministic_sum(v.size(), [&](std::size_t i) { return v[i]; }) / static_cast<double>(v.size());
}

}  // namespace cmm
