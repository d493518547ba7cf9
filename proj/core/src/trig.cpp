#include "cmm/trig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmm/errors.hpp"
#include "cmm/fft.hpp"
#include "cmm/parallel.hpp"

namespace cmm {

using cplx = std::complex<double>;

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

bool in_half_space(const Wavevector& k, int dim) {
  for (int r = 0; r < dim; ++r) {
    if (k[r] > 0) return true;
    if (k[r] < 0) return false;
  }
  return false;
}

// All k with 0 < |k|_∞ ≤ band in the half space, in lexicographic order.
std::vector<Wavevector> half_space_modes(int dim, int band) {
  std::vector<Wavevector> out;
  Wavevector k{};
  for (int r = 0; r < dim; ++r) k[r] = -band;
  while (true) {
    if (in_half_space(k, dim)) out.push_back(k);
    int r = dim - 1;
    while (r >= 0 && k[r] == band) {
      k[r] = -band;
      --r;
    }
    if (r < 0) break;
    ++k[r];
  }
  return out;
}

// e^{ik·x} for every term: one sincos per axis, then integer powers.
template <class Terms>
const std::vector<cplx>& term_phases(const Terms& terms, int dim, const double* x) {
  thread_local std::vector<cplx> out, pw;
  int band = 0;
  for (const auto& t : terms)
    for (int r = 0; r < dim; ++r) band = std::max(band, std::abs(t.k[r]));
  const int w = 2 * band + 1;
  pw.resize(static_cast<std::size_t>(dim) * w);
  for (int r = 0; r < dim; ++r) {
    cplx* z = pw.data() + r * w + band;
    z[0] = 1.0;
    const cplx e(std::cos(x[r]), std::sin(x[r]));
    for (int m = 1; m <= band; ++m) {
      z[m] = z[m - 1] * e;
      z[-m] = std::conj(z[m]);
    }
  }
  out.resize(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& k = terms[i].k;
    cplx z = pw[band + k[0]];
    for (int r = 1; r < dim; ++r) z *= pw[r * w + band + k[r]];
    out[i] = z;
  }
  return out;
}

double norm2(const Wavevector& k, int dim) {
  double s = 0.0;
  for (int r = 0; r < dim; ++r) s += static_cast<double>(k[r]) * k[r];
  return s;
}

struct Spectrum {
  std::vector<cplx> c;  // normalized coefficients
  double total = 0.0;
  double tail = 0.0;
};

Spectrum analyze(const ScalarField& f) {
  const TorusGrid& g = f.grid;
  Spectrum s;
  s.c.assign(f.values.begin(), f.values.end());
  fft::forward(g.dim(), g.N, s.c.data());
  const double inv = 1.0 / static_cast<double>(s.c.size());
  for (auto& v : s.c) v *= inv;
  for (std::size_t i = 0; i < s.c.size(); ++i) {
    std::size_t idx = i;
    int kmax = 0;
    for (int r = 0; r < g.dim(); ++r) {
      int j = static_cast<int>(idx % g.N);
      idx /= g.N;
      kmax = std::max(kmax, std::abs(wavenumber(j, g.N)));
    }
    const double e = std::norm(s.c[i]);
    if (i != 0) s.total += e;
    if (kmax > g.N / 4) s.tail += e;
  }
  return s;
}

template <class Fn>
void for_each_half_mode(const TorusGrid& g, const std::vector<cplx>& c, Fn fn) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t idx = i;
    Wavevector k{};
    bool nyquist = false;
    for (int r = g.dim() - 1; r >= 0; --r) {
      int j = static_cast<int>(idx % g.N);
      idx /= g.N;
      if (j == g.N / 2) nyquist = true;
      k[r] = wavenumber(j, g.N);
    }
    if (nyquist || !in_half_space(k, g.dim())) continue;
    fn(k, c[i]);
  }
}

}  // namespace

TrigPoly::TrigPoly(int dim, std::vector<Term> terms) : dim_(dim), terms_(std::move(terms)) {}

TrigPoly TrigPoly::random(int dim, std::uint64_t seed, double amplitude, int band) {
  Rng rng(seed);
  TrigPoly p(dim);
  double l1 = 0.0;
  for (const auto& k : half_space_modes(dim, band)) {
    const double w = 1.0 / (1.0 + norm2(k, dim));
    Term t{k, rng.uniform(-1.0, 1.0) * w, rng.uniform(-1.0, 1.0) * w};
    l1 += std::abs(t.a) + std::abs(t.b);
    p.terms_.push_back(t);
  }
  if (l1 > 0.0)
    for (auto& t : p.terms_) {
      t.a *= amplitude / l1;
      t.b *= amplitude / l1;
    }
  return p;
}

TrigPoly TrigPoly::from_field(const ScalarField& f, double prune, double tail_tol) {
  const TorusGrid& g = f.grid;
  Spectrum s = analyze(f);
  if (s.total > 0.0 && s.tail > tail_tol * tail_tol * s.total)
    throw DomainError("field is not a smooth periodic function on the torus (spectral tail ratio " +
                      std::to_string(std::sqrt(s.tail / s.total)) + ")");
  double cmax = 0.0;
  for (const auto& v : s.c) cmax = std::max(cmax, std::abs(v));
  TrigPoly p(g.dim());
  if (std::abs(s.c[0]) > 0.0) p.terms_.push_back({Wavevector{}, s.c[0].real(), 0.0});
  for_each_half_mode(g, s.c, [&](const Wavevector& k, cplx c) {
    if (std::abs(c) <= prune * cmax) return;
    p.terms_.push_back({k, 2.0 * c.real(), -2.0 * c.imag()});
  });
  return p;
}

void TrigPoly::add(const Wavevector& k, double a, double b) { terms_.push_back({k, a, b}); }

double TrigPoly::constant_term() const {
  double c = 0.0;
  for (const auto& t : terms_)
    if (norm2(t.k, dim_) == 0.0) c += t.a;
  return c;
}

double TrigPoly::value(const double* x) const {
  const auto& ph = term_phases(terms_, dim_, x);
  double v = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) v += terms_[i].a * ph[i].real() + terms_[i].b * ph[i].imag();
  return v;
}

void TrigPoly::gradient(const double* x, double* grad) const {
  for (int r = 0; r < dim_; ++r) grad[r] = 0.0;
  const auto& ph = term_phases(terms_, dim_, x);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const double d = -t.a * ph[i].imag() + t.b * ph[i].real();
    for (int r = 0; r < dim_; ++r) grad[r] += d * t.k[r];
  }
}

void TrigPoly::jet(const double* x, double* value, double* grad, double* hess) const {
  *value = 0.0;
  for (int r = 0; r < dim_; ++r) grad[r] = 0.0;
  for (int r = 0; r < dim_ * dim_; ++r) hess[r] = 0.0;
  const auto& ph = term_phases(terms_, dim_, x);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const double c = ph[i].real(), s = ph[i].imag();
    const double v = t.a * c + t.b * s;
    const double d = -t.a * s + t.b * c;
    *value += v;
    for (int r = 0; r < dim_; ++r) {
      grad[r] += d * t.k[r];
      for (int q = 0; q < dim_; ++q) hess[r * dim_ + q] -= v * t.k[r] * t.k[q];
    }
  }
}

ScalarField TrigPoly::sample(const TorusGrid& grid) const {
  if (grid.dim() != dim_) throw DimensionError("trigonometric polynomial dimension does not match grid");
  ScalarField f(grid);
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    double x[kMaxTrigDim];
    for (std::size_t node = b; node < e; ++node) {
      grid.coords(node, x);
      f.values[node] = value(x);
    }
  });
  return f;
}

TrigPoly TrigPoly::scaled(double s) const {
  TrigPoly p = *this;
  for (auto& t : p.terms_) {
    t.a *= s;
    t.b *= s;
  }
  return p;
}

VectorTrigField VectorTrigField::random(int dim, std::uint64_t seed, double amplitude, int band) {
  Rng rng(seed);
  VectorTrigField v(dim);
  double c1 = 0.0;
  for (const auto& k : half_space_modes(dim, band)) {
    const double w = 1.0 / (1.0 + norm2(k, dim));
    Term t;
    t.k = k;
    double mag = 0.0;
    for (int r = 0; r < dim; ++r) {
      t.a[r] = rng.uniform(-1.0, 1.0) * w;
      t.b[r] = rng.uniform(-1.0, 1.0) * w;
      mag = std::max(mag, std::abs(t.a[r]) + std::abs(t.b[r]));
    }
    double kl1 = 0.0;
    for (int r = 0; r < dim; ++r) kl1 += std::abs(k[r]);
    c1 += mag * (1.0 + kl1);
    v.terms_.push_back(t);
  }
  if (c1 > 0.0) v = v.scaled(amplitude / c1);
  return v;
}

void VectorTrigField::value(const double* x, double* out) const {
  for (int r = 0; r < dim_; ++r) out[r] = 0.0;
  const auto& ph = term_phases(terms_, dim_, x);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const double c = ph[i].real(), s = ph[i].imag();
    for (int r = 0; r < dim_; ++r) out[r] += t.a[r] * c + t.b[r] * s;
  }
}

void VectorTrigField::jet(const double* x, double* out, double* jac) const {
  for (int r = 0; r < dim_; ++r) out[r] = 0.0;
  for (int r = 0; r < dim_ * dim_; ++r) jac[r] = 0.0;
  const auto& ph = term_phases(terms_, dim_, x);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const double c = ph[i].real(), s = ph[i].imag();
    for (int r = 0; r < dim_; ++r) {
      out[r] += t.a[r] * c + t.b[r] * s;
      const double d = -t.a[r] * s + t.b[r] * c;
      for (int q = 0; q < dim_; ++q) jac[r * dim_ + q] += d * t.k[q];
    }
  }
}

VectorTrigField VectorTrigField::scaled(double s) const {
  VectorTrigField v = *this;
  for (auto& t : v.terms_)
    for (int r = 0; r < dim_; ++r) {
      t.a[r] *= s;
      t.b[r] *= s;
    }
  return v;
}

SpectralInterpolant::SpectralInterpolant(const ScalarField& f, double tail_tol) : grid_(f.grid) {
  Spectrum s = analyze(f);
  if (s.total > 0.0 && s.tail > tail_tol * tail_tol * s.total)
    throw InterpolationError("field is under-resolved for spectral interpolation (tail ratio " +
                             std::to_string(std::sqrt(s.tail / s.total)) + ")");
  mean_ = s.c[0].real();
  double cmax = 0.0;
  for (std::size_t i = 1; i < s.c.size(); ++i) cmax = std::max(cmax, std::abs(s.c[i]));
  constant_ = cmax <= 1e-15 * std::max(1.0, std::abs(mean_));
  if (constant_) return;
  for_each_half_mode(grid_, s.c, [&](const Wavevector& k, cplx c) {
    if (std::abs(c) > 1e-16 * cmax) modes_.push_back({k, c});
  });
}

double SpectralInterpolant::operator()(const double* x) const {
  if (constant_) return mean_;
  const int dim = grid_.dim();
  const int N = grid_.N;
  const int half = N / 2;
  // phase[r][k + half] = e^{i k x_r}
  std::vector<cplx> phase(static_cast<std::size_t>(dim) * (N + 1));
  for (int r = 0; r < dim; ++r)
    for (int k = -half; k <= half; ++k) phase[r * (N + 1) + k + half] = std::polar(1.0, k * x[r]);
  double v = 0.0;
  for (const auto& m : modes_) {
    cplx e = m.c;
    for (int r = 0; r < dim; ++r) e *= phase[r * (N + 1) + m.k[r] + half];
    v += e.real();
  }
  return mean_ + 2.0 * v;
}

void SpectralInterpolant::evaluate(const std::vector<double>& points, std::vector<double>& out) const {
  const int dim = grid_.dim();
  const std::size_t count = points.size() / dim;
  out.assign(count, mean_);
  if (constant_) return;
  parallel_for(
      count,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = (*this)(points.data() + i * dim);
      },
      256);
}

}  // namespace cmm
