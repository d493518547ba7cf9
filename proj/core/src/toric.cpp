#include "cmm/toric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cmm/errors.hpp"
#include "cmm/fft.hpp"

namespace cmm {

ToricCP1Geometry::ToricCP1Geometry(double a, int M) : a_(a), M_(M) {
  if (!(a > 0.0)) throw DomainError("moment interval length must be positive");
  if (M < 64) throw DomainError("toric grid needs at least 64 nodes, got " + std::to_string(M));
  auto d = std::make_shared<Data>();
  d->nodes.resize(M);
  d->weights.resize(M);
  for (int j = 0; j < M; ++j) {
    const double th = std::numbers::pi * (j + 0.5) / M;
    d->nodes[j] = 0.5 * a * (1.0 - std::cos(th));
    double s = 0.0;
    for (int l = 1; l <= M / 2; ++l) s += std::cos(2.0 * l * th) / (4.0 * l * l - 1.0);
    d->weights[j] = 0.5 * a * (2.0 / M) * (1.0 - 2.0 * s);
  }
  data_ = std::move(d);
}

double ToricCP1Geometry::u_ref(double x) const { return 0.5 * (x * std::log(x) + (a_ - x) * std::log(a_ - x)); }

double ToricCP1Geometry::u_ref_d(double x) const { return 0.5 * (std::log(x) - std::log(a_ - x)); }

double ToricCP1Geometry::u_ref_dd(double x) const { return a_ / (2.0 * x * (a_ - x)); }

std::vector<double> ToricCP1Geometry::to_coefficients(const std::vector<double>& values) const {
  std::vector<double> c = values;
  fft::dct2(M_, c.data());
  for (int k = 0; k < M_; ++k) c[k] *= ((k & 1) ? -1.0 : 1.0) / M_;
  c[0] *= 0.5;
  return c;
}

std::vector<double> ToricCP1Geometry::to_values(const std::vector<double>& coeffs) const {
  std::vector<double> v(M_);
  v[0] = coeffs[0];
  for (int k = 1; k < M_; ++k) v[k] = ((k & 1) ? -0.5 : 0.5) * coeffs[k];
  fft::dct3(M_, v.data());
  return v;
}

std::vector<double> ToricCP1Geometry::differentiate(const std::vector<double>& c) const {
  const int M = static_cast<int>(c.size());
  std::vector<double> d(M, 0.0);
  if (M >= 2) d[M - 2] = 2.0 * (M - 1) * c[M - 1];
  for (int k = M - 2; k >= 1; --k) d[k - 1] = (k + 1 < M ? d[k + 1] : 0.0) + 2.0 * k * c[k];
  d[0] *= 0.5;
  const double scale = 2.0 / a_;
  for (double& v : d) v *= scale;
  return d;
}

double ToricCP1Geometry::evaluate(const std::vector<double>& c, double x) const {
  const double s = 2.0 * x / a_ - 1.0;
  double b1 = 0.0, b2 = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
    const double b0 = 2.0 * s * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return s * b1 - b2 + c[0];
}

double ToricCP1Geometry::integrate(const std::vector<double>& density) const {
  double s = 0.0;
  for (int j = 0; j < M_; ++j) s += weights()[j] * density[j];
  return 2.0 * std::numbers::pi * s;
}

double ToricCP1Geometry::volume() const { return 2.0 * std::numbers::pi * a_; }

namespace {

// Zeroes the trailing coefficients that sit at roundoff level. Repeated
// differentiation would otherwise amplify them by about k² per derivative.
void chop_tail(std::vector<double>& c) {
  double peak = 0.0;
  for (double v : c) peak = std::max(peak, std::abs(v));
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * peak;
  std::size_t keep = c.size();
  while (keep > 1 && std::abs(c[keep - 1]) <= floor) --keep;
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(keep), c.end(), 0.0);
}

}  // namespace

ToricMetric::ToricMetric(const ToricCP1Geometry& geom, const std::vector<double>& psi, int component)
    : geom_(geom), psi_(psi) {
  const int M = geom.M();
  if (static_cast<int>(psi.size()) != M) throw DimensionError("potential size does not match toric grid");
  const double a = geom.a();
  auto c = geom.to_coefficients(psi);
  chop_tail(c);
  c_d_ = geom.differentiate(c);
  c_dd_ = geom.differentiate(c_d_);
  auto psi_dd = geom.to_values(c_dd_);
  u_dd_.resize(M);
  v_.resize(M);
  double worst = INFINITY;
  int where = 0;
  for (int j = 0; j < M; ++j) {
    const double x = geom.nodes()[j];
    const double q = 2.0 * x * (a - x);
    // u'' = (a + q ψ'')/q; positivity is decided by the smooth numerator.
    const double num = a + q * psi_dd[j];
    if (num / a < worst) {
      worst = num / a;
      where = j;
    }
    u_dd_[j] = num / q;
    v_[j] = q / num;
  }
  if (!(worst > kVolumeEpsilon)) throw NotKahlerError("symplectic potential is not convex", component, where, worst);
  auto cv = geom.to_coefficients(v_);
  chop_tail(cv);
  auto cvdd = geom.differentiate(geom.differentiate(cv));
  ricci_ = geom.to_values(cvdd);
  for (double& r : ricci_) r *= -0.5;
}

double ToricMetric::u_d(double x) const { return geom_.u_ref_d(x) + geom_.evaluate(c_d_, x); }

double ToricMetric::v_at(double x) const {
  const double a = geom_.a();
  const double q = 2.0 * x * (a - x);
  return q / (a + q * geom_.evaluate(c_dd_, x));
}

double ToricMetric::solve_gradient(double target) const {
  const double a = geom_.a();
  // Work in the logit variable s = log(x/(a−x)), where u' = s/2 + ψ'(x).
  auto x_of = [a](double s) { return s >= 0 ? a / (1.0 + std::exp(-s)) : a * std::exp(s) / (1.0 + std::exp(s)); };
  auto g = [&](double s, double* dg) {
    const double x = x_of(s);
    const double am = s >= 0 ? a * std::exp(-s) / (1.0 + std::exp(-s)) : a / (1.0 + std::exp(s));
    if (dg) *dg = 0.5 + geom_.evaluate(c_dd_, x) * x * am / a;
    return 0.5 * s + geom_.evaluate(c_d_, x) - target;
  };
  double lo = 2.0 * target - 1.0, hi = 2.0 * target + 1.0;
  double step = 1.0;
  while (g(lo, nullptr) > 0.0) {
    lo -= step;
    step *= 2.0;
  }
  step = 1.0;
  while (g(hi, nullptr) < 0.0) {
    hi += step;
    step *= 2.0;
  }
  double s = 2.0 * target;
  if (s <= lo || s >= hi) s = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double dg;
    const double val = g(s, &dg);
    if (val > 0.0)
      hi = s;
    else
      lo = s;
    double next = s - val / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * (1.0 + std::abs(s))) {
      s = next;
      break;
    }
    s = next;
  }
  return x_of(s);
}

}  // namespace cmm
