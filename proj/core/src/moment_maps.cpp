#include "cmm/moment_maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmm/errors.hpp"
#include "cmm/parallel.hpp"

namespace cmm {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// top(a^ka ∧ b^kb), no factorials.
double raw_top(const AlternatingForm& a, int ka, const AlternatingForm& b, int kb) {
  return mixed_volume(a, ka, b, kb) * factorial(ka) * factorial(kb);
}

// Per-node mixed volume of two form fields (either may be constant).
ScalarField mixed_field(const TorusGrid& grid, const TwoFormField& a, int ka, const TwoFormField& b, int kb) {
  ScalarField out(grid);
  const int dim = grid.dim();
  parallel_for(grid.size(), [&](std::size_t lo, std::size_t hi) {
    double m[kMaxFormDim / 2 + 1];
    for (std::size_t node = lo; node < hi; ++node) {
      mixed_volumes(dim, a.data(node), b.data(node), m);
      out.values[node] = m[ka];
    }
  });
  (void)kb;
  return out;
}

ScalarField mixed_const(const TorusGrid& grid, const AlternatingForm& a, int ka, const TwoFormField& b, int kb) {
  ScalarField out(grid);
  const int dim = grid.dim();
  parallel_for(grid.size(), [&](std::size_t lo, std::size_t hi) {
    double m[kMaxFormDim / 2 + 1];
    for (std::size_t node = lo; node < hi; ++node) {
      mixed_volumes(dim, a.coeffs().data(), b.data(node), m);
      out.values[node] = m[ka];
    }
  });
  (void)kb;
  return out;
}

void require_cone(const ScalarField& vol, const std::string& what, int component) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < vol.size(); ++i)
    if (vol.values[i] < vol.values[worst]) worst = i;
  if (!(vol.values[worst] > kVolumeEpsilon)) throw NotInConeError(what, component, worst, vol.values[worst]);
}

void check_same(const TorusGeometry& X, const TorusGeometry& Y) {
  if (!(X.grid() == Y.grid())) throw DimensionError("X and Y must share a grid");
}

void check_mean_zero(const ScalarField& f, const char* name) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  const double avg = mean(f);
  if (std::abs(avg) > 1e-10 * (1.0 + m))
    throw GaugeError(std::string(name) + " is not mean-zero (mean " + std::to_string(avg) + ")");
}

// μ_{q; ω_X, ω_Y}(f) with the given prefactor, following the mu_p layout.
MomentMapValue general_mu(const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f, int q,
                          double prefactor) {
  check_same(X, Y);
  const int n = X.n();
  if (q < 0 || q > n - 1) throw DegreeError("p must lie in [0, n−1], got " + std::to_string(q));
  if (!(f.grid() == X.grid())) throw DimensionError("map and geometry grids differ");
  const TorusGrid& grid = X.grid();
  const AlternatingForm wx = X.omega(), wy = Y.omega();

  const TwoFormField beta = pullback_2form(f, TwoFormField::constant(grid, wy));
  require_cone(mixed_const(grid, wx, n - q, beta, q), "ω_X^{n−p}∧f^*ω_Y^p is not a volume form", 0);
  const ScalarField top_x = mixed_const(grid, wx, n - 1 - q, beta, q + 1);
  const double vol_x = mixed_volume(wx, n, wx, 0);
  const double c1 = integrate(top_x) / (vol_x * std::pow(2.0 * M_PI, grid.dim()));

  const TwoFormField gamma = pushforward_2form(f, TwoFormField::constant(grid, wx));
  const ScalarField top_y = mixed_field(grid, gamma, n - q, TwoFormField::constant(grid, wy), q);
  require_cone(top_y, "f_*ω_X^{n−p}∧ω_Y^p is not a volume form", 1);
  const double vol_y = mixed_volume(wy, n, wy, 0);
  const double c2 = integrate(top_y) / (vol_y * std::pow(2.0 * M_PI, grid.dim()));

  MomentMapValue m;
  m.x_density = ScalarField(grid);
  m.y_density = ScalarField(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    m.x_density.values[i] = prefactor * (c1 * vol_x - top_x.values[i]);
    m.y_density.values[i] = prefactor * (top_y.values[i] - c2 * vol_y);
  }
  m.c1 = c1;
  m.c2 = c2;
  m.p = q;
  m.prefactor = prefactor;
  return m;
}

}  // namespace

std::pair<double, double> normalizing_constants(const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f,
                                                int p) {
  const MomentMapValue m = general_mu(X, Y, f, p, 1.0);
  return {m.c1, m.c2};
}

MomentMapValue mu_p(const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f, int p) {
  const int n = X.n();
  if (p == n) throw DegreeError("p = n has no primal moment map; use mu_p_dual");
  return general_mu(X, Y, f, p, static_cast<double>(n) / (n - p));
}

MomentMapValue mu_p_dual(const TorusGeometry& Y, const TorusGeometry& X, const DiffeoField& g, int p) {
  const int n = Y.n();
  if (p < 0 || p > n - 1) throw DegreeError("p must lie in [0, n−1], got " + std::to_string(p));
  MomentMapValue m = general_mu(Y, X, g, n - p - 1, static_cast<double>(n) / (p + 1));
  m.p = p;
  return m;
}

double moment_pairing(const MomentMapValue& m, const ScalarField& phi, const ScalarField& psi) {
  if (!(phi.grid == m.x_density.grid) || !(psi.grid == m.y_density.grid))
    throw DimensionError("pairing fields do not match the moment map grids");
  check_mean_zero(phi, "φ");
  check_mean_zero(psi, "ψ");
  const double cell = phi.grid.cell_volume();
  const double a = deterministic_sum(phi.size(), [&](std::size_t i) { return phi.values[i] * m.x_density.values[i]; });
  const double b = deterministic_sum(psi.size(), [&](std::size_t i) { return psi.values[i] * m.y_density.values[i]; });
  return cell * (a + b);
}

MomentMapValue graph_mu_p(const TorusGeometry& X, const TorusGeometry& W, const DiffeoField& f1, int p) {
  check_same(X, W);
  const int n = X.n();
  if (p < 0 || p > n) throw DegreeError("p must lie in [0, n], got " + std::to_string(p));
  const TorusGrid& grid = X.grid();
  double det_min;
  try {
    det_min = f1.min_jacobian_determinant();
  } catch (const FlowBlowupError&) {
    det_min = 0.0;
  }
  if (!(det_min > kVolumeEpsilon)) throw DomainError("graph map must be a diffeomorphism (degenerate Jacobian)");

  const AlternatingForm wx = X.omega();
  TwoFormField beta = pullback_2form(f1, TwoFormField::constant(grid, W.omega()));
  for (std::size_t node = 0; node < grid.size(); ++node) beta.set(node, beta.at(node) + wx);

  const ScalarField ap = mixed_const(grid, wx, n - p, beta, p);
  require_cone(ap, "ω_X^{n−p}∧f^*ω_Y^p is not a volume form", 0);

  MomentMapValue m;
  m.p = p;
  m.prefactor = 1.0;
  m.x_density = ScalarField(grid);
  m.y_density = ScalarField(grid);
  if (p == n) {
    // Only the W-component survives.
    m.y_density = ap;
    return m;
  }
  const ScalarField ap1 = mixed_const(grid, wx, n - p - 1, beta, p + 1);
  const double vol_x = mixed_volume(wx, n, wx, 0);
  ScalarField diff(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) diff.values[i] = ap.values[i] - ap1.values[i];
  const double c1 = -integrate(diff) / (vol_x * std::pow(2.0 * M_PI, grid.dim()));
  for (std::size_t i = 0; i < grid.size(); ++i) m.x_density.values[i] = c1 * vol_x + diff.values[i];
  m.y_density = ap;
  m.c1 = c1;
  return m;
}

double graph_pairing(const MomentMapValue& m, const ScalarField& phi, const ScalarField& psi_on_graph) {
  check_mean_zero(phi, "φ");
  const double cell = phi.grid.cell_volume();
  const double a = deterministic_sum(phi.size(), [&](std::size_t i) { return phi.values[i] * m.x_density.values[i]; });
  const double b = deterministic_sum(psi_on_graph.size(),
                                     [&](std::size_t i) { return psi_on_graph.values[i] * m.y_density.values[i]; });
  return cell * (a + b);
}

std::vector<double> CoupledResidual::scalar(int i) const {
  std::vector<double> s(density[i].size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = density[i][j] / volume[i][j];
  return s;
}

double CoupledResidual::integral(int i) const {
  const auto& d = density[i];
  const auto& w = weight[i];
  return deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * d[j]; });
}

double CoupledResidual::l2(int i) const {
  const auto& d = density[i];
  const auto& v = volume[i];
  const auto& w = weight[i];
  return std::sqrt(deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * d[j] * d[j] / v[j]; }));
}

double CoupledResidual::linf(int i) const {
  double m = 0.0;
  for (std::size_t j = 0; j < density[i].size(); ++j) m = std::max(m, std::abs(density[i][j] / volume[i][j]));
  return m;
}

namespace {

// Subtracts c·volume so that the component integrates to zero; returns c.
double normalize(std::vector<double>& raw, const std::vector<double>& vol, const std::vector<double>& w) {
  const std::size_t n = raw.size();
  const double num = deterministic_sum(n, [&](std::size_t j) { return w[j] * raw[j]; });
  const double den = deterministic_sum(n, [&](std::size_t j) { return w[j] * vol[j]; });
  const double c = num / den;
  for (std::size_t j = 0; j < n; ++j) raw[j] -= c * vol[j];
  return c;
}

std::vector<double> cell_weights(const TorusGrid& grid) { return std::vector<double>(grid.size(), grid.cell_volume()); }

}  // namespace

CoupledResidual ccsck_residual(const std::vector<TorusGeometry>& geoms, const std::vector<ScalarField>& potentials,
                               const std::vector<int>& p, const std::vector<double>& weights, bool include_self_term) {
  const int K = static_cast<int>(geoms.size());
  if (K < 2) throw DimensionError("coupled system needs at least one coupled component");
  if (static_cast<int>(potentials.size()) != K || static_cast<int>(p.size()) != K - 1 ||
      static_cast<int>(weights.size()) != K - 1)
    throw DimensionError("potentials, p-vector and weights do not match the component count");
  const TorusGrid& grid = geoms[0].grid();
  const int n = geoms[0].n();
  for (int i = 0; i < K; ++i) {
    if (!(geoms[i].grid() == grid) || !(potentials[i].grid == grid))
      throw DimensionError("all components must share one grid");
  }
  for (int pi : p)
    if (pi < 0 || pi > n - 1) throw DegreeError("p_i must lie in [0, n−1], got " + std::to_string(pi));

  std::vector<TwoFormField> forms;
  HermitianField g0;
  for (int i = 0; i < K; ++i) {
    HermitianField g = metric_from_potential(geoms[i], potentials[i], i);
    forms.push_back(to_form_field(g));
    if (i == 0) g0 = std::move(g);
  }
  const TwoFormField ric = to_form_field(ricci(g0));

  const std::size_t size = grid.size();
  CoupledResidual r;
  r.p = p;
  r.density.assign(K, std::vector<double>(size));
  r.volume.assign(K, std::vector<double>(size));
  r.weight.assign(K, cell_weights(grid));
  const int dim = grid.dim();
  parallel_for(size, [&](std::size_t lo, std::size_t hi) {
    double m[kMaxFormDim / 2 + 1];
    for (std::size_t node = lo; node < hi; ++node) {
      const double* w0 = forms[0].data(node);
      mixed_volumes(dim, ric.data(node), w0, m);
      double raw0 = -m[1];
      mixed_volumes(dim, w0, w0, m);
      r.volume[0][node] = m[n];
      if (include_self_term) raw0 += m[1];
      for (int i = 1; i < K; ++i) {
        const double* wi = forms[i].data(node);
        const int pi = p[i - 1];
        mixed_volumes(dim, wi, w0, m);
        raw0 += weights[i - 1] * m[pi + 1];
        r.density[i][node] = m[pi];
        r.volume[i][node] = m[n];
      }
      r.density[0][node] = raw0;
    }
  });
  for (int i = 0; i < K; ++i) r.constants.push_back(normalize(r.density[i], r.volume[i], r.weight[i]));
  return r;
}

ScalarField mu_j_density(const TorusGeometry& geom, const ScalarField& phi, MuJSign sign) {
  const int n = geom.n();
  const HermitianField g = metric_from_potential(geom, phi);
  const TwoFormField w = to_form_field(g);
  const TwoFormField ric = to_form_field(ricci(g));
  const TorusGrid& grid = geom.grid();
  std::vector<double> raw(grid.size()), vol(grid.size());
  parallel_for(grid.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      const AlternatingForm wn = w.at(node);
      raw[node] = mixed_volume(ric.at(node), 1, wn, n - 1);
      vol[node] = mixed_volume(wn, n, wn, 0);
    }
  });
  normalize(raw, vol, cell_weights(grid));
  ScalarField out(grid);
  const double s = static_cast<double>(static_cast<int>(sign));
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = s * raw[i];
  return out;
}

KymResidual kym_u1_residual(const TorusGeometry& X, const TorusGeometry& Y, const ScalarField& phi_x,
                            const ScalarField& phi_y, double alpha0, double alpha1, double alpha2) {
  check_same(X, Y);
  const int n = X.n();
  if (n < 2) throw DegreeError("Kähler–Yang–Mills residual needs n ≥ 2");
  if (!(alpha0 > 0.0 && alpha1 > 0.0 && alpha2 > 0.0)) throw DomainError("coupling constants must be positive");
  const HermitianField gx = metric_from_potential(X, phi_x, 0);
  const TwoFormField wx = to_form_field(gx);
  const TwoFormField wy = to_form_field(metric_from_potential(Y, phi_y, 1));
  const TwoFormField ric = to_form_field(ricci(gx));
  const TorusGrid& grid = X.grid();
  const std::size_t size = grid.size();

  KymResidual out;
  CoupledResidual& r = out.residual;
  r.density.assign(2, std::vector<double>(size));
  r.volume.assign(2, std::vector<double>(size));
  r.weight.assign(2, cell_weights(grid));
  std::vector<double> mixed(size);
  parallel_for(size, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      const AlternatingForm a = wx.at(node), b = wy.at(node);
      const double vol = mixed_volume(a, n, a, 0);
      r.volume[0][node] = r.volume[1][node] = vol;
      r.density[0][node] =
          alpha0 * mixed_volume(ric.at(node), 1, a, n - 1) + alpha2 * mixed_volume(a, 2, b, n - 2);
      mixed[node] = mixed_volume(a, n - 1, b, 1);
      r.density[1][node] = mixed[node];
    }
  });
  std::size_t worst = 0;
  for (std::size_t i = 1; i < size; ++i)
    if (mixed[i] < mixed[worst]) worst = i;
  if (!(mixed[worst] > kVolumeEpsilon))
    throw NotInConeError("ω_X^{n−1}∧ω_Y is not a volume form", 1, worst, mixed[worst]);
  out.c = normalize(r.density[0], r.volume[0], r.weight[0]);
  out.d = normalize(r.density[1], r.volume[1], r.weight[1]);
  out.alpha1 = out.d * alpha2;
  out.z = out.c - out.alpha1 * out.d;
  r.constants = {out.c, out.d};
  r.p = {n - 1};
  return out;
}

namespace {

// Binomial sums of the top coefficient of (ω + iα)^n: even (α^{2r}) and odd (α^{2r+1}) parts.
std::pair<double, double> dhym_sums(const AlternatingForm& w, const AlternatingForm& a, int n) {
  double even = 0.0, odd = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double term = static_cast<double>(binomial(n, j)) * raw_top(w, n - j, a, j);
    const double sign = ((j / 2) % 2 == 0) ? 1.0 : -1.0;
    if (j % 2 == 0)
      even += sign * term;
    else
      odd += sign * term;
  }
  return {even, odd};
}

}  // namespace

DhymParts dhym_residual(const DhymData& data, bool check_cone) {
  const TorusGrid& grid = data.omega.grid;
  if (!(data.alpha.grid == grid)) throw DimensionError("ω and α live on different grids");
  const int n = grid.n;
  const double c = std::cos(data.theta), s = std::sin(data.theta);
  DhymParts out{ScalarField(grid), ScalarField(grid)};
  parallel_for(grid.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      const auto [even, odd] =
          dhym_sums(hermitian_to_form(data.omega.at(node)), hermitian_to_form(data.alpha.at(node)), n);
      out.imaginary.values[node] = c * odd + s * even;
      out.real_part.values[node] = c * even - s * odd;
    }
  });
  if (check_cone) require_cone(out.real_part, "dHYM real part is not positive", 0);
  return out;
}

std::pair<double, double> dhym_constant(const Eigen::MatrixXcd& omega, const Eigen::MatrixXcd& alpha, double theta) {
  const int n = static_cast<int>(omega.rows());
  const auto [even, odd] = dhym_sums(hermitian_to_form(omega), hermitian_to_form(alpha), n);
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * odd + s * even, c * even - s * odd};
}

CoupledResidual coupled_dhym_residual(const TorusGeometry& geom, const Eigen::MatrixXcd& alpha_base,
                                      const ScalarField& phi, const ScalarField& psi, double theta) {
  const int n = geom.n();
  const TorusGrid& grid = geom.grid();
  if (alpha_base.rows() != n || alpha_base.cols() != n) throw DimensionError("α base class has the wrong size");
  const HermitianField g = metric_from_potential(geom, phi, 0);
  const TwoFormField w = to_form_field(g);
  const TwoFormField ric = to_form_field(ricci(g));
  HermitianField al = ddbar(psi);
  for (std::size_t node = 0; node < grid.size(); ++node) al.set(node, alpha_base + 2.0 * al.at(node));
  const TwoFormField a = to_form_field(al);
  const double c = std::cos(theta), s = std::sin(theta);
  auto C = [n](int j) { return j <= n ? static_cast<double>(binomial(n, j)) : 0.0; };

  const std::size_t size = grid.size();
  CoupledResidual r;
  r.density.assign(2, std::vector<double>(size));
  r.volume.assign(2, std::vector<double>(size));
  r.weight.assign(2, cell_weights(grid));
  std::vector<double> alpha_top(size);
  parallel_for(size, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      const AlternatingForm wn = w.at(node), an = a.at(node);
      double e1 = raw_top(ric.at(node), 1, wn, n - 1);
      double e2 = 0.0;
      for (int r2 = 0; 2 * r2 <= n; ++r2) {
        const double sg = (r2 % 2 == 0) ? 1.0 : -1.0;
        e1 += c * sg * C(2 * r2) * raw_top(wn, n - 2 * r2, an, 2 * r2);
        if (n - 2 * r2 - 1 >= 0) {
          e1 -= s * sg * C(2 * r2 + 1) * raw_top(wn, n - 2 * r2 - 1, an, 2 * r2 + 1);
          e2 += c * sg * C(2 * r2) * raw_top(wn, n - 2 * r2 - 1, an, 2 * r2 + 1);
        }
        if (r2 >= 1) e2 += s * sg * C(2 * r2 + 1) * raw_top(wn, n - 2 * r2, an, 2 * r2);
      }
      r.density[0][node] = e1;
      r.density[1][node] = e2;
      r.volume[0][node] = raw_top(wn, n, wn, 0);
      r.volume[1][node] = r.volume[0][node];
      alpha_top[node] = raw_top(an, n, an, 0);
    }
  });
  r.constants.push_back(normalize(r.density[0], r.volume[0], r.weight[0]));
  const auto& wt = r.weight[1];
  const double num = deterministic_sum(size, [&](std::size_t j) { return wt[j] * r.density[1][j]; });
  const double den = deterministic_sum(size, [&](std::size_t j) { return wt[j] * alpha_top[j]; });
  const double scale = deterministic_sum(size, [&](std::size_t j) { return wt[j] * r.volume[1][j]; });
  double c2 = 0.0;
  if (std::abs(den) > 1e-12 * scale) {
    c2 = num / den;
    for (std::size_t j = 0; j < size; ++j) r.density[1][j] -= c2 * alpha_top[j];
  }
  r.constants.push_back(c2);
  r.p = {0};
  return r;
}

}  // namespace cmm
