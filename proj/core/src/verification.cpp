#include "cmm/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include "cmm/coupled_model.hpp"
#include "cmm/diffeo.hpp"
#include "cmm/errors.hpp"
#include "cmm/exterior.hpp"
#include "cmm/functionals.hpp"
#include "cmm/moment_maps.hpp"
#include "cmm/parallel.hpp"
#include "cmm/toric.hpp"

namespace cmm {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b, double factor = 1.0) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - factor * b[i]));
  return m;
}

std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

// ---------------------------------------------------------------- exterior

struct PermutationTable {
  int dim = 0;
  std::vector<int> perms;  // dim entries per permutation
  std::vector<int> signs;
};

const PermutationTable& permutations(int dim) {
  static std::mutex mu;
  static std::map<int, PermutationTable> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(dim);
  if (it != cache.end()) return it->second;
  PermutationTable t;
  t.dim = dim;
  std::vector<int> p(dim);
  std::iota(p.begin(), p.end(), 0);
  do {
    int inversions = 0;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) inversions += p[i] > p[j];
    t.perms.insert(t.perms.end(), p.begin(), p.end());
    t.signs.push_back(inversions % 2 ? -1 : 1);
  } while (std::next_permutation(p.begin(), p.end()));
  return cache.emplace(dim, std::move(t)).first->second;
}

AlternatingForm generic_positive_form(Rng& rng, int n) {
  AlternatingForm a = hermitian_to_form(random_hermitian(rng, n, 0.6));
  // A small non-(1,1) part keeps the instances generic.
  for (auto& c : a.coeffs()) c += 0.15 * rng.uniform(-1.0, 1.0);
  return a;
}

Eigen::VectorXd as_vector(const TangentVector& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.components.data(), u.dim());
}

SuiteReport suite_exterior(const json& cfg) {
  SuiteReport rep("exterior", cfg);
  Rng rng(seed_of(cfg));
  const int instances = cfg.at("instances").get<int>();
  const auto dims = cfg.at("dims").get<std::vector<int>>();
  const auto p_filter = cfg.at("p").get<std::vector<int>>();
  const double tol = cfg.at("tolerance").get<double>();
  if (dims.empty()) throw ConfigError("exterior: dims must not be empty");

  double kernel_err = 0.0, stated_err = 0.0, corrected_err = 0.0;
  int count = 0, corrected_count = 0, resampled = 0;
  json per_dim = json::object();
  for (int k = 0; k < instances; ++k) {
    const int n = dims[k % dims.size()];
    if (n < 1 || 2 * n > 8) throw ConfigError("exterior: dims must lie in [1, 4]");
    std::vector<int> ps;
    for (int p = 0; p < n; ++p)
      if (p_filter.empty() || std::find(p_filter.begin(), p_filter.end(), p) != p_filter.end()) ps.push_back(p);
    if (ps.empty()) continue;
    const int p = ps[(k / dims.size()) % ps.size()];
    const int dim = 2 * n;

    InteriorIdentity id{};
    AlternatingForm alpha, beta;
    TangentVector u, v;
    for (int attempt = 0;; ++attempt) {
      alpha = generic_positive_form(rng, n);
      beta = generic_positive_form(rng, n);
      std::vector<double> uc(dim), vc(dim);
      for (int i = 0; i < dim; ++i) {
        uc[i] = rng.normal();
        vc[i] = rng.normal();
      }
      u = TangentVector(uc);
      v = TangentVector(vc);
      try {
        id = check_interior_identity(alpha, beta, u, v, p);
        break;
      } catch (const DegenerateVolumeError&) {
        if (attempt > 20) throw;
        ++resampled;
      }
    }

    const Eigen::MatrixXd A = alpha.to_matrix(), B = beta.to_matrix();
    const Eigen::VectorXd uu = as_vector(u), vv = as_vector(v);
    std::vector<Eigen::MatrixXd> twos;
    for (int i = 0; i < n - 1 - p; ++i) twos.push_back(A);
    for (int i = 0; i < p; ++i) twos.push_back(B);
    const double lhs = n * antisymmetrized_top(dim, {A.transpose() * uu, B.transpose() * vv}, twos);
    twos.push_back(A);
    const double volume = antisymmetrized_top(dim, {}, twos);
    const double buv = uu.dot(B * vv);
    const double rhs = -buv * volume;

    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    const double e = std::max(rel(id.lhs, lhs, scale), rel(id.rhs, rhs, scale));
    kernel_err = std::max(kernel_err, e);
    stated_err = std::max(stated_err, rel(id.lhs, id.rhs, scale));
    if (p == 0) {
      corrected_err = std::max(corrected_err, rel(id.lhs, -id.rhs, scale));
      ++corrected_count;
    }
    auto& d = per_dim[std::to_string(n)];
    if (d.is_null()) d = {{"instances", 0}, {"max_kernel_error", 0.0}};
    d["instances"] = d["instances"].get<int>() + 1;
    d["max_kernel_error"] = std::max(d["max_kernel_error"].get<double>(), e);
    ++count;
  }
  rep.add("kernel_vs_oracle", kernel_err, tol, {{"instances", count}});
  rep.add("interior_identity", stated_err, tol,
          {{"instances", count}, {"form", "n i_u(a)^i_v(b)^g_p = -b(u,v) a^g_p"}});
  if (corrected_count > 0)
    rep.add("interior_identity_p0_opposite_sign", corrected_err, tol, {{"instances", corrected_count}});
  rep.note("per_dimension", per_dim);
  rep.note("resampled", resampled);
  return rep;
}

// ------------------------------------------------ moment-identity (X side)

constexpr int kMaxBand = 4;

// Per-axis phases e^{imy_r}, m = −band..band, combined over two halves of the
// axes so each wavevector costs one complex product. Storage is left
// uninitialized; tables are built per node.
class PhaseTable {
 public:
  PhaseTable(int dim, int band) : dim_(dim), band_(band), half_(dim / 2) {
    if (band > kMaxBand || pow_int(2 * band + 1, dim - half_) > kTableSize)
      throw ConfigError("trigonometric band too large for the phase tables");
  }

  int index_lo(const Wavevector& k) const { return encode(k, 0, half_); }
  int index_hi(const Wavevector& k) const { return encode(k, half_, dim_); }

  void set(const double* y) {
    cplx e[kMaxTrigDim];
    for (int r = 0; r < dim_; ++r) e[r] = cplx(std::cos(y[r]), std::sin(y[r]));
    set_axes(e);
  }

  // From the per-axis phases e_r = e^{iy_r}.
  void set_axes(const cplx* e) {
    cplx z[kMaxTrigDim][2 * kMaxBand + 1];
    for (int r = 0; r < dim_; ++r) {
      cplx* zr = z[r] + band_;
      zr[0] = 1.0;
      for (int m = 1; m <= band_; ++m) {
        zr[m] = zr[m - 1] * e[r];
        zr[-m] = std::conj(zr[m]);
      }
    }
    fill(lo_, z, 0, half_);
    fill(hi_, z, half_, dim_);
  }

  cplx at(int lo, int hi) const {
    const Entry& a = lo_[lo];
    const Entry& b = hi_[hi];
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }

 private:
  struct Entry {
    double re, im;
  };
  static constexpr int kTableSize = 729;
  using Table = Entry[kTableSize];

  static int pow_int(int b, int e) {
    int r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }
  int encode(const Wavevector& k, int from, int to) const {
    int idx = 0;
    for (int r = from; r < to; ++r) {
      if (std::abs(k[r]) > band_) throw ConfigError("wavevector outside the phase-table band");
      idx = idx * (2 * band_ + 1) + (k[r] + band_);
    }
    return idx;
  }
  void fill(Table& out, const cplx (*z)[2 * kMaxBand + 1], int from, int to) const {
    out[0] = {1.0, 0.0};
    std::size_t len = 1;
    const int w = 2 * band_ + 1;
    for (int r = from; r < to; ++r) {
      for (std::size_t i = len; i-- > 0;) {
        const cplx base(out[i].re, out[i].im);
        for (int m = w - 1; m >= 0; --m) {
          const cplx v = base * z[r][m];
          out[i * w + m] = {v.real(), v.imag()};
        }
      }
      len *= w;
    }
  }

  int dim_, band_, half_;
  Table lo_, hi_;
};

int band_of(const std::vector<Wavevector>& ks, int dim) {
  int b = 0;
  for (const auto& k : ks)
    for (int r = 0; r < dim; ++r) b = std::max(b, std::abs(k[r]));
  return b;
}

template <class M>
void upper_coeffs(const M& m, double* out) {
  int c = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j) out[c++] = m(i, j);
}

int band_of(const TrigPoly& p) {
  std::vector<Wavevector> ks;
  for (const auto& t : p.terms()) ks.push_back(t.k);
  return band_of(ks, p.dim());
}

int band_of(const VectorTrigField& v) {
  std::vector<Wavevector> ks;
  for (const auto& t : v.terms()) ks.push_back(t.k);
  return band_of(ks, v.dim());
}

struct IdentityCase {
  int n, N, p;
};

struct IdentityData {
  TorusGeometry X, Y;
  VectorTrigField V;
  TrigPoly phi, psi;
  std::vector<VectorTrigField> dirs;
};

IdentityData identity_data(const IdentityCase& c, std::uint64_t seed, double map_amplitude, int band, int directions) {
  Rng rng(seed);
  const Eigen::MatrixXcd gx = random_hermitian(rng, c.n, 0.4);
  const Eigen::MatrixXcd gy = 1.3 * random_hermitian(rng, c.n, 0.4);
  const int dim = 2 * c.n;
  IdentityData d{TorusGeometry(c.n, c.N, gx),
                 TorusGeometry(c.n, c.N, gy),
                 VectorTrigField::random(dim, seed + 11, map_amplitude, band),
                 TrigPoly::random(dim, seed + 12, 1.0, band),
                 TrigPoly::random(dim, seed + 13, 1.0, band),
                 {}};
  for (int k = 0; k < directions; ++k) d.dirs.push_back(VectorTrigField::random(dim, seed + 100 + k, 1.0, band));
  return d;
}

// Every trigonometric input expanded over one shared wavevector list, so the
// phases e^{ik·x} are built once per point.
struct ModeBasis {
  std::vector<Wavevector> k;
  std::vector<int> lo, hi;
  Eigen::MatrixXd K;  // modes × dim

  int add(const Wavevector& w) {
    for (std::size_t m = 0; m < k.size(); ++m)
      if (k[m] == w) return static_cast<int>(m);
    k.push_back(w);
    return static_cast<int>(k.size()) - 1;
  }
  void finish(const PhaseTable& t, int dim) {
    K.resize(k.size(), dim);
    for (std::size_t m = 0; m < k.size(); ++m) {
      lo.push_back(t.index_lo(k[m]));
      hi.push_back(t.index_hi(k[m]));
      for (int r = 0; r < dim; ++r) K(m, r) = k[m][r];
    }
  }
  void phases(const PhaseTable& t, Eigen::ArrayXcd& e) const {
    e.resize(k.size());
    for (std::size_t m = 0; m < k.size(); ++m) e[m] = t.at(lo[m], hi[m]);
  }
};

template <int Dim>
std::vector<double> identity_sums_fixed(const IdentityData& d, int p, double h) {
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  using Vec = Eigen::Matrix<double, Dim, 1>;
  const TorusGrid& grid = d.X.grid();
  const int n = grid.n;
  const int D = static_cast<int>(d.dirs.size()), F = D + 1;
  int band = std::max({band_of(d.phi), band_of(d.psi), band_of(d.V), 1});
  for (const auto& w : d.dirs) band = std::max(band, band_of(w));
  const PhaseTable proto(Dim, band);

  // a cos + b sin = Re((a − ib) e^{iθ}); vector fields keep a and b apart.
  ModeBasis basis;
  std::vector<std::pair<int, cplx>> phi_terms, psi_terms;
  for (const auto& t : d.phi.terms()) phi_terms.emplace_back(basis.add(t.k), cplx(t.a, -t.b));
  for (const auto& t : d.psi.terms()) psi_terms.emplace_back(basis.add(t.k), cplx(t.a, -t.b));
  std::vector<const VectorTrigField*> fields{&d.V};
  for (const auto& w : d.dirs) fields.push_back(&w);
  std::vector<std::vector<int>> field_modes;
  for (const auto* f : fields) {
    field_modes.emplace_back();
    for (const auto& t : f->terms()) field_modes.back().push_back(basis.add(t.k));
  }
  basis.finish(proto, Dim);
  const int T = static_cast<int>(basis.k.size());
  Eigen::ArrayXcd cphi = Eigen::ArrayXcd::Zero(T), cpsi = Eigen::ArrayXcd::Zero(T);
  for (const auto& [m, c] : phi_terms) cphi[m] += c;
  for (const auto& [m, c] : psi_terms) cpsi[m] += c;
  Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(F * Dim, T), Bc = Eigen::MatrixXd::Zero(F * Dim, T);
  for (int f = 0; f < F; ++f) {
    const auto& terms = fields[f]->terms();
    for (std::size_t j = 0; j < terms.size(); ++j)
      for (int i = 0; i < Dim; ++i) {
        Ac(f * Dim + i, field_modes[f][j]) += terms[j].a[i];
        Bc(f * Dim + i, field_modes[f][j]) += terms[j].b[i];
      }
  }

  const Mat A = d.X.omega_matrix(), B = d.Y.omega_matrix();
  const Mat Ainv = A.inverse(), Binv = B.inverse();
  double acoef[Dim * Dim];
  upper_coeffs(A, acoef);
  const double cell = grid.cell_volume();

  return deterministic_sums(grid.size(), 2 + 6 * D, [&](std::size_t node, double* out) {
    thread_local Eigen::ArrayXcd e, E, P, P2;
    thread_local Eigen::MatrixXd Dm, jets;
    thread_local Eigen::VectorXd vals;
    PhaseTable t(Dim, band);
    double x[Dim], bcoef[Dim * Dim], m[Dim];
    grid.coords(node, x);
    t.set(x);
    basis.phases(t, e);

    const Eigen::ArrayXcd wphi = cphi * e;
    const double phi_x = wphi.real().sum();
    const Vec gphi = -(basis.K.transpose() * wphi.imag().matrix());

    // Values and Jacobians of V and every direction: J = (B∘cos − A∘sin) K.
    const Eigen::VectorXd c = e.real().matrix(), s = e.imag().matrix();
    vals.noalias() = Ac * c + Bc * s;
    Dm.noalias() = Bc * c.asDiagonal();
    Dm.noalias() -= Ac * s.asDiagonal();
    jets.noalias() = Dm * basis.K;

    Mat Df = Mat::Identity();
    Vec y;
    for (int i = 0; i < Dim; ++i) {
      y[i] = x[i] + vals[i];
      for (int j = 0; j < Dim; ++j) Df(i, j) += jets(i, j);
    }
    const Mat beta0 = Df.transpose() * B * Df;
    upper_coeffs(beta0, bcoef);
    mixed_volumes(Dim, acoef, bcoef, m);
    const double m_rhs = m[n - p];

    t.set(y.data());
    basis.phases(t, e);
    E = cpsi * e;
    const double psi_y = E.real().sum();
    const Vec gpsi = -(basis.K.transpose() * E.imag().matrix());
    out[0] = cell * (-phi_x * m[n - 1 - p] + psi_y * m[n - p]);

    const Vec xi_phi = -Ainv * gphi;
    const Vec xi_psi = -Binv * gpsi;
    const Vec pushed = Df * xi_phi;
    const Vec BXp = B.transpose() * (xi_psi + pushed), BXm = B.transpose() * (xi_psi - pushed);

    for (int k = 0; k < D; ++k) {
      const Vec w = vals.segment<Dim>((k + 1) * Dim);
      Mat J;
      for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) J(i, j) = jets((k + 1) * Dim + i, j);
      // (Df + sJ)^T B (Df + sJ) = β₀ + s(C − C^T) + s² J^T B J with C = Df^T B J.
      const Mat C = Df.transpose() * B * J;
      const Mat beta1 = C - C.transpose();
      const Mat beta2 = J.transpose() * B * J;

      // ψ(y + s w) = Re Σ E_m e^{is k_m·w}: P_m at s = h/2, P_m² at s = h,
      // conjugates for −s.
      const Vec hw = 0.5 * h * w;
      t.set(hw.data());
      basis.phases(t, P);
      P2 = P * P;
      const double a1 = (E.real() * P.real()).sum(), b1 = (E.imag() * P.imag()).sum();
      const double a2 = (E.real() * P2.real()).sum(), b2 = (E.imag() * P2.imag()).sum();
      const double psi_s[4] = {a2 - b2, a2 + b2, a1 - b1, a1 + b1};
      const double steps[4] = {h, -h, 0.5 * h, -0.5 * h};

      double* o = out + 1 + 6 * k;
      for (int q = 0; q < 4; ++q) {
        const double st = steps[q];
        upper_coeffs(Mat(beta0 + st * beta1 + (st * st) * beta2), bcoef);
        mixed_volumes(Dim, acoef, bcoef, m);
        o[q] = cell * (-phi_x * m[n - 1 - p] + psi_s[q] * m[n - p]);
      }
      o[4] = cell * BXp.dot(w) * m_rhs;
      o[5] = cell * BXm.dot(w) * m_rhs;
    }
    out[1 + 6 * D] = Df.determinant() > 0.0 ? 0.0 : 1.0;
  });
}

// Sums over X of the pairing integrand
//   −φ m_{n−1−p} + ψ∘f m_{n−p},   m_k = mixed(ω_X, k, f^*ω_Y, n−k),
// at f = id + V and at f ± s W_d for s ∈ {h, h/2}, plus ω_Y(X_±, W_d) m_{n−p}
// at f with X_± = ξ_ψ∘f ± Df ξ_φ. Layout: [H(f), then per direction
// H(+h), H(−h), H(+h/2), H(−h/2), Ω(X_+, W), Ω(X_−, W)], all times the cell volume.
std::vector<double> identity_sums(const IdentityData& d, int p, double h) {
  switch (d.X.grid().dim()) {
    case 2: return identity_sums_fixed<2>(d, p, h);
    case 4: return identity_sums_fixed<4>(d, p, h);
    case 6: return identity_sums_fixed<6>(d, p, h);
    default: throw DimensionError("moment-identity supports n = 1, 2, 3");
  }
}

void identity_case(SuiteReport& rep, const IdentityCase& c, const json& cfg, std::uint64_t seed) {
  const double h = cfg.at("step").get<double>();
  const double tol = cfg.at("tolerance").get<double>();
  const auto order_range = cfg.at("order_range").get<std::vector<double>>();
  if (order_range.size() != 2) throw ConfigError("moment-identity: order_range needs two entries");
  if (c.p < 0 || c.p >= c.n) throw ConfigError("moment-identity: p must lie in [0, n-1]");
  const IdentityData d = identity_data(c, seed, cfg.at("map_amplitude").get<double>(), cfg.at("band").get<int>(),
                                       cfg.at("directions").get<int>());
  const std::vector<double> s = identity_sums(d, c.p, h);
  if (s.back() > 0.0) throw DomainError("moment-identity: random map is not a local diffeomorphism");
  const double pref = static_cast<double>(c.n) / (c.n - c.p);
  const int D = static_cast<int>(d.dirs.size());

  std::vector<double> rhs_p(D), rhs_m(D), d1(D), d2(D), ex(D);
  double rhs_scale = 0.0;
  for (int k = 0; k < D; ++k) {
    const double* o = s.data() + 1 + 6 * k;
    d1[k] = pref * (o[0] - o[1]) / (2.0 * h);
    d2[k] = pref * (o[2] - o[3]) / h;
    ex[k] = (4.0 * d2[k] - d1[k]) / 3.0;
    rhs_p[k] = o[4];
    rhs_m[k] = o[5];
    rhs_scale = std::max(rhs_scale, std::abs(rhs_p[k]));
  }

  auto assess = [&](const std::vector<double>& rhs, double& worst, double& min_order, double& max_order,
                    double& ratio_spread) {
    worst = 0.0;
    min_order = INFINITY;
    max_order = -INFINITY;
    double rmin = INFINITY, rmax = -INFINITY;
    for (int k = 0; k < D; ++k) {
      const double scale = std::max(std::abs(rhs[k]), 1e-3 * rhs_scale);
      worst = std::max(worst, std::abs(ex[k] - rhs[k]) / scale);
      const double e1 = std::abs(d1[k] - rhs[k]), e2 = std::abs(d2[k] - rhs[k]);
      if (e1 > 1e-9 * scale && e2 > 0.0) {
        const double order = std::log2(e1 / e2);
        min_order = std::min(min_order, order);
        max_order = std::max(max_order, order);
      }
      if (std::abs(rhs[k]) > 1e-3 * rhs_scale) {
        rmin = std::min(rmin, ex[k] / rhs[k]);
        rmax = std::max(rmax, ex[k] / rhs[k]);
      }
    }
    ratio_spread = rmax - rmin;
  };

  const std::string tag = "T" + std::to_string(2 * c.n) + "_N" + std::to_string(c.N) + "_p" + std::to_string(c.p);
  double err, omin, omax, spread;
  assess(rhs_p, err, omin, omax, spread);
  json details = {{"n", c.n}, {"N", c.N}, {"p", c.p}, {"directions", D}, {"step", h},
                  {"rhs_scale", rhs_scale}, {"fd_over_rhs_spread", spread}};
  rep.add(tag + "_extrapolated_error", err, tol, details);
  // Directions whose error already sits at round-off carry no order information.
  const bool order_ok = !std::isfinite(omin) || (omin >= order_range[0] && omax <= order_range[1]);
  rep.add_flag(tag + "_second_order", order_ok,
               {{"min_order", std::isfinite(omin) ? json(omin) : json(nullptr)},
                {"max_order", std::isfinite(omax) ? json(omax) : json(nullptr)},
                {"range", order_range}});
  double err_m, omin_m, omax_m, spread_m;
  assess(rhs_m, err_m, omin_m, omax_m, spread_m);
  rep.note(tag + "_opposite_sign_error", err_m);
  json dirs = json::array();
  for (int k = 0; k < D; ++k) dirs.push_back({{"fd_h", d1[k]}, {"fd_h2", d2[k]}, {"extrapolated", ex[k]}, {"rhs", rhs_p[k]}});
  rep.note(tag + "_directions", dirs);
}

// X-side pairing against the library's Y-side moment map on a small grid.
void identity_cross_check(SuiteReport& rep, const json& cfg, std::uint64_t seed) {
  const int N = cfg.at("cross_check_grid").get<int>();
  const IdentityCase c{1, N, 0};
  IdentityData d = identity_data(c, seed, cfg.at("map_amplitude").get<double>(), cfg.at("band").get<int>(), 0);
  const double xside = identity_sums(d, 0, 1e-3)[0];
  const MomentMapValue mu = mu_p(d.X, d.Y, DiffeoField::displacement(d.X.grid(), d.V), 0);
  const double yside = moment_pairing(mu, d.phi.sample(d.X.grid()), d.psi.sample(d.Y.grid()));
  rep.add("xside_vs_moment_pairing", rel(xside, yside, std::abs(yside)), cfg.at("cross_check_tolerance").get<double>(),
          {{"xside", xside}, {"moment_pairing", yside}, {"N", N}});
}

SuiteReport suite_moment_identity(const json& cfg) {
  SuiteReport rep("moment-identity", cfg);
  const std::uint64_t seed = seed_of(cfg);
  int idx = 0;
  for (const auto& jc : cfg.at("cases")) {
    const IdentityCase c{jc.at("n").get<int>(), jc.at("N").get<int>(), jc.at("p").get<int>()};
    identity_case(rep, c, cfg, seed + 1000 * idx++);
  }
  if (cfg.at("cross_check_grid").get<int>() > 0) identity_cross_check(rep, cfg, seed + 7);
  return rep;
}

// ------------------------------------------------------------ map suites

TorusGeometry random_geometry(Rng& rng, int n, int N, double scale) {
  return TorusGeometry(n, N, scale * random_hermitian(rng, n, 0.4));
}

SuiteReport suite_equivariance(const json& cfg) {
  SuiteReport rep("equivariance", cfg);
  const std::uint64_t seed = seed_of(cfg);
  Rng rng(seed);
  const int N = cfg.at("grid").get<int>();
  const double tol = cfg.at("tolerance").get<double>();
  const double amp = cfg.at("map_amplitude").get<double>();
  const double t = cfg.at("flow_time").get<double>();
  const int steps = cfg.at("flow_steps").get<int>();
  const TorusGeometry X = random_geometry(rng, 1, N, 1.0), Y = random_geometry(rng, 1, N, 1.6);
  const TorusGrid& grid = X.grid();
  const DiffeoField f = DiffeoField::displacement(grid, VectorTrigField::random(2, seed + 1, amp, 2));
  const DiffeoField sigma = hamiltonian_flow(X, TrigPoly::random(2, seed + 2, 1.0, 2), t, steps);
  const DiffeoField eta = hamiltonian_flow(Y, TrigPoly::random(2, seed + 3, 1.0, 2), t, steps);
  const DiffeoField g = eta.compose(f.compose(sigma.inverse()));

  for (int p : cfg.at("p").get<std::vector<int>>()) {
    if (p != 0) throw ConfigError("equivariance: the T^2 suite only has p = 0");
    const MomentMapValue mf = mu_p(X, Y, f, p), mg = mu_p(X, Y, g, p);
    const ScalarField px = pushforward(sigma, mf.x_density), py = pushforward(eta, mf.y_density);
    const double sx = sup_abs(mf.x_density.values), sy = sup_abs(mf.y_density.values);
    const std::string tag = "p" + std::to_string(p);
    rep.add(tag + "_x_density", sup_diff(mg.x_density.values, px.values) / sx, tol, {{"sup", sx}});
    rep.add(tag + "_y_density", sup_diff(mg.y_density.values, py.values) / sy, tol, {{"sup", sy}});
    rep.add(tag + "_constants", std::max(rel(mg.c1, mf.c1, std::abs(mf.c1)), rel(mg.c2, mf.c2, std::abs(mf.c2))), tol,
            {{"c1", mf.c1}, {"c2", mf.c2}});
  }
  rep.note("grid", N);
  return rep;
}

SuiteReport suite_duality(const json& cfg) {
  SuiteReport rep("duality", cfg);
  const std::uint64_t seed = seed_of(cfg);
  Rng rng(seed);
  const double tol = cfg.at("tolerance").get<double>();
  const double amp = cfg.at("map_amplitude").get<double>();

  auto compare = [&](const TorusGeometry& X, const TorusGeometry& Y, const DiffeoField& f, int p, double factor) {
    const MomentMapValue primal = mu_p(X, Y, f, p);
    const MomentMapValue dual = mu_p_dual(Y, X, f.inverse(), p);
    const double ey = sup_diff(dual.x_density.values, primal.y_density.values, factor) /
                      (std::abs(factor) * sup_abs(primal.y_density.values));
    const double ex = sup_diff(dual.y_density.values, primal.x_density.values, factor) /
                      (std::abs(factor) * sup_abs(primal.x_density.values));
    return std::max(ex, ey);
  };

  const int N = cfg.at("grid").get<int>();
  double worst = 0.0;
  const int instances = cfg.at("instances").get<int>();
  for (int k = 0; k < instances; ++k) {
    const TorusGeometry X = random_geometry(rng, 1, N, 1.0), Y = random_geometry(rng, 1, N, 1.4);
    // Alternate plain displacements with Hamiltonian flows composed onto one.
    DiffeoField f = DiffeoField::displacement(X.grid(), VectorTrigField::random(2, seed + 10 + k, amp, 2));
    if (k % 2 == 1) f = hamiltonian_flow(X, TrigPoly::random(2, seed + 20 + k, 1.0, 2), 0.2, 64).compose(f);
    worst = std::max(worst, compare(X, Y, f, 0, -1.0));
  }
  rep.add("T2_relative_error", worst, tol, {{"instances", instances}, {"N", N}, {"factor", -1.0}});

  const int N4 = cfg.at("t4_grid").get<int>();
  for (int p : cfg.at("t4_p").get<std::vector<int>>()) {
    if (p < 0 || p > 1) throw ConfigError("duality: t4_p entries must be 0 or 1");
    const TorusGeometry X = random_geometry(rng, 2, N4, 1.0), Y = random_geometry(rng, 2, N4, 1.3);
    const DiffeoField f = DiffeoField::displacement(X.grid(), VectorTrigField::random(4, seed + 40 + p, amp, 1));
    const double n = 2.0;
    const double corrected = -(n - p) / (p + 1.0), stated = -(p + 1.0) / (n - p);
    const std::string tag = "T4_p" + std::to_string(p);
    rep.add(tag + "_relative_error", compare(X, Y, f, p, corrected), tol, {{"N", N4}, {"factor", corrected}});
    rep.note(tag + "_error_with_inverse_factor", compare(X, Y, f, p, stated));
  }
  return rep;
}

SuiteReport suite_constants(const json& cfg) {
  SuiteReport rep("constants", cfg);
  const std::uint64_t seed = seed_of(cfg);
  const auto times = cfg.at("times").get<std::vector<double>>();
  const int steps = cfg.at("flow_steps").get<int>();
  const double amp = cfg.at("map_amplitude").get<double>();

  // f_t = η_t ∘ f₀ ∘ σ_t with σ Hamiltonian for ω_X and η for ω_Y. Each f_t
  // is built once so its inverse cache serves every p.
  auto drift = [&](int n, int N, const std::vector<int>& ps, std::vector<json>& samples) {
    Rng rng(seed + 17 * n);
    const TorusGeometry X = random_geometry(rng, n, N, 1.0), Y = random_geometry(rng, n, N, 1.5);
    const int dim = 2 * n, band = n == 1 ? 2 : 1;
    const DiffeoField f0 = DiffeoField::displacement(X.grid(), VectorTrigField::random(dim, seed + 1, amp, band));
    const TrigPoly hx = TrigPoly::random(dim, seed + 2, 1.0, band), hy = TrigPoly::random(dim, seed + 3, 1.0, band);
    std::vector<std::pair<double, double>> base;
    for (int p : ps) base.push_back(normalizing_constants(X, Y, f0, p));
    std::vector<double> worst(ps.size(), 0.0);
    samples.assign(ps.size(), json::array());
    for (double t : times) {
      const DiffeoField ft = hamiltonian_flow(Y, hy, t, steps).compose(f0.compose(hamiltonian_flow(X, hx, t, steps)));
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto [d1, d2] = normalizing_constants(X, Y, ft, ps[i]);
        const auto [c1, c2] = base[i];
        const double e = std::max(rel(d1, c1, std::abs(c1)), rel(d2, c2, std::abs(c2)));
        samples[i].push_back({{"t", t}, {"c1", d1}, {"c2", d2}, {"drift", e}});
        worst[i] = std::max(worst[i], e);
      }
    }
    return worst;
  };

  std::vector<json> s;
  const int N = cfg.at("grid").get<int>(), fine = cfg.at("fine_grid").get<int>();
  double w = drift(1, N, {0}, s)[0];
  rep.add("T2_drift_N" + std::to_string(N), w, cfg.at("tolerance").get<double>(), {{"samples", s[0]}});
  if (fine > 0) {
    w = drift(1, fine, {0}, s)[0];
    rep.add("T2_drift_N" + std::to_string(fine), w, cfg.at("fine_tolerance").get<double>(), {{"samples", s[0]}});
  }
  const int N4 = cfg.at("t4_grid").get<int>();
  const auto ps = cfg.at("t4_p").get<std::vector<int>>();
  if (N4 > 0 && !ps.empty()) {
    const auto w4 = drift(2, N4, ps, s);
    for (std::size_t i = 0; i < ps.size(); ++i)
      rep.add("T4_drift_p" + std::to_string(ps[i]), w4[i], cfg.at("tolerance").get<double>(),
              {{"samples", s[i]}, {"N", N4}});
  }
  return rep;
}

// ------------------------------------------------------ functional suites

ToricModel cp1_model(const std::vector<double>& classes, int M) {
  if (classes.size() < 2) throw ConfigError("need at least two class sizes");
  std::vector<ToricCP1Geometry> geoms;
  for (double a : classes) geoms.emplace_back(a, M);
  return ToricModel(geoms, std::vector<int>(classes.size() - 1, 0), std::vector<double>(classes.size() - 1, 1.0));
}

TorusModel flat_torus_model(int n, int N, const std::vector<int>& p, const std::vector<double>& weights) {
  if (p.size() != weights.size()) throw ConfigError("p and weights must have the same length");
  std::vector<TorusGeometry> geoms(p.size() + 1, TorusGeometry::flat(n, N));
  return TorusModel(geoms, p, weights);
}

SuiteReport suite_futaki(const json& cfg) {
  SuiteReport rep("futaki", cfg);
  const std::uint64_t seed = seed_of(cfg);
  const int M = cfg.at("M").get<int>(), samples = cfg.at("samples").get<int>(), band = cfg.at("band").get<int>();
  const double amp = cfg.at("amplitude").get<double>();

  auto values = [&](const ToricModel& model) {
    const HolomorphicFieldData xi{model.rotation_field(1.0)};
    std::vector<double> f{futaki(model, model.zero(), xi).value};
    for (int k = 0; k < samples; ++k) f.push_back(futaki(model, model.random(seed + k, amp, band), xi).value);
    return f;
  };
  const auto same = values(cp1_model({1.0, 1.0}, M));
  rep.add("rotation_field_solvable", sup_abs(same), cfg.at("rotation_tolerance").get<double>(), {{"values", same}});

  const auto unequal = values(cp1_model(cfg.at("unequal_classes").get<std::vector<double>>(), M));
  double spread = 0.0;
  for (double v : unequal) spread = std::max(spread, std::abs(v - unequal[0]));
  rep.add("class_invariance", spread, cfg.at("invariance_tolerance").get<double>(), {{"values", unequal}});

  const TorusModel torus = flat_torus_model(1, cfg.at("torus_grid").get<int>(), {0}, {1.0});
  Potentials h = torus.random(seed, 0.1, 1);
  bool rejected = false;
  try {
    torus.validate_holomorphic(h);
  } catch (const NotHolomorphicError&) {
    rejected = true;
  }
  rep.add_flag("torus_rejects_nonconstant", rejected);
  for (auto& c : h) std::fill(c.begin(), c.end(), 1.0);
  const double f_const = futaki(torus, torus.random(seed + 1, 0.05, 2), HolomorphicFieldData{h}).value;
  rep.add("torus_constant_field", std::abs(f_const), cfg.at("rotation_tolerance").get<double>());
  return rep;
}

SolveConfig solver_section(const json& cfg) {
  SolveConfig sc = solve_config_from_json(cfg.at("solver"));
  sc.seed = seed_of(cfg);
  sc.track_mabuchi = true;
  sc.throw_on_failure = false;
  return sc;
}

double max_mabuchi_increase(const SolveState& s) {
  double m = -INFINITY;
  for (std::size_t k = 1; k < s.history.size(); ++k) m = std::max(m, s.history[k].mabuchi - s.history[k - 1].mabuchi);
  return std::isfinite(m) ? m : 0.0;
}

SuiteReport suite_mabuchi(const json& cfg) {
  SuiteReport rep("mabuchi", cfg);
  const std::uint64_t seed = seed_of(cfg);
  const double amp = cfg.at("amplitude").get<double>();
  const int band = cfg.at("band").get<int>();
  const double path_tol = cfg.at("path_tolerance").get<double>();

  auto path_check = [&](const CoupledModel& model, const std::string& tag) {
    const Potentials a = model.random(seed, amp, band), b = model.random(seed + 1, amp, band);
    const Potentials w1 = model.random(seed + 2, amp, band), w2 = model.random(seed + 3, amp, band);
    const double straight = mabuchi_path(model, PotentialPath::segment(a, b, PathType::Generic)).value;
    const double via1 = mabuchi_path(model, PotentialPath::through({a, w1, b})).value;
    const double via2 = mabuchi_path(model, PotentialPath::through({a, w1, w2, b})).value;
    const double e = std::max(std::abs(via1 - straight), std::abs(via2 - straight));
    rep.add(tag + "_path_independence", e, path_tol, {{"straight", straight}, {"one_waypoint", via1}, {"two_waypoints", via2}});
  };
  const TorusModel torus = flat_torus_model(1, cfg.at("torus_grid").get<int>(), {0}, {1.0});
  const ToricModel cp1 = cp1_model({1.0, 1.0}, cfg.at("M").get<int>());
  path_check(torus, "torus");
  path_check(cp1, "cp1");

  const SolveConfig sc = solver_section(cfg);
  const double slack = cfg.at("monotone_slack").get<double>();
  const SolveState st = solve(torus, torus.random(seed + 5, amp, band), sc);
  rep.add("torus_flow_monotone", std::max(0.0, max_mabuchi_increase(st)), slack, {{"steps", st.history.size()}});
  const SolveState sp = solve(cp1, cp1.random(seed + 6, amp, 3), sc);
  rep.add("cp1_flow_monotone", std::max(0.0, max_mabuchi_increase(sp)), slack, {{"steps", sp.history.size()}});

  const Potentials end = cp1.random(seed + 7, cfg.at("geodesic_amplitude").get<double>(), 3);
  const FunctionalReport conv = geodesic_convexity_check(
      cp1, PotentialPath::segment(cp1.zero(), end, PathType::ToricGeodesic), cfg.at("convexity_samples").get<int>());
  rep.add("geodesic_convexity", std::max(0.0, -conv.value), cfg.at("convexity_floor").get<double>(),
          {{"min_second_difference", conv.value}});
  return rep;
}

// ------------------------------------------------------------------ dHYM

SuiteReport suite_dhym(const json& cfg) {
  SuiteReport rep("dhym", cfg);
  Rng rng(seed_of(cfg));
  const int n = cfg.at("n").get<int>(), N = cfg.at("grid").get<int>();
  double factorial = 1.0;
  for (int i = 2; i <= n; ++i) factorial *= i;
  const TorusGrid grid{n, N};

  auto random_alpha = [&] {
    Eigen::MatrixXcd r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = cplx(rng.normal(), rng.normal());
    return Eigen::MatrixXcd(0.75 * (r + r.adjoint()));
  };
  // Oracle: top coefficient of e^{iθ}(ω + iα)^n is e^{iθ} n! det(H_ω + iH_α).
  auto oracle = [&](const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& a, double theta) {
    return std::polar(1.0, theta) * factorial * Eigen::MatrixXcd(w + cplx(0, 1) * a).determinant();
  };

  double worst_residual = 0.0;
  for (int k = 0; k < cfg.at("residual_instances").get<int>(); ++k) {
    const Eigen::MatrixXcd w = random_hermitian(rng, n, 0.5), a = random_alpha();
    const double theta = -std::arg(Eigen::MatrixXcd(w + cplx(0, 1) * a).determinant());
    const DhymParts parts = dhym_residual({constant_metric(grid, w), constant_metric(grid, a), theta});
    worst_residual = std::max(worst_residual, sup_abs(parts.imaginary.values) / sup_abs(parts.real_part.values));
  }
  rep.add("residual_at_oracle_angle", worst_residual, cfg.at("residual_tolerance").get<double>());

  int mismatches = 0, inside = 0;
  double value_err = 0.0;
  const int instances = cfg.at("cone_instances").get<int>();
  for (int k = 0; k < instances; ++k) {
    const Eigen::MatrixXcd w = random_hermitian(rng, n, 0.5), a = random_alpha();
    const double theta = rng.uniform(-kPi, kPi);
    const cplx z = oracle(w, a, theta);
    const auto [im, re] = dhym_constant(w, a, theta);
    value_err = std::max(value_err, std::abs(cplx(re, im) - z) / std::abs(z));
    bool in_cone = true;
    try {
      dhym_residual({constant_metric(grid, w), constant_metric(grid, a), theta});
    } catch (const NotInConeError&) {
      in_cone = false;
    }
    inside += z.real() > 0.0;
    mismatches += in_cone != (z.real() > 0.0);
  }
  rep.add("cone_misclassified", mismatches, 0.0, {{"instances", instances}, {"inside", inside}});
  rep.add("constant_value_vs_determinant", value_err, cfg.at("value_tolerance").get<double>());
  return rep;
}

// ---------------------------------------------------------------- solvers

json history_summary(const SolveState& s) {
  return {{"status", status_name(s.status)}, {"iterations", s.iteration}, {"linf", s.max_linf()},
          {"calabi", s.calabi()}, {"records", s.history.size()}};
}

SuiteReport suite_torus_solve(const json& cfg) {
  SuiteReport rep("torus-solve", cfg);
  const TorusModel model = flat_torus_model(cfg.at("n").get<int>(), cfg.at("grid").get<int>(),
                                            cfg.at("p").get<std::vector<int>>(),
                                            cfg.at("weights").get<std::vector<double>>());
  const SolveConfig sc = solver_section(cfg);
  const SolveState s =
      solve(model, model.random(seed_of(cfg), cfg.at("amplitude").get<double>(), cfg.at("band").get<int>()), sc);
  rep.add_flag("converged", s.status == SolveStatus::Converged, history_summary(s));
  rep.add("residual_linf", s.max_linf(), sc.tolerance);
  rep.add("iterations", s.iteration, sc.max_iterations);
  double dev = 0.0;
  for (const auto& c : model.fix_gauge(s.potentials)) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
    for (double v : c) dev = std::max(dev, std::abs(v - mean));
  }
  rep.add("distance_to_flat", dev, cfg.at("flat_tolerance").get<double>());
  rep.add("flow_monotone", std::max(0.0, max_mabuchi_increase(s)), 1e-10);
  return rep;
}

SuiteReport suite_cp1_solve(const json& cfg) {
  SuiteReport rep("cp1-solve", cfg);
  const ToricModel model = cp1_model(cfg.at("classes").get<std::vector<double>>(), cfg.at("M").get<int>());
  const SolveConfig sc = solver_section(cfg);
  const double amp = cfg.at("amplitude").get<double>();
  const int band = cfg.at("band").get<int>();
  std::vector<Potentials> fixed;
  for (int run = 0; run < 2; ++run) {
    const SolveState s = solve(model, model.random(seed_of(cfg) + 101 * run, amp, band), sc);
    const std::string tag = "run" + std::to_string(run);
    rep.add_flag(tag + "_converged", s.status == SolveStatus::Converged, history_summary(s));
    rep.add(tag + "_iterations", s.iteration, sc.max_iterations);
    double dev = 0.0;
    for (int i = 0; i < model.components(); ++i) dev = std::max(dev, sup_abs(model.potential_deviation(s.potentials, i)));
    rep.add(tag + "_distance_to_fs", dev, cfg.at("fs_tolerance").get<double>());
    fixed.push_back(model.fix_gauge(s.potentials));
  }
  double agree = 0.0;
  for (int i = 0; i < model.components(); ++i) agree = std::max(agree, sup_diff(fixed[0][i], fixed[1][i]));
  rep.add("runs_agree", agree, cfg.at("agreement_tolerance").get<double>());
  return rep;
}

// ----------------------------------------------------------------- configs

json solver_defaults() { return solve_config_to_json(SolveConfig{}); }

const std::map<std::string, json>& defaults() {
  static const std::map<std::string, json> d = {
      {"exterior", {{"seed", 1}, {"instances", 1000}, {"dims", {2, 3, 4}}, {"p", json::array()}, {"tolerance", 1e-10}}},
      {"moment-identity",
       {{"seed", 1},
        {"directions", 20},
        {"step", 0.01},
        {"tolerance", 1e-5},
        {"order_range", {1.8, 2.2}},
        {"map_amplitude", 0.15},
        {"band", 1},
        {"cases", {{{"n", 1}, {"N", 64}, {"p", 0}}, {{"n", 2}, {"N", 32}, {"p", 0}}, {{"n", 2}, {"N", 32}, {"p", 1}}}},
        {"cross_check_grid", 32},
        {"cross_check_tolerance", 1e-8}}},
      {"equivariance",
       {{"seed", 1}, {"grid", 64}, {"p", {0}}, {"map_amplitude", 0.15}, {"flow_time", 0.15}, {"flow_steps", 64},
        {"tolerance", 1e-4}}},
      {"duality",
       {{"seed", 1}, {"grid", 64}, {"instances", 4}, {"map_amplitude", 0.15}, {"tolerance", 1e-6}, {"t4_grid", 16},
        {"t4_p", {0, 1}}}},
      {"constants",
       {{"seed", 1}, {"grid", 128}, {"fine_grid", 256}, {"times", {0.1, 0.2, 0.3}}, {"flow_steps", 8},
        {"map_amplitude", 0.15}, {"tolerance", 1e-4}, {"fine_tolerance", 1e-5}, {"t4_grid", 0}, {"t4_p", {0, 1}}}},
      {"futaki",
       {{"seed", 1}, {"M", 512}, {"samples", 5}, {"amplitude", 0.05}, {"band", 3}, {"unequal_classes", {1.0, 2.0}},
        {"invariance_tolerance", 1e-6}, {"rotation_tolerance", 1e-8}, {"torus_grid", 16}}},
      {"mabuchi",
       {{"seed", 1}, {"torus_grid", 32}, {"M", 64}, {"amplitude", 0.05}, {"band", 2}, {"path_tolerance", 1e-5},
        {"monotone_slack", 1e-10}, {"convexity_samples", 33}, {"convexity_floor", 1e-6}, {"geodesic_amplitude", 0.2},
        {"solver", solver_defaults()}}},
      {"dhym",
       {{"seed", 1}, {"n", 2}, {"grid", 4}, {"residual_instances", 10}, {"cone_instances", 100},
        {"residual_tolerance", 1e-12}, {"value_tolerance", 1e-10}}},
      {"torus-solve",
       {{"seed", 1}, {"n", 1}, {"grid", 32}, {"amplitude", 0.05}, {"band", 2}, {"p", {0}}, {"weights", {1.0}},
        {"flat_tolerance", 1e-6}, {"solver", solver_defaults()}}},
      {"cp1-solve",
       {{"seed", 1}, {"M", 64}, {"classes", {1.0, 1.0}}, {"amplitude", 0.05}, {"band", 3}, {"fs_tolerance", 1e-6},
        {"agreement_tolerance", 1e-6}, {"solver", solver_defaults()}}},
  };
  return d;
}

bool compatible(const json& def, const json& val) {
  if (def.is_number()) return val.is_number() && !(def.is_number_integer() && !val.is_number_integer());
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return def.type() == val.type();
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"exterior", "moment-identity", "equivariance", "duality",
                                                 "constants", "futaki", "mabuchi", "dhym", "torus-solve",
                                                 "cp1-solve"};
  return names;
}

bool is_suite(const std::string& name) { return defaults().count(name) > 0; }

json default_suite_config(const std::string& suite) {
  const auto it = defaults().find(suite);
  if (it == defaults().end()) throw UsageError("unknown suite '" + suite + "'");
  return it->second;
}

json merge_config(const json& defaults, const json& overrides, const std::string& path) {
  if (!overrides.is_object()) throw ConfigError("config" + (path.empty() ? "" : " section " + path) + " must be an object");
  json out = defaults;
  for (const auto& [key, val] : overrides.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    const json& def = defaults.at(key);
    if (!compatible(def, val)) throw ConfigError("config key '" + where + "' expects " + std::string(def.type_name()));
    out[key] = def.is_object() ? merge_config(def, val, where) : val;
  }
  return out;
}

void apply_flag_overrides(const std::string& suite, json& cfg, const FlagOverrides& flags) {
  auto refuse = [&](const char* flag) { throw UsageError(std::string(flag) + " does not apply to suite " + suite); };
  if (flags.seed) cfg["seed"] = *flags.seed;
  if (flags.grid) {
    const int N = *flags.grid;
    if (N < 4 || N % 2) throw UsageError("--grid must be an even number ≥ 4");
    if (suite == "moment-identity") {
      // Sets the T² resolution; higher-dimensional cases keep their grids.
      for (auto& c : cfg["cases"])
        if (c.at("n").get<int>() == 1) c["N"] = N;
    } else if (suite == "constants") {
      cfg["grid"] = N;
      cfg["fine_grid"] = 2 * N;
    } else if (suite == "futaki" || suite == "cp1-solve") {
      cfg["M"] = N;
    } else if (suite == "mabuchi") {
      cfg["torus_grid"] = N;
    } else if (cfg.contains("grid")) {
      cfg["grid"] = N;
    } else {
      refuse("--grid");
    }
  }
  if (flags.p) {
    const auto& ps = *flags.p;
    if (suite == "moment-identity") {
      json kept = json::array();
      for (const auto& c : cfg["cases"])
        if (std::find(ps.begin(), ps.end(), c.at("p").get<int>()) != ps.end()) kept.push_back(c);
      if (kept.empty()) throw UsageError("--p leaves no moment-identity case to run");
      cfg["cases"] = kept;
    } else if (suite == "duality" || suite == "constants") {
      cfg["t4_p"] = ps;
    } else if (cfg.contains("p")) {
      cfg["p"] = ps;
    } else {
      refuse("--p");
    }
  }
  if (flags.tolerance) {
    const double t = *flags.tolerance;
    if (!(t > 0.0)) throw UsageError("--tolerance must be positive");
    if (cfg.contains("tolerance")) cfg["tolerance"] = t;
    else if (suite == "futaki") cfg["invariance_tolerance"] = t;
    else if (suite == "mabuchi") cfg["path_tolerance"] = t;
    else if (suite == "dhym") cfg["residual_tolerance"] = t;
    else if (cfg.contains("solver")) cfg["solver"]["tolerance"] = t;
    else refuse("--tolerance");
  }
}

SuiteReport run_suite(const std::string& suite, const json& overrides) {
  const json cfg = merge_config(default_suite_config(suite), overrides);
  if (suite == "exterior") return suite_exterior(cfg);
  if (suite == "moment-identity") return suite_moment_identity(cfg);
  if (suite == "equivariance") return suite_equivariance(cfg);
  if (suite == "duality") return suite_duality(cfg);
  if (suite == "constants") return suite_constants(cfg);
  if (suite == "futaki") return suite_futaki(cfg);
  if (suite == "mabuchi") return suite_mabuchi(cfg);
  if (suite == "dhym") return suite_dhym(cfg);
  if (suite == "torus-solve") return suite_torus_solve(cfg);
  return suite_cp1_solve(cfg);
}

SolveConfig solve_config_from_json(const json& j) {
  const json m = merge_config(solve_config_to_json(SolveConfig{}), j, "solver");
  SolveConfig c;
  c.max_iterations = m.at("max_iterations").get<int>();
  c.initial_step = m.at("initial_step").get<double>();
  c.min_step = m.at("min_step").get<double>();
  c.max_step = m.at("max_step").get<double>();
  c.tolerance = m.at("tolerance").get<double>();
  c.newton_threshold = m.at("newton_threshold").get<double>();
  c.max_rejections = m.at("max_rejections").get<int>();
  c.gmres_restart = m.at("gmres_restart").get<int>();
  c.gmres_max_iterations = m.at("gmres_max_iterations").get<int>();
  c.linear_tolerance = m.at("linear_tolerance").get<double>();
  c.validate();
  return c;
}

json solve_config_to_json(const SolveConfig& c) {
  return {{"max_iterations", c.max_iterations}, {"initial_step", c.initial_step}, {"min_step", c.min_step},
          {"max_step", c.max_step}, {"tolerance", c.tolerance}, {"newton_threshold", c.newton_threshold},
          {"max_rejections", c.max_rejections}, {"gmres_restart", c.gmres_restart},
          {"gmres_max_iterations", c.gmres_max_iterations}, {"linear_tolerance", c.linear_tolerance}};
}

Eigen::MatrixXcd random_hermitian(Rng& rng, int n, double spread) {
  Eigen::MatrixXcd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = cplx(rng.normal(), rng.normal());
  const Eigen::MatrixXcd h = 0.5 * (r + r.adjoint());
  return Eigen::MatrixXcd::Identity(n, n) + (spread / h.norm()) * h;
}

double antisymmetrized_top(int dim, const std::vector<Eigen::VectorXd>& one_forms,
                           const std::vector<Eigen::MatrixXd>& two_forms) {
  if (static_cast<int>(one_forms.size() + 2 * two_forms.size()) != dim)
    throw DegreeError("antisymmetrization oracle needs total degree equal to the dimension");
  const PermutationTable& t = permutations(dim);
  const std::size_t count = t.signs.size();
  const int k1 = static_cast<int>(one_forms.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const int* sigma = t.perms.data() + s * dim;
    double prod = t.signs[s];
    for (int i = 0; i < k1; ++i) prod *= one_forms[i][sigma[i]];
    for (std::size_t j = 0; j < two_forms.size(); ++j) prod *= two_forms[j](sigma[k1 + 2 * j], sigma[k1 + 2 * j + 1]);
    sum += prod;
  }
  return std::ldexp(sum, -static_cast<int>(two_forms.size()));
}

}  // namespace cmm
