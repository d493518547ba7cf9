#include "cmm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "cmm/errors.hpp"
#include "cmm/fft.hpp"
#include "cmm/functionals.hpp"

namespace cmm {

void SolveConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(newton_threshold >= 0.0)) throw ConfigError("newton_threshold must be non-negative");
  if (!(min_step > 0.0 && min_step <= initial_step && initial_step <= max_step))
    throw ConfigError("step bounds must satisfy 0 < min_step ≤ initial_step ≤ max_step");
  if (max_rejections < 1) throw ConfigError("max_rejections must be positive");
  if (gmres_restart < 1 || gmres_max_iterations < 1) throw ConfigError("GMRES limits must be positive");
  if (!(linear_tolerance > 0.0)) throw ConfigError("linear_tolerance must be positive");
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Running: return "running";
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::NotKahler: return "not_kahler";
  }
  return "unknown";
}

double SolveState::max_linf() const {
  if (history.empty()) return INFINITY;
  double m = 0.0;
  for (double v : history.back().linf) m = std::max(m, v);
  return m;
}

namespace {

using Vec = Eigen::VectorXd;

Vec flatten(const Potentials& p) {
  std::size_t total = 0;
  for (const auto& v : p) total += v.size();
  Vec out(total);
  std::size_t k = 0;
  for (const auto& v : p)
    for (double x : v) out[k++] = x;
  return out;
}

Potentials unflatten(const Vec& x, int K, std::size_t n) {
  Potentials out(K, std::vector<double>(n));
  for (int i = 0; i < K; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = x[i * n + j];
  return out;
}

Vec scalars(const CoupledResidual& r) {
  std::size_t total = 0;
  for (const auto& d : r.density) total += d.size();
  Vec out(total);
  std::size_t k = 0;
  for (int i = 0; i < r.components(); ++i)
    for (std::size_t j = 0; j < r.density[i].size(); ++j) out[k++] = r.density[i][j] / r.volume[i][j];
  return out;
}

Potentials add(const Potentials& a, const Potentials& d, double s) {
  Potentials out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] += s * d[i][j];
  return out;
}

double sup(const Potentials& p) {
  double m = 0.0;
  for (const auto& v : p)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

IterationRecord record(const CoupledResidual& r, int iteration, const char* kind, double step, double mabuchi) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.kind = kind;
  rec.step = step;
  rec.calabi = calabi_value(r);
  rec.mabuchi = mabuchi;
  for (int i = 0; i < r.components(); ++i) {
    rec.l2.push_back(r.l2(i));
    rec.linf.push_back(r.linf(i));
  }
  return rec;
}

bool is_nyquist_or_zero(std::size_t idx, int d, int N) {
  bool zero = true;
  for (int r = 0; r < d; ++r) {
    const int j = static_cast<int>(idx % N);
    idx /= N;
    if (j == N / 2) return true;
    if (j != 0) zero = false;
  }
  return zero;
}

}  // namespace

Potentials apply_linearization(const CoupledModel& model, const Potentials& phi, const Potentials& dir) {
  const double s = sup(dir);
  if (s == 0.0) return model.zero();
  const double eps = 1e-6 / s;
  const Vec plus = scalars(model.evaluate(add(phi, dir, eps)));
  const Vec minus = scalars(model.evaluate(add(phi, dir, -eps)));
  return unflatten((plus - minus) / (2.0 * eps), model.components(), model.nodes());
}

struct SolverWorkspace::Impl {
  const CoupledModel& model;
  bool have_symbol = false;
  std::vector<Eigen::MatrixXcd> symbol;  // per Fourier index, K×K

  explicit Impl(const CoupledModel& m) : model(m) {}

  void build_symbol(const TorusModel& tm) {
    if (have_symbol) return;
    const TorusGrid& g = tm.grid();
    const int K = tm.components();
    const std::size_t n = g.size();
    ScalarField delta(g);
    delta.values[0] = 1.0;
    const HermitianField h = ddbar(delta);
    double m = 0.0;
    for (const auto& e : h.entries) m = std::max(m, std::abs(e));
    const double eps = 1e-6 / m;
    symbol.assign(n, Eigen::MatrixXcd::Zero(K, K));
    std::vector<std::complex<double>> buf(n);
    for (int j = 0; j < K; ++j) {
      Potentials p = tm.zero(), q = tm.zero();
      p[j][0] = eps;
      q[j][0] = -eps;
      const Vec resp = (scalars(tm.evaluate(p)) - scalars(tm.evaluate(q))) / (2.0 * eps);
      for (int i = 0; i < K; ++i) {
        for (std::size_t x = 0; x < n; ++x) buf[x] = resp[i * n + x];
        fft::forward(g.dim(), g.N, buf.data());
        for (std::size_t k = 0; k < n; ++k) symbol[k](i, j) = buf[k];
      }
    }
    have_symbol = true;
  }

  // Approximate inverse of (I·inv_tau + J) through the Fourier symbol.
  Vec precondition(const TorusModel& tm, const Vec& r, double inv_tau) const {
    const TorusGrid& g = tm.grid();
    const int K = tm.components();
    const std::size_t n = g.size();
    std::vector<std::vector<std::complex<double>>> spec(K, std::vector<std::complex<double>>(n));
    for (int i = 0; i < K; ++i) {
      for (std::size_t x = 0; x < n; ++x) spec[i][x] = r[i * n + x];
      fft::forward(g.dim(), g.N, spec[i].data());
    }
    Eigen::VectorXcd b(K);
    for (std::size_t k = 0; k < n; ++k) {
      for (int i = 0; i < K; ++i) b[i] = spec[i][k];
      Eigen::VectorXcd y;
      if (is_nyquist_or_zero(k, g.dim(), g.N)) {
        y = inv_tau > 0.0 ? Eigen::VectorXcd(b / inv_tau) : Eigen::VectorXcd::Zero(K);
      } else {
        Eigen::MatrixXcd A = symbol[k];
        A.diagonal().array() += inv_tau;
        y = A.fullPivLu().solve(b);
      }
      for (int i = 0; i < K; ++i) spec[i][k] = y[i];
    }
    Vec out(K * n);
    for (int i = 0; i < K; ++i) {
      fft::backward(g.dim(), g.N, spec[i].data());
      for (std::size_t x = 0; x < n; ++x) out[i * n + x] = spec[i][x].real() / static_cast<double>(n);
    }
    return out;
  }
};

SolverWorkspace::SolverWorkspace(const CoupledModel& model) : impl_(std::make_unique<Impl>(model)) {}
SolverWorkspace::~SolverWorkspace() = default;

namespace {

// Right-preconditioned restarted GMRES for A x = b.
template <class Op, class Prec>
Vec gmres(const Op& A, const Prec& M, const Vec& b, int restart, int max_iter, double tol) {
  const double bnorm = b.norm();
  Vec x = Vec::Zero(b.size());
  if (bnorm == 0.0) return x;
  Vec r = b;
  int total = 0;
  double last = bnorm;
  Vec best = x;
  while (total < max_iter) {
    const double beta = r.norm();
    if (beta >= last && total > 0) break;  // restart stagnated at the noise floor
    best = x;
    last = beta;
    if (beta <= tol * bnorm) break;
    const int m = std::min(restart, max_iter - total);
    std::vector<Vec> V, Z;
    V.push_back(r / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Vec g = Vec::Zero(m + 1);
    g[0] = beta;
    std::vector<double> cs(m), sn(m);
    int used = 0;
    for (int j = 0; j < m; ++j) {
      Z.push_back(M(V[j]));
      Vec w = A(Z[j]);
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V[i]);
        w -= H(i, j) * V[i];
      }
      H(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double den = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = den > 0 ? H(j, j) / den : 1.0;
      sn[j] = den > 0 ? H(j + 1, j) / den : 0.0;
      const double hj1 = H(j + 1, j);
      H(j, j) = cs[j] * H(j, j) + sn[j] * hj1;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      used = j + 1;
      ++total;
      const double lucky = w.norm();
      if (std::abs(g[j + 1]) <= tol * bnorm || lucky == 0.0) break;
      V.push_back(w / lucky);
    }
    Vec y = H.topLeftCorner(used, used).triangularView<Eigen::Upper>().solve(g.head(used));
    for (int i = 0; i < used; ++i) x += y[i] * Z[i];
    r = b - A(x);
  }
  if (r.norm() < last) {
    best = x;
    last = r.norm();
  }
  return best;
}

// Dense linearization of the toric residual scalars in the Chebyshev
// coefficient basis; columns ordered (component, mode).
struct ToricSystem {
  Eigen::MatrixXd J;       // (K·M) × (K·M/2)
  Eigen::MatrixXd values;  // block-diagonal coefficient → node values
  Eigen::MatrixXd gauge;   // constraint rows
};

// Updates are restricted to Chebyshev modes below M/2. On interior nodes a
// full-degree polynomial can imitate the cone-angle family u = λ u_ref
// (constant S, wrong boundary behaviour), which leaves a spurious near-kernel.
ToricSystem toric_system(const ToricModel& tm, const Potentials& phi) {
  const int K = tm.components();
  const int M = static_cast<int>(tm.nodes());
  const int B = M / 2;
  ToricSystem s;
  s.J.resize(K * M, K * B);
  s.values = Eigen::MatrixXd::Zero(K * M, K * B);
  s.gauge = Eigen::MatrixXd::Zero(K + 1, K * B);
  for (int i = 0; i < K; ++i) {
    const auto& geom = tm.geometries()[i];
    const double scale = 2.0 / geom.a();
    for (int m = 0; m < B; ++m) {
      std::vector<double> c(M, 0.0);
      c[m] = 1.0;
      const std::vector<double> v = geom.to_values(c);
      const int col = i * B + m;
      for (int j = 0; j < M; ++j) s.values(i * M + j, col) = v[j];
      const double md = m;
      const double eps = 1e-6 / std::max(1.0, scale * scale * md * md * (md * md - 1.0) / 3.0);
      Potentials p = phi, q = phi;
      for (int j = 0; j < M; ++j) {
        p[i][j] += eps * v[j];
        q[i][j] -= eps * v[j];
      }
      s.J.col(col) = (scalars(tm.evaluate(p)) - scalars(tm.evaluate(q))) / (2.0 * eps);
      const auto& w = geom.weights();
      double mean = 0.0, moment = 0.0;
      for (int j = 0; j < M; ++j) {
        mean += w[j] * v[j];
        moment += w[j] * (geom.nodes()[j] - 0.5 * geom.a()) * v[j];
      }
      s.gauge(i, col) = mean;
      if (i == 0) s.gauge(K, col) = moment;
    }
  }
  return s;
}

// Solves (I·inv_tau + J) δ = −r in the appropriate way for the backend.
Potentials implicit_direction(const CoupledModel& model, const Potentials& phi, const Vec& r, double inv_tau,
                              const SolveConfig& config, SolverWorkspace& ws, const ToricSystem* toric) {
  const int K = model.components();
  const std::size_t n = model.nodes();
  if (const auto* tm = dynamic_cast<const TorusModel*>(&model)) {
    auto& impl = ws.impl();
    impl.build_symbol(*tm);
    // Grid means are projected out of the equation. Constants span the kernel
    // of J while J·v has nonzero means, and GMRES breaks down when kernel and
    // range meet. Since ∫R dV = 0, the projected residual vanishes only with R.
    auto project = [&](Vec v) {
      for (int i = 0; i < K; ++i) v.segment(i * n, n).array() -= v.segment(i * n, n).mean();
      return v;
    };
    auto A = [&](const Vec& v) {
      Vec out = inv_tau * v;
      out += project(flatten(apply_linearization(model, phi, unflatten(v, K, n))));
      return out;
    };
    auto P = [&](const Vec& v) { return impl.precondition(*tm, v, inv_tau); };
    // Inexact Newton forcing term. Round-off in the fourth-order residual limits
    // the finite-difference products to roughly 1e−5 relative on low modes.
    const double eta = std::clamp(0.1 * r.lpNorm<Eigen::Infinity>(), config.linear_tolerance, 1e-2);
    const Vec x = gmres(A, P, project(-r), config.gmres_restart, config.gmres_max_iterations, eta);
    return unflatten(x, K, n);
  }
  const ToricSystem& s = *toric;
  const int rows = static_cast<int>(s.J.rows());
  // Gauge rows only for Newton; at finite τ the system is already regular.
  const Eigen::Index extra = inv_tau > 0.0 ? 0 : s.gauge.rows();
  Eigen::MatrixXd A(rows + extra, s.J.cols());
  A.topRows(rows) = s.J + inv_tau * s.values;
  if (extra > 0) A.bottomRows(extra) = s.gauge;
  Vec rhs = Vec::Zero(A.rows());
  rhs.head(rows) = -r;
  const Vec c = A.completeOrthogonalDecomposition().solve(rhs);
  return unflatten(s.values * c, K, n);
}

struct Trial {
  bool ok = false;
  Potentials phi;
  CoupledResidual res;
};

Trial try_state(const CoupledModel& model, Potentials phi) {
  Trial t;
  try {
    t.res = model.evaluate(phi);
    t.phi = std::move(phi);
    t.ok = true;
  } catch (const PositivityError&) {
    t.ok = false;
  }
  return t;
}

SolveState advance(const CoupledModel& model, const SolveState& state, const SolveConfig& config, SolverWorkspace* ws,
                   bool newton) {
  if (state.status != SolveStatus::Running) return state;
  std::unique_ptr<SolverWorkspace> own;
  if (!ws) {
    own = std::make_unique<SolverWorkspace>(model);
    ws = own.get();
  }
  const CoupledResidual r0 = model.evaluate(state.potentials);
  const Vec r = scalars(r0);
  const double c0 = calabi_value(r0);
  std::unique_ptr<ToricSystem> toric;
  if (const auto* km = dynamic_cast<const ToricModel*>(&model))
    toric = std::make_unique<ToricSystem>(toric_system(*km, state.potentials));

  SolveState next = state;
  double tau = newton ? INFINITY : (state.step > 0.0 ? state.step : config.initial_step);
  double damping = 1.0;
  Potentials dir;
  if (newton) dir = implicit_direction(model, state.potentials, r, 0.0, config, *ws, toric.get());
  for (;;) {
    if (!newton) dir = implicit_direction(model, state.potentials, r, 1.0 / tau, config, *ws, toric.get());
    Potentials cand = model.filter(add(state.potentials, dir, damping));
    if (state.gauge_fixed) cand = model.filter(model.fix_gauge(cand));
    Trial t = try_state(model, std::move(cand));
    if (t.ok && calabi_value(t.res) < c0) {
      double dm = 0.0;
      if (config.track_mabuchi) dm = mabuchi_segment(model, state.potentials, t.phi, 5);
      const double prev = state.history.empty() ? 0.0 : state.history.back().mabuchi;
      next.potentials = std::move(t.phi);
      next.iteration = state.iteration + 1;
      next.rejections = 0;
      next.step = newton ? state.step : std::min(2.0 * tau, config.max_step);
      next.history.push_back(record(t.res, next.iteration, newton ? "newton" : "flow", newton ? damping : tau,
                                    prev + dm));
      return next;
    }
    ++next.rejections;
    if (next.rejections >= config.max_rejections) {
      next.status = SolveStatus::Diverged;
      return next;
    }
    if (newton) {
      damping *= 0.5;
    } else {
      tau *= 0.5;
      if (tau < config.min_step) throw StallError("flow step underflow");
    }
  }
}

}  // namespace

SolveState initial_state(const CoupledModel& model, const Potentials& phi, const SolveConfig& config) {
  config.validate();
  SolveState s;
  s.potentials = model.filter(phi);
  s.step = config.initial_step;
  const CoupledResidual r = model.evaluate(s.potentials);
  s.history.push_back(record(r, 0, "initial", 0.0, 0.0));
  return s;
}

SolveState flow_step(const CoupledModel& model, const SolveState& state, const SolveConfig& config,
                     SolverWorkspace* ws) {
  return advance(model, state, config, ws, false);
}

SolveState newton_refine(const CoupledModel& model, const SolveState& state, const SolveConfig& config,
                         SolverWorkspace* ws) {
  if (!state.gauge_fixed)
    throw GaugeNotFixedError("the linearization has an automorphism kernel; fix the gauge before Newton");
  return advance(model, state, config, ws, true);
}

SolveState fix_automorphism_gauge(const CoupledModel& model, const SolveState& state) {
  SolveState s = state;
  s.potentials = model.filter(model.fix_gauge(state.potentials));
  s.gauge_fixed = true;
  return s;
}

SolveState solve(const CoupledModel& model, const Potentials& initial, const SolveConfig& config) {
  SolveState state = initial_state(model, initial, config);
  SolverWorkspace ws(model);
  while (state.status == SolveStatus::Running) {
    if (state.max_linf() < config.tolerance) {
      state = fix_automorphism_gauge(model, state);
      state.status = SolveStatus::Converged;
      break;
    }
    if (state.iteration >= config.max_iterations) {
      state.status = SolveStatus::Diverged;
      break;
    }
    if (state.max_linf() > config.newton_threshold) {
      state = flow_step(model, state, config, &ws);
    } else {
      if (!state.gauge_fixed) state = fix_automorphism_gauge(model, state);
      state = newton_refine(model, state, config, &ws);
    }
  }
  if (state.status == SolveStatus::Diverged && config.throw_on_failure)
    throw DivergedError("solver did not converge after " + std::to_string(state.iteration) + " iterations");
  return state;
}

}  // namespace cmm
