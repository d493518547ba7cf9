#include "cmm/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cmm/errors.hpp"
#include "cmm/parallel.hpp"

namespace cmm {
namespace {

struct Gauss {
  std::vector<double> nodes, weights;  // on [0, 1]
};

const Gauss& gauss(int order) {
  static const Gauss rules[] = {
      {{0.5}, {1.0}},
      {{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}, {0.5, 0.5}},
      {{0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)}, {5.0 / 18, 8.0 / 18, 5.0 / 18}},
      {{0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.3399810435848563,
        0.5 + 0.5 * 0.8611363115940526},
       {0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461, 0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538}},
      {{0.5 - 0.5 * 0.9061798459386640, 0.5 - 0.5 * 0.5384693101056831, 0.5, 0.5 + 0.5 * 0.5384693101056831,
        0.5 + 0.5 * 0.9061798459386640},
       {0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665, 0.5 * 0.5688888888888889, 0.5 * 0.4786286704993665,
        0.5 * 0.2369268850561891}},
  };
  if (order < 1 || order > 5) throw DomainError("Gauss order must lie in [1, 5]");
  return rules[order - 1];
}

Potentials lerp(const Potentials& a, const Potentials& b, double s) {
  Potentials out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] += s * (b[i][j] - a[i][j]);
  return out;
}

Potentials difference(const Potentials& a, const Potentials& b) {
  Potentials out = b;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] -= a[i][j];
  return out;
}

double component_pairing(const CoupledResidual& r, int i, const std::vector<double>& h) {
  const auto& d = r.density[i];
  const auto& w = r.weight[i];
  return deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * d[j] * h[j]; });
}

}  // namespace

nlohmann::json FunctionalReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["value"] = value;
  nlohmann::json b = nlohmann::json::array();
  for (const auto& [k, v] : breakdown) b.push_back({{"term", k}, {"value", v}});
  j["breakdown"] = b;
  j["diagnostics"] = diagnostics;
  if (!samples.empty()) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& row : samples) s.push_back({row[0], row[1], row[2]});
    j["samples"] = s;
  }
  return j;
}

FunctionalReport futaki(const CoupledModel& model, const Potentials& phi, const HolomorphicFieldData& xi) {
  model.validate_holomorphic(xi.h);
  const CoupledResidual r = model.evaluate(phi);
  FunctionalReport rep;
  rep.name = "futaki";
  for (int i = 0; i < model.components(); ++i) {
    const double term = model.pairing_weight(i) * component_pairing(r, i, xi.h[i]);
    rep.breakdown.emplace_back("component_" + std::to_string(i), term);
    rep.value += term;
  }
  rep.diagnostics["nodes"] = static_cast<double>(model.nodes());
  return rep;
}

double calabi_value(const CoupledResidual& r) {
  double s = 0.0;
  for (int i = 0; i < r.components(); ++i) s += r.l2(i) * r.l2(i);
  return s;
}

FunctionalReport calabi(const CoupledModel& model, const Potentials& phi) {
  const CoupledResidual r = model.evaluate(phi);
  FunctionalReport rep;
  rep.name = "calabi";
  for (int i = 0; i < r.components(); ++i) {
    const double term = r.l2(i) * r.l2(i);
    rep.breakdown.emplace_back("component_" + std::to_string(i), term);
    rep.value += term;
    rep.diagnostics["linf_" + std::to_string(i)] = r.linf(i);
  }
  rep.diagnostics["nodes"] = static_cast<double>(model.nodes());
  return rep;
}

double mabuchi_pairing(const CoupledModel& model, const CoupledResidual& at, const Potentials& direction) {
  double s = 0.0;
  for (int i = 0; i < model.components(); ++i) s += model.pairing_weight(i) * component_pairing(at, i, direction[i]);
  return s;
}

double mabuchi_increment(const CoupledModel& model, const Potentials& phi, const Potentials& direction) {
  const CoupledResidual r = model.evaluate(phi);
  if (static_cast<int>(direction.size()) != model.components()) throw DimensionError("wrong number of directions");
  for (int i = 0; i < model.components(); ++i) {
    const auto& d = direction[i];
    if (d.size() != model.nodes()) throw DimensionError("direction has the wrong number of nodes");
    const auto& w = r.weight[i];
    const auto& v = r.volume[i];
    const double m = deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * v[j] * d[j]; });
    const double vol = deterministic_sum(d.size(), [&](std::size_t j) { return w[j] * v[j]; });
    double sup = 0.0;
    for (double x : d) sup = std::max(sup, std::abs(x));
    if (std::abs(m) > 1e-10 * vol * (1.0 + sup))
      throw GaugeError("direction component " + std::to_string(i) + " is not mean-zero");
  }
  return mabuchi_pairing(model, r, direction);
}

PotentialPath PotentialPath::segment(const Potentials& a, const Potentials& b, PathType type) {
  PotentialPath p;
  p.times = {0.0, 1.0};
  p.samples = {a, b};
  p.type = type;
  return p;
}

PotentialPath PotentialPath::through(const std::vector<Potentials>& waypoints, PathType type) {
  if (waypoints.size() < 2) throw DomainError("a path needs at least two samples");
  PotentialPath p;
  p.type = type;
  const double m = static_cast<double>(waypoints.size() - 1);
  for (std::size_t k = 0; k < waypoints.size(); ++k) p.times.push_back(k / m);
  p.samples = waypoints;
  return p;
}

double mabuchi_segment(const CoupledModel& model, const Potentials& a, const Potentials& b, int order) {
  const Gauss& g = gauss(order);
  const Potentials delta = difference(a, b);
  double s = 0.0;
  for (std::size_t q = 0; q < g.nodes.size(); ++q)
    s += g.weights[q] * mabuchi_pairing(model, model.evaluate(lerp(a, b, g.nodes[q])), delta);
  return s;
}

double mabuchi_value(const CoupledModel& model, const Potentials& phi) {
  return mabuchi_segment(model, model.zero(), phi);
}

FunctionalReport mabuchi_path(const CoupledModel& model, const PotentialPath& path) {
  if (path.samples.size() != path.times.size() || path.samples.size() < 2)
    throw DomainError("path needs matching times and at least two samples");
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k)
    if (!(path.times[k] < path.times[k + 1])) throw DomainError("path times must be strictly increasing");
  FunctionalReport rep;
  rep.name = "mabuchi_path";
  double coarse = 0.0, cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < path.samples.size(); ++k) {
    const double fine = mabuchi_segment(model, path.samples[k], path.samples[k + 1], 5);
    coarse += mabuchi_segment(model, path.samples[k], path.samples[k + 1], 3);
    rep.breakdown.emplace_back("segment_" + std::to_string(k), fine);
    rep.value += fine;
  }
  for (std::size_t k = 0; k < path.samples.size(); ++k) {
    // One-sided slope along the adjacent segment.
    const std::size_t a = k + 1 < path.samples.size() ? k : k - 1;
    const double dt = path.times[a + 1] - path.times[a];
    const Potentials delta = difference(path.samples[a], path.samples[a + 1]);
    const double slope = dt > 0 ? mabuchi_pairing(model, model.evaluate(path.samples[k]), delta) / dt : 0.0;
    rep.samples.push_back({path.times[k], cumulative, slope});
    if (k < rep.breakdown.size()) cumulative += rep.breakdown[k].second;
  }
  rep.diagnostics["segments"] = static_cast<double>(path.samples.size() - 1);
  rep.diagnostics["quadrature_error"] = std::abs(rep.value - coarse);
  rep.diagnostics["nodes"] = static_cast<double>(model.nodes());
  return rep;
}

FunctionalReport geodesic_convexity_check(const CoupledModel& model, const PotentialPath& path, int samples) {
  if (path.type != PathType::ToricGeodesic) throw PathTypeError("convexity is only asserted along toric geodesics");
  if (model.backend() != Backend::ToricCP1) throw PathTypeError("toric geodesics need the toric backend");
  if (samples < 3) throw DomainError("need at least three samples");
  const Potentials& a = path.samples.front();
  const Potentials& b = path.samples.back();
  const double h = 1.0 / (samples - 1);

  auto profile = [&](int order) {
    std::vector<double> m(samples, 0.0);
    for (int j = 1; j < samples; ++j)
      m[j] = m[j - 1] + mabuchi_segment(model, lerp(a, b, (j - 1) * h), lerp(a, b, j * h), order);
    return m;
  };
  auto min_second = [&](const std::vector<double>& m) {
    double lo = INFINITY;
    for (int j = 1; j + 1 < samples; ++j) lo = std::min(lo, (m[j + 1] - 2.0 * m[j] + m[j - 1]) / (h * h));
    return lo;
  };
  const std::vector<double> fine = profile(5);
  const std::vector<double> coarse = profile(3);

  FunctionalReport rep;
  rep.name = "geodesic_convexity";
  rep.value = min_second(fine);
  rep.breakdown.emplace_back("min_second_difference", rep.value);
  rep.diagnostics["min_second_difference_gauss3"] = min_second(coarse);
  rep.diagnostics["richardson_error"] = std::abs(rep.value - min_second(coarse));
  rep.diagnostics["samples"] = samples;
  rep.diagnostics["step"] = h;
  const Potentials delta = difference(a, b);
  for (int j = 0; j < samples; ++j) {
    const double slope = mabuchi_pairing(model, model.evaluate(lerp(a, b, j * h)), delta);
    rep.samples.push_back({j * h, fine[j], slope});
  }
  return rep;
}

std::string mabuchi_csv(const FunctionalReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "t,M,dM\n";
  for (const auto& row : r.samples) os << row[0] << ',' << row[1] << ',' << row[2] << '\n';
  return os.str();
}

}  // namespace cmm
