#include "cmm/report.hpp"

#include <cmath>
#include <cstdio>

#ifndef CMM_VERSION
#define CMM_VERSION "0.0.0"
#endif

namespace cmm {

const char* version() { return CMM_VERSION; }

std::string config_digest(const json& config) {
  const std::string s = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

SuiteReport::SuiteReport(std::string suite, json config) : suite_(std::move(suite)), config_(std::move(config)) {}

Check& SuiteReport::add(const std::string& name, double measured, double tolerance, json details) {
  checks_.push_back({name, measured, tolerance, std::isfinite(measured) && measured <= tolerance, std::move(details)});
  return checks_.back();
}

Check& SuiteReport::add_at_least(const std::string& name, double measured, double bound, json details) {
  checks_.push_back({name, measured, bound, std::isfinite(measured) && measured >= bound, std::move(details)});
  return checks_.back();
}

Check& SuiteReport::add_flag(const std::string& name, bool ok, json details) {
  checks_.push_back({name, ok ? 1.0 : 0.0, 1.0, ok, std::move(details)});
  return checks_.back();
}

const Check* SuiteReport::find(const std::string& name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

bool SuiteReport::passed() const {
  for (const auto& c : checks_)
    if (!c.passed) return false;
  return true;
}

json SuiteReport::to_json() const {
  json checks = json::array();
  for (const auto& c : checks_) {
    json e = {{"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"passed", c.passed}};
    if (!c.details.is_null()) e["details"] = c.details;
    checks.push_back(std::move(e));
  }
  return {{"suite", suite_},
          {"version", version()},
          {"config_digest", config_digest(config_)},
          {"config", config_},
          {"passed", passed()},
          {"checks", std::move(checks)},
          {"info", info_}};
}

json residual_json(const CoupledResidual& r) {
  json comps = json::array();
  for (int i = 0; i < r.components(); ++i)
    comps.push_back({{"l2", r.l2(i)}, {"linf", r.linf(i)}, {"integral", r.integral(i)}});
  return {{"p", r.p}, {"constants", r.constants}, {"components", std::move(comps)}};
}

json moment_map_json(const MomentMapValue& m) {
  double sx = 0.0, sy = 0.0;
  for (double v : m.x_density.values) sx = std::max(sx, std::abs(v));
  for (double v : m.y_density.values) sy = std::max(sy, std::abs(v));
  return {{"p", m.p},
          {"prefactor", m.prefactor},
          {"c1", m.c1},
          {"c2", m.c2},
          {"x_integral", integrate(m.x_density)},
          {"y_integral", integrate(m.y_density)},
          {"x_sup", sx},
          {"y_sup", sy}};
}

}  // namespace cmm
