#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmm/moment_maps.hpp"

namespace cmm {

using json = nlohmann::json;

const char* version();

// FNV-1a 64 over the sorted-key compact dump, as 16 hex digits.
std::string config_digest(const json& config);

// Stable text form used for every report file: sorted keys, two-space
// indent, trailing newline.
std::string dump_json(const json& j);

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  json details;
};

class SuiteReport {
 public:
  SuiteReport(std::string suite, json config);

  // Passes when measured is finite and ≤ tolerance.
  Check& add(const std::string& name, double measured, double tolerance, json details = nullptr);
  // Passes when measured ≥ tolerance (lower bounds such as convergence orders).
  Check& add_at_least(const std::string& name, double measured, double bound, json details = nullptr);
  Check& add_flag(const std::string& name, bool ok, json details = nullptr);
  // Reported quantities that are not assertions.
  void note(const std::string& key, json value) { info_[key] = std::move(value); }

  const std::string& suite() const { return suite_; }
  const std::vector<Check>& checks() const { return checks_; }
  const Check* find(const std::string& name) const;
  bool passed() const;
  json to_json() const;

 private:
  std::string suite_;
  json config_;
  std::vector<Check> checks_;
  json info_ = json::object();
};

json residual_json(const CoupledResidual& r);
json moment_map_json(const MomentMapValue& m);

}  // namespace cmm
