#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cmm/coupled_model.hpp"
#include "cmm/diffeo.hpp"
#include "cmm/report.hpp"
#include "cmm/serialize.hpp"
#include "cmm/verification.hpp"

namespace cmm::cli {

enum ExitCode : int { kOk = 0, kAssertion = 1, kUsage = 2, kDiverged = 3, kNotKahler = 4, kInternal = 5 };

const std::vector<std::string>& eval_kinds();

// Defaults of a run config for `eval <kind>` or `solve` (kind ignored).
json default_run_config(const std::string& command, const std::string& kind = "");

// Parses a JSON config file; IoError if unreadable, ConfigError if malformed.
json load_config_file(const std::string& path);

// defaults ⊕ file ⊕ flags, then schema checks. ConfigError/UsageError on failure.
json resolve_run_config(const std::string& command, const std::string& kind, const json& file_config,
                        const FlagOverrides& flags);

std::unique_ptr<CoupledModel> build_model(const json& cfg);
Potentials build_potentials(const CoupledModel& model, const json& cfg);
DiffeoField build_map(const TorusGeometry& geom, const json& map);

// Named output files of a command, written into the run directory.
struct RunOutput {
  json report;
  std::vector<std::pair<std::string, std::string>> files;
  int exit_code = kOk;
};

RunOutput run_eval(const std::string& kind, const json& cfg);
RunOutput run_solve(const json& cfg);
RunOutput run_verify(const std::string& suite, const json& overrides);

// Writes config.json, report.json and the extra files into dir.
void write_run_directory(const std::string& dir, const json& config, const RunOutput& out);

int main(int argc, char** argv);

}  // namespace cmm::cli
