#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmm/report.hpp"
#include "cmm/solvers.hpp"
#include "cmm/trig.hpp"

namespace cmm {

// Suites runnable through run_suite. The first seven are the `verify`
// suites of the CLI; the rest back the solver and dHYM acceptance checks.
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

json default_suite_config(const std::string& suite);  // UsageError for an unknown suite

// Overlays `overrides` on `defaults`. Objects merge key by key; any other
// value replaces the default and must have a compatible type. Unknown keys
// throw ConfigError naming the offending path.
json merge_config(const json& defaults, const json& overrides, const std::string& path = "");

struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<std::vector<int>> p;
  std::optional<double> tolerance;
};
// Maps the generic CLI flags onto the keys of a suite's config (UsageError
// when a flag does not apply to the suite).
void apply_flag_overrides(const std::string& suite, json& config, const FlagOverrides& flags);

SuiteReport run_suite(const std::string& suite, const json& overrides = json::object());

SolveConfig solve_config_from_json(const json& j);
json solve_config_to_json(const SolveConfig& c);

// I + spread·H/|H|_F for a random Hermitian H, so eigenvalues lie in
// [1 − spread, 1 + spread].
Eigen::MatrixXcd random_hermitian(Rng& rng, int n, double spread);

// Top coefficient of θ₁∧…∧θ_k∧ω₁∧…∧ω_m on R^dim by the permutation sum
// (1/2^m) Σ_σ sgn σ Π θ_i(e_σ) Π ω_j(e_σ, e_σ). Independent of the
// exterior kernel; used as its oracle.
double antisymmetrized_top(int dim, const std::vector<Eigen::VectorXd>& one_forms,
                           const std::vector<Eigen::MatrixXd>& two_forms);

}  // namespace cmm
