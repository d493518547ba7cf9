#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cmm/coupled_model.hpp"

namespace cmm {

struct SolveConfig {
  int max_iterations = 200;
  // Flow step τ of the linearly implicit update (I/τ + J)δ = −R.
  double initial_step = 1e-2;
  double min_step = 1e-12;
  double max_step = 1e8;
  double tolerance = 1e-8;         // L∞ on residual scalars
  double newton_threshold = 1e-3;  // switch to Newton below this L∞
  std::uint64_t seed = 1;
  int max_rejections = 10;
  int gmres_restart = 40;
  int gmres_max_iterations = 400;
  double linear_tolerance = 1e-4;  // floor of the GMRES forcing term
  bool track_mabuchi = true;
  bool throw_on_failure = true;

  void validate() const;  // ConfigError
};

enum class SolveStatus { Running, Converged, Diverged, NotKahler };
const char* status_name(SolveStatus s);

struct IterationRecord {
  int iteration = 0;
  std::string kind;  // initial | flow | newton
  double step = 0.0;
  double calabi = 0.0;
  double mabuchi = 0.0;  // relative to the initial state
  std::vector<double> l2, linf;
};

struct SolveState {
  Potentials potentials;
  int iteration = 0;
  std::vector<IterationRecord> history;
  SolveStatus status = SolveStatus::Running;
  bool gauge_fixed = false;
  double step = 0.0;
  int rejections = 0;

  double calabi() const { return history.empty() ? 0.0 : history.back().calabi; }
  double max_linf() const;
};

// Fourier symbol of the linearization at the zero state (torus) and other
// per-model data reused across steps.
class SolverWorkspace {
 public:
  explicit SolverWorkspace(const CoupledModel& model);
  ~SolverWorkspace();
  struct Impl;
  Impl& impl() { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

SolveState initial_state(const CoupledModel& model, const Potentials& phi, const SolveConfig& config);

// One accepted linearly implicit flow step with backtracking on the Calabi value.
SolveState flow_step(const CoupledModel& model, const SolveState& state, const SolveConfig& config,
                     SolverWorkspace* ws = nullptr);
// One damped Newton step; requires a gauge-fixed state (GaugeNotFixedError).
SolveState newton_refine(const CoupledModel& model, const SolveState& state, const SolveConfig& config,
                         SolverWorkspace* ws = nullptr);
SolveState fix_automorphism_gauge(const CoupledModel& model, const SolveState& state);

SolveState solve(const CoupledModel& model, const Potentials& initial, const SolveConfig& config);

// Linearization of the residual scalars at phi applied to a direction, by
// centered differences.
Potentials apply_linearization(const CoupledModel& model, const Potentials& phi, const Potentials& dir);

}  // namespace cmm
