#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmm/coupled_model.hpp"

namespace cmm {

struct FunctionalReport {
  std::string name;
  double value = 0.0;
  // Per-term contributions; they sum to value.
  std::vector<std::pair<std::string, double>> breakdown;
  std::map<std::string, double> diagnostics;
  // Sampled values along a path (t, M(t), M'(t)) when applicable.
  std::vector<std::array<double, 3>> samples;

  nlohmann::json to_json() const;
};

struct HolomorphicFieldData {
  Potentials h;
};

// ⟨R, h⟩ = Σ_i a_i ∫ h_i R_i with a₀ = 1, for validated holomorphic Hamiltonians.
FunctionalReport futaki(const CoupledModel& model, const Potentials& phi, const HolomorphicFieldData& xi);

// Σ_i ∫ |R_i/dV_i|² dV_i.
FunctionalReport calabi(const CoupledModel& model, const Potentials& phi);
double calabi_value(const CoupledResidual& r);

// dM at φ along a direction whose components are mean-zero for the current dV_i.
double mabuchi_increment(const CoupledModel& model, const Potentials& phi, const Potentials& direction);
// Same, without the gauge check, from an already evaluated residual.
double mabuchi_pairing(const CoupledModel& model, const CoupledResidual& at, const Potentials& direction);

enum class PathType { Generic, ToricGeodesic };

struct PotentialPath {
  std::vector<double> times;        // increasing, in [0, 1]
  std::vector<Potentials> samples;  // one tuple per time
  PathType type = PathType::Generic;

  static PotentialPath segment(const Potentials& a, const Potentials& b, PathType type);
  // Piecewise-linear through the given waypoints, uniform in t.
  static PotentialPath through(const std::vector<Potentials>& waypoints, PathType type = PathType::Generic);
};

// M along linear segments between consecutive samples, 5-point Gauss–Legendre
// per segment; the 3-point result supplies the discretization estimate.
FunctionalReport mabuchi_path(const CoupledModel& model, const PotentialPath& path);
// M(1) − M(0) along a single linear segment with a given Gauss order (1–5).
double mabuchi_segment(const CoupledModel& model, const Potentials& a, const Potentials& b, int order = 5);
// M relative to the zero tuple, along the straight segment.
double mabuchi_value(const CoupledModel& model, const Potentials& phi);

// Samples M at `samples` equally spaced times along an affine toric path and
// reports the minimum discrete second difference.
FunctionalReport geodesic_convexity_check(const CoupledModel& model, const PotentialPath& path, int samples = 33);

std::string mabuchi_csv(const FunctionalReport& r);

}  // namespace cmm
