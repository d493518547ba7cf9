#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmm/coupled_model.hpp"

namespace cmm {

// Flat binary layout, little-endian:
//   magic "CMMSTATE" | u32 version | u32 backend tag | u32 n | u32 resolution (N or M)
//   | u32 field count | u64 values per field | f64 values, row-major by field.
struct StateFile {
  Backend backend = Backend::Torus;
  int n = 1;
  int resolution = 0;
  std::vector<std::vector<double>> fields;
};

inline constexpr std::uint32_t kStateVersion = 1;

void write_state(std::ostream& out, const StateFile& s);
StateFile read_state(std::istream& in);  // IoError on a bad header or short body
void write_state_file(const std::string& path, const StateFile& s);
StateFile read_state_file(const std::string& path);

StateFile make_state(const CoupledModel& model, const Potentials& phi);
// Checks the header against the model and returns the fields (DimensionError on mismatch).
Potentials potentials_from_state(const CoupledModel& model, const StateFile& s);

// One row per node: the model coordinates followed by one column per field.
std::string fields_csv(const CoupledModel& model, const std::vector<std::vector<double>>& fields,
                       const std::vector<std::string>& names);

}  // namespace cmm
