#include "cmm/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cmm/errors.hpp"

namespace cmm {
namespace {

static_assert(std::endian::native == std::endian::little, "state files assume a little-endian host");

constexpr char kMagic[8] = {'C', 'M', 'M', 'S', 'T', 'A', 'T', 'E'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("state file truncated in header");
  return v;
}

}  // namespace

void write_state(std::ostream& out, const StateFile& s) {
  const std::uint64_t len = s.fields.empty() ? 0 : s.fields[0].size();
  for (const auto& f : s.fields)
    if (f.size() != len) throw DimensionError("state fields have different lengths");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kStateVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.backend));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.n));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.resolution));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.fields.size()));
  put<std::uint64_t>(out, len);
  for (const auto& f : s.fields) out.write(reinterpret_cast<const char*>(f.data()), len * sizeof(double));
  if (!out) throw IoError("failed to write state");
}

StateFile read_state(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("not a state file (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kStateVersion) throw IoError("unsupported state version " + std::to_string(version));
  StateFile s;
  const auto tag = get<std::uint32_t>(in);
  if (tag != 1 && tag != 2) throw IoError("unknown backend tag " + std::to_string(tag));
  s.backend = static_cast<Backend>(tag);
  s.n = static_cast<int>(get<std::uint32_t>(in));
  s.resolution = static_cast<int>(get<std::uint32_t>(in));
  const auto count = get<std::uint32_t>(in);
  const auto len = get<std::uint64_t>(in);
  if (count > 64 || len > (std::uint64_t{1} << 28)) throw IoError("implausible state dimensions");
  s.fields.assign(count, std::vector<double>(len));
  for (auto& f : s.fields)
    if (!in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(len * sizeof(double))))
      throw IoError("state file truncated in body");
  return s;
}

void write_state_file(const std::string& path, const StateFile& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_state(out, s);
}

StateFile read_state_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_state(in);
}

StateFile make_state(const CoupledModel& model, const Potentials& phi) {
  StateFile s;
  s.backend = model.backend();
  s.n = model.complex_dim();
  if (const auto* tm = dynamic_cast<const TorusModel*>(&model))
    s.resolution = tm->grid().N;
  else
    s.resolution = static_cast<int>(model.nodes());
  s.fields = phi;
  return s;
}

Potentials potentials_from_state(const CoupledModel& model, const StateFile& s) {
  const StateFile expect = make_state(model, model.zero());
  if (s.backend != expect.backend || s.n != expect.n || s.resolution != expect.resolution)
    throw DimensionError(std::string("state file is for ") + backend_name(s.backend) + " n=" + std::to_string(s.n) +
                         " resolution " + std::to_string(s.resolution) + ", model is " +
                         backend_name(expect.backend) + " n=" + std::to_string(expect.n) + " resolution " +
                         std::to_string(expect.resolution));
  if (static_cast<int>(s.fields.size()) != model.components())
    throw DimensionError("state file has " + std::to_string(s.fields.size()) + " fields, model has " +
                         std::to_string(model.components()) + " components");
  return s.fields;
}

std::string fields_csv(const CoupledModel& model, const std::vector<std::vector<double>>& fields,
                       const std::vector<std::string>& names) {
  if (fields.size() != names.size()) throw DimensionError("one name per CSV column required");
  std::ostringstream out;
  out << std::setprecision(17);
  const std::size_t n = model.nodes();
  const std::size_t coords = model.node_coordinates(0, 0).size();
  for (std::size_t c = 0; c < coords; ++c) out << (c ? "," : "") << "x" << c;
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (std::size_t node = 0; node < n; ++node) {
    const auto x = model.node_coordinates(0, node);
    for (std::size_t c = 0; c < x.size(); ++c) out << (c ? "," : "") << x[c];
    for (const auto& f : fields) {
      if (f.size() != n) throw DimensionError("CSV column length differs from the node count");
      out << ',' << f[node];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cmm
