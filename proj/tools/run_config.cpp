#include <algorithm>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "cmm/errors.hpp"
#include "cmm/trig.hpp"

namespace cmm::cli {
namespace {

json base_config() {
  return {{"geometry", {{"backend", "torus"}, {"n", 1}, {"grid", 32}, {"classes", {1.0, 1.0}}}},
          {"coupling", {{"p", {0}}, {"weights", {1.0}}, {"self_term", false}}},
          {"potentials", {{"kind", "random"}, {"seed", 1}, {"amplitude", 0.05}, {"band", 2}, {"path", ""}}}};
}

json map_defaults() {
  return {{"kind", "flow"}, {"seed", 1}, {"amplitude", 0.1}, {"band", 2}, {"t", 0.3}, {"steps", 8}};
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

template <class T>
std::vector<T> list_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("config key '" + where + "' expects an array");
  std::vector<T> out;
  for (const auto& v : j) {
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("config key '" + where + "' expects integers");
    } else {
      if (!v.is_number()) throw ConfigError("config key '" + where + "' expects numbers");
    }
    out.push_back(v.get<T>());
  }
  return out;
}

void validate(const std::string& command, const std::string& kind, const json& cfg) {
  const json& g = cfg.at("geometry");
  const std::string backend = g.at("backend").get<std::string>();
  if (backend != "torus" && backend != "cp1") throw ConfigError("geometry.backend must be 'torus' or 'cp1'");
  const int n = g.at("n").get<int>(), grid = g.at("grid").get<int>();
  if (backend == "torus") {
    if (n < 1 || n > 3) throw ConfigError("geometry.n must be 1, 2 or 3 on the torus");
    if (grid < 16 || !is_power_of_two(grid)) throw ConfigError("geometry.grid must be a power of two ≥ 16");
  } else {
    if (n != 1) throw ConfigError("geometry.n must be 1 for cp1");
    if (grid < 64) throw ConfigError("geometry.grid (Chebyshev nodes) must be ≥ 64 for cp1");
  }
  const auto classes = list_of<double>(g.at("classes"), "geometry.classes");
  for (double c : classes)
    if (!(c > 0.0)) throw ConfigError("geometry.classes must be positive");
  const auto p = list_of<int>(cfg.at("coupling").at("p"), "coupling.p");
  const auto w = list_of<double>(cfg.at("coupling").at("weights"), "coupling.weights");
  if (p.empty()) throw ConfigError("coupling.p needs at least one entry");
  if (w.size() != p.size()) throw ConfigError("coupling.weights must have one entry per coupling.p entry");
  if (classes.size() != p.size() + 1) throw ConfigError("geometry.classes must have len(coupling.p) + 1 entries");
  for (int pi : p)
    if (pi < 0 || pi >= n) throw ConfigError("coupling.p entries must lie in [0, n−1]");

  const json& pot = cfg.at("potentials");
  const std::string pk = pot.at("kind").get<std::string>();
  if (pk != "zero" && pk != "random" && pk != "file") throw ConfigError("potentials.kind must be zero, random or file");
  if (pk == "file" && pot.at("path").get<std::string>().empty()) throw ConfigError("potentials.path is required");
  if (pot.at("band").get<int>() < 1) throw ConfigError("potentials.band must be ≥ 1");

  auto torus_only = [&] {
    if (backend != "torus") throw ConfigError("eval " + kind + " needs the torus backend");
  };
  if (command == "eval") {
    if (kind == "mu-p" || kind == "graph" || kind == "dhym" || kind == "kym") torus_only();
    if (kind == "kym" && n < 2) throw ConfigError("eval kym needs n ≥ 2");
    if (kind == "kym" && classes.size() != 2) throw ConfigError("eval kym needs exactly two classes");
    if (cfg.contains("map")) {
      const std::string mk = cfg.at("map").at("kind").get<std::string>();
      if (mk != "identity" && mk != "flow" && mk != "displacement")
        throw ConfigError("map.kind must be identity, flow or displacement");
    }
    if (cfg.contains("path")) {
      const std::string t = cfg.at("path").at("type").get<std::string>();
      if (t != "generic" && t != "toric-geodesic") throw ConfigError("path.type must be generic or toric-geodesic");
    }
    if (cfg.contains("dhym")) {
      const std::string a = cfg.at("dhym").at("angle").get<std::string>();
      if (a != "oracle" && a != "fixed") throw ConfigError("dhym.angle must be oracle or fixed");
    }
  } else {
    solve_config_from_json(cfg.at("solver")).validate();
  }
}

}  // namespace

const std::vector<std::string>& eval_kinds() {
  static const std::vector<std::string> k = {"mu-p", "ccsck", "kym", "dhym", "graph", "futaki", "calabi", "mabuchi"};
  return k;
}

json default_run_config(const std::string& command, const std::string& kind) {
  json cfg = base_config();
  if (command == "solve") {
    cfg["solver"] = solve_config_to_json(SolveConfig{});
    return cfg;
  }
  if (command != "eval") throw UsageError("unknown command '" + command + "'");
  if (std::find(eval_kinds().begin(), eval_kinds().end(), kind) == eval_kinds().end())
    throw UsageError("unknown eval kind '" + kind + "'");
  if (kind == "mu-p" || kind == "graph") cfg["map"] = map_defaults();
  if (kind == "kym") {
    cfg["geometry"]["n"] = 2;
    cfg["geometry"]["grid"] = 16;
    cfg["kym"] = {{"alpha", {1.0, 1.0, 1.0}}};
  }
  if (kind == "dhym") {
    cfg["geometry"]["n"] = 2;
    cfg["geometry"]["grid"] = 16;
    cfg["potentials"]["kind"] = "zero";
    cfg["dhym"] = {{"seed", 1}, {"spread", 0.5}, {"alpha_scale", 0.75}, {"angle", "oracle"}, {"theta", 0.0}};
  }
  if (kind == "futaki") cfg["field"] = {{"slope", 1.0}};
  if (kind == "mabuchi") cfg["path"] = {{"type", "generic"}, {"samples", 33}};
  return cfg;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    json j = json::parse(buf.str());
    if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

json resolve_run_config(const std::string& command, const std::string& kind, const json& file_config,
                        const FlagOverrides& flags) {
  json cfg = merge_config(default_run_config(command, kind), file_config);
  if (flags.seed) {
    cfg["potentials"]["seed"] = *flags.seed;
    for (const char* s : {"map", "dhym"})
      if (cfg.contains(s)) cfg[s]["seed"] = *flags.seed;
  }
  if (flags.grid) cfg["geometry"]["grid"] = *flags.grid;
  if (flags.p) cfg["coupling"]["p"] = *flags.p;
  if (flags.tolerance) {
    if (command != "solve") throw UsageError("--tolerance applies to solve and verify only");
    cfg["solver"]["tolerance"] = *flags.tolerance;
  }
  validate(command, kind, cfg);
  return cfg;
}

std::unique_ptr<CoupledModel> build_model(const json& cfg) {
  const json& g = cfg.at("geometry");
  const auto classes = g.at("classes").get<std::vector<double>>();
  const auto p = cfg.at("coupling").at("p").get<std::vector<int>>();
  const auto w = cfg.at("coupling").at("weights").get<std::vector<double>>();
  const bool self = cfg.at("coupling").at("self_term").get<bool>();
  const int grid = g.at("grid").get<int>();
  if (g.at("backend") == "torus") {
    std::vector<TorusGeometry> geoms;
    for (double c : classes) geoms.push_back(TorusGeometry::flat(g.at("n").get<int>(), grid, c));
    return std::make_unique<TorusModel>(std::move(geoms), p, w, self);
  }
  std::vector<ToricCP1Geometry> geoms;
  for (double c : classes) geoms.emplace_back(c, grid);
  return std::make_unique<ToricModel>(std::move(geoms), p, w, self);
}

Potentials build_potentials(const CoupledModel& model, const json& cfg) {
  const json& pot = cfg.at("potentials");
  const std::string kind = pot.at("kind").get<std::string>();
  if (kind == "zero") return model.zero();
  if (kind == "file") return potentials_from_state(model, read_state_file(pot.at("path").get<std::string>()));
  return model.random(pot.at("seed").get<std::uint64_t>(), pot.at("amplitude").get<double>(),
                      pot.at("band").get<int>());
}

DiffeoField build_map(const TorusGeometry& geom, const json& map) {
  const std::string kind = map.at("kind").get<std::string>();
  const int dim = geom.grid().dim();
  const auto seed = map.at("seed").get<std::uint64_t>();
  const double amp = map.at("amplitude").get<double>();
  const int band = map.at("band").get<int>();
  if (kind == "identity") return DiffeoField::identity(geom.grid());
  if (kind == "displacement")
    return DiffeoField::displacement(geom.grid(), VectorTrigField::random(dim, seed, amp, band));
  return hamiltonian_flow(geom, TrigPoly::random(dim, seed, amp, band), map.at("t").get<double>(),
                          map.at("steps").get<int>());
}

}  // namespace cmm::cli
