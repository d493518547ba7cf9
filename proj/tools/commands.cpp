#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "cmm/errors.hpp"
#include "cmm/functionals.hpp"
#include "cmm/moment_maps.hpp"
#include "cmm/solvers.hpp"
#include "cmm/trig.hpp"

namespace cmm::cli {
namespace {

json envelope(const std::string& command, const std::string& kind, const json& cfg) {
  json j = {{"command", command}, {"version", version()}, {"config_digest", config_digest(cfg)}};
  if (!kind.empty()) j["kind"] = kind;
  return j;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<std::string> component_names(const std::string& stem, int k) {
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back(stem + std::to_string(i));
  return names;
}

std::vector<std::vector<double>> residual_scalars(const CoupledResidual& r) {
  std::vector<std::vector<double>> s;
  for (int i = 0; i < r.components(); ++i) s.push_back(r.scalar(i));
  return s;
}

TorusModel torus_pair(const json& cfg, int p) {
  const json& g = cfg.at("geometry");
  const auto classes = g.at("classes").get<std::vector<double>>();
  const int n = g.at("n").get<int>(), N = g.at("grid").get<int>();
  return TorusModel({TorusGeometry::flat(n, N, classes[0]), TorusGeometry::flat(n, N, classes[1])}, {p}, {1.0});
}

RunOutput eval_mu_p(const json& cfg, bool graph) {
  const int p = cfg.at("coupling").at("p")[0].get<int>();
  const TorusModel pair = torus_pair(cfg, p);
  const auto& X = pair.geometries()[0];
  const auto& Y = pair.geometries()[1];
  const DiffeoField f = build_map(X, cfg.at("map"));
  const MomentMapValue m = graph ? graph_mu_p(X, Y, f, p) : mu_p(X, Y, f, p);
  RunOutput out;
  out.report = moment_map_json(m);
  out.report["min_jacobian_determinant"] = f.min_jacobian_determinant();
  const Potentials phi = build_potentials(pair, cfg);
  ScalarField a(X.grid()), b(X.grid());
  a.values = phi[0];
  b.values = phi[1];
  for (auto* s : {&a, &b}) {
    const double mu = mean(*s);
    for (double& v : s->values) v -= mu;
  }
  // ψ lives on the target for μ_p and on the graph (pulled back to X) otherwise.
  out.report["pairing"] = graph ? graph_pairing(m, a, b) : moment_pairing(m, a, b);
  out.files.emplace_back("densities.csv",
                         fields_csv(pair, {m.x_density.values, m.y_density.values}, {"x_density", "y_density"}));
  return out;
}

RunOutput eval_ccsck(const json& cfg) {
  const auto model = build_model(cfg);
  const CoupledResidual r = model->evaluate(build_potentials(*model, cfg));
  RunOutput out;
  out.report = residual_json(r);
  out.files.emplace_back("residual.csv",
                         fields_csv(*model, residual_scalars(r), component_names("residual_", r.components())));
  return out;
}

RunOutput eval_kym(const json& cfg) {
  const auto model = build_model(cfg);
  const auto& tm = dynamic_cast<const TorusModel&>(*model);
  const auto fields = tm.fields(build_potentials(tm, cfg));
  const auto alpha = cfg.at("kym").at("alpha").get<std::vector<double>>();
  if (alpha.size() != 3) throw ConfigError("kym.alpha needs three entries (α₀, α₁, α₂)");
  const KymResidual k =
      kym_u1_residual(tm.geometries()[0], tm.geometries()[1], fields[0], fields[1], alpha[0], alpha[1], alpha[2]);
  RunOutput out;
  out.report = residual_json(k.residual);
  out.report["c"] = k.c;
  out.report["d"] = k.d;
  out.report["z"] = k.z;
  out.report["alpha1_relation"] = k.alpha1;
  out.files.emplace_back("residual.csv", fields_csv(*model, residual_scalars(k.residual),
                                                    component_names("residual_", k.residual.components())));
  return out;
}

RunOutput eval_dhym(const json& cfg) {
  const json& d = cfg.at("dhym");
  const int n = cfg.at("geometry").at("n").get<int>(), N = cfg.at("geometry").at("grid").get<int>();
  Rng rng(d.at("seed").get<std::uint64_t>());
  const Eigen::MatrixXcd w = random_hermitian(rng, n, d.at("spread").get<double>());
  Eigen::MatrixXcd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = std::complex<double>(rng.normal(), rng.normal());
  const Eigen::MatrixXcd a = d.at("alpha_scale").get<double>() * (r + r.adjoint());
  const std::complex<double> det = Eigen::MatrixXcd(w + std::complex<double>(0, 1) * a).determinant();
  const double theta = d.at("angle") == "oracle" ? -std::arg(det) : d.at("theta").get<double>();

  const TorusGeometry geom(n, N, w);
  const TorusGrid& grid = geom.grid();
  HermitianField omega = constant_metric(grid, w), alpha = constant_metric(grid, a);
  // Potentials perturb both forms: ω + 2∂∂̄φ₀ and α + 2∂∂̄φ₁.
  const Potentials phi = build_potentials(torus_pair(cfg, 0), cfg);
  for (int c = 0; c < 2; ++c) {
    ScalarField f(grid);
    f.values = phi[c];
    const HermitianField h = ddbar(f);
    auto& target = c == 0 ? omega : alpha;
    for (std::size_t k = 0; k < target.entries.size(); ++k) target.entries[k] += 2.0 * h.entries[k];
  }
  const DhymParts parts = dhym_residual({omega, alpha, theta});
  RunOutput out;
  out.report = {{"theta", theta},
                {"imaginary_sup", sup_abs(parts.imaginary.values)},
                {"real_sup", sup_abs(parts.real_part.values)},
                {"relative_residual", sup_abs(parts.imaginary.values) / sup_abs(parts.real_part.values)},
                {"real_min", *std::min_element(parts.real_part.values.begin(), parts.real_part.values.end())}};
  out.files.emplace_back("dhym.csv", fields_csv(torus_pair(cfg, 0), {parts.imaginary.values, parts.real_part.values},
                                                {"imaginary", "real"}));
  return out;
}

RunOutput eval_futaki(const json& cfg) {
  const auto model = build_model(cfg);
  Potentials h;
  if (const auto* toric = dynamic_cast<const ToricModel*>(model.get())) {
    h = toric->rotation_field(cfg.at("field").at("slope").get<double>());
  } else {
    h = model->zero();
    for (auto& c : h) std::fill(c.begin(), c.end(), cfg.at("field").at("slope").get<double>());
  }
  RunOutput out;
  out.report = futaki(*model, build_potentials(*model, cfg), HolomorphicFieldData{h}).to_json();
  return out;
}

RunOutput eval_calabi(const json& cfg) {
  const auto model = build_model(cfg);
  RunOutput out;
  out.report = calabi(*model, build_potentials(*model, cfg)).to_json();
  return out;
}

RunOutput eval_mabuchi(const json& cfg) {
  const auto model = build_model(cfg);
  const Potentials phi = build_potentials(*model, cfg);
  const bool geodesic = cfg.at("path").at("type") == "toric-geodesic";
  const PotentialPath path = PotentialPath::segment(model->zero(), phi, geodesic ? PathType::ToricGeodesic : PathType::Generic);
  const FunctionalReport m = mabuchi_path(*model, path);
  RunOutput out;
  out.report = m.to_json();
  if (geodesic) {
    const FunctionalReport conv = geodesic_convexity_check(*model, path, cfg.at("path").at("samples").get<int>());
    out.report["convexity"] = conv.to_json();
    out.files.emplace_back("convexity.csv", mabuchi_csv(conv));
  }
  out.files.emplace_back("mabuchi.csv", mabuchi_csv(m));
  return out;
}

std::string history_csv(const SolveState& s) {
  std::ostringstream out;
  out << std::setprecision(17) << "iteration,kind,step,calabi,mabuchi";
  const std::size_t k = s.history.empty() ? 0 : s.history.front().l2.size();
  for (std::size_t i = 0; i < k; ++i) out << ",l2_" << i;
  for (std::size_t i = 0; i < k; ++i) out << ",linf_" << i;
  out << '\n';
  for (const auto& r : s.history) {
    out << r.iteration << ',' << r.kind << ',' << r.step << ',' << r.calabi << ',' << r.mabuchi;
    for (double v : r.l2) out << ',' << v;
    for (double v : r.linf) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

std::string state_bytes(const StateFile& s) {
  std::ostringstream out(std::ios::binary);
  write_state(out, s);
  return out.str();
}

}  // namespace

RunOutput run_eval(const std::string& kind, const json& cfg) {
  RunOutput out;
  if (kind == "mu-p") out = eval_mu_p(cfg, false);
  else if (kind == "graph") out = eval_mu_p(cfg, true);
  else if (kind == "ccsck") out = eval_ccsck(cfg);
  else if (kind == "kym") out = eval_kym(cfg);
  else if (kind == "dhym") out = eval_dhym(cfg);
  else if (kind == "futaki") out = eval_futaki(cfg);
  else if (kind == "calabi") out = eval_calabi(cfg);
  else if (kind == "mabuchi") out = eval_mabuchi(cfg);
  else throw UsageError("unknown eval kind '" + kind + "'");
  json report = envelope("eval", kind, cfg);
  report["result"] = std::move(out.report);
  out.report = std::move(report);
  return out;
}

RunOutput run_solve(const json& cfg) {
  const auto model = build_model(cfg);
  SolveConfig sc = solve_config_from_json(cfg.at("solver"));
  sc.seed = cfg.at("potentials").at("seed").get<std::uint64_t>();
  sc.throw_on_failure = false;
  const SolveState s = solve(*model, build_potentials(*model, cfg), sc);

  RunOutput out;
  out.report = envelope("solve", "", cfg);
  json r = {{"status", status_name(s.status)}, {"iterations", s.iteration},   {"gauge_fixed", s.gauge_fixed},
            {"residual_linf", s.max_linf()},   {"calabi", s.calabi()},        {"history_records", s.history.size()}};
  if (!s.history.empty()) r["mabuchi"] = s.history.back().mabuchi;
  if (s.status != SolveStatus::NotKahler) {
    r["residual"] = residual_json(model->evaluate(s.potentials));
    // Distance to the reference metric of each class, after gauge fixing.
    const Potentials g = model->fix_gauge(s.potentials);
    json dist = json::array();
    for (int i = 0; i < model->components(); ++i) {
      if (const auto* toric = dynamic_cast<const ToricModel*>(model.get()))
        dist.push_back(sup_abs(toric->potential_deviation(s.potentials, i)));
      else
        dist.push_back(sup_abs(g[i]));
    }
    r["distance_to_reference"] = dist;
  }
  out.report["result"] = std::move(r);
  out.files.emplace_back("history.csv", history_csv(s));
  out.files.emplace_back("state.bin", state_bytes(make_state(*model, s.potentials)));
  out.exit_code = s.status == SolveStatus::Converged ? kOk : s.status == SolveStatus::NotKahler ? kNotKahler : kDiverged;
  return out;
}

RunOutput run_verify(const std::string& suite, const json& overrides) {
  const SuiteReport rep = run_suite(suite, overrides);
  RunOutput out;
  out.report = rep.to_json();
  out.exit_code = rep.passed() ? kOk : kAssertion;
  return out;
}

void write_run_directory(const std::string& dir, const json& config, const RunOutput& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw IoError("cannot write " + (fs::path(dir) / name).string());
    f << body;
  };
  put("config.json", dump_json(config));
  put("report.json", dump_json(out.report));
  for (const auto& [name, body] : out.files) put(name, body);
}

int main(int argc, char** argv) {
  CLI::App app{"Coupled moment-map laboratory"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, target;
  std::uint64_t seed = 0;
  int grid = 0;
  std::vector<int> p;
  double tolerance = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "run directory (report JSON goes to stdout when omitted)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--grid", grid, "grid resolution");
    sub->add_option("--p", p, "coupling powers, comma separated")->delimiter(',');
    sub->add_option("--tolerance", tolerance, "main tolerance");
  };
  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  verify->add_option("suite", target, "suite name")->required();
  add_common(verify);
  auto* eval = app.add_subcommand("eval", "evaluate a moment map or functional");
  eval->add_option("kind", target, "mu-p | ccsck | kym | dhym | graph | futaki | calabi | mabuchi")->required();
  add_common(eval);
  auto* solve_cmd = app.add_subcommand("solve", "solve a coupled system");
  add_common(solve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  FlagOverrides flags;
  if (sub->count("--seed")) flags.seed = seed;
  if (sub->count("--grid")) flags.grid = grid;
  if (sub->count("--p")) flags.p = p;
  if (sub->count("--tolerance")) flags.tolerance = tolerance;

  try {
    const json file = config_path.empty() ? json::object() : load_config_file(config_path);
    json cfg;
    RunOutput out;
    if (sub == verify) {
      if (!is_suite(target)) throw UsageError("unknown suite '" + target + "'");
      cfg = merge_config(default_suite_config(target), file);
      apply_flag_overrides(target, cfg, flags);
      out = run_verify(target, cfg);
      for (const auto& c : out.report.at("checks"))
        std::cerr << (c.at("passed").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << ' '
                  << c.at("measured").get<double>() << " / " << c.at("tolerance").get<double>() << '\n';
    } else if (sub == eval) {
      cfg = resolve_run_config("eval", target, file, flags);
      out = run_eval(target, cfg);
    } else {
      cfg = resolve_run_config("solve", "", file, flags);
      out = run_solve(cfg);
      std::cerr << "solve: " << out.report["result"]["status"].get<std::string>() << " after "
                << out.report["result"]["iterations"].get<int>() << " iterations\n";
    }
    if (out_dir.empty())
      std::cout << dump_json(out.report);
    else
      write_run_directory(out_dir, cfg, out);
    return out.exit_code;
  } catch (const PositivityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotKahler;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace cmm::cli
