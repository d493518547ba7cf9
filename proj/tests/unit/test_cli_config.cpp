#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cli.hpp"
#include "cmm/errors.hpp"

using namespace cmm;
using namespace cmm::cli;

TEST(CliConfig, DefaultsResolveForEveryKind) {
  for (const auto& kind : eval_kinds()) EXPECT_NO_THROW(resolve_run_config("eval", kind, json::object(), {})) << kind;
  EXPECT_NO_THROW(resolve_run_config("solve", "", json::object(), {}));
  EXPECT_THROW(resolve_run_config("eval", "nope", json::object(), {}), UsageError);
}

TEST(CliConfig, SchemaViolationsAreConfigErrors) {
  const json bad[] = {
      {{"geometry", {{"grid", 24}}}},
      {{"geometry", {{"backend", "sphere"}}}},
      {{"geometry", {{"classes", {1.0, -1.0}}}}},
      {{"geometry", {{"classes", {1.0}}}}},
      {{"coupling", {{"p", {1}}}}},
      {{"coupling", {{"weights", {1.0, 2.0}}}}},
      {{"coupling", {{"p", {"a"}}}}},
      {{"potentials", {{"kind", "file"}}}},
      {{"unknown_section", 1}},
      {{"geometry", {{"grid", "32"}}}},
  };
  for (const auto& b : bad) EXPECT_THROW(resolve_run_config("eval", "ccsck", b, {}), ConfigError) << b.dump();
  EXPECT_THROW(resolve_run_config("eval", "mu-p", {{"geometry", {{"backend", "cp1"}, {"grid", 64}}}}, {}),
               ConfigError);
  EXPECT_THROW(resolve_run_config("eval", "futaki", {{"geometry", {{"backend", "cp1"}, {"grid", 32}}}}, {}),
               ConfigError);
}

TEST(CliConfig, FlagsOverrideFileValues) {
  FlagOverrides f;
  f.seed = 9;
  f.grid = 64;
  f.p = std::vector<int>{0};
  const json cfg = resolve_run_config("eval", "mu-p", {{"geometry", {{"grid", 16}}}}, f);
  EXPECT_EQ(cfg.at("geometry").at("grid"), 64);
  EXPECT_EQ(cfg.at("potentials").at("seed"), 9);
  EXPECT_EQ(cfg.at("map").at("seed"), 9);

  FlagOverrides t;
  t.tolerance = 1e-6;
  EXPECT_THROW(resolve_run_config("eval", "calabi", json::object(), t), UsageError);
  EXPECT_DOUBLE_EQ(resolve_run_config("solve", "", json::object(), t).at("solver").at("tolerance").get<double>(), 1e-6);
}

TEST(CliConfig, MalformedFileIsConfigError) {
  const auto path = std::filesystem::temp_directory_path() / "cmm_bad_config.json";
  {
    std::ofstream f(path);
    f << "{\"geometry\": ";
  }
  EXPECT_THROW(load_config_file(path.string()), ConfigError);
  {
    std::ofstream f(path);
    f << "[1, 2]";
  }
  EXPECT_THROW(load_config_file(path.string()), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config_file(path.string()), IoError);
}

TEST(CliConfig, SuiteFlagMapping) {
  json cfg = default_suite_config("moment-identity");
  FlagOverrides f;
  f.grid = 64;
  f.p = std::vector<int>{0};
  apply_flag_overrides("moment-identity", cfg, f);
  for (const auto& c : cfg.at("cases")) {
    EXPECT_EQ(c.at("p"), 0);
    if (c.at("n") == 1) {
      EXPECT_EQ(c.at("N"), 64);
    }
  }
  FlagOverrides g;
  g.p = std::vector<int>{7};
  json mi = default_suite_config("moment-identity");
  EXPECT_THROW(apply_flag_overrides("moment-identity", mi, g), UsageError);
  EXPECT_THROW(default_suite_config("nope"), UsageError);
  EXPECT_THROW(merge_config(default_suite_config("futaki"), {{"bogus", 1}}), ConfigError);
}

TEST(CliEval, DhymResidualAtOracleAngle) {
  const RunOutput out = run_eval("dhym", resolve_run_config("eval", "dhym", json::object(), {}));
  EXPECT_EQ(out.report.at("command"), "eval");
  EXPECT_EQ(out.report.at("kind"), "dhym");
  EXPECT_LT(out.report.at("result").at("relative_residual").get<double>(), 1e-12);
  EXPECT_GT(out.report.at("result").at("real_min").get<double>(), 0.0);
}

TEST(CliEval, FutakiVanishesOnEqualCp1Classes) {
  const json cfg = resolve_run_config("eval", "futaki", {{"geometry", {{"backend", "cp1"}, {"grid", 256}}}}, {});
  const RunOutput out = run_eval("futaki", cfg);
  EXPECT_LT(std::abs(out.report.at("result").at("value").get<double>()), 1e-8);
}

TEST(CliSolve, TorusDefaultConverges) {
  const RunOutput out = run_solve(resolve_run_config("solve", "", json::object(), {}));
  EXPECT_EQ(out.exit_code, kOk);
  EXPECT_EQ(out.report.at("result").at("status"), "converged");
  bool has_state = false;
  for (const auto& [name, body] : out.files) has_state |= name == "state.bin" && body.rfind("CMMSTATE", 0) == 0;
  EXPECT_TRUE(has_state);
}
