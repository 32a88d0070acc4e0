#include "cli.hpp"

#include <filesystem>
#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "evoeq/parallel.hpp"

using namespace evoeq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "evoeq_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config validation is path-precise") {
  CHECK_NOTHROW(cli::validate_config(
      Json{{"kind", "check"}, {"instances", 10}, {"max_dim", 8}}));
  CHECK_THROWS_WITH_AS(cli::validate_config(Json{{"kind", "nonsense"}}),
                       doctest::Contains("$.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(
      cli::validate_config(Json{{"kind", "check"}, {"instances", 0}}),
      doctest::Contains("$.instances"), ConfigError);
  CHECK_THROWS_WITH_AS(
      cli::validate_config(Json{{"kind", "homogenize"},
                                {"n_values", Json::array({2, 4})},
                                {"params", Json{{"alpha", -1.0}}}}),
      doctest::Contains("$.params.alpha"), ConfigError);
  CHECK_THROWS_WITH_AS(
      cli::validate_config(Json{{"kind", "homogenize"}}),
      doctest::Contains("n_values"), ConfigError);
  CHECK_THROWS_WITH_AS(
      cli::validate_config(Json{{"kind", "solve"},
                                {"model", "heat"},
                                {"time_grid", Json{{"dt", 0.0}}}}),
      doctest::Contains("$.time_grid.dt"), ConfigError);
}

TEST_CASE("the published schema parses and matches the validator") {
  const Json schema = Json::parse(cli::config_schema_text());
  CHECK(schema.contains("oneOf"));
  CHECK(schema.at("properties").at("kind").at("enum").size() == 6);
}

TEST_CASE("check subcommand emits a suite report") {
  cli::Options options;
  options.out_dir = fresh_dir("check");
  const Json config{{"kind", "check"}, {"seed", 1}, {"instances", 10},
                    {"max_dim", 6}};
  CHECK(cli::run_config(config, options) == 0);
  const Json report = Json::parse(slurp(options.out_dir / "check_report.json"));
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("suites").size() == 5);
  for (const auto& suite : report.at("suites")) {
    CHECK(suite.at("failures").get<int>() == 0);
    CHECK(suite.at("instances").get<int>() == 10);
  }
  CHECK(report.at("effective_config").at("seed").get<int>() == 1);
}

TEST_CASE("schur subcommand reproduces the worked example") {
  cli::Options options;
  options.out_dir = fresh_dir("schur");
  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  Json config{{"kind", "schur"}};
  config["operator"] = operator_to_json(m);
  config["split"] = Json::array({1, 1});
  CHECK(cli::run_config(config, options) == 0);
  const Json report = Json::parse(slurp(options.out_dir / "schur_report.json"));
  CHECK(report.at("alpha").at("a00").get<double>() == doctest::Approx(1.5));
  CHECK(report.at("alpha").at("a11").get<double>() == doctest::Approx(2.0));
  CHECK(report.at("quadruple").at("a").at("re")[0].get<double>() ==
        doctest::Approx(0.5));
  CHECK(report.at("roundtrip_residual").get<double>() < 1e-12);
}

TEST_CASE("solve subcommand writes metrics and the solution signal") {
  cli::Options options;
  options.out_dir = fresh_dir("solve");
  const Json config{{"kind", "solve"}, {"model", "skew2"}};
  CHECK(cli::run_config(config, options) == 0);
  const Json report = Json::parse(slurp(options.out_dir / "solve_report.json"));
  CHECK(report.at("metrics").at("residual_rel").get<double>() <= 1e-6);
  CHECK(report.at("metrics").at("causality_defect").get<double>() <= 1e-6);
  CHECK(fs::exists(options.out_dir / "solution.csv"));
  // Echoed effective config resolves every default.
  CHECK(report.at("effective_config").contains("time_grid"));
  CHECK(report.at("effective_config").contains("input"));
}

TEST_CASE("artifacts are byte-identical across worker counts") {
  const Json config{{"kind", "homogenize"},
                    {"model", "diffusion1d"},
                    {"params", Json{{"alpha", 1.0}, {"beta", 3.0},
                                    {"cells", 32}}},
                    {"n_values", Json::array({2, 4})},
                    {"time_grid", Json{{"dt", 0.25}, {"n_steps", 128}}},
                    {"probes", Json{{"seed", 42}, {"n_gauss", 4},
                                    {"basis_cap", 2}}},
                    {"thresholds", Json{{"final_freq_gap", 0.5},
                                        {"final_time_gap", 0.5}}}};
  cli::Options one;
  one.out_dir = fresh_dir("workers1");
  one.workers = 1;
  cli::Options four;
  four.out_dir = fresh_dir("workers4");
  four.workers = 4;
  CHECK(cli::run_config(config, one) == 0);
  CHECK(cli::run_config(config, four) == 0);
  CHECK(slurp(one.out_dir / "homogenize_report.json") ==
        slurp(four.out_dir / "homogenize_report.json"));
  // Repeated runs with the same options match byte for byte as well.
  cli::Options again;
  again.out_dir = fresh_dir("workers1-again");
  again.workers = 1;
  CHECK(cli::run_config(config, again) == 0);
  CHECK(slurp(one.out_dir / "homogenize_report.json") ==
        slurp(again.out_dir / "homogenize_report.json"));
}

TEST_CASE("csv format emits flat gap tables") {
  cli::Options options;
  options.out_dir = fresh_dir("csv");
  options.format = "csv";
  const Json config{{"kind", "homogenize"},
                    {"model", "diffusion1d"},
                    {"params", Json{{"alpha", 1.0}, {"beta", 3.0},
                                    {"cells", 16}}},
                    {"n_values", Json::array({2, 4})},
                    {"time_grid", Json{{"dt", 0.25}, {"n_steps", 128}}},
                    {"probes", Json{{"seed", 42}, {"n_gauss", 2},
                                    {"basis_cap", 1}}},
                    {"thresholds", Json{{"final_freq_gap", 0.5},
                                        {"final_time_gap", 0.5}}}};
  CHECK(cli::run_config(config, options) == 0);
  const std::string csv = slurp(options.out_dir / "homogenize_gaps.csv");
  CHECK(csv.rfind("kind,n,z_re,z_im,gap\n", 0) == 0);
  CHECK(csv.find("\nfreq,") != std::string::npos);
  CHECK(csv.find("\ntime,") != std::string::npos);
}

TEST_CASE("worker count falls back to the environment variable") {
  setenv("EVOEQ_WORKERS", "3", 1);
  CHECK(resolve_workers(0) == 3);
  CHECK(resolve_workers(2) == 2);  // explicit flag wins
  unsetenv("EVOEQ_WORKERS");
  CHECK(resolve_workers(0) == 1);
}

TEST_CASE("numerical failures exit with a machine-readable report") {
  cli::Options options;
  options.out_dir = fresh_dir("failure");
  // Coefficient far above the certified range: thresholds cannot hold.
  const Json config{{"kind", "homogenize"},
                    {"model", "diffusion1d"},
                    {"params", Json{{"alpha", 1.0}, {"beta", 3.0},
                                    {"cells", 16}}},
                    {"n_values", Json::array({2, 4})},
                    {"time_grid", Json{{"dt", 0.25}, {"n_steps", 128}}},
                    {"probes", Json{{"seed", 42}, {"n_gauss", 2},
                                    {"basis_cap", 1}}},
                    {"thresholds", Json{{"final_freq_gap", 1e-12},
                                        {"final_time_gap", 1e-12}}}};
  CHECK(cli::run_config(config, options) == 1);
  const Json report =
      Json::parse(slurp(options.out_dir / "homogenize_report.json"));
  CHECK_FALSE(report.at("report").at("pass").get<bool>());
}
