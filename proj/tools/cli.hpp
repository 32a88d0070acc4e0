#pragma once

#include <filesystem>
#include <string>

#include "evoeq/serialize.hpp"

namespace evoeq::cli {

struct Options {
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  long long seed_override = -1;  // < 0 keeps the config seed
  int workers = 0;               // 0 resolves via EVOEQ_WORKERS, then 1
  std::string format = "json";   // json | csv (csv adds flat tables)
};

/// Validate `config` against the embedded schema; throws ConfigError with a
/// path-precise message on violation.
void validate_config(const Json& config);

/// The published schema text the binary validates against.
const std::string& config_schema_text();

/// Run one validated config. Returns 0 on success, 1 when a certificate or
/// pass-threshold fails (a machine-readable failure report is still
/// written). Throws ConfigError (exit 2 at the CLI surface) on bad input.
int run_config(const Json& config, const Options& options);

/// Full command-line entry: parse, validate, dispatch.
int run_cli(int argc, char** argv);

}  // namespace evoeq::cli
