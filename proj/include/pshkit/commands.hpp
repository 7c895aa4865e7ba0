#pragma once

// Domain configuration and the command pipelines behind the CLI. The CLI
// binary only parses flags and calls these.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pshkit/sampling.hpp"
#include "pshkit/verify.hpp"

namespace pshkit {

struct Tolerances {
  double boundary_tol = 1e-10;
  double tau_weak = 1e-8;
  /// Tolerance of the main-estimate margins.
  double psd_tol = 1e-9;
  /// Strict plurisubharmonicity floor for the exhaustion checks.
  double floor = 1e-8;
};

struct SamplingConfig {
  std::size_t n_boundary = 1000;
  std::vector<double> depths{1e-4, 3.1622776601683794e-4, 1e-3, 3.1622776601683794e-3, 1e-2};
  std::uint64_t seed = 1;
};

struct ParamsConfig {
  double epsilon = 0.1;
  double K = 1.0;
  std::optional<double> C;
  std::optional<double> eta;
};

struct DomainConfig {
  std::string name;
  std::string rho;
  Box box;
  Tolerances tolerances;
  SamplingConfig sampling;
  ParamsConfig params;
  /// Interior exponent grid; empty means the default grid.
  std::vector<double> eta_grid;

  /// Throws ConfigError (or ParseError for the expression) if invalid.
  void validate() const;
};

/// Reads a config document. Only "rho" and "box" are required:
///
///   {"name": "...", "rho": "<expr>", "box": [[lo,hi],[lo,hi],[lo,hi],[lo,hi]],
///    "tolerances": {"boundary_tol", "tau_weak", "psd_tol", "floor"},
///    "sampling": {"n_boundary", "depths", "seed"},
///    "params": {"epsilon", "K", "C", "eta"},
///    "eta_grid": [...]}
DomainConfig parse_config(const nlohmann::json& doc);
DomainConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const DomainConfig& cfg);

/// "ball", "example-2-3", "example-2-3-fixed".
std::vector<std::string> fixture_names();
/// Throws ConfigError for an unknown name.
DomainConfig fixture(const std::string& name);

/// Command-line values; each one set replaces the config field.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<double> eta;
  std::optional<double> C;
  std::optional<double> K;
  std::optional<std::size_t> n_boundary;
};

void apply(DomainConfig& cfg, const Overrides& o);

struct CommandResult {
  /// 0 pass, 1 verification failure, 2 input/config error.
  int exit_code = 0;
  nlohmann::json report;
  /// One-paragraph human-readable summary.
  std::string summary;
};

/// Each command writes report.json (and CSV tables) into out_dir when it is
/// non-empty. Library errors are mapped to exit codes, never rethrown.
CommandResult cmd_classify(const DomainConfig& cfg, const std::filesystem::path& out_dir = {});
CommandResult cmd_verify(const DomainConfig& cfg, const std::filesystem::path& out_dir = {});
CommandResult cmd_df_exponent(const DomainConfig& cfg, const std::filesystem::path& out_dir = {});

struct SelftestOptions {
  /// Replace every fixture ρ by -ρ; the suite is then expected to fail.
  bool flip_sign = false;
  std::size_t n_boundary = 200;
  std::uint64_t seed = 1;
};

CommandResult cmd_selftest(const SelftestOptions& opts = {});

/// Copy of a report with every "wall_time" member removed, for comparisons.
nlohmann::json strip_wall_time(nlohmann::json j);

}  // namespace pshkit
