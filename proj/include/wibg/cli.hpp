#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wibg/potential.hpp"

namespace wibg {

/// Bad or missing configuration value; `key` names the offending field.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

struct PotentialSection {
  PotentialFamily family = PotentialFamily::gaussian;
  double lambda0 = 0.0;
  double shape = 1.0;
};

struct PhysicsSection {
  std::optional<double> beta;
  std::optional<double> mu;
  std::optional<double> rho;
  bool rho_midpoint = false;
  std::vector<double> alpha{-1.0};
  std::vector<double> x{0.0};
  double mu_min = -1.0;
  double mu_max = 1.0;
  int mu_points = 81;
  std::optional<double> rho_min;
  std::optional<double> rho_max;
  int rho_points = 200;
  std::optional<double> gamma;
};

struct NumericsSection {
  double rel_tol = 1e-12;
  double zero_tol = 1e-8;
  int nx = 128;
  int ny = 128;
  int grid_n = 512;
  std::vector<double> volumes{1e2, 1e3, 1e4, 1e5};
  std::vector<double> box_sides{8.0, 16.0, 32.0, 64.0};
  double k_cutoff = 0.0;
};

struct OutputSection {
  std::string format = "csv";
  std::string path = "-";
  bool deterministic = false;
  std::string schema_dir;
};

struct RunConfig {
  std::string subcommand;
  PotentialSection potential;
  PhysicsSection physics;
  NumericsSection numerics;
  OutputSection output;
  /// Every key with its resolved text value, in declaration order.
  std::vector<std::pair<std::string, std::string>> resolved;

  PotentialModel model() const;
};

/// Parses command line plus optional --config file; throws ConfigError or CLI11 parse errors.
RunConfig parse_run_config(int argc, const char* const* argv);

/// Runs one subcommand. Exit status: 0 success, 2 config error, 3 numeric failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 17 significant digits, '.' decimal separator.
std::string format_number(double v);

/// Column names, units and descriptions of a subcommand's output, as JSON text.
std::string schema_json(const std::string& subcommand);

/// Subcommand names in help order.
const std::vector<std::string>& subcommands();

}  // namespace wibg
