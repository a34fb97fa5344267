#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kdecay/experiments.hpp"

namespace kdecay::cli {

enum class Command { eval, integrate, verify, sweep, report, list_families };

struct RadiusGrid {
  double lo = 10.0;
  double hi = 10000.0;
  double per_decade = 24.0;  ///< 0 for a single radius
};

struct CliConfig {
  Command command = Command::list_families;
  std::string family;
  std::vector<double> p{0.25};
  std::string radius_spec = "10:10000:24";
  RadiusGrid radii;
  std::optional<std::complex<double>> z;
  int order = 1;
  SweepMode mode = SweepMode::full;
  bool mode_given = false;
  double tol = 1e-12;  ///< kernel truncation tolerance for eval
  double abs_tol = 1e-13;
  double rel_tol = 1e-8;
  double eps = 0.5;
  std::string out_dir = "kdecay-out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool include_pole_radii = false;
  bool lnplus_unit_floor = false;
  bool svg = false;
  std::vector<std::string> argv;  ///< original invocation, recorded in the manifest
};

/// A rejected configuration: the key at fault and why.
struct ConfigError {
  std::string key;
  std::string message;
};

struct ParseOutcome {
  std::optional<CliConfig> config;
  std::optional<ConfigError> error;
  std::optional<int> exit_now;  ///< --help and similar
};

/// Flags, then an optional `--config` key=value file underneath them, then KERNEL_DECAY_OUT.
ParseOutcome parse(int argc, const char* const* argv, std::ostream& out);

/// Checks everything that can be checked before computing; fills derived fields.
std::optional<ConfigError> validate(CliConfig& config);

/// Runs a validated configuration. 0: success, 1: some inequality failed, 2: configuration error.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// parse + validate + run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdecay::cli
