#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specdet/boundary_condition.hpp"
#include "specdet/numeric.hpp"
#include "specdet/potential.hpp"

namespace specdet::cli {

enum class OutputFormat { Json, Csv, Human };

enum ExitCode : int { kPass = 0, kResidualFail = 1, kUsage = 2, kNumerical = 3 };

struct PotentialSpec {
  std::string kind = "linear";  // linear | power | quadratic
  double c = 1.0;
  double p = 1.0;
  // Unset constants keep the potential's own defaults.
  std::optional<double> x0, C0, eps0;
};

struct RunConfig {
  PotentialSpec potential;
  BoundaryCondition alpha;
  std::optional<BoundaryCondition> alpha2;
  cplx z{-1.0, 0.0};
  cplx z0{0.0, 0.0};
  std::vector<cplx> grid;
  std::size_t count = 5;
  std::size_t eigenvalues = 0;  // spectral route size for trace/det2; 0 skips it
  bool green = true;
  bool oracle = true;
  std::optional<double> oracle_length;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  std::optional<double> threshold;  // overrides the per-command residual threshold
  std::size_t points = 512;
  double x_max_factor = 1e4;
  std::vector<int> criteria;
  std::string output;      // empty: stdout
  std::string trajectory;  // CSV path for the decaying solution at z
  OutputFormat format = OutputFormat::Human;
};

/// Raw `key = value` settings, keyed by the long flag name without dashes.
using Settings = std::map<std::string, std::string>;

/// Every key accepted in a config file or as a flag, with a one-line description.
const std::vector<std::pair<std::string, std::string>>& known_keys();

/// Parses `key = value` lines; `#` starts a comment. Throws UsageError for a missing file,
/// a malformed line, a repeated key or an unknown key.
Settings read_config_text(const std::string& text, const std::string& origin = "config");
Settings read_config_file(const std::string& path);

/// Applies defaults, then the file, then the flags. Every flag that replaces a file value is
/// reported on `log`. Throws UsageError on malformed or conflicting values.
RunConfig resolve_config(const Settings& file, const Settings& flags, std::ostream& log);

cplx parse_complex(const std::string& text);
std::vector<cplx> parse_grid(const std::string& text);

Potential make_potential(const PotentialSpec& spec);

/// Runs one subcommand. The payload goes to `out` in the configured format, tables and
/// diagnostics to `err`. Exceptions propagate.
int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err);

/// Machine-readable error object for an exception escaping run_command, and its exit code.
std::string error_json(const std::exception& e, int& exit_code);

}  // namespace specdet::cli
