#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "specdet/errors.hpp"

namespace specdet::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw UsageError("malformed number for '" + key + "': '" + text + "'");
  return v;
}

double parse_positive(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (!(v > 0.0)) throw UsageError("'" + key + "' must be positive, got " + text);
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v < 0.0 || v != std::floor(v) || v > 1e7) throw UsageError("'" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw UsageError("malformed boolean for '" + key + "': '" + text + "'");
}

BoundaryCondition parse_alpha(const std::string& key, const std::string& text) {
  const double a = parse_double(key, text);
  if (!(a >= 0.0 && a < kPi)) throw UsageError("'" + key + "' must lie in [0, pi), got " + text);
  return BoundaryCondition(a);
}

OutputFormat parse_format(const std::string& text) {
  const std::string t = trim(text);
  if (t == "json") return OutputFormat::Json;
  if (t == "csv") return OutputFormat::Csv;
  if (t == "human") return OutputFormat::Human;
  throw UsageError("format must be json, csv or human, got '" + text + "'");
}

std::vector<int> parse_criteria(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = parse_double("criteria", item);
    if (v != std::floor(v) || v < 1.0) throw UsageError("criteria are positive integers");
    ids.push_back(static_cast<int>(v));
  }
  return ids;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& known_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"potential", "linear | power | quadratic"},
      {"c", "coefficient of the power potential c x^p"},
      {"p", "exponent of the power potential"},
      {"x0", "hypothesis point and normalization point"},
      {"C0", "lower-bound constant of the hypothesis"},
      {"eps0", "exponent margin of the hypothesis"},
      {"alpha", "boundary angle in [0, pi)"},
      {"alpha2", "second boundary angle for two-condition traces"},
      {"z", "spectral parameter re,im"},
      {"z0", "reference spectral parameter re,im"},
      {"grid", "z values separated by ';' (each re or re,im)"},
      {"count", "number of eigenvalues"},
      {"eigenvalues", "eigenvalues used by the spectral route (0 skips it)"},
      {"green", "evaluate the Green's-function route for traces"},
      {"oracle", "compare eigenvalues against the truncated-interval oracle"},
      {"oracle_length", "interval length of the oracle"},
      {"rel_tol", "integrator relative tolerance"},
      {"abs_tol", "integrator absolute tolerance"},
      {"threshold", "residual threshold deciding the exit code"},
      {"points", "grid points for validate"},
      {"x_max_factor", "validate grid end as a multiple of x0"},
      {"criteria", "comma-separated acceptance criteria to run"},
      {"output", "payload path (default stdout)"},
      {"trajectory", "CSV path for the decaying solution at z"},
      {"format", "json | csv | human"},
  };
  return keys;
}

cplx parse_complex(const std::string& text) {
  const std::string t = trim(text);
  const auto comma = t.find(',');
  if (comma == std::string::npos) return {parse_double("complex", t), 0.0};
  if (t.find(',', comma + 1) != std::string::npos) throw UsageError("malformed complex number '" + text + "'");
  return {parse_double("complex", t.substr(0, comma)), parse_double("complex", t.substr(comma + 1))};
}

std::vector<cplx> parse_grid(const std::string& text) {
  std::vector<cplx> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_complex(item));
  }
  if (out.empty()) throw UsageError("grid is empty");
  return out;
}

Settings read_config_text(const std::string& text, const std::string& origin) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.first == key; }))
      throw UsageError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw UsageError(where + ": empty value for '" + key + "'");
    if (!out.emplace(key, value).second) throw UsageError(where + ": repeated key '" + key + "'");
  }
  return out;
}

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return read_config_text(buffer.str(), path);
}

RunConfig resolve_config(const Settings& file, const Settings& flags, std::ostream& log) {
  Settings merged = file;
  for (const auto& [key, value] : flags) {
    const auto it = merged.find(key);
    if (it != merged.end() && it->second != value)
      log << "specdet: --" << key << " " << value << " overrides config value " << it->second << "\n";
    merged[key] = value;
  }
  const auto& keys = known_keys();
  for (const auto& [key, value] : merged) {
    if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.first == key; }))
      throw UsageError("unknown key '" + key + "'");
  }
  auto get = [&](const char* key) -> const std::string* {
    const auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  if (auto v = get("potential")) {
    const std::string kind = trim(*v);
    if (kind != "linear" && kind != "power" && kind != "quadratic")
      throw UsageError("potential must be linear, power or quadratic, got '" + *v + "'");
    cfg.potential.kind = kind;
  }
  if (cfg.potential.kind == "quadratic") cfg.potential.p = 2.0;
  const bool power = cfg.potential.kind == "power";
  if (auto v = get("c")) {
    if (!power) throw UsageError("--c only applies to --potential power");
    cfg.potential.c = parse_positive("c", *v);
  }
  if (auto v = get("p")) {
    if (!power) throw UsageError("--p only applies to --potential power");
    cfg.potential.p = parse_positive("p", *v);
  }
  if (auto v = get("x0")) cfg.potential.x0 = parse_positive("x0", *v);
  if (auto v = get("C0")) cfg.potential.C0 = parse_positive("C0", *v);
  if (auto v = get("eps0")) cfg.potential.eps0 = parse_positive("eps0", *v);

  if (auto v = get("alpha")) cfg.alpha = parse_alpha("alpha", *v);
  if (auto v = get("alpha2")) cfg.alpha2 = parse_alpha("alpha2", *v);
  if (auto v = get("z")) cfg.z = parse_complex(*v);
  if (auto v = get("z0")) cfg.z0 = parse_complex(*v);
  if (auto v = get("grid")) cfg.grid = parse_grid(*v);
  if (auto v = get("count")) cfg.count = parse_count("count", *v);
  if (auto v = get("eigenvalues")) cfg.eigenvalues = parse_count("eigenvalues", *v);
  if (auto v = get("green")) cfg.green = parse_bool("green", *v);
  if (auto v = get("oracle")) cfg.oracle = parse_bool("oracle", *v);
  if (auto v = get("oracle_length")) cfg.oracle_length = parse_positive("oracle_length", *v);
  if (auto v = get("rel_tol")) cfg.rel_tol = parse_positive("rel_tol", *v);
  if (auto v = get("abs_tol")) cfg.abs_tol = parse_positive("abs_tol", *v);
  if (auto v = get("threshold")) cfg.threshold = parse_positive("threshold", *v);
  if (auto v = get("points")) cfg.points = parse_count("points", *v);
  if (auto v = get("x_max_factor")) cfg.x_max_factor = parse_positive("x_max_factor", *v);
  if (auto v = get("criteria")) cfg.criteria = parse_criteria(*v);
  if (auto v = get("output")) cfg.output = trim(*v);
  if (auto v = get("trajectory")) cfg.trajectory = trim(*v);
  if (auto v = get("format")) cfg.format = parse_format(*v);

  if (cfg.count == 0) throw UsageError("count must be at least 1");
  if (cfg.points < 16) throw UsageError("points must be at least 16");
  if (cfg.x_max_factor <= 1.0) throw UsageError("x_max_factor must exceed 1");
  return cfg;
}

Potential make_potential(const PotentialSpec& spec) {
  const Potential base = spec.kind == "linear"      ? Potential::linear()
                         : spec.kind == "quadratic" ? Potential::quadratic()
                                                    : Potential::power_law(spec.c, spec.p);
  if (!spec.x0 && !spec.C0 && !spec.eps0) return base;
  HypothesisConstants k = base.constants();
  if (spec.x0) k.x0 = *spec.x0;
  if (spec.C0) k.C0 = *spec.C0;
  if (spec.eps0) k.eps0 = *spec.eps0;
  if (spec.kind == "linear") return Potential::linear(k);
  if (spec.kind == "quadratic") return Potential::quadratic(k);
  return Potential::power_law(spec.c, spec.p, k);
}

}  // namespace specdet::cli
