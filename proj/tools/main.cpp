#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "specdet/errors.hpp"

namespace {

struct Command {
  std::string name;
  std::string description;
};

const Command kCommands[] = {
    {"validate", "audit the confinement hypothesis for a potential"},
    {"eig", "eigenvalues with polish residuals and an oracle comparison"},
    {"trace", "trace of a resolvent difference by three routes"},
    {"det2", "2-modified determinant in closed form and as a spectral product"},
    {"airy-verify", "numerical results against the Airy closed forms"},
    {"accept", "run the acceptance suite"},
};

int fail(const std::exception& e) {
  int code = specdet::cli::kUsage;
  std::cout << specdet::cli::error_json(e, code) << "\n";
  std::cerr << "specdet: " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace specdet::cli;

  CLI::App app{"Traces and 2-modified determinants for half-line Schroedinger operators"};
  app.require_subcommand(1);

  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  bool json = false;

  std::map<std::string, CLI::App*> subs;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.description);
    sub->add_option("--config", config_path, "line-based key = value file; flags take precedence");
    sub->add_flag("--json", json, "shorthand for --format json");
    for (const auto& [key, help] : known_keys()) {
      CLI::Option* opt = sub->add_option("--" + key, raw[key], help);
      options[c.name + "/" + key] = opt;
    }
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(specdet::UsageError(e.what()));
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    Settings flags;
    for (const auto& [key, help] : known_keys()) {
      if (options.at(command + "/" + key)->count() > 0) flags[key] = raw[key];
    }
    if (json) {
      if (flags.count("format") && flags["format"] != "json")
        throw specdet::UsageError("--json conflicts with --format " + flags["format"]);
      flags["format"] = "json";
    }
    const Settings file = config_path.empty() ? Settings{} : read_config_file(config_path);
    const RunConfig cfg = resolve_config(file, flags, std::cerr);

    if (cfg.output.empty()) return run_command(command, cfg, std::cout, std::cerr);
    std::ofstream out(cfg.output);
    if (!out) throw specdet::UsageError("cannot write output file '" + cfg.output + "'");
    return run_command(command, cfg, out, std::cerr);
  } catch (const std::exception& e) {
    return fail(e);
  }
}
