// cone_green: command-line front end.
//
//   cone_green <command> [--config FILE] [--seed N] [--threads N] [--deterministic] [--out FILE] [--key value ...]
//
// Any config key can be given as --key value (or --key=value); these override the file.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "conegreen/config.hpp"
#include "conegreen/runner.hpp"

using namespace conegreen;

namespace {

bool split_extras(const std::vector<std::string>& extras, KeyValues& kv, std::string& error) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) {
      error = "unexpected argument '" + a + "'";
      return false;
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      kv.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      kv.emplace_back(a.substr(2), extras[++i]);
    } else {
      error = "option '" + a + "' needs a value";
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Green functions of lattice random walks killed on leaving a cone"};
  std::string command, config_path, out_path;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;
  app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "Flat key=value config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", deterministic, "Omit the timestamp from CSV headers");
  app.add_option("--out", out_path, "CSV output path (written atomically)");
  app.allow_extras();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  std::string text;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  KeyValues overrides;
  std::string extra_error;
  if (!split_extras(app.remaining(), overrides, extra_error)) {
    std::cerr << "error: " << extra_error << '\n';
    return kExitError;
  }
  if (*seed_opt) overrides.emplace_back("seed", std::to_string(seed));
  if (*threads_opt) overrides.emplace_back("threads", std::to_string(threads));

  ParseResult parsed = parse_config(text, overrides);
  for (auto& e : command_errors(command, parsed.config)) parsed.errors.push_back(std::move(e));
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) std::cerr << "config error: " << e << '\n';
    return kExitError;
  }
  RunOptions options;
  options.deterministic = deterministic;
  options.out_path = out_path.empty() ? parsed.config.output : out_path;
  return run_command(command, parsed.config, options, std::cout, std::cerr);
}
