// Command-line front end: reads an experiment file, runs one subcommand and
// writes its CSV to --out (or the config's output path, or stdout).

#include "diffract/commands.hpp"
#include "diffract/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

using namespace diffract;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string out;
  bool json = false;
};

using Command = CommandOutput (*)(const ExperimentConfig&, unsigned);

int run(const std::string& name, Command command, const Options& opt) {
  ExperimentConfig config = load_config(opt.config);
  if (opt.seed) config.seed = *opt.seed;
  const CommandOutput result = command(config, opt.workers);

  const std::string out = !opt.out.empty() ? opt.out : config.output.value_or("");
  std::ostream* report = &std::cout;
  if (out.empty()) {
    std::cout << result.csv;
    report = &std::cerr;
  } else {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw ConfigError("cannot write '" + out + "'");
    file << result.csv;
    if (!file) throw ConfigError("failed writing '" + out + "'");
  }
  *report << (opt.json ? result.json : result.summary);
  if (result.exit_code != kExitOk) std::cerr << name << ": numerical check failed\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo solver for diffusions with discontinuous coefficients"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"estimate", {cmd_estimate, "estimate the solution at each configured point"}},
      {"converge", {cmd_converge, "error against a reference over a list of step sizes"}},
      {"compare", {cmd_compare, "transformed and regularized schemes side by side"}},
      {"oracle1d", {cmd_oracle1d, "pathwise check against the 1D phi-transform scheme"}},
      {"diagnose", {cmd_diagnose, "occupation time near the interface over step sizes"}},
  };

  Options opt;
  std::string selected;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", opt.config, "experiment file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the configured seed");
    sub->add_option("--workers", opt.workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", opt.out, "CSV output path");
    sub->add_flag("--json", opt.json, "print the summary as JSON");
    sub->callback([&selected, name = name] { selected = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    return run(selected, commands.at(selected).first, opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}
