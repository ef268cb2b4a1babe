#include "nullctl/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  namespace cli = nullctl::cli;
  CLI::App app{"Null controllability experiments for a switched degenerate/non-degenerate parabolic system"};
  app.set_version_flag("--version", cli::kVersion);
  app.require_subcommand(1);

  cli::Invocation inv;
  std::string output;
  std::uint64_t seed = 0;
  const std::map<std::string, std::string> about = {
      {"spectrum", "eigenvalues of both operators and their growth fit"},
      {"spectral-constant", "sharp spectral-inequality constants c_k and their growth check"},
      {"hum", "minimum-energy control of the first modes on one window"},
      {"lr", "staged null control with growing mode counts"},
      {"observability", "observability constants, telescoping check and interpolation fit"},
      {"negative", "controls that cannot reach one component"},
      {"schedule", "stage times and mode counts only"},
  };
  for (const std::string& name : cli::commands()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config,-c", inv.config_path, "JSON config with flat keys")->check(CLI::ExistingFile);
    sub->add_option("--set", inv.overrides, "override a config key: key=value")->take_all();
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--output,-o", output, "output directory");
    sub->callback([&inv, name] { inv.command = name; });
  }
  app.footer("Exit status: 0 success, 2 invalid input (nothing written), 3 solver or I/O failure.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kValidation;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) inv.seed = seed;
    if (sub->count("--output") > 0) inv.output_dir = output;
  }
  return cli::run(inv, std::cerr);
}
