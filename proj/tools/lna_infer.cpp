#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "lnainfer/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical LNA inference for single-cell expression time series"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  const std::pair<const char*, const char*> subcommands[] = {
      {"simulate", "Generate a synthetic multi-cell study (observations.csv, truth.json)"},
      {"fit", "Sample the hierarchical posterior (chain.csv, chain.json, summary.csv)"},
      {"summarize", "Posterior densities and correlations from a stored chain (densities/)"},
  };
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--out", out, "Override the output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  lnainfer::CommandOptions options;
  options.seed = seed;
  if (out) options.out = *out;
  const auto command = lnainfer::command_from_string(app.get_subcommands().front()->get_name());
  return lnainfer::run_command(command, config, options, std::cout, std::cerr);
}
