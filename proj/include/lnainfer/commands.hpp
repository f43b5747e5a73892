#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "lnainfer/dataset_io.hpp"
#include "lnainfer/hierarchical.hpp"
#include "lnainfer/ssa.hpp"

namespace lnainfer {

enum class Command { simulate, fit, summarize };

Command command_from_string(const std::string& s);

/// A run configuration document. Relative paths resolve against the
/// directory holding the config file.
struct RunConfig {
  Experiment experiment = Experiment::translation;
  std::filesystem::path base_dir = ".";
  std::filesystem::path data = "observations.csv";
  std::filesystem::path out = ".";
  std::optional<std::filesystem::path> chain_file;  // summarize input; default <out>/chain.csv
  TimeUnit time_unit = TimeUnit::hours;
  FitConfig fit;
  std::optional<StudyConfig> simulation;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& path);
  /// Serialized form with paths as given; truth files written by `simulate`
  /// embed it so they can be fed straight back to `fit`.
  nlohmann::json to_json() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path out_dir() const { return resolve(out); }
  std::filesystem::path data_path() const { return resolve(data); }
  std::filesystem::path chain_path() const;

  /// Throws InputError when the config cannot drive `command`.
  void validate(Command command) const;
};

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

/// Writes observations.csv and truth.json into the output directory.
void run_simulate(const RunConfig& config, std::ostream& log);
/// Writes chain.csv, chain.json and summary.csv. Returns false when the chain
/// stopped early on a numerical failure (the partial chain is still written).
bool run_fit(const RunConfig& config, std::ostream& log);
/// Writes per-parameter density CSVs, scatter pairs and Spearman correlations
/// under <out>/densities.
void run_summarize(const RunConfig& config, std::ostream& log);

/// Loads the config, applies overrides and runs the command. Returns the
/// process exit code: 0 success, 2 config or input error, 3 numerical failure.
int run_command(Command command, const std::filesystem::path& config_path, const CommandOptions& options,
                std::ostream& log, std::ostream& err);

}  // namespace lnainfer
