#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lnainfer/dataset.hpp"
#include "lnainfer/model.hpp"
#include "lnainfer/rng.hpp"

namespace lnainfer {

/// Jump-process state recorded at fixed sample times. counts is row-major:
/// counts[i * species + s].
struct Trajectory {
  std::vector<double> times;
  std::size_t species = 0;
  std::vector<std::int64_t> counts;

  std::int64_t count(std::size_t i, std::size_t s) const { return counts[i * species + s]; }
  std::size_t size() const { return times.size(); }
};

/// Exact simulation (Gillespie direct method) of the network, sampled at
/// `sample_times`. The state at each sample time is the last state reached at
/// or before it.
Trajectory simulate_ssa(const ReactionNetwork& network, const ModelParams& params,
                        std::span<const std::int64_t> initial_state,
                        std::span<const double> sample_times, Rng& rng);

Trajectory simulate_ssa(const ReactionNetwork& network, const ModelParams& params,
                        std::span<const std::int64_t> initial_state,
                        std::span<const double> sample_times, std::uint64_t seed);

/// Y(t_i) = kappa * protein(t_i) + N(0, sigma_u2). Protein is the last species.
std::vector<double> apply_measurement(const Trajectory& trajectory, double kappa, double sigma_u2,
                                      Rng& rng);
std::vector<double> apply_measurement(const Trajectory& trajectory, double kappa, double sigma_u2,
                                      std::uint64_t seed);

struct GammaLaw {
  double mean;
  double variance;
};

/// Simulation study layout. Population laws are keyed by natural-scale
/// parameter name: translation uses tau2, delta2, sigma_u2; transcription uses
/// tau1, delta1, alpha, delta2, sigma_u2. Initial levels (phi2_0, and phi1_0
/// for transcription) are shared by all cells.
struct StudyConfig {
  Experiment experiment = Experiment::translation;
  std::size_t cells = 1;
  std::size_t observations = 2;
  double interval = 1.0 / 12.0;  // hours
  double kappa = 1.0;
  std::map<std::string, GammaLaw> populations;
  std::map<std::string, double> initial;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticCell {
  std::string name;
  ModelParams truth;
  Trajectory trajectory;
  std::vector<double> observations;
};

struct SyntheticDataset {
  StudyConfig config;
  std::vector<SyntheticCell> cells;

  MultiCellDataset observations() const;
};

/// Cell i uses RNG stream 1 + i of the study seed for its parameter draws,
/// its trajectory and its measurement noise, in that order.
SyntheticDataset generate_study(const StudyConfig& config);

}  // namespace lnainfer
