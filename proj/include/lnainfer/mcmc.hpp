#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lnainfer/rng.hpp"

namespace lnainfer {

/// Log-density over the full natural-scale parameter vector. Returns -inf
/// outside the support.
using LogDensity = std::function<double(std::span<const double>)>;

struct TargetDensity {
  std::vector<std::string> names;
  std::vector<bool> positive;  // sampled on the log scale when true
  LogDensity log_density;
};

/// Random-walk proposal for one block. Offsets in the sampling coordinates
/// (log for positive components) are scale * factor * z with z standard
/// normal; `factor` is lower triangular.
struct BlockProposal {
  std::vector<std::size_t> indices;
  std::vector<bool> log_scale;
  Eigen::MatrixXd factor;
  double scale = 1.0;

  /// Independent per-coordinate steps.
  static BlockProposal diagonal(std::vector<std::size_t> indices, std::vector<bool> log_scale,
                                std::span<const double> step_sizes);
  std::size_t dimension() const { return indices.size(); }
};

struct StepResult {
  bool accepted = false;
  double log_target = 0.0;
};

/// Gaussian random-walk Metropolis-Hastings update of one block. The log-scale
/// Jacobian is included so `target` stays a density in natural coordinates.
/// Throws std::logic_error when `current_log_target` is not finite.
StepResult mh_step(std::vector<double>& state, double current_log_target, const LogDensity& target,
                   const BlockProposal& proposal, Rng& rng);

/// Multiple-try Metropolis with exchangeable antithetic Gaussian tries
/// (pairwise correlation rho in [-1/(m_try-1), 0]). Tries are weighted by
/// the target; the backward set is drawn from the conditional law of the
/// try set given that one member equals the current point.
StepResult mtm_antithetic_step(std::vector<double>& state, double current_log_target,
                               const LogDensity& target, const BlockProposal& proposal,
                               std::size_t m_try, double rho, Rng& rng);

/// -1/(m_try - 1): the most negative admissible exchangeable correlation.
double default_antithetic_rho(std::size_t m_try);

struct AdaptationConfig {
  double target_scalar = 0.44;   // one-dimensional blocks
  double target_block = 0.25;    // blocks of dimension > 1
  std::size_t window = 50;       // sweeps between scale updates
  std::size_t freeze = 0;        // no adaptation at or after this sweep

  double target_for(std::size_t dimension) const {
    return dimension > 1 ? target_block : target_scalar;
  }
};

/// Robbins-Monro scale control for one block. The log scale moves by
/// (acceptance - target) / sqrt(number of windows so far); once frozen the
/// scale is never modified again.
class StepSizeAdapter {
 public:
  explicit StepSizeAdapter(std::size_t dimension = 1) : dimension_(dimension) {}

  void record(bool accepted) {
    ++attempts_;
    if (accepted) ++accepts_;
  }
  /// Call once per sweep; updates `scale` at window boundaries before `freeze`.
  void end_sweep(std::size_t sweep, const AdaptationConfig& config, double& scale);
  bool frozen() const { return frozen_; }

 private:
  std::size_t dimension_;
  std::size_t attempts_ = 0;
  std::size_t accepts_ = 0;
  std::size_t windows_ = 0;
  bool frozen_ = false;
};

/// One Robbins-Monro update of a log step size.
double adapt_step_size(double scale, double acceptance, double target, std::size_t window_index);

struct AcceptanceCounter {
  std::string name;
  std::uint64_t attempts = 0;
  std::uint64_t accepts = 0;
  double rate() const { return attempts == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(attempts); }
};

/// Stored chain: thinned iterates (row-major, rows x names), log-posterior
/// trace and per-block acceptance counters.
struct PosteriorChain {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> log_posterior;
  std::vector<AcceptanceCounter> acceptance;
  std::uint64_t seed = 0;
  std::size_t thin = 1;
  std::size_t burn_in = 0;

  std::size_t rows() const { return names.empty() ? 0 : values.size() / names.size(); }
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(std::size_t j) const;
  std::vector<double> column(const std::string& name) const { return column(column_index(name)); }
  void append(std::span<const double> row, double log_post);
};

}  // namespace lnainfer
