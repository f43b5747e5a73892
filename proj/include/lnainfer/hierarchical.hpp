#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lnainfer/dataset.hpp"
#include "lnainfer/diagnostics.hpp"
#include "lnainfer/lna.hpp"
#include "lnainfer/mcmc.hpp"
#include "lnainfer/model.hpp"
#include "lnainfer/rng.hpp"

namespace lnainfer {

/// Gamma law parameterized by mean and variance: shape mean^2/variance,
/// scale variance/mean.
struct GammaMeanVar {
  double mean = 1.0;
  double variance = 1.0;

  double shape() const { return mean * mean / variance; }
  double scale() const { return variance / mean; }
};

/// Throws std::domain_error unless x, mean and variance are all positive.
double gamma_logpdf_meanvar(double x, double mean, double variance);
double gamma_draw_meanvar(Rng& rng, double mean, double variance);
/// (shape - 1) * scale, or 0 when shape <= 1.
double gamma_mode_meanvar(double mean, double variance);

/// Log-density of an exponential law with the given mean.
double exponential_logpdf_mean(double x, double mean);

struct PriorConfig {
  /// Mean of the vague exponential prior placed on every hyperparameter,
  /// on initial levels and on kappa.
  double vague_mean = 1e4;
  /// Informative per-cell prior on delta2 for the transcription experiment.
  /// When empty, delta2 gets the vague prior instead.
  std::optional<GammaMeanVar> delta2_prior = GammaMeanVar{0.57, 0.004};
};

enum class CellPriorKind { hierarchical, vague, fixed_gamma };

struct CellParameter {
  std::string name;
  CellPriorKind prior = CellPriorKind::vague;
  std::size_t population = 0;  // for hierarchical parameters
  GammaMeanVar fixed;          // for fixed_gamma
};

/// Per-experiment parameter layout on the sampler scale.
///   translation:   delta2, tau2_tilde, sigma_u2 (hierarchical); phi2_0_tilde
///   transcription: delta1, alpha_tilde, tau1_tilde, sigma_u2 (hierarchical);
///                  delta2 (imported prior); phi1_0_tilde, phi2_0_tilde
struct ExperimentLayout {
  Experiment experiment = Experiment::translation;
  std::vector<CellParameter> cell;
  std::vector<std::string> populations;
  std::vector<std::vector<std::size_t>> blocks;

  static ExperimentLayout make(Experiment kind, const PriorConfig& priors);
  std::size_t index_of(const std::string& name) const;
  std::size_t hyper_count() const { return 2 * populations.size(); }
};

/// One MCMC iterate. hypers holds (mean, variance) per population in layout
/// order; cell_loglik caches each cell's log-likelihood at the current
/// parameters and kappa.
struct ChainState {
  std::vector<std::vector<double>> cells;
  std::vector<double> hypers;
  double kappa = 0.1;
  std::vector<double> cell_loglik;
};

struct PosteriorTerms {
  double likelihood = 0.0;   // sum of per-cell Kalman log-likelihoods
  double population = 0.0;   // gamma layer of hierarchical parameters
  double hyperprior = 0.0;   // exponential hyperpriors
  double cell_priors = 0.0;  // initial-level priors and the delta2 prior
  double kappa_prior = 0.0;

  double total() const { return likelihood + population + hyperprior + cell_priors + kappa_prior; }
};

class HierarchicalModel {
 public:
  HierarchicalModel(Experiment kind, MultiCellDataset data, PriorConfig priors = {});

  const ExperimentLayout& layout() const { return layout_; }
  const MultiCellDataset& data() const { return data_; }
  const PriorConfig& priors() const { return priors_; }
  Experiment experiment() const { return layout_.experiment; }
  std::size_t cell_count() const { return data_.size(); }

  void set_use_likelihood(bool on) { use_likelihood_ = on; }
  bool use_likelihood() const { return use_likelihood_; }

  /// Natural-scale parameters implied by sampler-scale cell parameters.
  ModelParams natural_params(std::span<const double> cell, double kappa) const;
  /// Throws NumericalError or std::domain_error when the LNA cannot be evaluated.
  double cell_loglik(std::size_t cell, std::span<const double> params, double kappa) const;
  /// Gamma layer plus cell-level priors for one cell; -inf outside support.
  double cell_prior(std::span<const double> params, std::span<const double> hypers) const;
  /// Gamma layer of population j over all cells at (mean, variance).
  double population_log_density(std::size_t j, double mean, double variance,
                                const ChainState& state) const;
  double hyper_prior(double value) const;
  double kappa_prior(double kappa) const;

  /// Recomputes every term from scratch (ignores the cache).
  PosteriorTerms terms(const ChainState& state) const;
  double log_posterior(const ChainState& state) const { return terms(state).total(); }
  /// Sum of cached likelihoods plus all prior terms.
  double cached_log_posterior(const ChainState& state) const;
  void refresh_cache(ChainState& state) const;

 private:
  ExperimentLayout layout_;
  MultiCellDataset data_;
  PriorConfig priors_;
  bool use_likelihood_ = true;
};

/// Starting point: per-cell least-squares fit of the macroscopic curve on a
/// grid of degradation rates, hyperparameters from the moments of those fits,
/// and kappa = kappa_init.
ChainState initial_state(const HierarchicalModel& model, double kappa_init = 0.1);

enum class KernelKind { metropolis_hastings, multiple_try };

struct SamplerSettings {
  KernelKind cell_kernel = KernelKind::metropolis_hastings;
  std::size_t m_try = 4;
  std::optional<double> rho;  // default -1/(m_try - 1)
  double initial_step = 0.05;  // log-scale standard deviation per coordinate
  AdaptationConfig adaptation;
  bool update_cells = true;
  bool update_hypers = true;
  bool update_kappa = true;
};

/// Block Metropolis-within-Gibbs sampler over ChainState. Each sweep updates,
/// in order: every block of every cell (cell i draws from RNG stream 1 + i),
/// every population (mean, variance) pair, then kappa (master stream 0).
/// During adaptation each multi-dimensional block also learns a proposal
/// covariance from its own history.
class HierarchicalSampler {
 public:
  HierarchicalSampler(const HierarchicalModel& model, ChainState initial, SamplerSettings settings,
                      std::uint64_t seed);

  void sweep();

  const ChainState& state() const { return state_; }
  std::size_t sweeps() const { return sweeps_; }
  std::size_t numerical_rejections() const { return numerical_rejections_; }
  /// Counters aggregated over cells: one per cell block, then "hyper", "kappa".
  std::vector<AcceptanceCounter> acceptance() const;
  bool adaptation_frozen() const;

 private:
  struct BlockState {
    BlockProposal proposal;
    StepSizeAdapter adapter;
    // Running moments of the block's sampling coordinates, for covariance learning.
    std::size_t count = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd scatter;
    bool learned = false;
  };

  void update_cell(std::size_t cell);
  void update_hypers();
  void update_kappa();
  void learn_covariance(BlockState& block, std::span<const double> values);
  double safe_cell_loglik(std::size_t cell, std::span<const double> params, double kappa);

  const HierarchicalModel& model_;
  ChainState state_;
  SamplerSettings settings_;
  double rho_;
  Rng master_;
  std::vector<Rng> cell_rngs_;
  std::vector<std::vector<BlockState>> cell_blocks_;
  std::vector<BlockState> hyper_blocks_;
  BlockState kappa_block_;
  std::vector<AcceptanceCounter> cell_counters_;
  AcceptanceCounter hyper_counter_{"hyper"};
  AcceptanceCounter kappa_counter_{"kappa"};
  std::size_t sweeps_ = 0;
  std::size_t numerical_rejections_ = 0;
};

struct FitConfig {
  std::size_t iterations = 50000;        // total sweeps, burn-in included
  std::optional<std::size_t> burn_in;    // default: a quarter of iterations
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  std::optional<KernelKind> cell_kernel; // default: MH (translation), MTM (transcription)
  std::size_t m_try = 4;
  std::optional<double> rho;
  double initial_step = 0.05;
  AdaptationConfig adaptation;           // freeze 0 means "end of burn-in"
  PriorConfig priors;
  double kappa_init = 0.1;
  bool use_likelihood = true;

  std::size_t burn_in_sweeps() const { return burn_in.value_or(iterations / 4); }
  void validate() const;
};

struct FitResult {
  Experiment experiment = Experiment::translation;
  PosteriorChain chain;
  std::vector<SummaryRow> summary;
  std::vector<std::string> warnings;
  std::size_t numerical_rejections = 0;
  bool failed = false;
  std::string failure;
  ChainState final_state;
};

/// Chain column names: mu_/var_ per population, kappa, derived population
/// means on the natural scale, then "<cell>.<parameter>" per cell.
std::vector<std::string> chain_columns(const HierarchicalModel& model);

FitResult fit(Experiment kind, const MultiCellDataset& data, const FitConfig& config);
FitResult fit_translation(const MultiCellDataset& data, const FitConfig& config);
FitResult fit_transcription(const MultiCellDataset& data, FitConfig config,
                            GammaMeanVar delta2_prior = {0.57, 0.004});

}  // namespace lnainfer
