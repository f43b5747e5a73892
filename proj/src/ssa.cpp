#include "lnainfer/ssa.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

void check_sample_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) {
      throw InputError("sample times must be finite and nonnegative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InputError("sample times must be strictly increasing");
    }
  }
}

// Direct method over a fixed-size reaction set. RateFn fills the propensity
// array from the current state.
template <std::size_t Species, std::size_t Reactions, typename RateFn>
Trajectory run_direct_method(const ReactionNetwork& network, std::span<const std::int64_t> initial,
                             std::span<const double> sample_times, Rng& rng, RateFn rates_of) {
  std::array<std::array<int, Species>, Reactions> stoich{};
  for (std::size_t j = 0; j < Reactions; ++j) {
    for (std::size_t s = 0; s < Species; ++s) stoich[j][s] = network.reactions()[j].stoichiometry[s];
  }

  std::array<std::int64_t, Species> state{};
  for (std::size_t s = 0; s < Species; ++s) state[s] = initial[s];

  Trajectory out;
  out.species = Species;
  out.times.assign(sample_times.begin(), sample_times.end());
  out.counts.reserve(sample_times.size() * Species);

  const auto record = [&] {
    for (std::size_t s = 0; s < Species; ++s) out.counts.push_back(state[s]);
  };

  std::array<double, Reactions> w{};
  double t = 0.0;
  std::size_t next = 0;
  while (next < sample_times.size()) {
    rates_of(state, w);
    double total = 0.0;
    for (double r : w) total += r;
    if (total <= 0.0) {
      // Frozen process: no reaction can fire again.
      while (next < sample_times.size()) {
        record();
        ++next;
      }
      break;
    }
    const double t_next = t + exponential(rng, total);
    while (next < sample_times.size() && sample_times[next] < t_next) {
      record();
      ++next;
    }
    if (next == sample_times.size()) break;

    const double target = uniform01(rng) * total;
    std::size_t j = 0;
    double cumulative = w[0];
    while (cumulative < target && j + 1 < Reactions) cumulative += w[++j];
    // Guard against rounding selecting a reaction with zero propensity.
    while (w[j] <= 0.0 && j > 0) --j;
    for (std::size_t s = 0; s < Species; ++s) state[s] += stoich[j][s];
    t = t_next;
  }
  return out;
}

}  // namespace

Trajectory simulate_ssa(const ReactionNetwork& network, const ModelParams& params,
                        std::span<const std::int64_t> initial_state,
                        std::span<const double> sample_times, Rng& rng) {
  if (experiment_of(params) != network.experiment()) {
    throw InputError("parameters do not belong to this reaction network");
  }
  if (initial_state.size() != network.species_count()) {
    throw InputError("initial state length does not match the network species count");
  }
  for (auto x : initial_state) {
    if (x < 0) throw InputError("initial state must be nonnegative");
  }
  check_sample_times(sample_times);

  if (const auto* p = std::get_if<TranslationParams>(&params)) {
    if (p->tau2 < 0.0 || p->delta2 < 0.0) throw std::domain_error("rates must be nonnegative");
    const double tau2 = p->tau2;
    const double delta2 = p->delta2;
    return run_direct_method<1, 2>(network, initial_state, sample_times, rng,
                                   [=](const std::array<std::int64_t, 1>& x, std::array<double, 2>& w) {
                                     w[0] = tau2;
                                     w[1] = delta2 * static_cast<double>(x[0]);
                                   });
  }
  const auto& q = std::get<TranscriptionParams>(params);
  if (q.tau1 < 0.0 || q.delta1 < 0.0 || q.alpha < 0.0 || q.delta2 < 0.0) {
    throw std::domain_error("rates must be nonnegative");
  }
  return run_direct_method<2, 4>(network, initial_state, sample_times, rng,
                                 [q](const std::array<std::int64_t, 2>& x, std::array<double, 4>& w) {
                                   const double m = static_cast<double>(x[0]);
                                   const double p = static_cast<double>(x[1]);
                                   w[0] = q.synthesis(0.0);
                                   w[1] = q.delta1 * m;
                                   w[2] = q.alpha * m;
                                   w[3] = q.delta2 * p;
                                 });
}

Trajectory simulate_ssa(const ReactionNetwork& network, const ModelParams& params,
                        std::span<const std::int64_t> initial_state,
                        std::span<const double> sample_times, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return simulate_ssa(network, params, initial_state, sample_times, rng);
}

std::vector<double> apply_measurement(const Trajectory& trajectory, double kappa, double sigma_u2,
                                      Rng& rng) {
  if (!(sigma_u2 >= 0.0)) throw std::domain_error("sigma_u2 must be nonnegative");
  if (trajectory.species == 0) throw InputError("trajectory has no species");
  const double sd = std::sqrt(sigma_u2);
  const std::size_t protein = trajectory.species - 1;
  std::vector<double> y(trajectory.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double noise = sd > 0.0 ? sd * standard_normal(rng) : 0.0;
    y[i] = kappa * static_cast<double>(trajectory.count(i, protein)) + noise;
  }
  return y;
}

std::vector<double> apply_measurement(const Trajectory& trajectory, double kappa, double sigma_u2,
                                      std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return apply_measurement(trajectory, kappa, sigma_u2, rng);
}

void StudyConfig::validate() const {
  if (cells == 0) throw InputError("simulation study needs at least one cell");
  if (observations == 0) throw InputError("simulation study needs at least one observation");
  if (!(interval > 0.0)) throw InputError("sampling interval must be positive");
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
  const std::vector<std::string> laws =
      experiment == Experiment::translation
          ? std::vector<std::string>{"tau2", "delta2", "sigma_u2"}
          : std::vector<std::string>{"tau1", "delta1", "alpha", "delta2", "sigma_u2"};
  for (const auto& name : laws) {
    auto it = populations.find(name);
    if (it == populations.end()) throw InputError("missing population law for '" + name + "'");
    if (!(it->second.mean > 0.0) || !(it->second.variance > 0.0)) {
      throw InputError("population law for '" + name + "' needs positive mean and variance");
    }
  }
  const std::vector<std::string> levels =
      experiment == Experiment::translation ? std::vector<std::string>{"phi2_0"}
                                            : std::vector<std::string>{"phi1_0", "phi2_0"};
  for (const auto& name : levels) {
    auto it = initial.find(name);
    if (it == initial.end() || !(it->second >= 0.0)) {
      throw InputError("missing or negative initial level '" + name + "'");
    }
  }
}

MultiCellDataset SyntheticDataset::observations() const {
  MultiCellDataset data;
  for (const auto& cell : cells) {
    data.cells.push_back({cell.name, cell.trajectory.times, cell.observations});
  }
  return data;
}

SyntheticDataset generate_study(const StudyConfig& config) {
  config.validate();
  const auto network = ReactionNetwork::for_experiment(config.experiment);

  std::vector<double> times(config.observations);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i) * config.interval;

  SyntheticDataset out;
  out.config = config;
  for (std::size_t c = 0; c < config.cells; ++c) {
    Rng rng = make_stream(config.seed, 1 + c);
    const auto draw = [&](const std::string& name) {
      const GammaLaw& law = config.populations.at(name);
      return gamma_shape_scale(rng, law.mean * law.mean / law.variance, law.variance / law.mean);
    };

    SyntheticCell cell;
    cell.name = "cell_" + std::to_string(c + 1);
    std::vector<std::int64_t> x0;
    double sigma_u2 = 0.0;
    if (config.experiment == Experiment::translation) {
      TranslationParams p{};
      p.tau2 = draw("tau2");
      p.delta2 = draw("delta2");
      p.sigma_u2 = draw("sigma_u2");
      p.phi2_0 = config.initial.at("phi2_0");
      sigma_u2 = p.sigma_u2;
      x0 = {std::llround(p.phi2_0)};
      cell.truth = p;
    } else {
      TranscriptionParams q{};
      q.tau1 = draw("tau1");
      q.delta1 = draw("delta1");
      q.alpha = draw("alpha");
      q.delta2 = draw("delta2");
      q.sigma_u2 = draw("sigma_u2");
      q.phi1_0 = config.initial.at("phi1_0");
      q.phi2_0 = config.initial.at("phi2_0");
      sigma_u2 = q.sigma_u2;
      x0 = {std::llround(q.phi1_0), std::llround(q.phi2_0)};
      cell.truth = q;
    }
    cell.trajectory = simulate_ssa(network, cell.truth, x0, times, rng);
    cell.observations = apply_measurement(cell.trajectory, config.kappa, sigma_u2, rng);
    out.cells.push_back(std::move(cell));
  }
  return out;
}

}  // namespace lnainfer
