#include "lnainfer/hierarchical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "lnainfer/errors.hpp"
#include "lnainfer/likelihood.hpp"

namespace lnainfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sampler-scale slots.
namespace tl {
constexpr std::size_t delta2 = 0, tau2_tilde = 1, sigma_u2 = 2, phi2_0_tilde = 3;
}
namespace tc {
constexpr std::size_t delta1 = 0, alpha_tilde = 1, tau1_tilde = 2, sigma_u2 = 3, delta2 = 4,
                      phi1_0_tilde = 5, phi2_0_tilde = 6;
}

bool all_positive(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return g;
}

struct DecayFit {
  double level0 = 1.0;
  double synthesis = 1.0;
  double delta = 0.5;
  double sse = std::numeric_limits<double>::infinity();
};

// y ~ a e^{-delta t} + b (1 - e^{-delta t}), least squares in (a, b) on a grid of delta.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y) {
  const double ymax = std::abs(*std::max_element(y.begin(), y.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }));
  const double floor = 1e-3 * ymax + 1e-9;
  DecayFit best;
  for (double delta : log_grid(0.01, 5.0, 160)) {
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double g1 = std::exp(-delta * t[k]);
      const double g2 = 1.0 - g1;
      s11 += g1 * g1;
      s12 += g1 * g2;
      s22 += g2 * g2;
      r1 += g1 * y[k];
      r2 += g2 * y[k];
    }
    const double det = s11 * s22 - s12 * s12;
    double a, b;
    if (std::abs(det) > 1e-12 * s11 * s22) {
      a = (r1 * s22 - r2 * s12) / det;
      b = (s11 * r2 - s12 * r1) / det;
    } else {
      a = r1 / s11;
      b = floor;
    }
    if (b < floor) {
      b = floor;
      a = (r1 - b * s12) / s11;
    }
    a = std::max(a, floor);
    double sse = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double g1 = std::exp(-delta * t[k]);
      const double r = y[k] - a * g1 - b * (1.0 - g1);
      sse += r * r;
    }
    if (sse < best.sse) best = {a, b * delta, delta, sse};
  }
  return best;
}

struct TwoStageFit {
  double delta1 = 0.2;
  double tau1_tilde = 1.0;
  double phi1_0_tilde = 1.0;
  double phi2_0_tilde = 1.0;
  double sse = std::numeric_limits<double>::infinity();
};

// y ~ c0 + c1 e^{-delta1 t} + c2 e^{-delta2 t} with delta2 fixed.
TwoStageFit fit_two_stage(const std::vector<double>& t, const std::vector<double>& y, double delta2) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const double ymax = std::abs(*std::max_element(y.begin(), y.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }));
  const double floor = 1e-3 * ymax + 1e-9;
  Eigen::VectorXd yy(n);
  for (Eigen::Index k = 0; k < n; ++k) yy(k) = y[static_cast<std::size_t>(k)];
  TwoStageFit best;
  for (double delta1 : log_grid(0.01, 5.0, 160)) {
    if (std::abs(delta1 - delta2) < 0.02 * delta2) continue;
    Eigen::MatrixXd basis(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double tk = t[static_cast<std::size_t>(k)];
      basis(k, 0) = 1.0;
      basis(k, 1) = std::exp(-delta1 * tk);
      basis(k, 2) = std::exp(-delta2 * tk);
    }
    const Eigen::Vector3d coef = basis.colPivHouseholderQr().solve(yy);
    const double sse = (basis * coef - yy).squaredNorm();
    if (!(sse < best.sse)) continue;
    const double tau1_tilde = std::max(coef(0) * delta1 * delta2, floor * delta1 * delta2);
    best.delta1 = delta1;
    best.tau1_tilde = tau1_tilde;
    best.phi1_0_tilde = std::max(coef(1) * (delta2 - delta1) + tau1_tilde / delta1, floor);
    best.phi2_0_tilde = std::max(coef(0) + coef(1) + coef(2), floor);
    best.sse = sse;
  }
  return best;
}

}  // namespace

double gamma_logpdf_meanvar(double x, double mean, double variance) {
  if (!(x > 0.0) || !(mean > 0.0) || !(variance > 0.0)) {
    throw std::domain_error("gamma density needs positive x, mean and variance");
  }
  const double shape = mean * mean / variance;
  const double scale = variance / mean;
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

double gamma_draw_meanvar(Rng& rng, double mean, double variance) {
  if (!(mean > 0.0) || !(variance > 0.0)) throw std::domain_error("gamma law needs positive mean and variance");
  return gamma_shape_scale(rng, mean * mean / variance, variance / mean);
}

double gamma_mode_meanvar(double mean, double variance) {
  const GammaMeanVar g{mean, variance};
  return g.shape() > 1.0 ? (g.shape() - 1.0) * g.scale() : 0.0;
}

double exponential_logpdf_mean(double x, double mean) {
  if (!(x >= 0.0) || !std::isfinite(x)) return kNegInf;
  return -std::log(mean) - x / mean;
}

ExperimentLayout ExperimentLayout::make(Experiment kind, const PriorConfig& priors) {
  ExperimentLayout l;
  l.experiment = kind;
  using K = CellPriorKind;
  if (kind == Experiment::translation) {
    l.cell = {{"delta2", K::hierarchical, 0, {}},
              {"tau2_tilde", K::hierarchical, 1, {}},
              {"sigma_u2", K::hierarchical, 2, {}},
              {"phi2_0_tilde", K::vague, 0, {}}};
    l.populations = {"delta2", "tau2_tilde", "sigma_u2"};
    l.blocks = {{tl::delta2, tl::tau2_tilde}, {tl::sigma_u2}, {tl::phi2_0_tilde}};
  } else {
    CellParameter delta2{"delta2", K::vague, 0, {}};
    if (priors.delta2_prior) {
      delta2.prior = K::fixed_gamma;
      delta2.fixed = *priors.delta2_prior;
    }
    l.cell = {{"delta1", K::hierarchical, 0, {}},
              {"alpha_tilde", K::hierarchical, 2, {}},
              {"tau1_tilde", K::hierarchical, 1, {}},
              {"sigma_u2", K::hierarchical, 3, {}},
              delta2,
              {"phi1_0_tilde", K::vague, 0, {}},
              {"phi2_0_tilde", K::vague, 0, {}}};
    l.populations = {"delta1", "tau1_tilde", "alpha_tilde", "sigma_u2"};
    l.blocks = {{tc::delta1, tc::alpha_tilde},
                {tc::tau1_tilde},
                {tc::sigma_u2},
                {tc::phi1_0_tilde, tc::phi2_0_tilde},
                {tc::delta2}};
  }
  return l;
}

std::size_t ExperimentLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (cell[i].name == name) return i;
  }
  throw InputError("unknown cell parameter '" + name + "'");
}

HierarchicalModel::HierarchicalModel(Experiment kind, MultiCellDataset data, PriorConfig priors)
    : layout_(ExperimentLayout::make(kind, priors)), data_(std::move(data)), priors_(priors) {
  if (data_.empty()) throw InputError("dataset contains no cells");
  data_.validate(1);
  if (!(priors_.vague_mean > 0.0)) throw InputError("vague prior mean must be positive");
  if (priors_.delta2_prior &&
      (!(priors_.delta2_prior->mean > 0.0) || !(priors_.delta2_prior->variance > 0.0))) {
    throw InputError("delta2 prior needs positive mean and variance");
  }
}

ModelParams HierarchicalModel::natural_params(std::span<const double> c, double kappa) const {
  if (layout_.experiment == Experiment::translation) {
    return restore_translation({c[tl::tau2_tilde], c[tl::delta2], c[tl::phi2_0_tilde], c[tl::sigma_u2]},
                               kappa);
  }
  return restore_transcription({c[tc::tau1_tilde], c[tc::delta1], c[tc::alpha_tilde], c[tc::delta2],
                                c[tc::phi1_0_tilde], c[tc::phi2_0_tilde], c[tc::sigma_u2]},
                               kappa);
}

double HierarchicalModel::cell_loglik(std::size_t cell, std::span<const double> params, double kappa) const {
  if (!use_likelihood_) return 0.0;
  const ModelParams natural = natural_params(params, kappa);
  const LinearKinetics kinetics = LinearKinetics::from(natural);
  const double sigma_u2 = std::visit([](const auto& p) { return p.sigma_u2; }, natural);
  const CellSeries& series = data_.cells[cell];
  return lna_loglik(kinetics, series.times, series.values, kappa, sigma_u2);
}

double HierarchicalModel::cell_prior(std::span<const double> params, std::span<const double> hypers) const {
  if (!all_positive(params)) return kNegInf;
  double total = 0.0;
  for (std::size_t k = 0; k < layout_.cell.size(); ++k) {
    const CellParameter& p = layout_.cell[k];
    switch (p.prior) {
      case CellPriorKind::hierarchical:
        total += gamma_logpdf_meanvar(params[k], hypers[2 * p.population], hypers[2 * p.population + 1]);
        break;
      case CellPriorKind::vague:
        total += exponential_logpdf_mean(params[k], priors_.vague_mean);
        break;
      case CellPriorKind::fixed_gamma:
        total += gamma_logpdf_meanvar(params[k], p.fixed.mean, p.fixed.variance);
        break;
    }
  }
  return total;
}

double HierarchicalModel::population_log_density(std::size_t j, double mean, double variance,
                                                 const ChainState& state) const {
  if (!(mean > 0.0) || !(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) return kNegInf;
  std::size_t slot = layout_.cell.size();
  for (std::size_t k = 0; k < layout_.cell.size(); ++k) {
    if (layout_.cell[k].prior == CellPriorKind::hierarchical && layout_.cell[k].population == j) slot = k;
  }
  double total = 0.0;
  for (const auto& cell : state.cells) total += gamma_logpdf_meanvar(cell[slot], mean, variance);
  return total;
}

double HierarchicalModel::hyper_prior(double value) const {
  if (!(value > 0.0)) return kNegInf;
  return exponential_logpdf_mean(value, priors_.vague_mean);
}

double HierarchicalModel::kappa_prior(double kappa) const {
  if (!(kappa > 0.0)) return kNegInf;
  return exponential_logpdf_mean(kappa, priors_.vague_mean);
}

PosteriorTerms HierarchicalModel::terms(const ChainState& state) const {
  PosteriorTerms t;
  for (std::size_t i = 0; i < state.cells.size(); ++i) t.likelihood += cell_loglik(i, state.cells[i], state.kappa);
  for (std::size_t j = 0; j < layout_.populations.size(); ++j) {
    t.population += population_log_density(j, state.hypers[2 * j], state.hypers[2 * j + 1], state);
    t.hyperprior += hyper_prior(state.hypers[2 * j]) + hyper_prior(state.hypers[2 * j + 1]);
  }
  for (const auto& cell : state.cells) {
    if (!all_positive(cell)) {
      t.cell_priors = kNegInf;
      break;
    }
    for (std::size_t k = 0; k < layout_.cell.size(); ++k) {
      const CellParameter& p = layout_.cell[k];
      if (p.prior == CellPriorKind::vague) t.cell_priors += exponential_logpdf_mean(cell[k], priors_.vague_mean);
      if (p.prior == CellPriorKind::fixed_gamma) t.cell_priors += gamma_logpdf_meanvar(cell[k], p.fixed.mean, p.fixed.variance);
    }
  }
  t.kappa_prior = kappa_prior(state.kappa);
  return t;
}

double HierarchicalModel::cached_log_posterior(const ChainState& state) const {
  double total = std::accumulate(state.cell_loglik.begin(), state.cell_loglik.end(), 0.0);
  for (const auto& cell : state.cells) total += cell_prior(cell, state.hypers);
  for (std::size_t j = 0; j < layout_.populations.size(); ++j) {
    total += hyper_prior(state.hypers[2 * j]) + hyper_prior(state.hypers[2 * j + 1]);
  }
  return total + kappa_prior(state.kappa);
}

void HierarchicalModel::refresh_cache(ChainState& state) const {
  state.cell_loglik.resize(state.cells.size());
  for (std::size_t i = 0; i < state.cells.size(); ++i) {
    state.cell_loglik[i] = cell_loglik(i, state.cells[i], state.kappa);
  }
}

ChainState initial_state(const HierarchicalModel& model, double kappa_init) {
  if (!(kappa_init > 0.0)) throw InputError("initial kappa must be positive");
  const ExperimentLayout& layout = model.layout();
  ChainState state;
  state.kappa = kappa_init;
  for (const CellSeries& series : model.data().cells) {
    std::vector<double> t(series.times.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = series.times[k] - series.times.front();
    const std::vector<double>& y = series.values;
    double var_y = 0.0;
    {
      const double m = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
      for (double v : y) var_y += (v - m) * (v - m);
      var_y /= static_cast<double>(y.size());
    }
    std::vector<double> cell(layout.cell.size());
    if (layout.experiment == Experiment::translation) {
      const DecayFit f = fit_decay(t, y);
      cell[tl::delta2] = f.delta;
      cell[tl::tau2_tilde] = f.synthesis;
      cell[tl::phi2_0_tilde] = f.level0;
      cell[tl::sigma_u2] = std::max(f.sse / static_cast<double>(y.size()), 1e-3 * var_y + 1e-6);
    } else {
      const double delta2 = model.priors().delta2_prior ? model.priors().delta2_prior->mean : 0.5;
      const TwoStageFit f = fit_two_stage(t, y, delta2);
      cell[tc::delta1] = f.delta1;
      cell[tc::delta2] = delta2;
      cell[tc::tau1_tilde] = f.tau1_tilde;
      cell[tc::alpha_tilde] = 10.0 * kappa_init;
      cell[tc::phi1_0_tilde] = f.phi1_0_tilde;
      cell[tc::phi2_0_tilde] = f.phi2_0_tilde;
      cell[tc::sigma_u2] = std::max(f.sse / static_cast<double>(y.size()), 1e-3 * var_y + 1e-6);
    }
    state.cells.push_back(std::move(cell));
  }

  state.hypers.assign(layout.hyper_count(), 1.0);
  for (std::size_t k = 0; k < layout.cell.size(); ++k) {
    if (layout.cell[k].prior != CellPriorKind::hierarchical) continue;
    std::vector<double> v;
    for (const auto& cell : state.cells) v.push_back(cell[k]);
    const double mean = sample_mean(v);
    const double var = v.size() > 1 ? std::max(sample_variance(v), 0.01 * mean * mean) : 0.25 * mean * mean;
    state.hypers[2 * layout.cell[k].population] = mean;
    state.hypers[2 * layout.cell[k].population + 1] = var;
  }
  model.refresh_cache(state);
  return state;
}

// ---------------------------------------------------------------------------

HierarchicalSampler::HierarchicalSampler(const HierarchicalModel& model, ChainState initial,
                                         SamplerSettings settings, std::uint64_t seed)
    : model_(model),
      state_(std::move(initial)),
      settings_(settings),
      rho_(0.0),
      master_(make_stream(seed, 0)) {
  const ExperimentLayout& layout = model_.layout();
  if (state_.cells.size() != model_.cell_count()) throw InputError("chain state does not match the dataset");
  if (state_.hypers.size() != layout.hyper_count()) throw InputError("chain state has the wrong number of hyperparameters");
  if (settings_.cell_kernel == KernelKind::multiple_try) {
    rho_ = settings_.rho.value_or(default_antithetic_rho(settings_.m_try));
    if (settings_.m_try < 2) throw InputError("multiple-try Metropolis needs m_try >= 2");
  }
  if (!(settings_.initial_step > 0.0)) throw InputError("initial step size must be positive");

  const auto make_block = [&](std::vector<std::size_t> indices, double step) {
    BlockState b;
    const std::vector<double> steps(indices.size(), step);
    b.proposal = BlockProposal::diagonal(indices, std::vector<bool>(indices.size(), true), steps);
    b.adapter = StepSizeAdapter(indices.size());
    b.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(indices.size()));
    b.scatter = Eigen::MatrixXd::Zero(b.mean.size(), b.mean.size());
    return b;
  };

  for (std::size_t i = 0; i < model_.cell_count(); ++i) {
    cell_rngs_.push_back(make_stream(seed, 1 + i));
    std::vector<BlockState> blocks;
    for (const auto& idx : layout.blocks) blocks.push_back(make_block(idx, settings_.initial_step));
    cell_blocks_.push_back(std::move(blocks));
  }
  for (const auto& idx : layout.blocks) {
    std::string name;
    for (std::size_t k : idx) name += (name.empty() ? "" : "+") + layout.cell[k].name;
    cell_counters_.push_back({name});
  }
  for (std::size_t j = 0; j < layout.populations.size(); ++j) {
    hyper_blocks_.push_back(make_block({0, 1}, 0.1));
  }
  kappa_block_ = make_block({0}, 0.1);

  if (state_.cell_loglik.size() != state_.cells.size()) model_.refresh_cache(state_);
  if (!std::isfinite(model_.cached_log_posterior(state_))) {
    throw NumericalError("initial chain state has a non-finite log posterior");
  }
}

double HierarchicalSampler::safe_cell_loglik(std::size_t cell, std::span<const double> params, double kappa) {
  try {
    const double v = model_.cell_loglik(cell, params, kappa);
    if (std::isfinite(v)) return v;
  } catch (const NumericalError&) {
  } catch (const std::domain_error&) {
  }
  ++numerical_rejections_;
  return kNegInf;
}

void HierarchicalSampler::learn_covariance(BlockState& block, std::span<const double> values) {
  const std::size_t freeze = settings_.adaptation.freeze;
  if (block.proposal.dimension() < 2 || block.adapter.frozen() || sweeps_ < freeze / 4) return;
  Eigen::VectorXd u(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) u(static_cast<Eigen::Index>(k)) = std::log(values[k]);
  ++block.count;
  const Eigen::VectorXd delta = u - block.mean;
  block.mean += delta / static_cast<double>(block.count);
  block.scatter += delta * (u - block.mean).transpose();

  const std::size_t window = settings_.adaptation.window;
  const std::size_t d = block.proposal.dimension();
  if (window == 0 || (sweeps_ + 1) % window != 0 || block.count < std::max<std::size_t>(100, 20 * d)) return;
  Eigen::MatrixXd cov = block.scatter / static_cast<double>(block.count - 1);
  cov.diagonal().array() += 1e-10 + 1e-6 * cov.diagonal().mean();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return;
  block.proposal.factor = llt.matrixL().toDenseMatrix() * (2.38 / std::sqrt(static_cast<double>(d)));
  if (!block.learned) block.proposal.scale = 1.0;
  block.learned = true;
}

void HierarchicalSampler::update_cell(std::size_t i) {
  std::vector<double>& params = state_.cells[i];
  Rng& rng = cell_rngs_[i];
  for (std::size_t b = 0; b < cell_blocks_[i].size(); ++b) {
    BlockState& block = cell_blocks_[i][b];
    std::vector<std::pair<std::vector<double>, double>> evaluated;
    const LogDensity target = [&](std::span<const double> x) {
      const double prior = model_.cell_prior(x, state_.hypers);
      if (!std::isfinite(prior)) return kNegInf;
      const double ll = safe_cell_loglik(i, x, state_.kappa);
      if (!std::isfinite(ll)) return kNegInf;
      evaluated.emplace_back(std::vector<double>(x.begin(), x.end()), ll);
      return prior + ll;
    };
    const double current = state_.cell_loglik[i] + model_.cell_prior(params, state_.hypers);
    const StepResult r = settings_.cell_kernel == KernelKind::multiple_try
                             ? mtm_antithetic_step(params, current, target, block.proposal, settings_.m_try, rho_, rng)
                             : mh_step(params, current, target, block.proposal, rng);
    if (r.accepted) {
      for (const auto& [x, ll] : evaluated) {
        if (x == params) {
          state_.cell_loglik[i] = ll;
          break;
        }
      }
    }
    block.adapter.record(r.accepted);
    ++cell_counters_[b].attempts;
    if (r.accepted) ++cell_counters_[b].accepts;

    std::vector<double> values;
    for (std::size_t k : block.proposal.indices) values.push_back(params[k]);
    learn_covariance(block, values);
  }
}

void HierarchicalSampler::update_hypers() {
  for (std::size_t j = 0; j < hyper_blocks_.size(); ++j) {
    BlockState& block = hyper_blocks_[j];
    std::vector<double> h{state_.hypers[2 * j], state_.hypers[2 * j + 1]};
    const LogDensity target = [&](std::span<const double> x) {
      const double prior = model_.hyper_prior(x[0]) + model_.hyper_prior(x[1]);
      if (!std::isfinite(prior)) return kNegInf;
      return prior + model_.population_log_density(j, x[0], x[1], state_);
    };
    const double current = target(h);
    const StepResult r = mh_step(h, current, target, block.proposal, master_);
    state_.hypers[2 * j] = h[0];
    state_.hypers[2 * j + 1] = h[1];
    block.adapter.record(r.accepted);
    ++hyper_counter_.attempts;
    if (r.accepted) ++hyper_counter_.accepts;
    learn_covariance(block, h);
  }
}

void HierarchicalSampler::update_kappa() {
  std::vector<double> k{state_.kappa};
  std::vector<double> last_logliks;
  double last_kappa = 0.0;
  const LogDensity target = [&](std::span<const double> x) {
    const double prior = model_.kappa_prior(x[0]);
    if (!std::isfinite(prior)) return kNegInf;
    std::vector<double> lls(state_.cells.size());
    double total = prior;
    for (std::size_t i = 0; i < lls.size(); ++i) {
      lls[i] = safe_cell_loglik(i, state_.cells[i], x[0]);
      if (!std::isfinite(lls[i])) return kNegInf;
      total += lls[i];
    }
    last_logliks = std::move(lls);
    last_kappa = x[0];
    return total;
  };
  const double current =
      std::accumulate(state_.cell_loglik.begin(), state_.cell_loglik.end(), 0.0) + model_.kappa_prior(state_.kappa);
  const StepResult r = mh_step(k, current, target, kappa_block_.proposal, master_);
  if (r.accepted && last_kappa == k[0]) {
    state_.kappa = k[0];
    state_.cell_loglik = last_logliks;
  }
  kappa_block_.adapter.record(r.accepted);
  ++kappa_counter_.attempts;
  if (r.accepted) ++kappa_counter_.accepts;
}

void HierarchicalSampler::sweep() {
  if (settings_.update_cells) {
    for (std::size_t i = 0; i < state_.cells.size(); ++i) update_cell(i);
  }
  if (settings_.update_hypers) update_hypers();
  if (settings_.update_kappa) update_kappa();

  const AdaptationConfig& a = settings_.adaptation;
  for (auto& blocks : cell_blocks_) {
    for (auto& b : blocks) b.adapter.end_sweep(sweeps_, a, b.proposal.scale);
  }
  for (auto& b : hyper_blocks_) b.adapter.end_sweep(sweeps_, a, b.proposal.scale);
  kappa_block_.adapter.end_sweep(sweeps_, a, kappa_block_.proposal.scale);
  ++sweeps_;
}

std::vector<AcceptanceCounter> HierarchicalSampler::acceptance() const {
  std::vector<AcceptanceCounter> out = cell_counters_;
  out.push_back(hyper_counter_);
  out.push_back(kappa_counter_);
  return out;
}

bool HierarchicalSampler::adaptation_frozen() const {
  for (const auto& blocks : cell_blocks_) {
    for (const auto& b : blocks) {
      if (!b.adapter.frozen()) return false;
    }
  }
  for (const auto& b : hyper_blocks_) {
    if (!b.adapter.frozen()) return false;
  }
  return kappa_block_.adapter.frozen();
}

// ---------------------------------------------------------------------------

void FitConfig::validate() const {
  if (iterations == 0) throw InputError("iterations must be positive");
  if (burn_in_sweeps() >= iterations) throw InputError("chain length must exceed burn-in");
  if (thin == 0) throw InputError("thinning factor must be positive");
  if (!(kappa_init > 0.0)) throw InputError("initial kappa must be positive");
  if (!(initial_step > 0.0)) throw InputError("initial step size must be positive");
}

std::vector<std::string> chain_columns(const HierarchicalModel& model) {
  const ExperimentLayout& layout = model.layout();
  std::vector<std::string> names;
  for (const auto& p : layout.populations) {
    names.push_back("mu_" + p);
    names.push_back("var_" + p);
  }
  names.push_back("kappa");
  if (layout.experiment == Experiment::translation) {
    names.push_back("mu_tau2");
  } else {
    names.push_back("mu_alpha");
    names.push_back("mu_tau1");
  }
  for (const auto& cell : model.data().cells) {
    for (const auto& p : layout.cell) names.push_back(cell.name + "." + p.name);
  }
  return names;
}

namespace {

std::vector<double> flatten(const HierarchicalModel& model, const ChainState& s) {
  std::vector<double> row(s.hypers.begin(), s.hypers.end());
  row.push_back(s.kappa);
  const ExperimentLayout& layout = model.layout();
  const auto hyper_mean = [&](const std::string& name) {
    for (std::size_t j = 0; j < layout.populations.size(); ++j) {
      if (layout.populations[j] == name) return s.hypers[2 * j];
    }
    throw std::logic_error("missing population " + name);
  };
  if (layout.experiment == Experiment::translation) {
    row.push_back(hyper_mean("tau2_tilde") / s.kappa);
  } else {
    row.push_back(hyper_mean("alpha_tilde") / s.kappa);
    row.push_back(hyper_mean("tau1_tilde") / hyper_mean("alpha_tilde"));
  }
  for (const auto& cell : s.cells) row.insert(row.end(), cell.begin(), cell.end());
  return row;
}

}  // namespace

FitResult fit(Experiment kind, const MultiCellDataset& data, const FitConfig& config) {
  config.validate();
  if (data.empty()) throw InputError("dataset contains no cells");
  HierarchicalModel model(kind, data, config.priors);
  model.set_use_likelihood(config.use_likelihood);

  const std::size_t burn_in = config.burn_in_sweeps();
  SamplerSettings settings;
  settings.cell_kernel = config.cell_kernel.value_or(
      kind == Experiment::translation ? KernelKind::metropolis_hastings : KernelKind::multiple_try);
  settings.m_try = config.m_try;
  settings.rho = config.rho;
  settings.initial_step = config.initial_step;
  settings.adaptation = config.adaptation;
  if (settings.adaptation.freeze == 0) settings.adaptation.freeze = burn_in;

  FitResult result;
  result.experiment = kind;
  result.chain.names = chain_columns(model);
  result.chain.seed = config.seed;
  result.chain.thin = config.thin;
  result.chain.burn_in = burn_in;

  HierarchicalSampler sampler(model, initial_state(model, config.kappa_init), settings, config.seed);
  for (std::size_t sweep = 0; sweep < config.iterations; ++sweep) {
    try {
      sampler.sweep();
      if (sweep >= burn_in && (sweep - burn_in) % config.thin == 0) {
        const double lp = model.cached_log_posterior(sampler.state());
        if (!std::isfinite(lp)) throw NumericalError("log posterior became non-finite at sweep " + std::to_string(sweep));
        result.chain.append(flatten(model, sampler.state()), lp);
      }
    } catch (const NumericalError& e) {
      result.failed = true;
      result.failure = e.what();
      break;
    }
  }
  result.chain.acceptance = sampler.acceptance();
  result.numerical_rejections = sampler.numerical_rejections();
  result.final_state = sampler.state();
  if (result.chain.rows() > 0) result.summary = summarize_chain(result.chain);
  if (result.chain.rows() >= 100) {
    for (const auto& row : result.summary) {
      const bool hyper = row.name.rfind("mu_", 0) == 0 || row.name.rfind("var_", 0) == 0 || row.name == "kappa";
      if (hyper && std::abs(row.geweke_z) > 3.0) {
        result.warnings.push_back("Geweke |z| > 3 for " + row.name + " (z = " + std::to_string(row.geweke_z) + ")");
      }
    }
  }
  if (result.numerical_rejections > 0) {
    result.warnings.push_back(std::to_string(result.numerical_rejections) +
                              " proposals rejected after numerical likelihood failures");
  }
  return result;
}

FitResult fit_translation(const MultiCellDataset& data, const FitConfig& config) {
  return fit(Experiment::translation, data, config);
}

FitResult fit_transcription(const MultiCellDataset& data, FitConfig config, GammaMeanVar delta2_prior) {
  config.priors.delta2_prior = delta2_prior;
  return fit(Experiment::transcription, data, config);
}

}  // namespace lnainfer
