#include "lnainfer/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

double log_sum_exp(std::span<const double> x) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : x) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - top);
  return top + std::log(sum);
}

// Sampling coordinates of the block at `state`.
Eigen::VectorXd block_coordinates(const std::vector<double>& state, const BlockProposal& p) {
  Eigen::VectorXd u(p.dimension());
  for (std::size_t j = 0; j < p.dimension(); ++j) {
    const double x = state[p.indices[j]];
    u(j) = p.log_scale[j] ? std::log(x) : x;
  }
  return u;
}

// Writes coordinates `u` into `state` and returns the log-Jacobian
// sum of u_j over log-scale coordinates. Coordinates equal to `reference`
// keep the exact value from `reference_state`.
double write_coordinates(std::vector<double>& state, const BlockProposal& p, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& reference, const std::vector<double>& reference_state) {
  double log_jac = 0.0;
  for (std::size_t j = 0; j < p.dimension(); ++j) {
    const std::size_t idx = p.indices[j];
    if (u(j) == reference(j)) {
      state[idx] = reference_state[idx];
    } else {
      state[idx] = p.log_scale[j] ? std::exp(u(j)) : u(j);
    }
    if (p.log_scale[j]) log_jac += u(j);
  }
  return log_jac;
}

double evaluate(const LogDensity& target, const std::vector<double>& state) {
  const double v = target(state);
  return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

// rows x d matrix whose columns are exchangeable standard normals with
// pairwise correlation rho.
Eigen::MatrixXd exchangeable_normals(std::size_t rows, std::size_t d, double rho, Rng& rng) {
  Eigen::MatrixXd z(rows, d);
  const double n = static_cast<double>(rows);
  const double spread = std::sqrt(1.0 - rho);
  const double common = std::sqrt(std::max(0.0, 1.0 + (n - 1.0) * rho));
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      z(r, c) = standard_normal(rng);
      mean += z(r, c);
    }
    mean /= n;
    for (std::size_t r = 0; r < rows; ++r) z(r, c) = spread * (z(r, c) - mean) + common * mean;
  }
  return z;
}

}  // namespace

BlockProposal BlockProposal::diagonal(std::vector<std::size_t> indices, std::vector<bool> log_scale,
                                      std::span<const double> step_sizes) {
  if (indices.size() != log_scale.size() || indices.size() != step_sizes.size() || indices.empty()) {
    throw InputError("block proposal needs one step size and scale flag per index");
  }
  BlockProposal p;
  p.indices = std::move(indices);
  p.log_scale = std::move(log_scale);
  p.factor = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.indices.size()),
                                   static_cast<Eigen::Index>(p.indices.size()));
  for (std::size_t j = 0; j < step_sizes.size(); ++j) {
    if (!(step_sizes[j] > 0.0)) throw InputError("step sizes must be positive");
    p.factor(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = step_sizes[j];
  }
  return p;
}

StepResult mh_step(std::vector<double>& state, double current_log_target, const LogDensity& target,
                   const BlockProposal& proposal, Rng& rng) {
  if (!std::isfinite(current_log_target)) {
    throw std::logic_error("Metropolis-Hastings started from a state outside the support");
  }
  const auto d = static_cast<Eigen::Index>(proposal.dimension());
  const std::vector<double> saved = state;
  const Eigen::VectorXd u = block_coordinates(state, proposal);
  Eigen::VectorXd z(d);
  for (Eigen::Index j = 0; j < d; ++j) z(j) = standard_normal(rng);
  const Eigen::VectorXd u_new = u + proposal.scale * (proposal.factor * z);

  double log_jac_old = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (proposal.log_scale[static_cast<std::size_t>(j)]) log_jac_old += u(j);
  }
  const double log_jac_new = write_coordinates(state, proposal, u_new, u, saved);
  const double proposed = evaluate(target, state);
  const double log_ratio = proposed - current_log_target + log_jac_new - log_jac_old;
  if (std::isfinite(proposed) && std::log(uniform01(rng)) < log_ratio) {
    return {true, proposed};
  }
  state = saved;
  return {false, current_log_target};
}

double default_antithetic_rho(std::size_t m_try) {
  if (m_try < 2) throw InputError("multiple-try Metropolis needs m_try >= 2");
  return -1.0 / static_cast<double>(m_try - 1);
}

StepResult mtm_antithetic_step(std::vector<double>& state, double current_log_target,
                               const LogDensity& target, const BlockProposal& proposal,
                               std::size_t m_try, double rho, Rng& rng) {
  if (m_try < 2) throw InputError("multiple-try Metropolis needs m_try >= 2");
  if (!(rho <= 0.0) || rho < default_antithetic_rho(m_try) - 1e-12) {
    throw InputError("antithetic correlation must lie in [-1/(m_try-1), 0]");
  }
  if (!std::isfinite(current_log_target)) {
    throw std::logic_error("multiple-try Metropolis started from a state outside the support");
  }
  const std::size_t d = proposal.dimension();
  const std::vector<double> saved = state;
  const Eigen::VectorXd u = block_coordinates(state, proposal);
  const Eigen::MatrixXd step = proposal.scale * proposal.factor;

  // Forward tries.
  const Eigen::MatrixXd z = exchangeable_normals(m_try, d, rho, rng);
  std::vector<Eigen::VectorXd> tries(m_try);
  std::vector<double> log_w(m_try);
  std::vector<std::vector<double>> try_states(m_try);
  for (std::size_t i = 0; i < m_try; ++i) {
    tries[i] = u + step * z.row(static_cast<Eigen::Index>(i)).transpose();
    const double log_jac = write_coordinates(state, proposal, tries[i], u, saved);
    log_w[i] = evaluate(target, state) + log_jac;
    try_states[i] = state;
  }
  state = saved;
  const double log_forward = log_sum_exp(log_w);
  if (!std::isfinite(log_forward)) return {false, current_log_target};

  // Select a try with probability proportional to its weight.
  std::size_t chosen = m_try;
  const double pick = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < m_try; ++i) {
    if (!std::isfinite(log_w[i])) continue;
    chosen = i;
    cumulative += std::exp(log_w[i] - log_forward);
    if (pick <= cumulative) break;
  }

  // Backward set: the remaining m_try - 1 members, conditional on the set
  // centred at the chosen try containing the current point (offset -z_chosen).
  const std::size_t rest = m_try - 1;
  const Eigen::RowVectorXd anchor = -z.row(static_cast<Eigen::Index>(chosen));
  const double spread = std::sqrt(1.0 - rho);
  const double common = std::sqrt(std::max(0.0, 1.0 + static_cast<double>(rest) * rho));
  Eigen::MatrixXd zb(rest, d);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rest; ++r) {
      zb(r, c) = standard_normal(rng);
      mean += zb(r, c);
    }
    mean /= static_cast<double>(rest);
    for (std::size_t r = 0; r < rest; ++r) {
      zb(r, c) = rho * anchor(c) + spread * ((zb(r, c) - mean) + common * mean);
    }
  }

  std::vector<double> log_wb(m_try);
  double log_jac_current = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (proposal.log_scale[j]) log_jac_current += u(static_cast<Eigen::Index>(j));
  }
  log_wb[rest] = current_log_target + log_jac_current;
  const Eigen::VectorXd& centre = tries[chosen];
  for (std::size_t r = 0; r < rest; ++r) {
    const Eigen::VectorXd back = centre + step * zb.row(static_cast<Eigen::Index>(r)).transpose();
    const double log_jac = write_coordinates(state, proposal, back, u, saved);
    log_wb[r] = evaluate(target, state) + log_jac;
  }
  state = saved;
  const double log_backward = log_sum_exp(log_wb);

  if (std::log(uniform01(rng)) < log_forward - log_backward) {
    state = try_states[chosen];
    double log_jac_chosen = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (proposal.log_scale[j]) log_jac_chosen += tries[chosen](static_cast<Eigen::Index>(j));
    }
    return {true, log_w[chosen] - log_jac_chosen};
  }
  return {false, current_log_target};
}

double adapt_step_size(double scale, double acceptance, double target, std::size_t window_index) {
  const double gain = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, window_index)));
  return scale * std::exp(gain * (acceptance - target));
}

void StepSizeAdapter::end_sweep(std::size_t sweep, const AdaptationConfig& config, double& scale) {
  if (frozen_) return;
  if (sweep + 1 >= config.freeze || config.window == 0) {
    frozen_ = true;
    return;
  }
  if ((sweep + 1) % config.window != 0 || attempts_ == 0) return;
  const double rate = static_cast<double>(accepts_) / static_cast<double>(attempts_);
  scale = adapt_step_size(scale, rate, config.target_for(dimension_), ++windows_);
  attempts_ = 0;
  accepts_ = 0;
}

std::size_t PosteriorChain::column_index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError("chain has no column '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> PosteriorChain::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = values[r * names.size() + j];
  return out;
}

void PosteriorChain::append(std::span<const double> row, double log_post) {
  if (row.size() != names.size()) throw std::logic_error("chain row width mismatch");
  values.insert(values.end(), row.begin(), row.end());
  log_posterior.push_back(log_post);
}

}  // namespace lnainfer
