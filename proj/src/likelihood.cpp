#include "lnainfer/likelihood.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_observations(std::span<const double> obs, const StateSpaceSequence& ss) {
  if (obs.size() != ss.observation_count()) {
    throw InputError("observation count " + std::to_string(obs.size()) +
                     " does not match the state-space length " +
                     std::to_string(ss.observation_count()));
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs[i])) throw InputError("observation " + std::to_string(i) + " is not finite");
  }
}

double run_filter(std::span<const double> obs, const StateSpaceSequence& ss, FilterOutput* out) {
  ss.validate();
  check_observations(obs, ss);
  const Vec& h = ss.measurement;
  Vec x = ss.initial_mean;
  Mat p = ss.initial_covariance;
  double loglik = 0.0;
  if (out != nullptr) {
    out->prediction_errors.reserve(obs.size());
    out->prediction_variances.reserve(obs.size());
    out->filtered_means.reserve(obs.size());
    out->filtered_covariances.reserve(obs.size());
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i > 0) {
      const LnaTransition& tr = ss.transitions[i - 1];
      x = tr.F * x + tr.c;
      p = tr.F * p * tr.F.transpose() + tr.sigma_eps;
    }
    const Vec ph = p * h;
    const double r = h.dot(ph) + ss.sigma_u2;
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw NumericalError("prediction error variance is not positive at step " + std::to_string(i));
    }
    const double e = obs[i] - h.dot(x);
    loglik += -0.5 * (kLog2Pi + std::log(r) + e * e / r);
    const Vec gain = ph / r;
    x += gain * e;
    p -= gain * ph.transpose();
    p = 0.5 * (p + p.transpose());
    if (out != nullptr) {
      out->prediction_errors.push_back(e);
      out->prediction_variances.push_back(r);
      out->filtered_means.push_back(x);
      out->filtered_covariances.push_back(p);
    }
  }
  if (!std::isfinite(loglik)) throw NumericalError("log-likelihood is not finite");
  if (out != nullptr) out->loglik = loglik;
  return loglik;
}

template <int N>
struct FixedKernel {
  using M = Eigen::Matrix<double, N, N>;
  using V = Eigen::Matrix<double, N, 1>;
  double delta = 0.0;
  M F;
  V c_unit;
  M base;
  std::array<M, N> slope;
};

template <int N>
Eigen::Matrix<double, N, N> fixed_exp(const LinearKinetics& k, double u) {
  Eigen::Matrix<double, N, N> f;
  if constexpr (N == 1) {
    f(0, 0) = std::exp(-k.delta2 * u);
  } else {
    f(0, 0) = std::exp(-k.delta1 * u);
    f(0, 1) = 0.0;
    f(1, 0) = k.alpha * exp_difference_quotient(k.delta1, k.delta2, u);
    f(1, 1) = std::exp(-k.delta2 * u);
  }
  return f;
}

template <int N>
FixedKernel<N> make_kernel(const LinearKinetics& k, const Eigen::Matrix<double, N, 1>& stationary, double delta) {
  using M = typename FixedKernel<N>::M;
  using V = typename FixedKernel<N>::V;
  static const auto rule = [] {
    using Gauss = boost::math::quadrature::gauss<double, 20>;
    std::array<std::pair<double, double>, 20> r{};
    std::size_t i = 0;
    for (std::size_t a = 0; a < Gauss::abscissa().size(); ++a) {
      r[i++] = {-Gauss::abscissa()[a], Gauss::weights()[a]};
      r[i++] = {Gauss::abscissa()[a], Gauss::weights()[a]};
    }
    return r;
  }();
  FixedKernel<N> kern;
  kern.delta = delta;
  kern.F = fixed_exp<N>(k, delta);
  kern.c_unit = (M::Identity() - kern.F) * stationary;
  V d_fixed;
  M slope_map = M::Zero();
  d_fixed(0) = 2.0 * k.synthesis;
  if constexpr (N == 1) {
    slope_map(0, 0) = k.delta2;
  } else {
    d_fixed(1) = 2.0 * k.alpha * stationary(0);
    slope_map << k.delta1, 0.0, k.alpha, k.delta2;
  }
  kern.base = M::Zero();
  for (auto& s : kern.slope) s = M::Zero();
  const double fastest = N == 1 ? k.delta2 : std::max(k.delta1, k.delta2);
  const std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fastest * delta)));
  const double h = delta / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double left = h * static_cast<double>(p);
    for (const auto& [node, weight] : rule) {
      const double s = left + 0.5 * h * (node + 1.0);
      const double w = 0.5 * h * weight;
      const M back = fixed_exp<N>(k, delta - s);
      kern.base.noalias() += w * back * d_fixed.asDiagonal() * back.transpose();
      const M spread = slope_map * fixed_exp<N>(k, s);
      for (int c = 0; c < N; ++c) {
        kern.slope[c].noalias() += w * back * spread.col(c).asDiagonal() * back.transpose();
      }
    }
  }
  return kern;
}

template <int N>
Eigen::Matrix<double, N, N> clip_psd(const Eigen::Matrix<double, N, N>& m) {
  Eigen::Matrix<double, N, N> s = 0.5 * (m + m.transpose());
  if constexpr (N == 1) {
    if (s(0, 0) >= 0.0) return s;
  } else {
    if (s(0, 0) >= 0.0 && s(1, 1) >= 0.0 && s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0) >= 0.0) return s;
  }
  const Mat general = s;
  return symmetrize_psd(general);
}

template <int N>
double fused_loglik(const LinearKinetics& k, std::span<const double> times, std::span<const double> obs,
                    double kappa, double sigma_u2, double omega) {
  using M = Eigen::Matrix<double, N, N>;
  using V = Eigen::Matrix<double, N, 1>;
  const V stationary = k.stationary();
  V phi = k.phi0;
  V h = V::Zero();
  h(N - 1) = kappa;
  V x = omega * phi;
  M p = M::Zero();
  std::array<FixedKernel<N>, 4> cache;
  std::size_t cached = 0;
  std::size_t next_slot = 0;
  double loglik = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i > 0) {
      const double delta = times[i] - times[i - 1];
      const FixedKernel<N>* kern = nullptr;
      for (std::size_t c = 0; c < cached; ++c) {
        if (std::abs(cache[c].delta - delta) <= 1e-12 * delta) {
          kern = &cache[c];
          break;
        }
      }
      if (kern == nullptr) {
        cache[next_slot] = make_kernel<N>(k, stationary, delta);
        kern = &cache[next_slot];
        next_slot = (next_slot + 1) % cache.size();
        cached = std::min(cached + 1, cache.size());
      }
      M sigma = kern->base;
      const V deviation = phi - stationary;
      for (int c = 0; c < N; ++c) sigma += deviation(c) * kern->slope[c];
      x = kern->F * x + omega * kern->c_unit;
      p = kern->F * p * kern->F.transpose() + clip_psd<N>(omega * sigma);
      phi = kern->F * phi + kern->c_unit;
    }
    const V ph = p * h;
    const double r = h.dot(ph) + sigma_u2;
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw NumericalError("prediction error variance is not positive at step " + std::to_string(i));
    }
    const double e = obs[i] - h.dot(x);
    loglik += -0.5 * (kLog2Pi + std::log(r) + e * e / r);
    const V gain = ph / r;
    x += gain * e;
    p -= gain * ph.transpose();
    p = 0.5 * (p + p.transpose());
  }
  if (!std::isfinite(loglik)) throw NumericalError("log-likelihood is not finite");
  return loglik;
}

}  // namespace

double lna_loglik(const LinearKinetics& kinetics, std::span<const double> times, std::span<const double> obs,
                  double kappa, double sigma_u2, double omega) {
  if (times.empty()) throw InputError("at least one observation time is required");
  if (times.size() != obs.size()) throw InputError("times and observations differ in length");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::domain_error("kappa must be positive");
  if (!(omega > 0.0)) throw std::domain_error("omega must be positive");
  if (!(sigma_u2 > 0.0) || !std::isfinite(sigma_u2)) throw InputError("sigma_u2 must be positive");
  kinetics.validate();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) throw InputError("observation times must be strictly increasing");
    if (!std::isfinite(obs[i])) throw InputError("observation " + std::to_string(i) + " is not finite");
  }
  return kinetics.species == 1 ? fused_loglik<1>(kinetics, times, obs, kappa, sigma_u2, omega)
                               : fused_loglik<2>(kinetics, times, obs, kappa, sigma_u2, omega);
}

void StateSpaceSequence::validate() const {
  const auto d = measurement.size();
  if (d != 1 && d != 2) throw InputError("measurement vector must have length 1 or 2");
  if (initial_mean.size() != d || initial_covariance.rows() != d || initial_covariance.cols() != d) {
    throw InputError("initial state dimensions do not match the measurement vector");
  }
  if (!(sigma_u2 > 0.0) || !std::isfinite(sigma_u2)) throw InputError("sigma_u2 must be positive");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& tr = transitions[i];
    if (tr.F.rows() != d || tr.c.size() != d || tr.sigma_eps.rows() != d) {
      throw InputError("transition dimensions do not match the measurement vector");
    }
    if (i > 0 && std::abs(tr.t_begin - transitions[i - 1].t_end) > 1e-9 * (1.0 + std::abs(tr.t_begin))) {
      throw InputError("transitions are not contiguous in time");
    }
  }
}

StateSpaceSequence build_state_space(const LinearKinetics& kinetics, std::span<const double> times,
                                     double kappa, double sigma_u2, double omega) {
  if (times.empty()) throw InputError("at least one observation time is required");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::domain_error("kappa must be positive");
  if (!(omega > 0.0)) throw std::domain_error("omega must be positive");
  kinetics.validate();
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InputError("observation times must be strictly increasing");
  }
  const auto d = static_cast<Eigen::Index>(kinetics.species);

  StateSpaceSequence ss;
  ss.measurement = Vec::Zero(d);
  ss.measurement(d - 1) = kappa;
  ss.sigma_u2 = sigma_u2;
  ss.initial_mean = omega * kinetics.phi0;
  ss.initial_covariance = Mat::Zero(d, d);
  ss.transitions.reserve(times.size() - 1);

  std::vector<TransitionKernel> kernels;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double delta = times[i + 1] - times[i];
    const TransitionKernel* kernel = nullptr;
    for (const auto& k : kernels) {
      if (std::abs(k.delta() - delta) <= 1e-12 * delta) {
        kernel = &k;
        break;
      }
    }
    if (kernel == nullptr) {
      kernels.emplace_back(kinetics, delta);
      kernel = &kernels.back();
    }
    MacroscopicState at = solve_macroscopic(kinetics, times[i] - times[0]);
    LnaTransition tr = kernel->at(at, omega);
    tr.t_begin = times[i];
    tr.t_end = times[i + 1];
    ss.transitions.push_back(std::move(tr));
  }
  return ss;
}

FilterOutput kalman_filter(std::span<const double> obs, const StateSpaceSequence& ss) {
  FilterOutput out;
  run_filter(obs, ss, &out);
  return out;
}

double kalman_loglik(std::span<const double> obs, const StateSpaceSequence& ss) {
  return run_filter(obs, ss, nullptr);
}

double joint_gaussian_loglik(std::span<const double> obs, const StateSpaceSequence& ss) {
  ss.validate();
  check_observations(obs, ss);
  const Eigen::Index t_count = static_cast<Eigen::Index>(obs.size());
  if (t_count > 500) throw InputError("joint Gaussian likelihood is limited to 500 observations");
  const Eigen::Index d = ss.measurement.size();
  const Eigen::Index n = t_count * d;

  // B X = C + eps with B block lower-bidiagonal (identity diagonal, -F_i below).
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd c(n);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  c.segment(0, d) = ss.initial_mean;
  s.block(0, 0, d, d) = ss.initial_covariance;
  for (Eigen::Index i = 0; i + 1 < t_count; ++i) {
    const LnaTransition& tr = ss.transitions[static_cast<std::size_t>(i)];
    b.block((i + 1) * d, i * d, d, d) = -tr.F;
    c.segment((i + 1) * d, d) = tr.c;
    s.block((i + 1) * d, (i + 1) * d, d, d) = tr.sigma_eps;
  }
  const Eigen::MatrixXd b_inv =
      b.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::VectorXd mean_x = b_inv * c;
  const Eigen::MatrixXd cov_x = b_inv * s * b_inv.transpose();

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(t_count, n);
  for (Eigen::Index i = 0; i < t_count; ++i) k.block(i, i * d, 1, d) = ss.measurement.transpose();

  const Eigen::VectorXd mean_y = k * mean_x;
  Eigen::MatrixXd cov_y = k * cov_x * k.transpose();
  cov_y.diagonal().array() += ss.sigma_u2;
  cov_y = 0.5 * (cov_y + cov_y.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(cov_y);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("joint observation covariance is not positive definite");
  }
  Eigen::VectorXd resid(t_count);
  for (Eigen::Index i = 0; i < t_count; ++i) resid(i) = obs[static_cast<std::size_t>(i)] - mean_y(i);
  const Eigen::VectorXd z = llt.matrixL().solve(resid);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double value = -0.5 * (static_cast<double>(t_count) * kLog2Pi + log_det + z.squaredNorm());
  if (!std::isfinite(value)) throw NumericalError("joint Gaussian log-likelihood is not finite");
  return value;
}

ResidualDiagnostics standardized_residuals(const FilterOutput& filter) {
  ResidualDiagnostics out;
  const std::size_t n = filter.prediction_errors.size();
  out.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.residuals[i] = filter.prediction_errors[i] / std::sqrt(filter.prediction_variances[i]);
  }
  if (n < 2) return out;

  double mean = 0.0;
  for (double r : out.residuals) mean += r;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double r : out.residuals) {
    const double d = r - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double nn = static_cast<double>(n);
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;

  out.lags = std::min<std::size_t>(10, n / 5);
  out.autocorrelations.assign(out.lags, 0.0);
  if (m2 > 0.0) {
    double q = 0.0;
    for (std::size_t lag = 1; lag <= out.lags; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) acc += (out.residuals[i] - mean) * (out.residuals[i + lag] - mean);
      const double rho = acc / nn / m2;
      out.autocorrelations[lag - 1] = rho;
      q += rho * rho / (nn - static_cast<double>(lag));
    }
    out.ljung_box = nn * (nn + 2.0) * q;
    if (out.lags > 0) {
      boost::math::chi_squared chi(static_cast<double>(out.lags));
      out.ljung_box_pvalue = boost::math::cdf(boost::math::complement(chi, out.ljung_box));
    }
    out.skewness = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    out.jarque_bera = nn / 6.0 * (out.skewness * out.skewness + 0.25 * out.excess_kurtosis * out.excess_kurtosis);
    boost::math::chi_squared chi2(2.0);
    out.jarque_bera_pvalue = boost::math::cdf(boost::math::complement(chi2, out.jarque_bera));
  }
  return out;
}

}  // namespace lnainfer
