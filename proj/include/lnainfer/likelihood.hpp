#pragma once

#include <span>
#include <vector>

#include "lnainfer/lna.hpp"

namespace lnainfer {

/// Linear-Gaussian state-space model for one cell:
///   X_{i+1} = F_i X_i + c_i + eps_i,  Y_i = h' X_i + u_i,  u_i ~ N(0, sigma_u2),
/// with X_1 ~ N(initial_mean, initial_covariance).
struct StateSpaceSequence {
  std::vector<LnaTransition> transitions;
  Vec measurement;
  double sigma_u2 = 1.0;
  Vec initial_mean;
  Mat initial_covariance;

  std::size_t observation_count() const { return transitions.size() + 1; }
  void validate() const;
};

/// LNA state-space model on the observation grid `times` (hours). The
/// kinetics' initial levels refer to times[0]; the initial state is
/// deterministic (zero covariance). Interval kernels are shared between
/// intervals whose lengths agree to 1e-12 relative.
StateSpaceSequence build_state_space(const LinearKinetics& kinetics, std::span<const double> times,
                                     double kappa, double sigma_u2, double omega = 1.0);

struct FilterOutput {
  double loglik = 0.0;
  std::vector<double> prediction_errors;
  std::vector<double> prediction_variances;
  std::vector<Vec> filtered_means;
  std::vector<Mat> filtered_covariances;
};

/// Kalman filter with the prediction error decomposition of the log-likelihood.
FilterOutput kalman_filter(std::span<const double> obs, const StateSpaceSequence& ss);

/// Same log-likelihood as kalman_filter without storing filter history.
double kalman_loglik(std::span<const double> obs, const StateSpaceSequence& ss);

/// Equals kalman_loglik(obs, build_state_space(kinetics, times, kappa,
/// sigma_u2, omega)) up to rounding, using fixed-size arithmetic and a mean
/// recursion instead of stored transitions.
double lna_loglik(const LinearKinetics& kinetics, std::span<const double> times, std::span<const double> obs,
                  double kappa, double sigma_u2, double omega = 1.0);

/// Log-density of Y under the stacked joint Gaussian of all states and
/// observations. Dense O((T d)^3); limited to T <= 500.
double joint_gaussian_loglik(std::span<const double> obs, const StateSpaceSequence& ss);

struct ResidualDiagnostics {
  std::vector<double> residuals;
  std::vector<double> autocorrelations;  // lags 1..lags
  std::size_t lags = 0;
  double ljung_box = 0.0;
  double ljung_box_pvalue = 1.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double jarque_bera = 0.0;
  double jarque_bera_pvalue = 1.0;
};

/// e_i / sqrt(R_i) with Ljung-Box (lags = min(10, T/5)) and Jarque-Bera
/// statistics.
ResidualDiagnostics standardized_residuals(const FilterOutput& filter);

}  // namespace lnainfer
