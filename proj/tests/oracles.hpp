#pragma once

// Independent reference computations used only by tests.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/distributions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/numeric/odeint.hpp>

#include "lnainfer/likelihood.hpp"

namespace oracle {

// One-species birth-death covariance over an interval of length dt, starting
// from zero covariance at phi(0) = tau/delta + v.
inline double birth_death_sigma(double tau, double delta, double v, double dt) {
  return tau / delta * (1.0 - std::exp(-2.0 * delta * dt)) + v * (std::exp(-delta * dt) - std::exp(-2.0 * delta * dt));
}

// Macroscopic ODE integrated numerically.
inline std::vector<double> integrate_macroscopic(const lnainfer::LinearKinetics& k, double t) {
  using State = std::vector<double>;
  State x(k.phi0.data(), k.phi0.data() + k.phi0.size());
  auto rhs = [&](const State& s, State& ds, double) {
    ds.resize(s.size());
    if (k.species == 1) {
      ds[0] = k.synthesis - k.delta2 * s[0];
    } else {
      ds[0] = k.synthesis - k.delta1 * s[0];
      ds[1] = k.alpha * s[0] - k.delta2 * s[1];
    }
  };
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), rhs, x, 0.0, t, 1e-3);
  return x;
}

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) { return a.exp(); }

inline double gamma_logpdf(double x, double mean, double variance) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big m(mean), v(variance), xx(x);
  const Big shape = m * m / v;
  const Big scale = v / m;
  const boost::math::gamma_distribution<Big> law(shape, scale);
  return static_cast<double>(log(boost::math::pdf(law, xx)));
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Joint Gaussian density of all observations from the state-space model,
// assembling Cov(X_i, X_j) = F_{j-1} ... F_i P_i directly.
inline double dense_loglik(const std::vector<double>& y, const lnainfer::StateSpaceSequence& ss) {
  const auto n = static_cast<Eigen::Index>(y.size());
  std::vector<Eigen::MatrixXd> p(y.size());
  std::vector<Eigen::VectorXd> m(y.size());
  p[0] = ss.initial_covariance;
  m[0] = ss.initial_mean;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const auto& tr = ss.transitions[i - 1];
    m[i] = tr.F * m[i - 1] + tr.c;
    p[i] = tr.F * p[i - 1] * tr.F.transpose() + tr.sigma_eps;
  }
  Eigen::MatrixXd cov(n, n);
  Eigen::VectorXd mu(n), yy(n);
  const Eigen::VectorXd h = ss.measurement;
  for (Eigen::Index i = 0; i < n; ++i) {
    mu(i) = h.dot(m[i]);
    yy(i) = y[i];
    Eigen::MatrixXd cross = p[i];  // Cov(X_j, X_i) for j = i, i+1, ...
    for (Eigen::Index j = i; j < n; ++j) {
      if (j > i) cross = ss.transitions[j - 1].F * cross;
      cov(j, i) = cov(i, j) = h.dot(cross * h);
    }
    cov(i, i) += ss.sigma_u2;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(yy - mu);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + logdet + z.squaredNorm());
}

}  // namespace oracle
