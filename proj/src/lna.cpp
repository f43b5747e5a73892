#include "lnainfer/lna.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

namespace lnainfer {

namespace {

constexpr std::size_t kGaussOrder = 20;

struct GaussRule {
  std::array<double, kGaussOrder> nodes;    // on [-1, 1]
  std::array<double, kGaussOrder> weights;
};

const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    using Gauss = boost::math::quadrature::gauss<double, kGaussOrder>;
    const auto& x = Gauss::abscissa();
    const auto& w = Gauss::weights();
    GaussRule r{};
    std::size_t k = 0;
    // Boost stores the nonnegative half; order 20 has no node at zero.
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.nodes[k] = -x[i];
      r.weights[k++] = w[i];
      r.nodes[k] = x[i];
      r.weights[k++] = w[i];
    }
    return r;
  }();
  return rule;
}

// E diag(d) E^T
Mat sandwich_diag(const Mat& e, const Vec& d) {
  const auto n = e.rows();
  Mat out(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      double sum = 0.0;
      for (Eigen::Index c = 0; c < n; ++c) sum += e(a, c) * d(c) * e(b, c);
      out(a, b) = sum;
      out(b, a) = sum;
    }
  }
  return out;
}

// Derivative of the diffusion diagonal with respect to phi.
Mat diffusion_slope(const LinearKinetics& k) {
  if (k.species == 1) {
    Mat m(1, 1);
    m(0, 0) = k.delta2;
    return m;
  }
  Mat m(2, 2);
  m << k.delta1, 0.0, k.alpha, k.delta2;
  return m;
}

}  // namespace

LinearKinetics LinearKinetics::from(const TranslationParams& p) {
  LinearKinetics k;
  k.species = 1;
  k.synthesis = p.tau2;
  k.delta2 = p.delta2;
  k.phi0 = Vec::Constant(1, p.phi2_0);
  return k;
}

LinearKinetics LinearKinetics::from(const TranscriptionParams& p) {
  LinearKinetics k;
  k.species = 2;
  k.synthesis = p.synthesis(0.0);
  k.delta1 = p.delta1;
  k.alpha = p.alpha;
  k.delta2 = p.delta2;
  k.phi0.resize(2);
  k.phi0 << p.phi1_0, p.phi2_0;
  return k;
}

LinearKinetics LinearKinetics::from(const ModelParams& p) {
  return std::visit([](const auto& q) { return LinearKinetics::from(q); }, p);
}

void LinearKinetics::validate() const {
  if (species != 1 && species != 2) throw std::domain_error("species count must be 1 or 2");
  if (!(synthesis >= 0.0)) throw std::domain_error("synthesis rate must be nonnegative");
  if (!(delta2 > 0.0)) throw std::domain_error("delta2 must be positive");
  if (species == 2 && !(delta1 > 0.0)) throw std::domain_error("delta1 must be positive");
  if (species == 2 && !(alpha >= 0.0)) throw std::domain_error("alpha must be nonnegative");
  if (phi0.size() != static_cast<Eigen::Index>(species)) {
    throw std::domain_error("phi0 length must equal the species count");
  }
  if ((phi0.array() < 0.0).any() || !phi0.allFinite()) {
    throw std::domain_error("initial levels must be nonnegative");
  }
}

Vec LinearKinetics::stationary() const {
  if (species == 1) return Vec::Constant(1, synthesis / delta2);
  Vec s(2);
  s(0) = synthesis / delta1;
  s(1) = alpha * s(0) / delta2;
  return s;
}

double exp_difference_quotient(double a, double b, double t) {
  const double gap = std::abs(b - a);
  const double lo = std::min(a, b);
  if (gap < 1e-7 * std::max(std::abs(a), std::abs(b))) {
    const double mid = 0.5 * (a + b);
    return t * std::exp(-mid * t);
  }
  return std::exp(-lo * t) * (-std::expm1(-gap * t)) / gap;
}

MacroscopicState solve_macroscopic(const LinearKinetics& k, double t) {
  if (!(t >= 0.0)) throw std::domain_error("time must be nonnegative");
  MacroscopicState out;
  out.t = t;
  if (k.species == 1) {
    const double fixed = k.synthesis / k.delta2;
    out.phi = Vec::Constant(1, fixed + (k.phi0(0) - fixed) * std::exp(-k.delta2 * t));
    return out;
  }
  const double m_fixed = k.synthesis / k.delta1;
  const double m_excess = k.phi0(0) - m_fixed;
  const double p_fixed = k.alpha * m_fixed / k.delta2;
  out.phi.resize(2);
  out.phi(0) = m_fixed + m_excess * std::exp(-k.delta1 * t);
  out.phi(1) = p_fixed + (k.phi0(1) - p_fixed) * std::exp(-k.delta2 * t) +
               k.alpha * m_excess * exp_difference_quotient(k.delta1, k.delta2, t);
  return out;
}

Mat jacobian(const LinearKinetics& k) {
  if (k.species == 1) return Mat::Constant(1, 1, -k.delta2);
  Mat j(2, 2);
  j << -k.delta1, 0.0, k.alpha, -k.delta2;
  return j;
}

Mat diffusion(const LinearKinetics& k, const MacroscopicState& state) {
  if (state.phi.size() != static_cast<Eigen::Index>(k.species)) {
    throw std::domain_error("state length must equal the species count");
  }
  Vec var(k.species);
  if (k.species == 1) {
    var(0) = k.synthesis + k.delta2 * state.phi(0);
  } else {
    var(0) = k.synthesis + k.delta1 * state.phi(0);
    var(1) = k.alpha * state.phi(0) + k.delta2 * state.phi(1);
  }
  if ((var.array() < 0.0).any() || !var.allFinite()) {
    throw std::domain_error("negative argument under the diffusion square root");
  }
  Mat b = Mat::Zero(k.species, k.species);
  for (std::size_t s = 0; s < k.species; ++s) b(s, s) = std::sqrt(var(s));
  return b;
}

Mat matrix_exponential(const Mat& j, double delta) {
  if (j.rows() == 1 && j.cols() == 1) return Mat::Constant(1, 1, std::exp(j(0, 0) * delta));
  if (j.rows() != 2 || j.cols() != 2 || j(0, 1) != 0.0) {
    throw std::domain_error("matrix_exponential expects a 1x1 or lower-triangular 2x2 Jacobian");
  }
  const double d1 = -j(0, 0);
  const double d2 = -j(1, 1);
  Mat f(2, 2);
  f(0, 0) = std::exp(-d1 * delta);
  f(0, 1) = 0.0;
  f(1, 0) = j(1, 0) * exp_difference_quotient(d1, d2, delta);
  f(1, 1) = std::exp(-d2 * delta);
  return f;
}

Mat symmetrize_psd(const Mat& m) {
  Mat s = 0.5 * (m + m.transpose());
  const double tol = 1e-10 * std::max(1.0, s.diagonal().cwiseAbs().sum());
  if (s.rows() == 1) {
    if (s(0, 0) < 0.0 && s(0, 0) > -tol) s(0, 0) = 0.0;
    return s;
  }
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  if (s(0, 0) >= 0.0 && s(1, 1) >= 0.0 && det >= 0.0) return s;
  Eigen::SelfAdjointEigenSolver<Mat> eig;
  eig.computeDirect(s);
  Vec lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < 0.0 && lambda(i) > -tol) lambda(i) = 0.0;
  }
  Mat v = eig.eigenvectors();
  Mat r = v * lambda.asDiagonal() * v.transpose();
  return 0.5 * (r + r.transpose());
}

TransitionKernel::TransitionKernel(const LinearKinetics& k, double delta)
    : delta_(delta), species_(k.species) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::domain_error("interval length must be positive");
  k.validate();
  const Mat j = jacobian(k);
  const Mat slope_map = diffusion_slope(k);
  const auto n = static_cast<Eigen::Index>(k.species);

  stationary_ = k.stationary();
  F_ = matrix_exponential(j, delta);
  c_unit_ = (Mat::Identity(n, n) - F_) * stationary_;

  // Diffusion diagonal at the fixed point: births equal deaths.
  Vec d_fixed(n);
  if (n == 1) {
    d_fixed(0) = 2.0 * k.synthesis;
  } else {
    d_fixed(0) = 2.0 * k.synthesis;
    d_fixed(1) = 2.0 * k.alpha * stationary_(0);
  }

  base_ = Mat::Zero(n, n);
  for (auto& s : slope_) s = Mat::Zero(n, n);

  const double fastest = std::max(k.delta1, k.delta2);
  const std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fastest * delta)));
  const double h = delta / static_cast<double>(panels);
  const auto& rule = gauss_rule();
  for (std::size_t p = 0; p < panels; ++p) {
    const double left = h * static_cast<double>(p);
    for (std::size_t q = 0; q < kGaussOrder; ++q) {
      const double s = left + 0.5 * h * (rule.nodes[q] + 1.0);
      const double w = 0.5 * h * rule.weights[q];
      const Mat back = matrix_exponential(j, delta - s);
      base_ += w * sandwich_diag(back, d_fixed);
      const Mat spread = slope_map * matrix_exponential(j, s);
      for (Eigen::Index c = 0; c < n; ++c) {
        slope_[c] += w * sandwich_diag(back, spread.col(c));
      }
    }
  }
}

LnaTransition TransitionKernel::at(const MacroscopicState& state, double omega) const {
  if (state.phi.size() != static_cast<Eigen::Index>(species_)) {
    throw std::domain_error("state length must equal the species count");
  }
  const Vec deviation = state.phi - stationary_;
  Mat sigma = base_;
  for (Eigen::Index c = 0; c < deviation.size(); ++c) sigma += deviation(c) * slope_[c];
  LnaTransition out;
  out.F = F_;
  out.c = omega * c_unit_;
  out.sigma_eps = symmetrize_psd(omega * sigma);
  out.t_begin = state.t;
  out.t_end = state.t + delta_;
  return out;
}

LnaTransition transition(const LinearKinetics& kinetics, const MacroscopicState& at_ti, double delta,
                         double omega) {
  return TransitionKernel(kinetics, delta).at(at_ti, omega);
}

}  // namespace lnainfer
