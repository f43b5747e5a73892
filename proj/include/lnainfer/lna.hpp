#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "lnainfer/model.hpp"

namespace lnainfer {

// Stack-allocated vectors/matrices of dimension 1 or 2.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

/// Linear birth-death kinetics shared by both experiments. For the
/// one-species model only `synthesis` (tau2) and `delta2` are used.
/// phi0 holds the macroscopic initial levels at time zero of the series.
struct LinearKinetics {
  std::size_t species = 1;
  double synthesis = 0.0;  // tau2 (one species) or tau1 (two species)
  double delta1 = 0.0;
  double alpha = 0.0;
  double delta2 = 0.0;
  Vec phi0;

  static LinearKinetics from(const TranslationParams& p);
  static LinearKinetics from(const TranscriptionParams& p);
  static LinearKinetics from(const ModelParams& p);

  void validate() const;
  /// Fixed point of the macroscopic equations.
  Vec stationary() const;
};

struct MacroscopicState {
  Vec phi;
  double t = 0.0;
};

/// Closed-form solution of the macroscopic rate equations at time t >= 0.
MacroscopicState solve_macroscopic(const LinearKinetics& kinetics, double t);

Mat jacobian(const LinearKinetics& kinetics);

/// Diagonal B with B_ss^2 = births + deaths of species s at phi.
/// Throws std::domain_error when a diagonal entry would be negative.
Mat diffusion(const LinearKinetics& kinetics, const MacroscopicState& state);

/// e^{J delta} for the lower-triangular Jacobians of this model, in closed form.
Mat matrix_exponential(const Mat& jacobian, double delta);

/// (e^{-a t} - e^{-b t}) / (b - a), with the limit t e^{-a t} when
/// |a - b| < 1e-7 max(a, b).
double exp_difference_quotient(double a, double b, double t);

/// Gaussian transition of the state over [t_begin, t_end]:
///   X(t_end) = F X(t_begin) + c + eps,  eps ~ N(0, sigma_eps).
struct LnaTransition {
  Mat F;
  Vec c;
  Mat sigma_eps;
  double t_begin = 0.0;
  double t_end = 0.0;
};

/// Everything about a transition that depends only on the interval length.
/// The diffusion matrix is affine in phi, and phi(t_i + s) - phi* =
/// e^{Js}(phi(t_i) - phi*), so the covariance integral is
///   base + sum_k slope[k] * (phi(t_i) - phi*)_k.
/// base and slope are computed once by composite Gauss-Legendre quadrature
/// (order 20 per panel).
class TransitionKernel {
 public:
  TransitionKernel(const LinearKinetics& kinetics, double delta);

  double delta() const { return delta_; }
  const Mat& F() const { return F_; }
  /// Transition starting from macroscopic state `at` with system size omega.
  LnaTransition at(const MacroscopicState& at, double omega = 1.0) const;

 private:
  double delta_;
  Vec stationary_;
  Mat F_;
  Vec c_unit_;  // (I - F) phi*
  Mat base_;
  std::array<Mat, 2> slope_;
  std::size_t species_;
};

LnaTransition transition(const LinearKinetics& kinetics, const MacroscopicState& at_ti, double delta,
                         double omega = 1.0);

/// Symmetrize and clip eigenvalues in (-1e-10, 0) to zero.
Mat symmetrize_psd(const Mat& m);

}  // namespace lnainfer
