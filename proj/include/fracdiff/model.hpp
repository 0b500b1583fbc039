#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fracdiff {

enum class KernelKind { impulsive, power_law };

/// Exponents and coefficients of the generalized radial fractional diffusion model
///   D_t^gamma rho = int_0^t D(t-t') x^{1-N} d_x( x^{N-1} |x|^{-theta} d_x^{mu-1} rho^nu ) dt'
///                 - x^{1-N} d_x( x^{N-1} F(x) rho ).
struct ModelParams {
  double gamma = 1.0;      ///< Caputo order, 0 < gamma <= 1
  double mu = 2.0;         ///< spatial fractional order
  double nu = 1.0;         ///< nonlinearity exponent
  double theta = 0.0;      ///< diffusion coefficient ~ |x|^{-theta}
  int n_dim = 1;           ///< dimension N
  double d_coeff = 1.0;    ///< diffusion amplitude D
  double k_drift = 0.0;    ///< drift amplitude K
  double alpha_mem = 1.0;  ///< memory exponent in D(t) = D t^{alpha-1} / Gamma(alpha)
  KernelKind kernel = KernelKind::impulsive;

  /// Throws AdmissibilityError on 0 < gamma <= 1, D > 0, N >= 1, alpha > 0 violations.
  void validate() const;
};

/// Symbols of the Laplace-space Bessel reduction of the radial operator.
struct LaplaceGreenParams {
  double v;       ///< transform exponent (2 + theta) / 2
  double lambda;  ///< Bessel order (2 + theta - N) / (2 + theta)
  double delta;   ///< prefactor exponent, equal to lambda

  static LaplaceGreenParams from(const ModelParams& p);

  /// Laplace transform of the memory kernel D(t).
  double d_tilde(double s, const ModelParams& p) const;
  /// Scale A(s) of y = A(s) x^v.
  double a_of_s(double s, const ModelParams& p) const;
  /// Normalization C(s) of G~(x, s) = C(s) y^delta K_lambda(y).
  double c_of_s(double s, const ModelParams& p) const;
};

enum class ProfileSource { closed_form, oracle };

/// A density sampled on a strictly increasing grid.
struct Profile {
  Eigen::VectorXd x;
  Eigen::VectorXd values;
  Eigen::VectorXd error;  ///< per-point absolute error bound (may be empty)
  double t = 0.0;
  ModelParams params;
  ProfileSource source = ProfileSource::closed_form;
  /// Optional pointwise evaluator of the same density, used for adaptive integration.
  std::function<double(double)> density;

  /// Throws DomainError unless sizes agree and the grid is strictly increasing.
  void validate() const;
};

enum class SupportRegion { bounded, infinite };

/// Exponents, amplitude and scale data of the similarity solution
///   rho(x, t) = A / phi(t)^N * [ z^{(mu+theta)(1+mu+theta)} / (1 + b z)^{(1-mu)(1+mu+theta)} ]^{1/(1-2mu-theta)},
/// z = |x| / phi(t).
struct ScaledSolutionSpec {
  double alpha_s = 0.0;
  double beta_s = 0.0;
  double nu_s = 0.0;
  int b_sign = 1;
  double amplitude = 0.0;
  double k_const = 0.0;
  double xi = 0.0;
  double phi0 = 1.0;
  double mu = 0.0;
  double theta = 0.0;
  SupportRegion region = SupportRegion::infinite;
};

}  // namespace fracdiff
