#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "fracdiff/errors.hpp"

namespace fracdiff {

/// A computed value with an absolute error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Gamma function. Throws DomainError at the poles 0, -1, -2, ...
Estimate gamma_fn(double x);

/// log|Gamma(z)| and arg Gamma(z) packed as a complex logarithm (principal value not
/// guaranteed; only exp() of the result is meaningful). Valid away from the poles.
std::complex<double> log_gamma(std::complex<double> z);

/// Tunables for the Mittag-Leffler evaluator.
struct MittagLefflerOptions {
  double series_radius = 5.0;  ///< |z| above which negative arguments leave the power series
  double tolerance = 1e-10;    ///< absolute error budget
};

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.
///
/// Power series for small |z| and for z > 0. For z < 0 beyond the series radius (or
/// whenever the series would cancel catastrophically) the Hankel contour is collapsed
/// onto the negative real axis, which is valid for 0 < alpha < 1, beta < 1 + alpha.
/// Closed forms cover alpha = 1, beta = 1 and alpha = 2, beta in {1, 2}; an asymptotic
/// expansion covers very large negative z. Anything else throws ConvergenceError.
Estimate mittag_leffler(double alpha, double beta, double z, const MittagLefflerOptions& opts = {});

/// Modified Bessel function of the second kind K_order(x), x > 0, any real order.
Estimate bessel_k_mod(double order, double x);

/// (coefficient, scale) pair of a Gamma argument coefficient + scale * s.
struct GammaPair {
  double coeff;
  double scale;
};

/// Parameter block of a Fox H-function H^{m,n}_{p,q}.
///
/// Convention: H(z) = (1/2 pi i) int_L Theta(s) z^{-s} ds with
///   Theta(s) = prod_{j<=m} Gamma(b_j + B_j s) prod_{i<=n} Gamma(1 - a_i - A_i s)
///            / ( prod_{j>m} Gamma(1 - b_j - B_j s) prod_{i>n} Gamma(a_i + A_i s) ).
/// Under it H^{1,0}_{0,1}[z | (0,1)] = exp(-z) and
/// H^{2,0}_{0,2}[z^2/4 | (l/2,1),(-l/2,1)] = 2 K_l(z).
struct HParams {
  int m = 0;
  int n = 0;
  std::vector<GammaPair> upper;  ///< (a_i, A_i), size p
  std::vector<GammaPair> lower;  ///< (b_j, B_j), size q

  int p() const { return static_cast<int>(upper.size()); }
  int q() const { return static_cast<int>(lower.size()); }

  /// Throws DomainError unless 0<=m<=q, 0<=n<=p and every scale is positive.
  void validate() const;

  /// Rewrites pairs with negative scale into the equivalent positive-scale pair of the
  /// opposite family (e.g. a denominator Gamma(a + A s) with A < 0 becomes the lower
  /// denominator pair (1 - a, -A)). Numerator pairs with negative scale are rejected.
  static HParams from_signed(int m, int n, std::vector<GammaPair> upper, std::vector<GammaPair> lower);
};

struct FoxOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
};

/// Fox H-function for real z > 0 by quadrature of the Mellin-Barnes integral along a
/// vertical line through the saddle of |Theta(s) z^{-s}| inside the strip that
/// separates the two pole families.
Estimate fox_h(const HParams& params, double z, const FoxOptions& opts = {});

/// Mellin-Barnes kernel Theta(s) of the block, as a complex logarithm.
std::complex<double> fox_log_kernel(const HParams& params, std::complex<double> s);

/// Open strip (left, right) of admissible contour abscissae; right may be +inf.
std::pair<double, double> fox_strip(const HParams& params);

}  // namespace fracdiff
