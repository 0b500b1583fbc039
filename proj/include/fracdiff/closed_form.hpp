#pragma once

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "fracdiff/model.hpp"
#include "fracdiff/specfun.hpp"

namespace fracdiff {

/// Fox H block of the radial propagator with effective time order `order`.
HParams propagator_h_params(const ModelParams& p, double order);

/// Case 1 propagator (impulsive kernel, mu = 2, nu = 1); even in x.
Estimate green_case1(double x, double t, const ModelParams& p);

/// Case 2 propagator (power-law kernel): the Case 1 form with gamma -> gamma + alpha.
Estimate green_case2(double x, double t, const ModelParams& p);

/// Laplace-space propagator G~(x, s) for real s > 0, from the Bessel reduction.
double green_laplace(double x, double s, const ModelParams& p);

/// Initial data tagged symbolically: x^{1-N} delta(x), a point mass, or a density.
struct WeightedDelta {};
struct PointMass {
  double x0 = 0.0;
};
struct InitialDensity {
  std::function<double(double)> rho;
  double lo = -std::numeric_limits<double>::infinity();  ///< support bounds
  double hi = std::numeric_limits<double>::infinity();
};
using InitialData = std::variant<WeightedDelta, PointMass, InitialDensity>;

using Propagator = std::function<Estimate(double x, double t)>;

/// rho(x, t) = int dx' |x'|^{N-1} rho0(x') G(x - x', t).
Estimate solve_from_green(const InitialData& initial, const Propagator& green, double x, double t,
                          int n_dim, double tol = 1e-10);

struct AsymptoticValue {
  double value = 0.0;
  double h_argument = 0.0;
  bool below_threshold = false;  ///< H argument under the recommended asymptotic threshold
};

/// Stretched-exponential large-|x| form of the Case 1 propagator.
AsymptoticValue asymptotic_case1(double x, double t, const ModelParams& p, double threshold = 10.0);

enum class DriftNormalization {
  literal,   ///< prefactor exactly as derived
  unit_mass  ///< rescaled so the |x|^{N-1}-weighted mass is one for every N
};

/// Propagator with drift F(x) = K x |x|^{drift_exponent - 1}; requires drift_exponent = -theta - 1.
Estimate green_drift_power(double x, double t, const ModelParams& p, double drift_exponent,
                           DriftNormalization norm = DriftNormalization::literal);

enum class DiffusionRegime { sub, normal, super };

struct MomentExponent {
  double exponent;
  DiffusionRegime regime;
};

/// <x^2> ~ t^{2 gamma / (2 + theta)}.
MomentExponent moment_exponent(const ModelParams& p);

struct Truncation {
  int n_max = 200;
  double rel_tol = 1e-12;
};

struct SeriesEstimate {
  double value = 0.0;
  double error = 0.0;
  int terms = 0;
};

/// Characteristic function of the mixed space-time fractional case with linear drift
/// F = -K x (N = 1, theta = 0, power-law kernel).
SeriesEstimate mixed_charfn(double k, double t, const ModelParams& p, const Truncation& trunc = {});

/// Same function from its resummed Laplace transform (1/s) 1F1(1; 1 + s^gamma/(mu K); -a s^{-alpha}),
/// inverted on a fixed Talbot contour; stays accurate where the series cancels.
Estimate mixed_charfn_laplace(double k, double t, const ModelParams& p);

/// Large-|k| expansion of mixed_charfn in powers of |k|^{-mu}; error is the last retained term.
Estimate mixed_charfn_asymptotic(double k, double t, const ModelParams& p);

/// Density of the mixed case, x != 0, by cosine inversion of mixed_charfn with the large-|k|
/// expansion beyond the switch point.
SeriesEstimate mixed_density(double x, double t, const ModelParams& p, const Truncation& trunc = {});

/// mixed_density at many points sharing one set of charfn samples.
std::vector<Estimate> mixed_density_grid(const std::vector<double>& xs, double t, const ModelParams& p);

/// Coefficients d_m of the small-|k| expansion mixed_charfn = sum_m d_m |k|^{m mu}, m <= m_max;
/// they fix the |x|^{-1 - m mu} tails of the density.
std::vector<double> mixed_small_k_coefficients(double t, const ModelParams& p, int m_max);

/// The same density summed term by term in x space (Fox H^{1,1}_{2,2} weights). The terms decay
/// only algebraically in n, so the truncation budget is usually exhausted; kept for study.
SeriesEstimate mixed_density_series(double x, double t, const ModelParams& p, const Truncation& trunc = {});

/// Similarity scale phi(t) solving phi'/phi^2 + K/phi = k D / phi^{xi+1}.
double phi_scale(double t, const ScaledSolutionSpec& spec, const ModelParams& p);

struct ScaledExponents {
  double alpha_s, beta_s, nu_s;
};

ScaledExponents scaled_exponents(double mu, double theta);

/// Amplitude normalizing the similarity profile on its support.
double norm_amplitude(double mu, double theta, SupportRegion region);

/// Assembles a consistent spec; k follows from the amplitude.
ScaledSolutionSpec make_scaled_spec(double mu, double theta, SupportRegion region, int n_dim, double phi0 = 1.0);

/// Similarity solution; zero outside the support in the bounded region.
double scaled_solution(double x, double t, const ScaledSolutionSpec& spec, const ModelParams& p);

/// Scaled profile rho_bar(z) = phi^N rho at z = |x| / phi.
double scaled_profile(double z, const ScaledSolutionSpec& spec);

/// q = (3 + mu + theta) / (1 + mu + theta).
double tsallis_q(double mu, double theta);

/// Tail exponent 2 / (q - 1) = 1 + mu + theta.
double tsallis_tail_exponent(double mu, double theta);

/// Figure-1 ordinate scale C(gamma, theta, N) with C * G plotted against the H argument.
double fig1_scale(double t, const ModelParams& p);

}  // namespace fracdiff
