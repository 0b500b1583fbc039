#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fracdiff/model.hpp"
#include "fracdiff/specfun.hpp"

namespace fracdiff {

/// Uniform space-time grid. For the radial solver x_min must be 0 (cell-centred cells on
/// [0, x_max], zero flux at both ends).
struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  int nx = 16;
  double t_max = 1.0;
  int nt = 8;

  /// Throws DomainError on x_min >= x_max, nx < 16, nt < 8, t_max <= 0.
  void validate() const;
  double dx() const { return (x_max - x_min) / nx; }
  double dt() const { return t_max / nt; }
  /// Cell centres x_min + (i + 1/2) dx.
  Eigen::VectorXd cell_centers() const;
};

/// Grünwald-Letnikov derivative of order `order` (any nonzero real; negative orders are
/// fractional integrals) with lower terminal at the first sample:
///   out_j = h^{-order} sum_{k <= j} w_k f_{j-k},  w_k = w_{k-1} (1 - (order + 1) / k).
/// First order accurate in h. Throws DomainError with fewer than two samples.
Eigen::VectorXd gl_frac_derivative(const Eigen::VectorXd& samples, double order, double h);

/// Same derivative of f(x) = x^a g(x) sampled at x_j = j h, j < n, for a possibly
/// non-integrable a (a <= -1), in the Hadamard finite-part sense. The Taylor terms
/// c_m x^{a+m} with a + m < 0 are differentiated exactly by the power rule; GL handles the
/// remainder, which vanishes at 0. Entry 0 is NaN.
Eigen::VectorXd gl_frac_derivative_finite_part(const std::function<double(double)>& g, double a,
                                               const std::vector<double>& taylor, double order, double h,
                                               int n);

/// Weighted mass and its drift over a run of the radial solver.
struct L1Solution {
  std::vector<Profile> profiles;  ///< one per requested time
  double max_mass_drift = 0.0;    ///< max_n |mass(t_n) - mass(0)|
};

/// Implicit L1 scheme for D_t^gamma rho = int_0^t D(t - t') x^{1-N} d_x(x^{N-1-theta} d_x rho(x, t')) dt'
/// on cell-centred finite volumes (mu = 2, nu = 1). The kernel is p.kernel: impulsive gives the
/// local operator, power_law a product-integration convolution over past profiles.
/// `initial` holds cell values; profiles are returned at the grid time nearest each request.
/// Values are symmetric-extension densities, i.e. the full-line weighted mass is
/// 2 sum_i V_i rho_i with V_i the x^{N-1} cell volume.
L1Solution caputo_l1_solve(const ModelParams& p, const GridSpec& grid, const Eigen::VectorXd& initial,
                           const std::vector<double>& times);

/// Cell values of a Gaussian of width w with unit full-line weighted mass 2 int_0^inf x^{N-1} rho.
Eigen::VectorXd narrow_initial(const GridSpec& grid, int n_dim, double width);

/// Propagator from the L1 solver with x^{1-N} delta(x) represented as unit weighted mass in the
/// origin cell. A Gaussian start smooths the (log or power) peak that subdiffusive propagators keep
/// at the origin for N >= 2 over several widths, and width extrapolation cannot remove it.
L1Solution caputo_l1_green(const ModelParams& p, const GridSpec& grid, const std::vector<double>& times);

using LaplaceTransform = std::function<std::complex<double>(std::complex<double>)>;

/// Fixed-Talbot inversion of F at t > 0. F must be analytic for Re s > abscissa off a cut along
/// the negative real axis (shifted by abscissa). The error is the spread of two contour sizes;
/// throws ConvergenceError on non-finite samples or if the target is missed.
Estimate bromwich_invert(const LaplaceTransform& f, double t, double target = 1e-7, double abscissa = 0.0);

struct OdeOptions {
  double rel_tol = 1e-12;
  int max_steps = 200000;
};

/// Laplace-space characteristic function y(k, s) of the linear-drift model from
///   K k y' + (s^gamma + Dtilde(s) |k|^mu) y = s^{gamma-1},
/// integrated by adaptive RK4 in ln k from a Frobenius start near k = 0. Dtilde is D for an
/// impulsive kernel and D s^{-alpha} for a power-law one. Throws ConvergenceError when the step
/// budget runs out (stiff large |k|), naming the k reached.
std::complex<double> charfn_ode_laplace(double k, std::complex<double> s, const ModelParams& p,
                                        const OdeOptions& opts = {});

/// Time-domain characteristic function on a k grid: one ODE sweep per contour node, then
/// bromwich_invert.
std::vector<Estimate> charfn_ode_solve(const std::vector<double>& k_grid, double t, const ModelParams& p,
                                       const OdeOptions& opts = {});

/// Algebraic endpoint behaviour f ~ |x - end|^{exponent}; 0 means regular.
struct EndpointHint {
  double left = 0.0;
  double right = 0.0;
};

/// Integral over [a, b], b possibly infinite. Regular integrands use adaptive Gauss-Kronrod
/// (infinite ends mapped algebraically); declared singular ends switch to double-exponential
/// rules. tol is absolute below |value| = 1 and relative above. Throws ConvergenceError with the
/// achieved estimate when tol is not met.
Estimate adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                       EndpointHint hint = {});

}  // namespace fracdiff
