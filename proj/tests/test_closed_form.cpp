#include <cmath>

#include "doctest.h"

#include "fracdiff/closed_form.hpp"
#include "fracdiff/errors.hpp"
#include "fracdiff/quadrature.hpp"

using namespace fracdiff;

namespace {

double rel(double a, double b) { return std::abs(a / b - 1.0); }

ModelParams radial(double gamma, double theta, int n_dim) {
  ModelParams p;
  p.gamma = gamma;
  p.theta = theta;
  p.n_dim = n_dim;
  return p;
}

ModelParams mixed() {
  ModelParams p;
  p.gamma = 0.5;
  p.mu = 1.5;
  p.alpha_mem = 0.5;
  p.kernel = KernelKind::power_law;
  p.k_drift = 1.0;
  return p;
}

}  // namespace

TEST_CASE("green_case1 reduces to the heat kernel") {
  const ModelParams p = radial(1.0, 0.0, 1);
  for (double t : {0.3, 2.0})
    for (double x : {0.0, 0.4, 1.7, 5.0})
      CHECK(rel(green_case1(x, t, p).value, std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t)) < 1e-10);
}

// gamma = 1/2, theta = 0: subordination of the heat kernel by the one-sided density
// exp(-tau^2 / 4) / sqrt(pi) at t = 1; the integrals are evaluated with mpmath.
TEST_CASE("green_case1 at gamma = 1/2 against the subordination integral, N = 1") {
  const ModelParams p = radial(0.5, 0.0, 1);
  const std::pair<double, double> refs[] = {{0.1, 0.380504116113656795254},
                                            {0.5, 0.283984409420384788132},
                                            {1.0, 0.191667708285341767888},
                                            {2.0, 0.0806255417272929279525},
                                            {4.0, 0.0109949816702391793216}};
  for (auto [x, v] : refs) CHECK(rel(green_case1(x, 1.0, p).value, v) < 1e-9);
}

TEST_CASE("green_case1 at gamma = 1/2 against the subordination integral, N = 2") {
  const ModelParams p = radial(0.5, 0.0, 2);
  const std::pair<double, double> refs[] = {{0.001, 2.11981948305}, {0.0146, 1.36352390259}, {0.05, 1.01633619828},
                                            {0.2, 0.626430372995},  {1.0, 0.198835139897},   {3.0, 0.0217865991899}};
  for (auto [x, v] : refs) CHECK(rel(green_case1(x, 1.0, p).value, v) < 1e-9);
}

TEST_CASE("green_case1 is even and decreasing in |x|") {
  const ModelParams p = radial(0.7, 0.5, 2);
  double prev = INFINITY;
  for (double x = 0.05; x < 6.0; x += 0.25) {
    const double v = green_case1(x, 1.0, p).value;
    CHECK(v == doctest::Approx(green_case1(-x, 1.0, p).value).epsilon(1e-14));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("green_case1 origin: finite for N = 1, divergent for N >= 2") {
  CHECK(std::isfinite(green_case1(0.0, 1.0, radial(0.5, 0.0, 1)).value));
  CHECK_THROWS_AS(green_case1(0.0, 1.0, radial(0.5, 0.0, 2)), DomainError);
}

TEST_CASE("green_case1 rejects inadmissible parameters") {
  CHECK_THROWS_AS(green_case1(1.0, 0.0, radial(0.5, 0.0, 1)), std::exception);
  ModelParams p = radial(1.5, 0.0, 1);
  CHECK_THROWS_AS(green_case1(1.0, 1.0, p), AdmissibilityError);
}

TEST_CASE("green_case1 similarity: t^{gamma N/(2+theta)} G is a function of x^{2+theta}/t^gamma") {
  const ModelParams p = radial(0.6, 1.0, 2);
  const double e = 0.6 * 2 / 3.0;
  for (double x : {0.3, 1.1}) {
    const double t2 = 2.7, x2 = x * std::pow(t2, 0.6 / 3.0);
    CHECK(rel(green_case1(x, 1.0, p).value, std::pow(t2, e) * green_case1(x2, t2, p).value) < 1e-9);
  }
}

TEST_CASE("green_case2 is green_case1 at gamma + alpha") {
  ModelParams p2 = radial(0.3, 0.5, 1);
  p2.kernel = KernelKind::power_law;
  p2.alpha_mem = 0.4;
  const ModelParams p1 = radial(0.7, 0.5, 1);
  for (double x : {0.2, 1.0, 3.0}) CHECK(green_case2(x, 1.4, p2).value == green_case1(x, 1.4, p1).value);
}

TEST_CASE("green_laplace matches the transform of the heat kernel") {
  const ModelParams p = radial(1.0, 0.0, 1);
  for (double s : {0.5, 3.0})
    for (double x : {0.2, 2.0}) CHECK(rel(green_laplace(x, s, p), std::exp(-x * std::sqrt(s)) / (2.0 * std::sqrt(s))) < 1e-12);
}

TEST_CASE("solve_from_green: heat kernel composes with a Gaussian start") {
  const ModelParams p = radial(1.0, 0.0, 1);
  const Propagator g = [&](double x, double t) { return green_case1(x, t, p); };
  const double s0 = 0.25;
  InitialDensity init;
  init.rho = [s0](double x) { return std::exp(-x * x / (4.0 * s0)) / std::sqrt(4.0 * M_PI * s0); };
  for (double x : {0.0, 0.8, 2.5}) {
    const double exact = std::exp(-x * x / (4.0 * (1.0 + s0))) / std::sqrt(4.0 * M_PI * (1.0 + s0));
    CHECK(std::abs(solve_from_green(init, g, x, 1.0, 1).value - exact) < 1e-9);
  }
  CHECK(solve_from_green(WeightedDelta{}, g, 0.7, 1.0, 1).value == g(0.7, 1.0).value);
  CHECK(solve_from_green(PointMass{0.5}, g, 0.7, 1.0, 1).value == doctest::Approx(g(0.2, 1.0).value).epsilon(1e-14));
}

TEST_CASE("asymptotic_case1 ratio tends to one") {
  const ModelParams p = radial(0.5, 0.0, 1);
  double prev = INFINITY;
  for (double x : {4.0, 8.0, 16.0, 32.0}) {
    const AsymptoticValue a = asymptotic_case1(x, 1.0, p);
    const double dev = std::abs(green_case1(x, 1.0, p).value / a.value - 1.0);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 0.01);
  CHECK(asymptotic_case1(0.3, 1.0, p).below_threshold);
}

TEST_CASE("green_drift_power mass: literal prefactor vs rescaled") {
  ModelParams p = radial(0.7, 1.0, 2);
  p.k_drift = 1.0;
  auto mass = [&](DriftNormalization n) {
    auto f = [&](double x) {
      const double v = green_drift_power(x, 1.0, p, -2.0, n).value;
      return v == 0.0 ? 0.0 : 2.0 * x * v;
    };
    return quad::gauss_kronrod(f, 0.0, 30.0, 1e-12, 1e-10, 4000).value;
  };
  // Literal weighted mass is 1 / Gamma((3 + theta - N) / (2 + theta)).
  CHECK(std::abs(mass(DriftNormalization::literal) - 1.0 / std::tgamma(2.0 / 3.0)) < 1e-8);
  CHECK(std::abs(mass(DriftNormalization::unit_mass) - 1.0) < 1e-8);
  CHECK_THROWS_AS(green_drift_power(1.0, 1.0, p, -1.0), AdmissibilityError);
}

TEST_CASE("moment_exponent regimes") {
  CHECK(moment_exponent(radial(1.0, 0.0, 1)).regime == DiffusionRegime::normal);
  CHECK(moment_exponent(radial(0.5, 0.0, 1)).regime == DiffusionRegime::sub);
  CHECK(moment_exponent(radial(1.0, -1.0, 1)).regime == DiffusionRegime::super);
  CHECK(moment_exponent(radial(0.8, 1.0, 1)).exponent == doctest::Approx(1.6 / 3.0));
}

// Talbot inversion of (1/s) 1F1(1; 1 + s^gamma/(mu K); -a s^{-alpha}) in mpmath, 30 digits.
TEST_CASE("mixed_charfn against mpmath") {
  const ModelParams p = mixed();
  struct Ref {
    double k, t, v;
  };
  const Ref refs[] = {{1.0, 1.0, 0.62564380792477873934},   {5.0, 1.0, -0.02474686860275148277},
                      {0.1, 0.5, 0.99148064623508195565},   {2.0, 3.0, -0.012898070179264235356},
                      {12.0, 2.0, -8.9474035685749411029e-5}};
  for (const Ref& r : refs) {
    CAPTURE(r.k);
    CHECK(std::abs(mixed_charfn(r.k, r.t, p).value - r.v) < 1e-10);
    CHECK(std::abs(mixed_charfn_laplace(r.k, r.t, p).value - r.v) < 1e-9);
  }
}

TEST_CASE("mixed_charfn limits: one at k = 0, large |k| expansion") {
  const ModelParams p = mixed();
  CHECK(mixed_charfn(0.0, 1.0, p).value == doctest::Approx(1.0));
  CHECK(mixed_charfn(-2.0, 1.0, p).value == doctest::Approx(mixed_charfn(2.0, 1.0, p).value).epsilon(1e-13));
  const double k = 40.0;
  const Estimate a = mixed_charfn_asymptotic(k, 1.0, p);
  CHECK(std::abs(a.value - mixed_charfn_laplace(k, 1.0, p).value) < std::max(10.0 * a.error, 1e-9));
}

TEST_CASE("mixed_density: singular point and symmetry") {
  const ModelParams p = mixed();
  CHECK_THROWS_AS(mixed_density(0.0, 1.0, p), DomainError);
  const double v = mixed_density(1.0, 1.0, p).value;
  CHECK(v > 0.0);
  CHECK(v == doctest::Approx(mixed_density(-1.0, 1.0, p).value).epsilon(1e-12));
  const std::vector<Estimate> grid = mixed_density_grid({0.5, 1.0, 2.0}, 1.0, p);
  CHECK(grid[1].value == doctest::Approx(v).epsilon(1e-9));
  CHECK(grid[0].value > grid[1].value);
  CHECK(grid[1].value > grid[2].value);
}

TEST_CASE("mixed small-k coefficients reproduce the charfn near k = 0") {
  const ModelParams p = mixed();
  const std::vector<double> d = mixed_small_k_coefficients(1.0, p, 4);
  REQUIRE(d.size() == 5);
  CHECK(d[0] == doctest::Approx(1.0));
  const double k = 0.05;
  double sum = 0.0;
  for (std::size_t m = 0; m < d.size(); ++m) sum += d[m] * std::pow(k, m * p.mu);
  CHECK(std::abs(sum - mixed_charfn(k, 1.0, p).value) < 1e-9);
}

TEST_CASE("scaled exponents and the Tsallis map") {
  CHECK(tsallis_q(0.25, 0.0) == doctest::Approx(3.25 / 1.25));
  CHECK(tsallis_tail_exponent(0.25, 0.0) == doctest::Approx(1.25));
  CHECK(tsallis_tail_exponent(0.3, 0.1) == doctest::Approx(2.0 / (tsallis_q(0.3, 0.1) - 1.0)));
  CHECK_THROWS_AS(tsallis_q(-1.0, 0.0), DomainError);
}

// Beta-function values of 1 / int rho_bar from mpmath.
TEST_CASE("norm_amplitude against the Beta integrals") {
  CHECK(rel(norm_amplitude(-2.0, 0.0, SupportRegion::bounded), 1.26137788106776169309) < 1e-12);
  CHECK(rel(norm_amplitude(-3.0, 0.5, SupportRegion::bounded), 1.92260171630119929374) < 1e-12);
  CHECK(rel(norm_amplitude(0.25, 0.0, SupportRegion::infinite), 0.146655606046583552709) < 1e-12);
  CHECK(rel(norm_amplitude(0.2, 0.1, SupportRegion::infinite), 0.187035526104604195739) < 1e-12);
}

TEST_CASE("scaled_solution: compact support and time scaling") {
  ModelParams p;
  p.mu = -2.0;
  p.k_drift = 1.0;
  const ScaledSolutionSpec spec = make_scaled_spec(-2.0, 0.0, SupportRegion::bounded, 1);
  const double t = 0.7, phi = phi_scale(t, spec, p);
  CHECK(phi_scale(0.0, spec, p) == doctest::Approx(spec.phi0));
  CHECK(scaled_solution(1.01 * phi, t, spec, p) == 0.0);
  CHECK(scaled_solution(0.5 * phi, t, spec, p) > 0.0);
  CHECK(scaled_solution(0.5 * phi, t, spec, p) * phi == doctest::Approx(scaled_profile(0.5, spec)).epsilon(1e-12));
}

TEST_CASE("fig1_scale matches the caption constant") {
  const ModelParams p = radial(0.5, 0.5, 2);
  const double tt = 2.5;
  const double c = 2.0 * std::tgamma(2.0 / tt) / tt * std::pow(tt * tt * std::pow(1.3, 0.5), 2.0 / tt);
  CHECK(fig1_scale(1.3, p) == doctest::Approx(c).epsilon(1e-13));
}
