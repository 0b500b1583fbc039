#include <cmath>

#include "doctest.h"

#include "fracdiff/closed_form.hpp"
#include "fracdiff/errors.hpp"
#include "fracdiff/oracle.hpp"

using namespace fracdiff;

namespace {

ModelParams radial(double gamma, double theta, int n_dim) {
  ModelParams p;
  p.gamma = gamma;
  p.theta = theta;
  p.n_dim = n_dim;
  return p;
}

double weighted_peak_error(const Profile& pr, const ModelParams& p) {
  double err = 0.0, peak = 0.0;
  for (Eigen::Index i = 1; i < pr.x.size(); ++i) {
    const double ref = green_case1(pr.x(i), pr.t, p).value;
    peak = std::max(peak, ref);
    err = std::max(err, std::abs(pr.values(i) - ref));
  }
  return err / peak;
}

}  // namespace

TEST_CASE("GridSpec validation") {
  CHECK_NOTHROW(GridSpec{}.validate());
  CHECK_THROWS_AS((GridSpec{1.0, 0.5, 32, 1.0, 8}.validate()), DomainError);
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 8, 1.0, 8}.validate()), DomainError);
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 16, 1.0, 4}.validate()), DomainError);
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 16, 0.0, 8}.validate()), DomainError);
  const Eigen::VectorXd c = GridSpec{0.0, 2.0, 16, 1.0, 8}.cell_centers();
  CHECK(c(0) == doctest::Approx(0.0625));
  CHECK(c(15) == doctest::Approx(1.9375));
}

TEST_CASE("gl_frac_derivative of x^1: exact power rule, first-order convergence") {
  const double q = 0.5, x_end = 1.0;
  double prev = 0.0;
  for (int n : {100, 200, 400}) {
    const double h = x_end / n;
    Eigen::VectorXd f(n + 1);
    for (int j = 0; j <= n; ++j) f(j) = j * h;
    const double err = std::abs(gl_frac_derivative(f, q, h)(n) - std::pow(x_end, 1.0 - q) / std::tgamma(2.0 - q));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.05));
    prev = err;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("gl_frac_derivative: order -1 integrates, order 1 differences") {
  const double h = 0.01;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(101);
  CHECK(gl_frac_derivative(ones, -1.0, h)(100) == doctest::Approx(1.01));
  Eigen::VectorXd sq(101);
  for (int j = 0; j <= 100; ++j) sq(j) = (j * h) * (j * h);
  CHECK(gl_frac_derivative(sq, 1.0, h)(100) == doctest::Approx(2.0 - h).epsilon(1e-12));
  CHECK_THROWS_AS(gl_frac_derivative(Eigen::VectorXd::Ones(1), 0.5, h), DomainError);
}

TEST_CASE("gl_frac_derivative_finite_part: x^a e^x with a non-integrable a") {
  // D^q sum_m x^{a+m}/m! = sum_m Gamma(a+m+1) / (m! Gamma(a+m+1-q)) x^{a+m-q}, continued to a < -1.
  const double a = -1.5, q = 0.3, x = 0.5;
  double exact = 0.0, fact = 1.0;
  for (int m = 0; m < 30; ++m) {
    if (m > 0) fact *= m;
    exact += std::tgamma(a + m + 1.0) / (fact * std::tgamma(a + m + 1.0 - q)) * std::pow(x, a + m - q);
  }
  double prev = 0.0;
  for (int n : {200, 400, 800}) {
    const double h = x / n;
    const Eigen::VectorXd d =
        gl_frac_derivative_finite_part([](double z) { return std::exp(z); }, a, {1.0, 1.0}, q, h, n + 1);
    CHECK(std::isnan(d(0)));
    const double err = std::abs(d(n) - exact);
    if (prev > 0.0) CHECK(prev / err > 1.7);
    prev = err;
  }
  CHECK(prev / std::abs(exact) < 1e-2);
}

TEST_CASE("caputo_l1_green conserves mass and approaches the propagator at first order") {
  const ModelParams p = radial(0.8, 0.0, 1);
  double prev = 0.0;
  for (int n : {128, 256}) {
    const L1Solution sol = caputo_l1_green(p, GridSpec{0.0, 12.0, n, 1.0, n}, {0.5, 1.0});
    REQUIRE(sol.profiles.size() == 2);
    CHECK(sol.max_mass_drift < 1e-10);
    CHECK(sol.profiles[1].t == doctest::Approx(1.0));
    const double err = weighted_peak_error(sol.profiles[1], p);
    if (prev > 0.0) CHECK(prev / err > 1.6);
    prev = err;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("caputo_l1_green, power-law kernel, against green_case2") {
  ModelParams p = radial(0.5, 0.0, 1);
  p.kernel = KernelKind::power_law;
  p.alpha_mem = 0.3;
  const L1Solution sol = caputo_l1_green(p, GridSpec{0.0, 12.0, 256, 1.0, 256}, {1.0});
  CHECK(sol.max_mass_drift < 1e-10);
  double err = 0.0, peak = 0.0;
  const Profile& pr = sol.profiles.front();
  for (Eigen::Index i = 1; i < pr.x.size(); ++i) {
    const double ref = green_case2(pr.x(i), 1.0, p).value;
    peak = std::max(peak, ref);
    err = std::max(err, std::abs(pr.values(i) - ref));
  }
  CHECK(err / peak < 0.02);
}

TEST_CASE("caputo_l1_solve preconditions") {
  const GridSpec g{0.0, 5.0, 32, 1.0, 8};
  const Eigen::VectorXd init = narrow_initial(g, 1, 0.5);
  CHECK(2.0 * init.sum() * g.dx() == doctest::Approx(1.0).epsilon(1e-6));
  ModelParams p = radial(0.5, 0.0, 1);
  CHECK_NOTHROW(caputo_l1_solve(p, g, init, {1.0}));
  CHECK_THROWS(caputo_l1_solve(p, g, -init, {1.0}));
  CHECK_THROWS(caputo_l1_solve(p, g, init, {2.0}));
  CHECK_THROWS(caputo_l1_solve(p, GridSpec{-1.0, 5.0, 32, 1.0, 8}, init, {1.0}));
  ModelParams q = p;
  q.mu = 1.5;
  CHECK_THROWS(caputo_l1_solve(q, g, init, {1.0}));
}

TEST_CASE("bromwich_invert on known pairs") {
  for (double t : {0.3, 1.0, 4.0}) {
    CHECK(std::abs(bromwich_invert([](std::complex<double> s) { return 1.0 / (s + 1.0); }, t).value - std::exp(-t)) < 1e-9);
    CHECK(std::abs(bromwich_invert([](std::complex<double> s) { return 1.0 / (s * s); }, t).value - t) < 1e-9 * t);
    const double g = 0.7;
    const auto ml = [g](std::complex<double> s) { return std::pow(s, g - 1.0) / (std::pow(s, g) + 1.0); };
    CHECK(std::abs(bromwich_invert(ml, t).value - mittag_leffler(g, 1.0, -std::pow(t, g)).value) < 1e-9);
  }
  // Shifted abscissa: e^{2t} from 1/(s - 2).
  CHECK(std::abs(bromwich_invert([](std::complex<double> s) { return 1.0 / (s - 2.0); }, 1.0, 1e-7, 2.0).value /
                     std::exp(2.0) -
                 1.0) < 1e-9);
  CHECK_THROWS_AS(bromwich_invert([](std::complex<double>) { return std::complex<double>(NAN, 0.0); }, 1.0),
                  ConvergenceError);
}

TEST_CASE("charfn_ode_laplace against the 1F1 form (mpmath)") {
  ModelParams p;
  p.gamma = 0.5;
  p.mu = 1.5;
  p.alpha_mem = 0.5;
  p.kernel = KernelKind::power_law;
  p.k_drift = 1.0;
  CHECK(std::abs(charfn_ode_laplace(1.0, {2.0, 0.0}, p).real() - 0.395995387908181830300) < 1e-11);
  const std::vector<Estimate> phi = charfn_ode_solve({1.0, 5.0}, 1.0, p);
  CHECK(std::abs(phi[0].value - 0.62564380792477873934) < 1e-8);
  CHECK(std::abs(phi[1].value - -0.02474686860275148277) < 1e-8);
}

TEST_CASE("charfn_ode_solve reproduces the Ornstein-Uhlenbeck characteristic function") {
  ModelParams p;  // gamma = 1, mu = 2, impulsive kernel
  p.k_drift = 1.0;
  const double t = 0.8;
  const std::vector<double> ks = {0.25, 0.5, 1.0, 2.0};
  const std::vector<Estimate> phi = charfn_ode_solve(ks, t, p);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double exact = std::exp(-ks[i] * ks[i] * (1.0 - std::exp(-2.0 * t)) / 2.0);
    CHECK(std::abs(phi[i].value - exact) < 1e-7);
  }
  ModelParams bad = p;
  bad.k_drift = 0.0;
  CHECK_THROWS(charfn_ode_solve(ks, t, bad));
}

TEST_CASE("adaptive_quad: regular, singular endpoints, infinite range") {
  CHECK(adaptive_quad([](double x) { return std::exp(-x); }, 0.0, INFINITY, 1e-12).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(adaptive_quad([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10, {-0.5, 0.0}).value - 2.0) < 1e-10);
  const Estimate arc =
      adaptive_quad([](double x) { return 1.0 / std::sqrt(1.0 - x * x); }, -1.0, 1.0, 1e-10, {-0.5, -0.5});
  CHECK(std::abs(arc.value - M_PI) < 1e-10);
  CHECK(arc.error < 1e-9);
  CHECK_THROWS_AS(adaptive_quad([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-10), ConvergenceError);
}
