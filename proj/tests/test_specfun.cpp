#include <cmath>

#include "doctest.h"

#include "fracdiff/errors.hpp"
#include "fracdiff/specfun.hpp"

using namespace fracdiff;

namespace {

double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace

// Reference values below come from mpmath at 30 digits.

TEST_CASE("gamma_fn against mpmath") {
  CHECK(rel(gamma_fn(0.5).value, std::sqrt(M_PI)) < 1e-14);
  CHECK(rel(gamma_fn(-1.5).value, 2.36327180120735470306) < 1e-13);
  CHECK(rel(gamma_fn(10.3).value, 716430.689062376406625) < 1e-13);
  CHECK(rel(gamma_fn(0.1).value, 9.51350769866873128581) < 1e-13);
}

TEST_CASE("gamma_fn poles throw") {
  for (double x : {0.0, -1.0, -4.0}) CHECK_THROWS_AS(gamma_fn(x), DomainError);
}

TEST_CASE("gamma recurrence and reflection") {
  for (double x : {-2.7, -0.3, 0.35, 1.9, 7.25}) {
    CHECK(rel(gamma_fn(x + 1.0).value, x * gamma_fn(x).value) < 1e-13);
    CHECK(rel(gamma_fn(x).value * gamma_fn(1.0 - x).value, M_PI / std::sin(M_PI * x)) < 1e-13);
  }
}

TEST_CASE("log_gamma matches gamma on the real axis and the reflection off it") {
  for (double x : {0.3, 2.5, 11.0}) CHECK(rel(std::exp(log_gamma({x, 0.0})).real(), std::tgamma(x)) < 1e-13);
  const std::complex<double> z{0.3, 2.0};
  const std::complex<double> lhs = std::exp(log_gamma(z) + log_gamma(1.0 - z));
  const std::complex<double> rhs = M_PI / std::sin(M_PI * z);
  CHECK(std::abs(lhs / rhs - 1.0) < 1e-12);
}

TEST_CASE("mittag_leffler against mpmath") {
  struct Ref {
    double a, b, z, value;
  };
  const Ref refs[] = {
      {0.5, 1.0, -1.0, 0.427583576155807004411},   {0.7, 1.0, -1.0, 0.399611978115599390269},
      {0.7, 1.0, -5.0, 0.0775693577647698099811},  {0.8, 0.5, 2.0, 20.8855306844219416246},
      {0.5, 3.0, -6.0, 0.102121644777876099104},   {0.9, 1.2, -3.0, 0.158688048125089322658},
      {1.5, 1.0, -2.0, 0.0294306856028264717276},  {0.3, 1.0, -0.5, 0.632649005943599022463},
      {0.7, 1.0, -30.0, 0.0114442515275269716914}, {0.5, 1.0, -20.0, 0.0281743487410513193186},
  };
  for (const Ref& r : refs) {
    CAPTURE(r.a);
    CAPTURE(r.b);
    CAPTURE(r.z);
    const Estimate e = mittag_leffler(r.a, r.b, r.z);
    CHECK(std::abs(e.value - r.value) < 1e-10);
    CHECK(e.error < 1e-9);
  }
}

TEST_CASE("mittag_leffler closed forms") {
  for (double z : {-3.0, -0.5, 0.0, 1.2}) {
    CHECK(rel(mittag_leffler(1.0, 1.0, z).value, std::exp(z)) < 1e-12);
    CHECK(std::abs(mittag_leffler(2.0, 1.0, -z * z).value - std::cos(z)) < 1e-12);
  }
  // E_{1/2}(-x) = exp(x^2) erfc(x)
  for (double x : {0.2, 1.0, 3.0}) CHECK(rel(mittag_leffler(0.5, 1.0, -x).value, std::exp(x * x) * std::erfc(x)) < 1e-10);
}

TEST_CASE("mittag_leffler beta recurrence E_{a,b} = 1/Gamma(b) + z E_{a,a+b}") {
  for (double a : {0.4, 0.75})
    for (double z : {-8.0, -1.5, 0.7})
      for (double b : {0.8, 1.0, 1.6, 1.0 + a}) {  // 1 + a sits on the integral's range boundary
        const double lhs = mittag_leffler(a, b, z).value;
        const double rhs = 1.0 / std::tgamma(b) + z * mittag_leffler(a, a + b, z).value;
        CHECK(std::abs(lhs - rhs) < 1e-9);
      }
}

TEST_CASE("mittag_leffler is completely monotone on the negative axis for 0 < a <= 1, b = 1") {
  double prev = 1.0;
  for (double z = -0.1; z > -60.0; z *= 1.3) {
    const double v = mittag_leffler(0.6, 1.0, z).value;
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("bessel_k_mod against mpmath") {
  CHECK(rel(bessel_k_mod(0.3, 0.5).value, 0.976474124381787917082) < 1e-13);
  CHECK(rel(bessel_k_mod(2.5, 3.0).value, 0.0840606319741173826529) < 1e-13);
  CHECK(rel(bessel_k_mod(0.0, 0.1).value, 2.42706902470201655782) < 1e-13);
  CHECK(rel(bessel_k_mod(1.7, 8.0).value, 1.73635293192021974395e-4) < 1e-12);
}

TEST_CASE("bessel_k_mod order symmetry and recurrence") {
  for (double nu : {0.25, 1.3})
    for (double x : {0.4, 2.0, 9.0}) {
      CHECK(rel(bessel_k_mod(-nu, x).value, bessel_k_mod(nu, x).value) < 1e-14);
      const double lhs = bessel_k_mod(nu + 1.0, x).value;
      const double rhs = bessel_k_mod(nu - 1.0, x).value + 2.0 * nu / x * bessel_k_mod(nu, x).value;
      CHECK(rel(lhs, rhs) < 1e-12);
    }
  // K_{1/2}(x) = sqrt(pi / 2x) e^{-x}
  CHECK(rel(bessel_k_mod(0.5, 1.7).value, std::sqrt(M_PI / 3.4) * std::exp(-1.7)) < 1e-14);
}

TEST_CASE("fox_h elementary reductions") {
  HParams e;
  e.m = 1;
  e.lower = {{0.0, 1.0}};
  HParams eb = e;
  eb.lower = {{0.7, 1.0}};
  HParams r;  // Gamma(s) Gamma(1 - s) -> 1 / (1 + z)
  r.m = 1;
  r.n = 1;
  r.upper = {{0.0, 1.0}};
  r.lower = {{0.0, 1.0}};
  for (double z : {0.05, 0.6, 3.0, 15.0}) {
    CHECK(std::abs(fox_h(e, z).value - std::exp(-z)) < 1e-12);
    CHECK(rel(fox_h(eb, z).value, std::pow(z, 0.7) * std::exp(-z)) < 1e-10);
    CHECK(rel(fox_h(r, z).value, 1.0 / (1.0 + z)) < 1e-10);
  }
}

TEST_CASE("fox_h Bessel identity H^{2,0}_{0,2}[z^2/4] = 2 K_l(z)") {
  for (double lam : {0.0, 0.4, 1.5}) {
    HParams k;
    k.m = 2;
    k.lower = {{0.5 * lam, 1.0}, {-0.5 * lam, 1.0}};
    for (double z : {0.2, 1.0, 6.0}) CHECK(rel(fox_h(k, 0.25 * z * z).value, 2.0 * bessel_k_mod(lam, z).value) < 1e-10);
  }
}

TEST_CASE("fox_h scale rule: H[z | (0, 2)] = exp(-sqrt z) / 2") {
  HParams h;
  h.m = 1;
  h.lower = {{0.0, 2.0}};
  for (double z : {0.3, 2.0, 9.0}) CHECK(rel(fox_h(h, z).value, 0.5 * std::exp(-std::sqrt(z))) < 1e-10);
}

TEST_CASE("HParams validation and signed rewrite") {
  HParams bad;
  bad.m = 2;
  bad.lower = {{0.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  HParams neg;
  neg.m = 1;
  neg.lower = {{0.0, -1.0}};
  CHECK_THROWS_AS(neg.validate(), DomainError);
  // Denominator Gamma(a + A s) with A < 0 moves to the lower family as (1 - a, -A).
  const HParams h = HParams::from_signed(1, 0, {{0.0, -0.5}}, {{1.0, 1.0}});
  CHECK(h.p() == 0);
  REQUIRE(h.q() == 2);
  CHECK(h.lower[1].coeff == doctest::Approx(1.0));
  CHECK(h.lower[1].scale == doctest::Approx(0.5));
  CHECK_THROWS(HParams::from_signed(1, 0, {}, {{0.0, -1.0}}));
}

TEST_CASE("fox_strip separates the pole families") {
  HParams r;
  r.m = 1;
  r.n = 1;
  r.upper = {{0.0, 1.0}};
  r.lower = {{0.0, 1.0}};
  const auto [lo, hi] = fox_strip(r);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(1.0));
}
