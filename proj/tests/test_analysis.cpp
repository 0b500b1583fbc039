#include <cmath>

#include "doctest.h"
#include "json.hpp"

#include "fracdiff/analysis.hpp"
#include "fracdiff/closed_form.hpp"
#include "fracdiff/errors.hpp"

using namespace fracdiff;

namespace {

double gauss(double x, double t) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t); }

Profile gaussian(double t, double x_end, int n, bool evaluator) {
  ModelParams p;
  Profile pr = make_profile(Eigen::VectorXd::LinSpaced(n, 0.0, x_end), [t](double x) { return gauss(x, t); }, t, p);
  if (!evaluator) pr.density = nullptr;
  return pr;
}

CheckResult check(const std::string& name, bool pass) {
  CheckResult c;
  c.name = name;
  c.anchor = "property " + name;
  c.measured = pass ? 0.5 : 2.0;
  c.tolerance = 1.0;
  c.pass = pass;
  c.runtime_s = 0.25;
  return c;
}

}  // namespace

TEST_CASE("normalization_check with the evaluator") {
  const MassCheck m = normalization_check(gaussian(1.0, 6.0, 32, true));
  CHECK(std::abs(m.deviation) < 1e-12);
  CHECK(m.tail > 0.0);
  CHECK(m.tail < 1e-3);
}

TEST_CASE("normalization_check from samples, and its coverage guard") {
  CHECK(std::abs(normalization_check(gaussian(1.0, 8.0, 401, false)).deviation) < 1e-7);
  CHECK_THROWS_AS(normalization_check(gaussian(1.0, 1.0, 101, false)), DomainError);
}

TEST_CASE("normalization_check: weighted mass of radial propagators") {
  ModelParams p;
  p.gamma = 0.5;
  p.theta = 1.0;
  p.n_dim = 2;
  const Profile pr =
      make_profile(Eigen::VectorXd::LinSpaced(40, 1e-6, 15.0), [&](double x) { return green_case1(x, 1.0, p).value; }, 1.0, p);
  CHECK(std::abs(normalization_check(pr).deviation) < 1e-10);
}

TEST_CASE("normalization_check: a full-line profile is not doubled") {
  ModelParams p;
  const Profile pr =
      make_profile(Eigen::VectorXd::LinSpaced(401, -8.0, 8.0), [](double x) { return gauss(x, 1.0); }, 1.0, p);
  CHECK(std::abs(normalization_check(pr).deviation) < 1e-10);
}

TEST_CASE("second_moment_fit: Gaussian family has slope 1 and <x^2> = 2 D t") {
  std::vector<Profile> fam;
  for (double t : {0.1, 0.3, 1.0, 3.0, 10.0}) fam.push_back(gaussian(t, 12.0 * std::sqrt(t), 64, true));
  const MomentFit fit = second_moment_fit(fam);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.second_moments[2] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("second_moment_fit preconditions") {
  std::vector<Profile> four;
  for (double t : {0.1, 1.0, 5.0, 10.0}) four.push_back(gaussian(t, 12.0 * std::sqrt(t), 64, true));
  CHECK_THROWS_AS(second_moment_fit(four), DomainError);
  std::vector<Profile> narrow;
  for (double t : {1.0, 1.5, 2.0, 3.0, 5.0}) narrow.push_back(gaussian(t, 12.0 * std::sqrt(t), 64, true));
  CHECK_THROWS_AS(second_moment_fit(narrow), DomainError);
}

TEST_CASE("tail_exponent_fit on an exact power law") {
  ModelParams p;
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(100, 10.0, 1000.0);
  const Profile pr = make_profile(x, [](double v) { return 3.0 * std::pow(v, -2.5); }, 1.0, p);
  CHECK(tail_exponent_fit(pr, {10.0, 1000.0}) == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK_THROWS_AS(tail_exponent_fit(pr, {10.0, 100.0}), DomainError);  // 10 points
  CHECK_THROWS_AS(tail_exponent_fit(pr, {2000.0, 3000.0}), DomainError);
  const Profile cut = make_profile(x, [](double v) { return v < 500.0 ? 1.0 / v : 0.0; }, 1.0, p);
  CHECK_THROWS_AS(tail_exponent_fit(cut, {10.0, 1000.0}), DomainError);
}

TEST_CASE("build_report sorts, aggregates and rejects empty input") {
  const VerificationReport r = build_report({check("b", true), check("a", false), check("c", false)});
  CHECK(r.checks[0].name == "a");
  CHECK(r.checks[2].name == "c");
  CHECK_FALSE(r.pass);
  CHECK(r.failures == std::vector<std::string>{"a", "c"});
  CHECK(build_report({check("x", true)}).pass);
  CHECK_THROWS_AS(build_report({}), std::invalid_argument);
}

TEST_CASE("report_json key order, check count and timing switch") {
  const VerificationReport r = build_report({check("one", true), check("two", true)}, {{"suite", "test"}});
  const std::string text = report_json(r, false);
  const auto j = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"summary", "failures", "checks", "environment"});
  CHECK(j["summary"] == "pass");
  CHECK(j["checks"].size() == 2);
  CHECK(j["checks"][0]["runtime_s"].is_null());
  CHECK(j["environment"]["suite"] == "test");
  std::vector<std::string> check_keys;
  for (const auto& [k, v] : j["checks"][0].items()) check_keys.push_back(k);
  CHECK(check_keys ==
        std::vector<std::string>{"name", "anchor", "measured", "expected", "tolerance", "pass", "runtime_s", "detail"});
  CHECK(report_json(r, false) == text);
  CHECK(nlohmann::json::parse(report_json(r, true))["checks"][0]["runtime_s"] == 0.25);
}
