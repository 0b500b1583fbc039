#include "fracdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/quadrature.hpp"

namespace fracdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

// Sample-based int of f over the grid: Simpson on consecutive interval pairs (exact for
// quadratics on a non-uniform grid), trapezoid on a leftover interval.
double simpson(const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  const Eigen::Index n = x.size();
  double sum = 0.0;
  Eigen::Index i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = x(i + 1) - x(i), h1 = x(i + 2) - x(i + 1);
    const double h = h0 + h1;
    sum += h / 6.0 * ((2.0 - h1 / h0) * f(i) + h * h / (h0 * h1) * f(i + 1) + (2.0 - h0 / h1) * f(i + 2));
  }
  if (i + 1 < n) sum += 0.5 * (x(i + 1) - x(i)) * (f(i) + f(i + 1));
  return sum;
}

// Tail beyond the last of three samples (x increasing away from the profile), from the local
// exponential rate or, when that rate falls outward, the local power.
double extrapolated_tail(double x0, double x1, double x2, double f0, double f1, double f2) {
  if (f2 == 0.0) return 0.0;
  if (!(f0 > 0.0 && f1 > 0.0 && f2 > 0.0)) return kInf;
  const double rate_in = -std::log(f1 / f0) / std::abs(x1 - x0);
  const double rate_out = -std::log(f2 / f1) / std::abs(x2 - x1);
  if (!(rate_out > 0.0)) return kInf;
  if (rate_out >= 0.999 * rate_in) return f2 / rate_out;
  const double power = -std::log(f2 / f1) / std::log(std::abs(x2 / x1));
  if (!(power > 1.0)) return kInf;
  return f2 * std::abs(x2) / (power - 1.0);
}

struct WeightedIntegral {
  double body = 0.0;
  double tail = 0.0;
};

// int |x|^q rho over the profile's line (doubled for an even half-profile).
WeightedIntegral weighted_integral(const Profile& pr, double q) {
  pr.validate();
  const Eigen::Index n = pr.x.size();
  require(n >= 3, "profile needs at least three samples");
  const bool half = pr.x(0) >= 0.0;
  const double factor = half ? 2.0 : 1.0;
  auto weight = [q](double x) { return q == 0.0 ? 1.0 : std::pow(std::abs(x), q); };
  WeightedIntegral out;
  if (pr.density) {
    auto f = [&](double x) {
      const double r = pr.density(x);
      return r == 0.0 ? 0.0 : weight(x) * r;
    };
    const double lo = half ? 0.0 : pr.x(0);
    const quad::QuadResult body = quad::gauss_kronrod(f, lo, pr.x(n - 1), 1e-13, 1e-11, 4000);
    if (!body.converged || !std::isfinite(body.value))
      throw ConvergenceError("profile integral did not converge", body.error);
    out.body = factor * body.value;
    double tail = quad::integrate_singular(f, pr.x(n - 1), kInf, 1e-12).value;
    if (!half) tail += quad::integrate_singular(f, -kInf, pr.x(0), 1e-12).value;
    out.tail = factor * tail;
    return out;
  }
  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) f(i) = weight(pr.x(i)) * pr.values(i);
  out.body = simpson(pr.x, f);
  // Gap to the origin of a half-profile: constant extension for q = 0, linear from 0 otherwise.
  if (half && pr.x(0) > 0.0) out.body += pr.x(0) * f(0) * (q == 0.0 ? 1.0 : 0.5);
  out.body *= factor;
  double tail = extrapolated_tail(pr.x(n - 3), pr.x(n - 2), pr.x(n - 1), f(n - 3), f(n - 2), f(n - 1));
  if (!half) tail += extrapolated_tail(pr.x(2), pr.x(1), pr.x(0), f(2), f(1), f(0));
  out.tail = factor * tail;
  return out;
}

}  // namespace

Profile make_profile(const Eigen::VectorXd& x, const std::function<double(double)>& density, double t,
                     const ModelParams& p, ProfileSource source) {
  Profile pr;
  pr.x = x;
  pr.values.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) pr.values(i) = density(x(i));
  pr.t = t;
  pr.params = p;
  pr.source = source;
  pr.density = density;
  pr.validate();
  return pr;
}

MassCheck normalization_check(const Profile& profile, double tol) {
  const WeightedIntegral w = weighted_integral(profile, profile.params.n_dim - 1.0);
  if (!profile.density && !(w.tail <= tol)) {
    std::ostringstream msg;
    msg << "normalization_check: insufficient coverage, extrapolated tail mass " << w.tail << " exceeds " << tol;
    throw DomainError(msg.str());
  }
  MassCheck out;
  out.tail = w.tail;
  out.mass = w.body + w.tail;
  out.deviation = out.mass - 1.0;
  return out;
}

MomentFit second_moment_fit(const std::vector<Profile>& profiles) {
  require(profiles.size() >= 5, "second_moment_fit: need at least 5 profiles");
  MomentFit fit;
  double t_lo = kInf, t_hi = 0.0;
  for (const Profile& pr : profiles) {
    require(pr.t > 0.0, "second_moment_fit: times must be positive");
    const double nd = pr.params.n_dim;
    const WeightedIntegral m0 = weighted_integral(pr, nd - 1.0);
    const WeightedIntegral m2 = weighted_integral(pr, nd + 1.0);
    const double mass = m0.body + m0.tail, second = m2.body + m2.tail;
    if (!(mass > 0.0 && second > 0.0 && std::isfinite(second)))
      throw DomainError("second_moment_fit: non-positive or divergent moment at t = " + std::to_string(pr.t));
    fit.times.push_back(pr.t);
    fit.second_moments.push_back(second / mass);
    t_lo = std::min(t_lo, pr.t);
    t_hi = std::max(t_hi, pr.t);
  }
  require(t_hi >= 10.0 * t_lo * (1.0 - 1e-12), "second_moment_fit: times must span at least one decade");
  const Eigen::Index m = static_cast<Eigen::Index>(profiles.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(fit.times[i]);
    y(i) = std::log(fit.second_moments[i]);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
  fit.intercept = c(0);
  fit.slope = c(1);
  const double ss_res = (a * c - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double tail_exponent_fit(const Profile& profile, FitWindow window) {
  profile.validate();
  require(window.lo > 0.0 && window.hi > window.lo, "tail_exponent_fit: need 0 < lo < hi");
  std::vector<double> lx, ly;
  for (Eigen::Index i = 0; i < profile.x.size(); ++i) {
    const double ax = std::abs(profile.x(i));
    if (ax < window.lo || ax > window.hi) continue;
    const double v = profile.values(i);
    if (!(v > 0.0)) throw DomainError("tail_exponent_fit: window leaves the support (zero density in window)");
    lx.push_back(std::log(ax));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 20)
    throw DomainError("tail_exponent_fit: window outside the sampled support or under 20 points (" +
                      std::to_string(lx.size()) + ")");
  const Eigen::Index m = static_cast<Eigen::Index>(lx.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = lx[i];
    y(i) = ly[i];
  }
  return a.colPivHouseholderQr().solve(y)(1);
}

VerificationReport build_report(std::vector<CheckResult> results,
                                std::vector<std::pair<std::string, std::string>> environment) {
  if (results.empty()) throw std::invalid_argument("build_report: no checks");
  std::stable_sort(results.begin(), results.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
  VerificationReport r;
  r.checks = std::move(results);
  r.environment = std::move(environment);
  r.pass = true;
  for (const CheckResult& c : r.checks) {
    if (!c.pass) {
      r.pass = false;
      r.failures.push_back(c.name);
    }
  }
  return r;
}

std::string report_json(const VerificationReport& report, bool include_timing) {
  using json = nlohmann::ordered_json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["summary"] = report.pass ? "pass" : "fail";
  j["failures"] = report.failures;
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    json e;
    e["name"] = c.name;
    e["anchor"] = c.anchor;
    e["measured"] = number(c.measured);
    e["expected"] = number(c.expected);
    e["tolerance"] = number(c.tolerance);
    e["pass"] = c.pass;
    e["runtime_s"] = include_timing ? number(c.runtime_s) : json(nullptr);
    e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;
  json env = json::object();
  for (const auto& [k, v] : report.environment) env[k] = v;
  j["environment"] = env;
  return j.dump(2) + "\n";
}

}  // namespace fracdiff
