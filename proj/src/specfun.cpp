#include "fracdiff/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracdiff/quadrature.hpp"

namespace fracdiff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// sin(pi x) with exact zeros at the integers.
double sin_pi(double x) {
  const double n = std::round(x);
  const double r = x - n;
  const double s = std::sin(M_PI * r);
  return (static_cast<long long>(n) % 2 == 0) ? s : -s;
}

// 1 / Gamma(x), zero at the poles.
double recip_gamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 170.0) return std::exp(-std::lgamma(x));
  return 1.0 / gamma_fn(x).value;
}

// log sin(w) for complex w, stable for large |Im w|.
std::complex<double> log_sin(std::complex<double> w) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> log_2i = std::log(2.0 * i);
  if (w.imag() >= 0.0) return -i * w + std::log(std::exp(2.0 * i * w) - 1.0) - log_2i;
  return i * w + std::log(1.0 - std::exp(-2.0 * i * w)) - log_2i;
}

std::complex<double> log_gamma_stirling(std::complex<double> z) {
  // Bernoulli terms B_{2k} / (2k (2k-1)).
  static constexpr double c[] = {1.0 / 12.0,        -1.0 / 360.0,        1.0 / 1260.0,
                                 -1.0 / 1680.0,     1.0 / 1188.0,        -691.0 / 360360.0,
                                 1.0 / 156.0,       -3617.0 / 122400.0};
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> series = 0.0;
  std::complex<double> pw = inv;
  for (double ck : c) {
    series += ck * pw;
    pw *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * M_PI) + series;
}

}  // namespace

Estimate gamma_fn(double x) {
  if (is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "gamma_fn: pole at non-positive integer x = " << x;
    throw DomainError(os.str());
  }
  double value;
  if (x > 0.0) {
    value = std::tgamma(x);
  } else {
    value = M_PI / (sin_pi(x) * std::tgamma(1.0 - x));
  }
  return {value, 8.0 * kEps * std::abs(value) * (1.0 + std::log1p(std::abs(x)))};
}

std::complex<double> log_gamma(std::complex<double> z) {
  if (z.real() < 0.5) {
    return std::log(M_PI) - log_sin(M_PI * z) - log_gamma(1.0 - z);
  }
  std::complex<double> shift_product = 1.0;
  bool shifted = false;
  while (std::abs(z) < 10.0) {
    shift_product *= z;
    z += 1.0;
    shifted = true;
  }
  std::complex<double> result = log_gamma_stirling(z);
  if (shifted) result -= std::log(shift_product);
  return result;
}

// ---------------------------------------------------------------------------
// Mittag-Leffler

namespace {

struct SeriesResult {
  double value;
  double error;
};

SeriesResult ml_series(double alpha, double beta, double z) {
  const double log_abs_z = std::log(std::abs(z));
  double sum = 0.0;
  double max_term = 0.0;
  double last = kInf;
  for (int n = 0; n < 20000; ++n) {
    const double arg = alpha * n + beta;
    double term;
    if (n == 0) {
      term = recip_gamma(arg);
    } else if (arg > 20.0) {
      term = std::exp(n * log_abs_z - std::lgamma(arg));
      if (z < 0.0 && (n % 2 == 1)) term = -term;
    } else {
      term = std::pow(z, n) * recip_gamma(arg);
    }
    sum += term;
    max_term = std::max(max_term, std::abs(term));
    const double mag = std::abs(term);
    const bool decreasing = mag <= last;
    last = mag;
    if (n > 2 && decreasing &&
        (mag <= 1e-2 * kEps * std::abs(sum) || mag <= 1e-3 * kEps * max_term)) {
      break;
    }
    if (!std::isfinite(sum)) break;
  }
  return {sum, 40.0 * kEps * max_term + last};
}

// Collapsed Hankel-contour representation for z < 0, 0 < alpha < 1, beta < 1 + alpha.
Estimate ml_negative_integral(double alpha, double beta, double z, double tol) {
  const double s_beta = std::sin(M_PI * beta);
  const double s_ab = std::sin(M_PI * (alpha - beta));
  const double c_a = std::cos(M_PI * alpha);
  const double power = (1.0 - beta) / alpha;
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double denom = u * u - 2.0 * u * z * c_a + z * z;
    const double num = u * s_beta + z * s_ab;
    return std::exp(-std::pow(u, 1.0 / alpha)) * std::pow(u, power) * num / denom;
  };
  const double upper = std::pow(745.0, alpha);
  const double peak = std::min(std::abs(z), upper);
  const double abs_tol = std::max(1e-16, 1e-3 * tol);
  quad::QuadResult a = quad::gauss_kronrod(integrand, 0.0, peak, abs_tol, 1e-13, 4000);
  quad::QuadResult b = quad::gauss_kronrod(integrand, peak, upper, abs_tol, 1e-13, 4000);
  const double scale = 1.0 / (alpha * M_PI);
  Estimate out{scale * (a.value + b.value), scale * (a.error + b.error)};
  if (!(a.converged && b.converged) && out.error > tol) {
    throw ConvergenceError("mittag_leffler: contour integral did not converge", out.error);
  }
  return out;
}

// -sum_{k>=1} z^{-k} / Gamma(beta - alpha k); valid on z < 0 for 0 < alpha < 2.
bool ml_asymptotic(double alpha, double beta, double z, double tol, Estimate& out) {
  double sum = 0.0;
  double prev = kInf;
  for (int k = 1; k < 60; ++k) {
    const double term = -std::pow(z, -k) * recip_gamma(beta - alpha * k);
    const double mag = std::abs(term);
    if (mag > prev && mag > 0.0) return false;  // divergent before reaching tolerance
    sum += term;
    if (mag != 0.0) prev = mag;
    if (mag == 0.0) continue;  // 1/Gamma vanishes at a pole; not evidence of convergence
    if (k > 2 && mag < tol * 1e-3) {
      out = {sum, mag + 4.0 * kEps * std::abs(sum)};
      return true;
    }
  }
  return false;
}

}  // namespace

Estimate mittag_leffler(double alpha, double beta, double z, const MittagLefflerOptions& opts) {
  if (!(alpha > 0.0)) throw DomainError("mittag_leffler: alpha must be positive");
  if (z == 0.0) return {recip_gamma(beta), kEps * std::abs(recip_gamma(beta))};
  if (alpha == 1.0 && beta == 1.0) {
    const double v = std::exp(z);
    return {v, 2.0 * kEps * v};
  }
  if (z < 0.0 && alpha == 2.0 && (beta == 1.0 || beta == 2.0)) {
    const double w = std::sqrt(-z);
    const double v = beta == 1.0 ? std::cos(w) : std::sin(w) / w;
    return {v, 4.0 * kEps};
  }
  if (z > 0.0) {
    const SeriesResult s = ml_series(alpha, beta, z);
    if (!std::isfinite(s.value)) throw ConvergenceError("mittag_leffler: series overflow", kInf);
    return {s.value, s.error};
  }
  // z < 0
  const bool integral_ok = alpha < 1.0 && beta < 1.0 + alpha;
  const bool recurrence_ok = alpha < 1.0 && std::abs(z) > 1.0;
  if (std::abs(z) <= opts.series_radius) {
    const SeriesResult s = ml_series(alpha, beta, z);
    if (s.error <= 0.1 * opts.tolerance || !(integral_ok || recurrence_ok)) {
      if (s.error > opts.tolerance) {
        throw ConvergenceError("mittag_leffler: series cancellation exceeds budget", s.error);
      }
      return {s.value, s.error};
    }
  }
  if (recurrence_ok && !integral_ok) {
    // Lower beta into the integral's range, then climb back with
    // E_{a,b+a}(z) = (E_{a,b}(z) - 1/Gamma(b)) / z, which damps errors by 1/|z| per step.
    // At least one step: beta = 1 + alpha rounds to a zero count and would recurse on itself.
    const int steps = std::max(1, static_cast<int>(std::floor((beta - 1.0 - alpha) / alpha)) + 1);
    double b = beta - steps * alpha;
    Estimate e = mittag_leffler(alpha, b, z, opts);
    for (int i = 0; i < steps; ++i, b += alpha) {
      e = {(e.value - recip_gamma(b)) / z, (e.error + kEps * std::abs(recip_gamma(b))) / std::abs(z)};
    }
    return e;
  }
  Estimate asym;
  // The asymptotic series is cheap and converges fast once |z| is large.
  if (alpha < 2.0 && std::abs(z) > 20.0 && ml_asymptotic(alpha, beta, z, opts.tolerance, asym)) return asym;
  if (integral_ok) return ml_negative_integral(alpha, beta, z, opts.tolerance);
  if (alpha < 2.0 && ml_asymptotic(alpha, beta, z, opts.tolerance, asym)) return asym;
  const SeriesResult s = ml_series(alpha, beta, z);
  if (s.error <= opts.tolerance) return {s.value, s.error};
  throw ConvergenceError("mittag_leffler: (alpha, beta, z) outside the implemented accuracy envelope",
                         s.error);
}

// ---------------------------------------------------------------------------
// Bessel K

Estimate bessel_k_mod(double order, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k_mod: x must be positive");
  const double v = std::cyl_bessel_k(std::abs(order), x);
  return {v, 1e-13 * std::abs(v) * (1.0 + std::abs(order))};
}

// ---------------------------------------------------------------------------
// Fox H

void HParams::validate() const {
  if (m < 0 || m > q() || n < 0 || n > p()) throw DomainError("HParams: orders out of range");
  for (const auto& g : upper)
    if (!(g.scale > 0.0)) throw DomainError("HParams: upper scales must be positive");
  for (const auto& g : lower)
    if (!(g.scale > 0.0)) throw DomainError("HParams: lower scales must be positive");
}

HParams HParams::from_signed(int m, int n, std::vector<GammaPair> upper, std::vector<GammaPair> lower) {
  HParams out;
  std::vector<GammaPair> up_num, up_den, lo_num, lo_den;
  for (int i = 0; i < static_cast<int>(upper.size()); ++i) {
    const GammaPair g = upper[i];
    if (i < n) {
      if (g.scale <= 0.0) throw DomainError("HParams: numerator pair with non-positive scale");
      up_num.push_back(g);
    } else if (g.scale > 0.0) {
      up_den.push_back(g);
    } else {
      // Gamma(a + A s) with A < 0 == Gamma(1 - b - B s), b = 1 - a, B = -A.
      lo_den.push_back({1.0 - g.coeff, -g.scale});
    }
  }
  for (int j = 0; j < static_cast<int>(lower.size()); ++j) {
    const GammaPair g = lower[j];
    if (j < m) {
      if (g.scale <= 0.0) throw DomainError("HParams: numerator pair with non-positive scale");
      lo_num.push_back(g);
    } else if (g.scale > 0.0) {
      lo_den.push_back(g);
    } else {
      up_den.push_back({1.0 - g.coeff, -g.scale});
    }
  }
  out.m = static_cast<int>(lo_num.size());
  out.n = static_cast<int>(up_num.size());
  out.upper = up_num;
  out.upper.insert(out.upper.end(), up_den.begin(), up_den.end());
  out.lower = lo_num;
  out.lower.insert(out.lower.end(), lo_den.begin(), lo_den.end());
  out.validate();
  return out;
}

std::complex<double> fox_log_kernel(const HParams& h, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (int j = 0; j < h.q(); ++j) {
    const auto& g = h.lower[j];
    if (j < h.m)
      acc += log_gamma(g.coeff + g.scale * s);
    else
      acc -= log_gamma(1.0 - g.coeff - g.scale * s);
  }
  for (int i = 0; i < h.p(); ++i) {
    const auto& g = h.upper[i];
    if (i < h.n)
      acc += log_gamma(1.0 - g.coeff - g.scale * s);
    else
      acc -= log_gamma(g.coeff + g.scale * s);
  }
  return acc;
}

namespace {

bool at_nonpositive_integer(double v, double tol) {
  const double r = std::round(v);
  return r <= 0.0 && std::abs(v - r) <= tol;
}

// Net pole order of Theta at a real point: numerator poles minus denominator zeros.
int net_pole_order(const HParams& h, double s0) {
  const double tol = 1e-12 * (1.0 + std::abs(s0));
  int order = 0;
  for (int j = 0; j < h.q(); ++j) {
    const auto& g = h.lower[j];
    if (j < h.m)
      order += at_nonpositive_integer(g.coeff + g.scale * s0, tol);
    else
      order -= at_nonpositive_integer(1.0 - g.coeff - g.scale * s0, tol);
  }
  for (int i = 0; i < h.p(); ++i) {
    const auto& g = h.upper[i];
    if (i < h.n)
      order += at_nonpositive_integer(1.0 - g.coeff - g.scale * s0, tol);
    else
      order -= at_nonpositive_integer(g.coeff + g.scale * s0, tol);
  }
  return order;
}

}  // namespace

std::pair<double, double> fox_strip(const HParams& h) {
  constexpr int kCandidates = 64;
  // Poles cancelled by zeros of the denominator Gammas do not bound the strip.
  std::vector<double> left_poles, right_poles;
  for (int j = 0; j < h.m; ++j)
    for (int k = 0; k < kCandidates; ++k) left_poles.push_back(-(h.lower[j].coeff + k) / h.lower[j].scale);
  for (int i = 0; i < h.n; ++i)
    for (int k = 0; k < kCandidates; ++k) right_poles.push_back((1.0 - h.upper[i].coeff + k) / h.upper[i].scale);
  std::sort(left_poles.begin(), left_poles.end(), std::greater<>());
  std::sort(right_poles.begin(), right_poles.end());
  double left = -kInf;
  double right = kInf;
  for (double s0 : left_poles) {
    if (net_pole_order(h, s0) > 0) {
      left = s0;
      break;
    }
  }
  for (double s0 : right_poles) {
    if (net_pole_order(h, s0) > 0) {
      right = s0;
      break;
    }
  }
  if (!(left < right)) throw DomainError("fox_h: contour poles not separable");
  return {left, right};
}

namespace {

// Rate of exponential decay of |Theta(c + iy)| in y.
double fox_decay_rate(const HParams& h) {
  double rate = 0.0;
  for (int j = 0; j < h.q(); ++j) rate += (j < h.m ? 1.0 : -1.0) * h.lower[j].scale;
  for (int i = 0; i < h.p(); ++i) rate += (i < h.n ? 1.0 : -1.0) * h.upper[i].scale;
  return 0.5 * M_PI * rate;
}

double golden_min(const auto& f, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-9 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Estimate fox_h(const HParams& h, double z, const FoxOptions& opts) {
  h.validate();
  if (!(z > 0.0)) throw DomainError("fox_h: argument must be positive");
  const double decay = fox_decay_rate(h);
  if (!(decay > 0.0)) throw DomainError("fox_h: Mellin-Barnes integrand does not decay along the contour");
  const auto [left, right] = fox_strip(h);
  const double log_z = std::log(z);

  // Real-axis profile of log|Theta(c) z^{-c}|; its minimum is the saddle.
  auto profile = [&](double c) {
    const double v = fox_log_kernel(h, {c, 0.0}).real() - c * log_z;
    return std::isnan(v) ? kInf : v;
  };
  const double width = std::isfinite(left) && std::isfinite(right) ? right - left : 1.0;
  const double margin = std::min(0.05, 0.25 * width);
  double lo = std::isfinite(left) ? left + margin : right - 1.0;
  double hi;
  if (std::isfinite(right)) {
    hi = right - margin;
    if (!std::isfinite(left)) {
      lo = hi - 1.0;
      while (profile(lo) < profile(lo + 0.5)) lo -= 2.0 * (hi - lo);
    }
  } else {
    hi = lo + 1.0;
    while (profile(hi) < profile(hi - 0.5 * (hi - lo))) hi = lo + 2.0 * (hi - lo);
  }
  const double c = lo < hi ? golden_min(profile, lo, hi) : 0.5 * (lo + hi);

  // Curvature at the saddle sets the natural width of the integrand in y.
  const double fd = 1e-3 * (1.0 + std::abs(c));
  double curvature = (profile(c + fd) - 2.0 * profile(c) + profile(c - fd)) / (fd * fd);
  if (!std::isfinite(curvature) || curvature <= 0.0) curvature = 1.0;
  const double panel0 = std::clamp(1.0 / std::sqrt(curvature), 1e-3, 50.0);
  const double log_peak = profile(c);

  auto log_integrand = [&](double y) { return fox_log_kernel(h, {c, y}) - std::complex<double>(c, y) * log_z; };
  // Integrand scaled by exp(-log_peak) for safe dynamic range.
  auto integrand = [&](double y) {
    const std::complex<double> w = log_integrand(y) - log_peak;
    if (w.real() < -745.0) return 0.0;
    return std::exp(w.real()) * std::cos(w.imag());
  };

  const double natural = panel0;  // scaled integral is O(panel0) when not cancelling
  const double floor_tol = std::max(opts.abs_tol * std::exp(-log_peak), 1e-3 * opts.rel_tol * natural);
  double total = 0.0;
  double error = 0.0;
  bool converged = true;
  double y0 = 0.0;
  double len = 6.0 * panel0;
  for (int panel = 0; panel < 200; ++panel) {
    const double tol = std::max(floor_tol, opts.rel_tol * std::abs(total));
    const quad::QuadResult r = quad::gauss_kronrod(integrand, y0, y0 + len, 0.25 * tol, 0.25 * opts.rel_tol, 500);
    total += r.value;
    error += r.error;
    converged = converged && r.converged;
    y0 += len;
    const double mag_end = std::exp(log_integrand(y0).real() - log_peak);
    // Past the turning region the modulus decays at least like exp(-decay y).
    if (y0 > 2.0 * (1.0 + std::abs(c)) && mag_end / decay < 0.1 * std::max(floor_tol, opts.rel_tol * std::abs(total))) {
      error += mag_end / decay;
      break;
    }
    len = std::min(2.0 * len, std::max(len, 0.5 * y0) + 1.0);
  }
  const double scale = std::exp(log_peak) / M_PI;
  Estimate out{total * scale, error * scale};
  if (!converged && error > 1e-6 * std::max(std::abs(total), 1e-3 * natural)) {
    throw ConvergenceError("fox_h: contour quadrature did not converge", out.error);
  }
  return out;
}

}  // namespace fracdiff
