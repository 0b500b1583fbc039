#include "fracdiff/closed_form.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>
#include <vector>

#include "fracdiff/quadrature.hpp"

namespace fracdiff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw AdmissibilityError(what);
}

// H(0+) = residue at s = 0 when that is the leading (simple) pole; 0 when the leading
// pole sits at negative s.
double fox_at_origin(const HParams& h) {
  const double left = fox_strip(h).first;
  if (left < -1e-12) return 0.0;
  if (std::abs(left) > 1e-12) throw DomainError("propagator diverges at the origin");
  auto s_theta = [&](double s) { return s * std::exp(fox_log_kernel(h, {s, 0.0}).real()); };
  // Sign of Theta near 0 is that of the residue; log_gamma's real part drops it.
  auto signed_theta = [&](double s) {
    const std::complex<double> lt = fox_log_kernel(h, {s, 0.0});
    return std::cos(lt.imag()) * s_theta(s);
  };
  const double e = 1e-6;
  const double r = 2.0 * signed_theta(e) - signed_theta(2.0 * e);
  if (!std::isfinite(r) || std::abs(std::log(std::abs(signed_theta(e) / signed_theta(0.5 * e)))) > 1e-3)
    throw DomainError("propagator diverges at the origin");
  return r;
}

struct RadialScale {
  double z;     // H argument
  double pref;  // prefactor in front of H
};

RadialScale radial_scale(double x, double t, const ModelParams& p, double order) {
  const double two_theta = 2.0 + p.theta;
  const double denom = two_theta * two_theta * p.d_coeff * std::pow(t, order);
  const double z = std::pow(std::abs(x), two_theta) / denom;
  const double pref = two_theta / (2.0 * gamma_fn(p.n_dim / two_theta).value) * std::pow(denom, -p.n_dim / two_theta);
  return {z, pref};
}

// The propagator H functions decay like exp(-(2 - order) (order^order z)^{1/(2 - order)}); past
// exp(-800) the value underflows and the contour integral only produces noise.
bool underflows(double z, double order) {
  return (2.0 - order) * std::pow(z * std::pow(order, order), 1.0 / (2.0 - order)) > 800.0;
}

Estimate fox_propagator(double x, double t, const ModelParams& p, double order) {
  require(t > 0.0, "propagator: t must be positive");
  require(2.0 + p.theta > 0.0, "propagator: 2 + theta must be positive");
  require(order > 0.0 && order < 2.0, "propagator: effective time order must lie in (0, 2)");
  const HParams h = propagator_h_params(p, order);
  const RadialScale rs = radial_scale(x, t, p, order);
  if (rs.z == 0.0) {
    const double v = rs.pref * fox_at_origin(h);
    return {v, 1e-10 * std::abs(v)};
  }
  if (underflows(rs.z, order)) return {0.0, 0.0};
  const Estimate hv = fox_h(h, rs.z);
  return {rs.pref * hv.value, rs.pref * hv.error + 4.0 * kEps * std::abs(rs.pref * hv.value)};
}

void require_radial_linear(const ModelParams& p, const char* who) {
  p.validate();
  require(p.mu == 2.0 && p.nu == 1.0, std::string(who) + ": requires mu = 2 and nu = 1");
}

}  // namespace

HParams propagator_h_params(const ModelParams& p, double order) {
  const double two_theta = 2.0 + p.theta;
  const double lambda = (two_theta - p.n_dim) / two_theta;
  HParams h;
  h.m = 2;
  h.n = 0;
  h.upper = {{1.0 - p.n_dim * order / two_theta, order}};
  h.lower = {{0.0, 1.0}, {lambda, 1.0}};
  return h;
}

Estimate green_case1(double x, double t, const ModelParams& p) {
  require_radial_linear(p, "green_case1");
  require(p.kernel == KernelKind::impulsive, "green_case1: requires the impulsive kernel");
  return fox_propagator(x, t, p, p.gamma);
}

Estimate green_case2(double x, double t, const ModelParams& p) {
  require_radial_linear(p, "green_case2");
  require(p.kernel == KernelKind::power_law, "green_case2: requires the power-law kernel");
  return fox_propagator(x, t, p, p.gamma + p.alpha_mem);
}

double green_laplace(double x, double s, const ModelParams& p) {
  require(s > 0.0, "green_laplace: s must be positive");
  const LaplaceGreenParams lg = LaplaceGreenParams::from(p);
  const double y = lg.a_of_s(s, p) * std::pow(std::abs(x), lg.v);
  return lg.c_of_s(s, p) * std::pow(y, lg.delta) * bessel_k_mod(lg.lambda, y).value;
}

Estimate solve_from_green(const InitialData& initial, const Propagator& green, double x, double t, int n_dim,
                          double tol) {
  if (std::holds_alternative<WeightedDelta>(initial)) return green(x, t);
  if (const auto* pm = std::get_if<PointMass>(&initial)) {
    const double w = std::pow(std::abs(pm->x0), n_dim - 1);
    const Estimate g = green(x - pm->x0, t);
    return {w * g.value, w * g.error};
  }
  const auto& dens = std::get<InitialDensity>(initial);
  double g_err = 0.0;
  auto integrand = [&](double xp) {
    const double r = dens.rho(xp);
    if (r == 0.0) return 0.0;
    const Estimate g = green(x - xp, t);
    const double w = std::pow(std::abs(xp), n_dim - 1) * r;
    g_err = std::max(g_err, std::abs(w) * g.error);
    return w * g.value;
  };
  // Split at the kernel's peak x' = x, where it may be singular for N > 1.
  const double mid = std::clamp(x, dens.lo, dens.hi);
  const quad::QuadResult a = quad::integrate(integrand, dens.lo, mid, 0.5 * tol, tol);
  const quad::QuadResult b = quad::integrate(integrand, mid, dens.hi, 0.5 * tol, tol);
  const double err = a.error + b.error;
  if (!(a.converged && b.converged)) throw ConvergenceError("solve_from_green: convolution quadrature", err);
  return {a.value + b.value, err + g_err};
}

AsymptoticValue asymptotic_case1(double x, double t, const ModelParams& p, double threshold) {
  p.validate();
  require(t > 0.0, "asymptotic_case1: t must be positive");
  const double g = p.gamma;
  const double two_theta = 2.0 + p.theta;
  require(two_theta > 0.0 && g < 2.0, "asymptotic_case1: requires 2 + theta > 0 and gamma < 2");
  const double n = p.n_dim;
  const double denom = two_theta * two_theta * p.d_coeff * std::pow(t, g);
  const double z = std::pow(std::abs(x), two_theta) / denom;
  const double pref = two_theta / (2.0 * gamma_fn(n / two_theta).value) * std::pow(2.0 - g, -0.5) *
                      std::pow(g, n * g / (two_theta * (2.0 - g)) - 0.5) *
                      std::pow(denom, -n / (two_theta * (2.0 - g))) *
                      std::pow(std::abs(x), n * (g - 1.0) / (2.0 - g));
  const double expo = -(2.0 - g) * std::pow(g, g / (2.0 - g)) * std::pow(z, 1.0 / (2.0 - g));
  return {pref * std::exp(expo), z, z < threshold};
}

Estimate green_drift_power(double x, double t, const ModelParams& p, double drift_exponent, DriftNormalization norm) {
  require_radial_linear(p, "green_drift_power");
  require(p.kernel == KernelKind::impulsive, "green_drift_power: requires the impulsive kernel");
  require(p.theta != 0.0, "green_drift_power: requires theta != 0");
  {
    std::ostringstream os;
    os << "green_drift_power: drift exponent must satisfy alpha + theta + 1 = 0, got alpha = " << drift_exponent;
    require(std::abs(drift_exponent + p.theta + 1.0) <= 1e-12 * (1.0 + std::abs(p.theta)), os.str());
  }
  require(t > 0.0, "green_drift_power: t must be positive");
  const double two_theta = 2.0 + p.theta;
  require(two_theta > 0.0, "green_drift_power: 2 + theta must be positive");
  const double n = p.n_dim;
  const double kd = p.k_drift / p.d_coeff;
  const double g1 = gamma_fn((n + kd) / two_theta).value;
  const double g2 = gamma_fn((3.0 + p.theta - n) / two_theta).value;
  HParams h = propagator_h_params(p, p.gamma);
  h.lower[0] = {kd / two_theta, 1.0};
  const double denom = two_theta * two_theta * p.d_coeff * std::pow(t, p.gamma);
  double pref = two_theta / (2.0 * g1 * g2) * std::pow(denom, -n / two_theta);
  if (norm == DriftNormalization::unit_mass) pref *= g2;
  const double z = std::pow(std::abs(x), two_theta) / denom;
  if (z == 0.0) {
    const double v = pref * fox_at_origin(h);
    return {v, 1e-10 * std::abs(v)};
  }
  if (underflows(z, p.gamma)) return {0.0, 0.0};
  const Estimate hv = fox_h(h, z);
  return {pref * hv.value, pref * hv.error + 4.0 * kEps * std::abs(pref * hv.value)};
}

MomentExponent moment_exponent(const ModelParams& p) {
  require(2.0 + p.theta > 0.0, "moment_exponent: 2 + theta must be positive");
  const double e = 2.0 * p.gamma / (2.0 + p.theta);
  DiffusionRegime r = DiffusionRegime::normal;
  if (e < 1.0 - 1e-12) r = DiffusionRegime::sub;
  else if (e > 1.0 + 1e-12) r = DiffusionRegime::super;
  return {e, r};
}

// ---------------------------------------------------------------------------
// Mixed space-time fractional case

namespace {

void require_mixed(const ModelParams& p) {
  p.validate();
  require(p.n_dim == 1 && p.nu == 1.0 && p.theta == 0.0, "mixed case: requires N = 1, nu = 1, theta = 0");
  require(p.kernel == KernelKind::power_law, "mixed case: requires the power-law kernel");
  require(p.k_drift > 0.0, "mixed case: requires K > 0");
  require(p.mu > 0.0 && p.mu <= 2.0, "mixed case: requires 0 < mu <= 2");
  require(p.alpha_mem < 1.0, "mixed case: requires alpha < 1");
}

// Kernel of the n-th time-domain weight, t' f_n(t') = H^{1,0}_{1,1}[a t'^alpha | (0,-alpha); (n,1)].
HParams wright_params(int n, double alpha) {
  return HParams::from_signed(1, 0, {{0.0, -alpha}}, {{static_cast<double>(n), 1.0}});
}

HParams fourier_params(int n, double alpha, double mu) {
  HParams h;
  h.m = 1;
  h.n = 1;
  h.upper = {{1.0 - n, 1.0 / mu}, {0.0, alpha / mu}};
  h.lower = {{0.5, 0.5}, {1.0, 0.5}};
  return h;
}

// One term: (1/n!) int_0^t (dt'/t') kernel(t') E_gamma(-n mu K (t - t')^gamma), with t' = e^u.
Estimate memory_term(int n, double t, const ModelParams& p, const std::function<Estimate(double)>& kernel) {
  const double log_t = std::log(t);
  const double lo = log_t + std::log(1e-17) / (p.alpha_mem * std::max(n, 1));
  const double rate = n * p.mu * p.k_drift;
  double kernel_err = 0.0;
  auto integrand = [&](double u) {
    const double tp = std::exp(u);
    const Estimate kv = kernel(tp);
    double relax = 1.0;
    if (n > 0) {
      const double lag = t - tp;
      relax = lag > 0.0 ? mittag_leffler(p.gamma, 1.0, -rate * std::pow(lag, p.gamma)).value : 1.0;
    }
    kernel_err = std::max(kernel_err, std::abs(relax) * kv.error);
    return kv.value * relax;
  };
  const quad::QuadResult r = quad::gauss_kronrod(integrand, lo, log_t, 1e-15, 1e-11, 400);
  if (!r.converged && r.error > 1e-8 * std::max(1.0, std::abs(r.value)))
    throw ConvergenceError("mixed case: memory integral did not converge", r.error);
  const double inv_fact = std::exp(-std::lgamma(n + 1.0));
  return {inv_fact * r.value, inv_fact * (r.error + kernel_err * (log_t - lo))};
}

// Entire series sum_j (-1)^j z^{n+j} / (j! Gamma(alpha (n + j))) of the same kernel, with the
// log-Gamma values tabulated once; falls back to the contour integral when cancellation eats
// the accuracy.
class WrightKernel {
 public:
  explicit WrightKernel(double alpha) : alpha_(alpha), lg_alpha_(kSize), lg_fact_(kSize) {
    for (int m = 0; m < kSize; ++m) {
      lg_alpha_[m] = m == 0 ? kInfinity : std::lgamma(static_cast<long double>(alpha) * m);
      lg_fact_[m] = std::lgamma(m + 1.0L);
    }
  }

  Estimate operator()(int n, double z, const HParams& h) const {
    if (z <= 0.0) return {0.0, 0.0};
    // Extended precision buys three digits against the alternating cancellation.
    const long double log_z = std::log(static_cast<long double>(z));
    long double sum = 0.0L, abs_sum = 0.0L, last = 0.0L;
    for (int j = 0; n + j < kSize; ++j) {
      const long double mag = std::exp((n + j) * log_z - lg_fact_[j] - lg_alpha_[n + j]);
      sum += (j % 2 == 0) ? mag : -mag;
      abs_sum += mag;
      if (j > n + 2 && mag < 1e-20L * abs_sum && mag <= last) {
        const double value = static_cast<double>(sum);
        // Tabulated log-Gamma values carry double rounding, amplified by the exponent.
        const double err = static_cast<double>(64.0L * LDBL_EPSILON * abs_sum) +
                           4.0 * kEps * std::abs(value);
        if (err <= 1e-9 * std::max(1.0, std::abs(value))) return {value, err};
        break;
      }
      last = mag;
    }
    FoxOptions loose;
    loose.abs_tol = 1e-12;
    loose.rel_tol = 1e-9;
    return fox_h(h, z, loose);
  }

  double alpha() const { return alpha_; }

 private:
  static constexpr int kSize = 800;
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();
  double alpha_;
  std::vector<long double> lg_alpha_, lg_fact_;
};

template <class TermFn>
SeriesEstimate sum_series(const Truncation& trunc, TermFn&& term) {
  SeriesEstimate out;
  int small_run = 0;
  for (int n = 0; n <= trunc.n_max; ++n) {
    const Estimate e = term(n);
    out.value += e.value;
    out.error += e.error;
    out.terms = n + 1;
    const bool small = std::abs(e.value) < trunc.rel_tol * std::abs(out.value);
    small_run = small ? small_run + 1 : 0;
    if (n >= 2 && small_run >= 2) {
      out.error += std::abs(e.value);
      return out;
    }
  }
  throw ConvergenceError("mixed case: truncation budget exceeded", out.error);
}

double rgamma_or_zero(double x) {
  const double r = std::round(x);
  if (r <= 0.0 && std::abs(x - r) <= 1e-12 * (1.0 + std::abs(x))) return 0.0;
  return 1.0 / gamma_fn(x).value;
}

// Every n shares one time grid per evaluator, so the relaxation factors
// E_gamma(-n mu K (t - t')^gamma) are computed once and reused for all k.
// Nodes are tanh-sinh in d = ln t - ln t', which clusters them at the t' -> t endpoint.
class MixedCharfnEvaluator {
 public:
  MixedCharfnEvaluator(double t, const ModelParams& p, double a_max, const Truncation& trunc)
      : t_(t), p_(p), trunc_(trunc), wright_(p.alpha_mem), log_at_max_(std::log(std::max(a_max, 1e-300)) +
                                                                         p.alpha_mem * std::log(t)) {}

  SeriesEstimate operator()(double k) {
    if (k == 0.0) return {1.0, 0.0, 1};
    const double big_a = p_.d_coeff * std::pow(std::abs(k), p_.mu) / (p_.k_drift * p_.mu) * std::pow(t_, p_.alpha_mem);
    return sum_series(trunc_, [&](int n) { return term(n, big_a); });
  }

 private:
  struct Nodes {
    std::vector<double> scale;  // e^{-alpha d}
    std::vector<double> w_fine, w_coarse;
    std::vector<double> relax;
  };

  static constexpr int kLevel = 7;
  static constexpr double kTauMax = 3.6;

  const Nodes& nodes(int n) {
    while (static_cast<int>(cache_.size()) <= n) build(static_cast<int>(cache_.size()));
    return cache_[n];
  }

  void build(int n) {
    // Integrand ~ (A e^{-alpha d})^{max(n,1)} for large d; cut where it drops below 1e-17.
    const double span = std::max(1.0, (std::max(log_at_max_, 0.0) + 39.2 / std::max(n, 1)) / p_.alpha_mem);
    const double h = std::ldexp(1.0, -kLevel);
    const int jmax = static_cast<int>(std::ceil(kTauMax / h));
    const double rate = n * p_.mu * p_.k_drift;
    Nodes nd;
    for (int j = -jmax; j <= jmax; ++j) {
      const double tau = j * h;
      const double q = std::exp(-M_PI * std::sinh(tau));
      const double d = span / (1.0 + q);
      const double w = span * M_PI * std::cosh(tau) * q / ((1.0 + q) * (1.0 + q)) * h;
      if (!(d > 0.0) || !std::isfinite(w)) continue;
      nd.scale.push_back(std::exp(-p_.alpha_mem * d));
      nd.w_fine.push_back(w);
      nd.w_coarse.push_back(j % 2 == 0 ? 2.0 * w : 0.0);
      double relax = 1.0;
      if (n > 0) {
        const double lag = -t_ * std::expm1(-d);
        relax = mittag_leffler(p_.gamma, 1.0, -rate * std::pow(lag, p_.gamma)).value;
      }
      nd.relax.push_back(relax);
    }
    cache_.push_back(std::move(nd));
  }

  Estimate term(int n, double big_a) {
    const Nodes& nd = nodes(n);
    const HParams h = wright_params(n, p_.alpha_mem);
    double fine = 0.0, coarse = 0.0, kernel_err = 0.0;
    for (std::size_t i = 0; i < nd.scale.size(); ++i) {
      const Estimate kv = wright_(n, big_a * nd.scale[i], h);
      const double v = kv.value * nd.relax[i];
      fine += nd.w_fine[i] * v;
      coarse += nd.w_coarse[i] * v;
      kernel_err += nd.w_fine[i] * kv.error;
    }
    const double inv_fact = std::exp(-std::lgamma(n + 1.0));
    // The n = 0 weight carries an atom at t' = 0 that contributes exactly 1.
    const double atom = n == 0 ? 1.0 : 0.0;
    return {inv_fact * fine + atom, inv_fact * (std::abs(fine - coarse) + kernel_err)};
  }

  double t_;
  ModelParams p_;
  Truncation trunc_;
  WrightKernel wright_;
  double log_at_max_;
  std::vector<Nodes> cache_;
};

// Large-k expansion: the Laplace transform of the charfn is (1/s) M(1; 1 + p; -b) with
// p = s^gamma / (mu K) and b = a s^{-alpha}; the large-b expansion of Kummer's function
// sum_m p (1 - p)_m b^{-1-m} inverts term by term into powers of t, i.e. into powers
// |k|^{-mu (1 + m)}. The exponentially small remainder is bounded separately.
struct PowerTerm {
  double nu;    // power of 1/|k|
  double coef;
};

struct LargeKExpansion {
  std::vector<PowerTerm> terms;
  double truncation = 0.0;  // magnitude of the first omitted group at k_ref
};

LargeKExpansion large_k_expansion(double k_ref, double t, const ModelParams& p) {
  const double mk = p.mu * p.k_drift;
  const double c = mk / p.d_coeff;  // 1/a = c |k|^{-mu}
  const double log_ref = std::log(k_ref);
  std::vector<double> poly{0.0, 1.0};  // p (1 - p)_m, coefficients in p
  LargeKExpansion out;
  double prev = kInf;
  for (int m = 0; m < 60; ++m) {
    if (m > 0) {
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t j = 0; j < poly.size(); ++j) {
        next[j] += poly[j] * m;  // factor (m - p)
        next[j + 1] -= poly[j];
      }
      poly.swap(next);
    }
    double coef = 0.0;
    for (std::size_t j = 1; j < poly.size(); ++j) {
      const double beta = p.gamma * j + p.alpha_mem * (m + 1);
      coef += poly[j] * std::pow(mk, -static_cast<double>(j)) * std::pow(t, -beta) * rgamma_or_zero(1.0 - beta);
    }
    coef *= std::pow(c, 1.0 + m);
    const double nu = p.mu * (1.0 + m);
    const double mag = std::abs(coef) * std::exp(-nu * log_ref);
    if (mag > prev) {
      out.truncation = mag;  // divergence sets in: optimal truncation
      return out;
    }
    out.terms.push_back({nu, coef});
    if (mag != 0.0) prev = mag;
    out.truncation = mag;
    if (m > 1 && mag == 0.0 && prev < 1e-30) return out;
  }
  return out;
}

double eval_terms(const std::vector<PowerTerm>& terms, double k) {
  double sum = 0.0;
  const double lk = std::log(std::abs(k));
  for (const PowerTerm& term : terms) sum += term.coef * std::exp(-term.nu * lk);
  return sum;
}

// Size of the exponentially small part the power series omits: the saddle of
// exp(s t - a s^{-alpha}) at s^{1 + alpha} = -alpha a / t.
double large_k_exponential_bound(double a, double t, const ModelParams& p) {
  const double al = p.alpha_mem;
  const double decay = (1.0 + al) / al * std::abs(std::cos(M_PI / (1.0 + al))) *
                       std::pow(al * a * std::pow(t, al), 1.0 / (1.0 + al));
  return std::exp(-decay);
}

using cld = std::complex<long double>;

// 1F1(1; c; -b) by whichever of the direct and the Kummer-transformed series loses fewer
// digits; both are entire in b.
cld kummer_one(cld c, cld b) {
  const long double tiny = 1e-22L;
  cld sum = 0.0L, term = 1.0L;
  if (b.real() > 0.0L) {
    // e^{-b} sum_n b^n (c - 1) / ((c - 1 + n) n!)
    const cld pm = c - 1.0L;
    cld power = 1.0L;
    for (int n = 0; n < 5000; ++n) {
      if (n > 0) power *= b / static_cast<long double>(n);
      term = power * pm / (pm + static_cast<long double>(n));
      sum += term;
      if (n > std::abs(b) && std::abs(term) < tiny * std::abs(sum)) break;
    }
    return std::exp(-b) * sum;
  }
  for (int n = 0; n < 5000; ++n) {
    if (n > 0) term *= -b / (c + static_cast<long double>(n - 1));
    sum += term;
    if (n > std::abs(b) && std::abs(term) < tiny * std::abs(sum)) break;
  }
  return sum;
}

// Fixed Talbot inversion of (1/s) 1F1(1; 1 + s^gamma / (mu K); -a s^{-alpha}).
long double mixed_charfn_talbot(double a, double t, const ModelParams& p, int m) {
  const long double r = 2.0L * m / (5.0L * t);
  const long double mk = p.mu * p.k_drift;
  auto transform = [&](cld s) {
    const cld pp = std::pow(s, static_cast<long double>(p.gamma)) / mk;
    const cld b = static_cast<long double>(a) * std::pow(s, -static_cast<long double>(p.alpha_mem));
    return kummer_one(1.0L + pp, b) / s;
  };
  long double acc = 0.5L * (std::exp(r * t) * transform(cld(r, 0.0L))).real();
  for (int j = 1; j < m; ++j) {
    const long double th = j * static_cast<long double>(M_PI) / m;
    const long double cot = std::cos(th) / std::sin(th);
    const cld s(r * th * cot, r * th);
    const long double sigma = th + (th * cot - 1.0L) * cot;
    acc += (std::exp(s * static_cast<long double>(t)) * transform(s) * cld(1.0L, sigma)).real();
  }
  return r / m * acc;
}

}  // namespace

namespace {

double mixed_a(double k, const ModelParams& p) {
  return p.d_coeff * std::pow(std::abs(k), p.mu) / (p.k_drift * p.mu);
}

// Below this value of a t^alpha the series is summed directly; above it cancellation between
// its terms costs more digits than the resummed forms.
constexpr double kSeriesLimit = 16.0;
constexpr double kAsymptoticTol = 1e-13;

Estimate charfn_resummed(double k, double t, const ModelParams& p, int talbot_nodes) {
  const double a = mixed_a(k, p);
  const LargeKExpansion ex = large_k_expansion(std::abs(k), t, p);
  const double asym_err = ex.truncation + large_k_exponential_bound(a, t, p);
  if (asym_err <= kAsymptoticTol) return {eval_terms(ex.terms, k), asym_err};
  const long double hi = mixed_charfn_talbot(a, t, p, talbot_nodes);
  if (talbot_nodes <= 0) return {static_cast<double>(hi), 0.0};
  const long double lo = mixed_charfn_talbot(a, t, p, talbot_nodes - 8);
  return {static_cast<double>(hi), static_cast<double>(std::abs(hi - lo))};
}

// Smallest |k| beyond which the power expansion alone meets kAsymptoticTol.
double asymptotic_switch(double t, const ModelParams& p) {
  double k = std::pow(kSeriesLimit * p.k_drift * p.mu / (p.d_coeff * std::pow(t, p.alpha_mem)), 1.0 / p.mu);
  for (int i = 0; i < 400; ++i, k *= 1.05) {
    const LargeKExpansion ex = large_k_expansion(k, t, p);
    if (ex.truncation + large_k_exponential_bound(mixed_a(k, p), t, p) <= kAsymptoticTol) return k;
  }
  throw ConvergenceError("mixed case: large-k expansion never reaches its tolerance", kInf);
}

// Generalized exponential integral E_nu(z) by its continued fraction; |z| >= 1.
std::complex<double> expint_cf(double nu, std::complex<double> z) {
  std::complex<double> b = z + nu;
  std::complex<double> c = 1e300;
  std::complex<double> d = 1.0 / b;
  std::complex<double> h = d;
  for (int i = 1; i < 5000; ++i) {
    const double an = -i * (nu - 1.0 + i);
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const std::complex<double> del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-z);
}

// int_{k0}^inf cos(k x) sum_j coef_j k^{-nu_j} dk for x > 0.
Estimate power_tail_cosine(const std::vector<PowerTerm>& terms, double k0, double x) {
  double value = 0.0, error = 0.0;
  double k1 = k0;
  if (k0 * x < 1.0) {
    // Non-oscillatory stretch up to k x = 1 by quadrature; the continued fraction takes over.
    k1 = 1.0 / x;
    const quad::QuadResult q = quad::gauss_kronrod(
        [&](double k) { return std::cos(k * x) * eval_terms(terms, k); }, k0, k1, 1e-15, 1e-12, 400);
    value += q.value;
    error += q.error;
  }
  const std::complex<double> z(0.0, -k1 * x);
  for (const PowerTerm& term : terms) {
    if (term.coef == 0.0) continue;
    value += term.coef * std::pow(k1, 1.0 - term.nu) * expint_cf(term.nu, z).real();
  }
  return {value, error + 1e-15 * std::abs(value)};
}

}  // namespace

SeriesEstimate mixed_charfn(double k, double t, const ModelParams& p, const Truncation& trunc) {
  require_mixed(p);
  require(t > 0.0, "mixed_charfn: t must be positive");
  if (k == 0.0) return {1.0, 0.0, 1};
  const double a = mixed_a(k, p);
  if (a * std::pow(t, p.alpha_mem) <= kSeriesLimit) {
    MixedCharfnEvaluator eval(t, p, a, trunc);
    return eval(k);
  }
  const Estimate e = charfn_resummed(k, t, p, 40);
  if (e.error > 1e-8) throw ConvergenceError("mixed_charfn: resummed inversion lost accuracy", e.error);
  return {e.value, e.error, 0};
}

Estimate mixed_charfn_laplace(double k, double t, const ModelParams& p) {
  require_mixed(p);
  require(t > 0.0, "mixed_charfn_laplace: t must be positive");
  if (k == 0.0) return {1.0, 0.0};
  const double a = mixed_a(k, p);
  const long double hi = mixed_charfn_talbot(a, t, p, 40);
  const long double lo = mixed_charfn_talbot(a, t, p, 32);
  return {static_cast<double>(hi), static_cast<double>(std::abs(hi - lo))};
}

Estimate mixed_charfn_asymptotic(double k, double t, const ModelParams& p) {
  require_mixed(p);
  require(t > 0.0 && k != 0.0, "mixed_charfn_asymptotic: requires t > 0 and k != 0");
  const LargeKExpansion ex = large_k_expansion(std::abs(k), t, p);
  const double v = eval_terms(ex.terms, k);
  return {v, ex.truncation + large_k_exponential_bound(mixed_a(k, p), t, p) + 4.0 * kEps * std::abs(v)};
}

SeriesEstimate mixed_density(double x, double t, const ModelParams& p, const Truncation&) {
  require_mixed(p);
  require(t > 0.0, "mixed_density: t must be positive");
  if (x == 0.0) throw DomainError("mixed_density: singular point x = 0");
  const double ax = std::abs(x);
  const double k_switch = asymptotic_switch(t, p);
  // Talbot alone on [0, k_switch]: it agrees with the series to ~1e-13 and costs far less.
  const quad::QuadResult body = quad::gauss_kronrod(
      [&](double k) {
        if (k == 0.0) return 1.0;
        return std::cos(k * ax) * static_cast<double>(mixed_charfn_talbot(mixed_a(k, p), t, p, 36));
      },
      0.0, k_switch, 1e-13, 1e-11, 4000);
  if (!body.converged && body.error > 1e-9)
    throw ConvergenceError("mixed_density: cosine transform did not converge", body.error);
  const LargeKExpansion ex = large_k_expansion(k_switch, t, p);
  const Estimate tail = power_tail_cosine(ex.terms, k_switch, ax);
  const double value = (body.value + tail.value) / M_PI;
  const double error = (body.error + tail.error + kAsymptoticTol * 2.0 / ax + 1e-13 * k_switch) / M_PI;
  return {value, error, 0};
}

std::vector<Estimate> mixed_density_grid(const std::vector<double>& xs, double t, const ModelParams& p) {
  require_mixed(p);
  require(t > 0.0, "mixed_density_grid: t must be positive");
  double x_max = 0.0;
  for (double x : xs) {
    if (x == 0.0) throw DomainError("mixed_density_grid: singular point x = 0");
    x_max = std::max(x_max, std::abs(x));
  }
  const double k_switch = asymptotic_switch(t, p);
  // Panels no wider than half a period of cos(k x_max), graded geometrically towards k = 0
  // where the charfn has its |k|^mu cusp.
  const double width = std::min(0.5, M_PI / (2.0 * std::max(x_max, 1e-300)));
  std::vector<double> edges{0.0};
  const double first = std::min(width, k_switch);
  for (int j = 30; j >= 0; --j) edges.push_back(first * std::ldexp(1.0, -j));
  const int n_uniform = static_cast<int>(std::ceil((k_switch - first) / width));
  for (int i = 1; i <= n_uniform; ++i) edges.push_back(first + (k_switch - first) * i / n_uniform);
  const quad::Rule rule = quad::gauss_legendre(16);
  std::vector<double> kk, ww, phi;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double lo = edges[e], hi = edges[e + 1];
    if (!(hi > lo)) continue;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double k = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i];
      kk.push_back(k);
      ww.push_back(0.5 * (hi - lo) * rule.weights[i]);
      phi.push_back(static_cast<double>(mixed_charfn_talbot(mixed_a(k, p), t, p, 36)));
    }
  }
  const LargeKExpansion ex = large_k_expansion(k_switch, t, p);
  std::vector<Estimate> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const double ax = std::abs(x);
    double body = 0.0;
    for (std::size_t i = 0; i < kk.size(); ++i) body += ww[i] * std::cos(kk[i] * ax) * phi[i];
    const Estimate tail = power_tail_cosine(ex.terms, k_switch, ax);
    out.push_back({(body + tail.value) / M_PI,
                   (tail.error + kAsymptoticTol * 2.0 / ax + 1e-13 * k_switch) / M_PI});
  }
  return out;
}

std::vector<double> mixed_small_k_coefficients(double t, const ModelParams& p, int m_max) {
  require_mixed(p);
  require(t > 0.0 && m_max >= 1, "mixed_small_k_coefficients: requires t > 0 and m_max >= 1");
  const double mk = p.mu * p.k_drift;
  const double g = p.d_coeff / mk;
  std::vector<double> d(m_max + 1, 0.0);
  d[0] = 1.0;
  for (int m = 1; m <= m_max; ++m) {
    const double beta = 1.0 + m * p.alpha_mem + p.gamma;
    double acc = 0.0;
    for (int i = 1; i <= m; ++i) {
      const double c = ((i - 1) % 2 == 0 ? 1.0 : -1.0) * std::exp(-std::lgamma(i) - std::lgamma(m - i + 1.0));
      acc += c * mittag_leffler(p.gamma, beta, -i * mk * std::pow(t, p.gamma)).value;
    }
    d[m] = (m % 2 == 0 ? 1.0 : -1.0) * std::pow(g, m) * mk * std::pow(t, m * p.alpha_mem + p.gamma) * acc;
  }
  return d;
}

SeriesEstimate mixed_density_series(double x, double t, const ModelParams& p, const Truncation& trunc) {
  require_mixed(p);
  require(t > 0.0, "mixed_density: t must be positive");
  if (x == 0.0) throw DomainError("mixed_density: singular point x = 0");
  const double ax = std::abs(x);
  const double pref = 1.0 / (p.mu * std::sqrt(M_PI) * ax);
  const double base = 0.5 * ax * std::pow(p.k_drift * p.mu / p.d_coeff, 1.0 / p.mu);
  SeriesEstimate s = sum_series(trunc, [&](int n) {
    const HParams h = fourier_params(n, p.alpha_mem, p.mu);
    return memory_term(n, t, p, [&](double tp) { return fox_h(h, base * std::pow(tp, -p.alpha_mem / p.mu)); });
  });
  s.value *= pref;
  s.error *= pref;
  return s;
}

// ---------------------------------------------------------------------------
// Similarity solutions

double phi_scale(double t, const ScaledSolutionSpec& spec, const ModelParams& p) {
  if (!(t >= 0.0)) throw DomainError("phi_scale: t must be non-negative");
  if (spec.xi == 0.0) throw DomainError("phi_scale: xi must be nonzero");
  if (!(spec.phi0 > 0.0)) throw DomainError("phi_scale: phi(0) must be positive");
  const double xi = spec.xi;
  const double kd = spec.k_const * p.d_coeff;
  const double u0 = std::pow(spec.phi0, xi);
  double u;
  if (p.k_drift == 0.0) {
    u = u0 + xi * kd * t;
  } else {
    const double decay = std::exp(-xi * p.k_drift * t);
    u = u0 * decay - kd / p.k_drift * std::expm1(-xi * p.k_drift * t);
  }
  if (!(u > 0.0)) {
    std::ostringstream os;
    os << "phi_scale: phi(t)^xi = " << u << " <= 0 at t = " << t;
    throw DomainError(os.str());
  }
  return std::pow(u, 1.0 / xi);
}

ScaledExponents scaled_exponents(double mu, double theta) {
  const double d1 = 1.0 - 2.0 * mu - theta;
  const double d2 = 1.0 + mu + theta;
  if (d1 == 0.0 || d2 == 0.0) throw DomainError("scaled_exponents: degenerate denominator");
  return {(2.0 - mu) * (mu + theta) / d1, -(mu - 1.0) * (mu - 2.0) / d1, (2.0 - mu) / d2};
}

double norm_amplitude(double mu, double theta, SupportRegion region) {
  const double d1 = 1.0 - 2.0 * mu - theta;
  if (region == SupportRegion::bounded) {
    require(mu < -1.0 - theta && theta >= 0.0, "norm_amplitude: bounded support requires mu < -1 - theta, theta >= 0");
    const double g_num = gamma_fn(1.0 - mu - theta).value;
    const double g1 = gamma_fn((mu * mu + mu * theta - 2.0 * theta - 2.0 * mu) / d1).value;
    const double g2 = gamma_fn((1.0 - mu + mu * mu + theta * theta + 2.0 * mu * theta) / d1).value;
    return g_num / (2.0 * g1 * g2);
  }
  require(mu > 0.0 && mu < 0.5 && theta >= 0.0 && theta < 0.5 - mu,
          "norm_amplitude: infinite support requires 0 < mu < 1/2, 0 <= theta < 1/2 - mu");
  const double g_num = gamma_fn((1.0 + theta - mu * mu - mu * theta) / d1).value;
  const double g1 = gamma_fn((1.0 - mu + mu * mu + theta * theta + 2.0 * mu * theta) / d1).value;
  const double g2 = gamma_fn(mu + theta).value;
  return g_num / (2.0 * g1 * g2);
}

ScaledSolutionSpec make_scaled_spec(double mu, double theta, SupportRegion region, int n_dim, double phi0) {
  const ScaledExponents ex = scaled_exponents(mu, theta);
  ScaledSolutionSpec s;
  s.alpha_s = ex.alpha_s;
  s.beta_s = ex.beta_s;
  s.nu_s = ex.nu_s;
  s.b_sign = region == SupportRegion::bounded ? -1 : 1;
  s.amplitude = norm_amplitude(mu, theta, region);
  // A = [-k Gamma(-beta) / Gamma(alpha + 1)]^{1 / (nu - 1)}
  s.k_const = -gamma_fn(ex.alpha_s + 1.0).value / gamma_fn(-ex.beta_s).value * std::pow(s.amplitude, ex.nu_s - 1.0);
  s.xi = n_dim * (ex.nu_s - 1.0) + theta + mu;
  s.phi0 = phi0;
  s.mu = mu;
  s.theta = theta;
  s.region = region;
  return s;
}

double scaled_profile(double z, const ScaledSolutionSpec& spec) {
  z = std::abs(z);
  if (spec.region == SupportRegion::bounded && z >= 1.0) return 0.0;
  if (std::isinf(z)) return 0.0;
  const double mu = spec.mu, th = spec.theta;
  const double d1 = 1.0 - 2.0 * mu - th;
  const double pw = (mu + th) * (1.0 + mu + th) / d1;
  const double qw = (1.0 - mu) * (1.0 + mu + th) / d1;
  const double base = 1.0 + spec.b_sign * z;
  if (!(base > 0.0)) throw DomainError("scaled_solution: 1 + b z <= 0 inside the support");
  if (z == 0.0) return pw > 0.0 ? 0.0 : (pw == 0.0 ? spec.amplitude : std::numeric_limits<double>::infinity());
  return spec.amplitude * std::exp(pw * std::log(z) - qw * std::log(base));
}

double scaled_solution(double x, double t, const ScaledSolutionSpec& spec, const ModelParams& p) {
  const double xi = p.n_dim * (spec.nu_s - 1.0) + spec.theta + spec.mu;
  require(std::abs(xi - spec.xi) <= 1e-12 * (1.0 + std::abs(xi)), "scaled_solution: xi inconsistent with N");
  const double phi = phi_scale(t, spec, p);
  return scaled_profile(std::abs(x) / phi, spec) / std::pow(phi, p.n_dim);
}

double tsallis_q(double mu, double theta) {
  const double d = 1.0 + mu + theta;
  if (d == 0.0) throw DomainError("tsallis_q: degenerate denominator 1 + mu + theta = 0");
  return (3.0 + mu + theta) / d;
}

double tsallis_tail_exponent(double mu, double theta) { return 2.0 / (tsallis_q(mu, theta) - 1.0); }

double fig1_scale(double t, const ModelParams& p) {
  const double two_theta = 2.0 + p.theta;
  return 2.0 * gamma_fn(p.n_dim / two_theta).value / two_theta *
         std::pow(two_theta * two_theta * p.d_coeff * std::pow(t, p.gamma), p.n_dim / two_theta);
}

}  // namespace fracdiff
