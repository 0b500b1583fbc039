#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace fracdiff::quad {

/// Outcome of a numerical integration.
struct QuadResult {
  double value = 0.0;
  double error = 0.0;      ///< absolute error estimate
  bool converged = false;  ///< error met the requested tolerance
  std::size_t evaluations = 0;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    abs_sum += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  const double value = kron * h;
  double err = std::abs((kron - gauss) * h);
  // QUADPACK-style sharpening of the raw Gauss/Kronrod difference.
  const double scale = abs_sum * std::abs(h);
  if (scale > 0.0 && err > 0.0) err = scale * std::min(1.0, std::pow(200.0 * err / scale, 1.5));
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * scale);
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive 7/15-point Gauss-Kronrod integration on a finite interval.
template <class F>
QuadResult gauss_kronrod(F&& f, double a, double b, double abs_tol, double rel_tol,
                         std::size_t max_panels = 2000) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::kronrod15(f, a, b));
  double total = heap.top().value;
  double total_err = heap.top().error;
  std::size_t panels = 1;
  auto target = [&] { return std::max(abs_tol, rel_tol * std::abs(total)); };
  while (total_err > target() && panels < max_panels) {
    const detail::Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // exhausted resolution
    heap.pop();
    const detail::Panel left = detail::kronrod15(f, worst.a, mid);
    const detail::Panel right = detail::kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
  out.evaluations = (2 * panels - 1) * 15;
  return out;
}

/// Double-exponential (tanh-sinh) rule on a finite interval. Tolerates integrable
/// algebraic endpoint singularities; the integrand is never evaluated at a or b.
template <class F>
QuadResult tanh_sinh(F&& f, double a, double b, double tol, int max_levels = 9) {
  QuadResult out;
  const double half = 0.5 * (b - a);
  const double pi_2 = 0.5 * M_PI;
  const double t_max = 4.0;  // weights below ~1e-40 past this point
  auto node = [&](double t, double& weight) -> double {
    const double s = pi_2 * std::sinh(t);
    const double c = std::cosh(s);
    weight = pi_2 * std::cosh(t) / (c * c);
    // Distance from the nearer endpoint, computed without cancellation.
    return 1.0 / (std::exp(2.0 * std::abs(s)) + 1.0) * 2.0;  // = 1 - tanh|s|
  };
  auto eval_pair = [&](double t) {
    double w = 0.0;
    const double comp = node(t, w);
    double sum = 0.0;
    const double xl = a + half * comp;
    const double xr = b - half * comp;
    if (xl > a && xl < b) {
      sum += w * f(xl);
      ++out.evaluations;
    }
    if (t != 0.0 && xr > a && xr < b) {
      sum += w * f(xr);
      ++out.evaluations;
    }
    return sum;
  };
  double h = 1.0;
  double sum = 0.0;
  for (double t = 0.0; t <= t_max; t += h) sum += eval_pair(t);
  double estimate = sum * h * half;
  double previous = estimate;
  for (int level = 1; level <= max_levels; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) sum += eval_pair(t);
    estimate = sum * h * half;
    const double diff = std::abs(estimate - previous);
    out.error = diff;
    if (level >= 3 && diff <= tol * std::max(1.0, std::abs(estimate))) {
      out.converged = true;
      break;
    }
    previous = estimate;
  }
  out.value = estimate;
  return out;
}

/// Adaptive Gauss-Kronrod on a possibly infinite interval; infinite ends are mapped
/// onto [0, 1) with x = a + u / (1 - u).
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                     std::size_t max_panels = 2000) {
  const bool a_inf = std::isinf(a);
  const bool b_inf = std::isinf(b);
  if (!a_inf && !b_inf) return gauss_kronrod(f, a, b, abs_tol, rel_tol, max_panels);
  if (a_inf && b_inf) {
    QuadResult lo = integrate(f, -std::numeric_limits<double>::infinity(), 0.0, 0.5 * abs_tol, rel_tol, max_panels);
    QuadResult hi = integrate(f, 0.0, std::numeric_limits<double>::infinity(), 0.5 * abs_tol, rel_tol, max_panels);
    return {lo.value + hi.value, lo.error + hi.error, lo.converged && hi.converged,
            lo.evaluations + hi.evaluations};
  }
  if (b_inf) {
    auto g = [&](double u) {
      const double w = 1.0 - u;
      if (!(w > 0.0)) return 0.0;
      const double fx = f(a + u / w);
      return fx == 0.0 ? 0.0 : fx / (w * w);
    };
    return gauss_kronrod(g, 0.0, 1.0, abs_tol, rel_tol, max_panels);
  }
  auto g = [&](double u) {
    const double w = 1.0 - u;
    if (!(w > 0.0)) return 0.0;
    const double fx = f(b - u / w);
    return fx == 0.0 ? 0.0 : fx / (w * w);
  };
  return gauss_kronrod(g, 0.0, 1.0, abs_tol, rel_tol, max_panels);
}

/// exp-sinh rule on [a, inf): x = a + exp((pi/2) sinh t). Handles slowly decaying algebraic
/// tails and an algebraic singularity at a.
template <class F>
QuadResult exp_sinh(F&& f, double a, double tol, int max_levels = 10) {
  QuadResult out;
  const double pi_2 = 0.5 * M_PI;
  const double t_lo = -4.5, t_hi = 6.5;
  auto eval = [&](double t) {
    const double e = std::exp(pi_2 * std::sinh(t));
    const double x = a + e;
    if (!(x > a) || !std::isfinite(x)) return 0.0;
    const double fx = f(x);
    ++out.evaluations;
    return fx == 0.0 ? 0.0 : fx * pi_2 * std::cosh(t) * e;
  };
  double h = 0.5;
  double sum = 0.0;
  for (double t = t_lo; t <= t_hi + 1e-12; t += h) sum += eval(t);
  double estimate = sum * h;
  double previous = estimate;
  for (int level = 1; level <= max_levels; ++level) {
    h *= 0.5;
    for (double t = t_lo + h; t <= t_hi; t += 2.0 * h) sum += eval(t);
    estimate = sum * h;
    const double diff = std::abs(estimate - previous);
    out.error = diff;
    if (level >= 3 && diff <= tol * std::max(1.0, std::abs(estimate))) {
      out.converged = true;
      break;
    }
    previous = estimate;
  }
  out.value = estimate;
  return out;
}

/// Double-exponential quadrature on a possibly infinite interval: tanh-sinh on finite ranges,
/// exp-sinh on half-lines. Suited to endpoint singularities and algebraic tails.
template <class F>
QuadResult integrate_singular(F&& f, double a, double b, double tol, int max_levels = 10) {
  const bool a_inf = std::isinf(a);
  const bool b_inf = std::isinf(b);
  if (!a_inf && !b_inf) return tanh_sinh(f, a, b, tol, max_levels);
  if (a_inf && b_inf) {
    QuadResult lo = integrate_singular(f, -std::numeric_limits<double>::infinity(), 0.0, tol, max_levels);
    QuadResult hi = integrate_singular(f, 0.0, std::numeric_limits<double>::infinity(), tol, max_levels);
    return {lo.value + hi.value, lo.error + hi.error, lo.converged && hi.converged,
            lo.evaluations + hi.evaluations};
  }
  if (b_inf) return exp_sinh(f, a, tol, max_levels);
  return exp_sinh([&](double x) { return f(2.0 * b - x); }, b, tol, max_levels);
}

struct Rule {
  std::vector<double> nodes;  ///< on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace fracdiff::quad
