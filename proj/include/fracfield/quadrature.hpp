#pragma once

// Adaptive Gauss-Kronrod integration, Gauss-Legendre rules and the
// half-line spectral engine used by every frequency-domain integral in the
// library: a singularity-removing substitution near xi = 0, composite
// adaptive panels on [eps, cutoff] and an analytic oscillatory tail.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracfield/errors.hpp"

namespace fracfield {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    panels += o.panels;
    converged = converged && o.converged;
    return *this;
  }
};

/// Controls the evaluation of spectral integrals over xi in (0, inf).
struct QuadratureSpec {
  double cutoff = 200.0;         // frequency where the analytic tail takes over
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
  double small_xi_eps = 1e-4;    // end of the substitution interval near 0
  std::size_t max_panels = 4'000'000;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0) || !(abs_tol > 0.0 && abs_tol < 1.0)) {
      throw ValidationError("quadrature tolerances must lie in (0,1)");
    }
    if (!(small_xi_eps > 0.0) || !(cutoff > small_xi_eps)) {
      throw ValidationError("quadrature needs cutoff > small_xi_eps > 0");
    }
    if (max_panels < 1) throw ValidationError("quadrature needs max_panels >= 1");
  }
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

template <class F>
Panel gk15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double s = f1[j] + f2[j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double ah = std::abs(half);
  double err = std::abs((resk - resg) * half);
  resasc *= ah;
  resabs *= ah;
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, resk * half, err};
}

// Neumaier-compensated sum in container order.
template <class Range, class Proj>
double stable_sum(const Range& r, Proj proj) {
  double sum = 0.0, comp = 0.0;
  for (const auto& item : r) {
    const double v = proj(item);
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

/// Globally adaptive GK15 integration over consecutive breakpoints. The worst
/// panel is bisected until the summed error estimate meets
/// max(abs_tol, rel_tol * |I|) or the panel budget runs out. Deterministic:
/// the result depends only on the arguments.
template <class F>
QuadResult integrate_adaptive(const F& f, std::span<const double> breaks, double abs_tol,
                              double rel_tol, std::size_t max_panels) {
  QuadResult out;
  if (breaks.size() < 2) return out;
  std::vector<detail::Panel> panels;
  panels.reserve(std::max<std::size_t>(breaks.size() * 2, 16));
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    panels.push_back(detail::gk15(f, breaks[i], breaks[i + 1]));
    value += panels.back().value;
    error += panels.back().error;
    heap.emplace(panels.back().error, panels.size() - 1);
  }
  auto tolerance = [&] { return std::max(abs_tol, rel_tol * std::abs(value)); };
  std::size_t since_resum = 0;
  while (error > tolerance() && !heap.empty() && panels.size() < max_panels) {
    const std::size_t idx = heap.top().second;
    heap.pop();
    const detail::Panel p = panels[idx];
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b) || (p.b - p.a) < 1e-14 * std::max(1.0, std::abs(p.a))) {
      continue;  // cannot refine further; its error stays in the total
    }
    const detail::Panel left = detail::gk15(f, p.a, mid);
    const detail::Panel right = detail::gk15(f, mid, p.b);
    value += left.value + right.value - p.value;
    error += left.error + right.error - p.error;
    panels[idx] = left;
    heap.emplace(left.error, idx);
    panels.push_back(right);
    heap.emplace(right.error, panels.size() - 1);
    if (++since_resum == 4096) {
      error = detail::stable_sum(panels, [](const detail::Panel& q) { return q.error; });
      value = detail::stable_sum(panels, [](const detail::Panel& q) { return q.value; });
      since_resum = 0;
    }
  }
  out.value = detail::stable_sum(panels, [](const detail::Panel& q) { return q.value; });
  out.error = detail::stable_sum(panels, [](const detail::Panel& q) { return q.error; });
  out.panels = panels.size();
  out.converged = out.error <= std::max(abs_tol, rel_tol * std::abs(out.value));
  return out;
}

template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-13,
                              double rel_tol = 1e-11, std::size_t max_panels = 100000) {
  const std::array<double, 2> br{a, b};
  return integrate_adaptive(f, std::span<const double>(br), abs_tol, rel_tol, max_panels);
}

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule make_gauss_legendre(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline const GaussLegendreRule& gauss_legendre_20() {
  static const GaussLegendreRule rule = make_gauss_legendre(20);
  return rule;
}

/// Fixed composite Gauss-Legendre sum over consecutive breakpoints.
template <class F>
double integrate_fixed(const F& f, std::span<const double> breaks,
                       const GaussLegendreRule& rule = gauss_legendre_20()) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double c = 0.5 * (breaks[i] + breaks[i + 1]);
    const double h = 0.5 * (breaks[i + 1] - breaks[i]);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(c + h * rule.nodes[k]);
    total += h * s;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Oscillatory power tails

/// coef * xi^(-power) * (cos|sin)(omega * xi)
struct TailTerm {
  double coef = 0.0;
  double power = 0.0;
  double omega = 0.0;
  bool is_sin = false;
};

using TailSeries = std::vector<TailTerm>;

/// Multiply every term by cos(a xi).
inline TailSeries tail_times_cos(const TailSeries& s, double a) {
  TailSeries out;
  out.reserve(2 * s.size());
  for (const auto& t : s) {
    out.push_back({0.5 * t.coef, t.power, t.omega + a, t.is_sin});
    out.push_back({0.5 * t.coef, t.power, t.omega - a, t.is_sin});
  }
  return out;
}

/// Multiply every term by xi^(-dp).
inline TailSeries tail_shift_power(TailSeries s, double dp) {
  for (auto& t : s) t.power += dp;
  return s;
}

inline TailSeries tail_scale(TailSeries s, double c) {
  for (auto& t : s) t.coef *= c;
  return s;
}

inline TailSeries tail_concat(TailSeries a, const TailSeries& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

namespace detail {

// Integral of e^{iu} u^{-s} over [x, inf), x large, via the integration by
// parts series i e^{ix} x^{-s} sum_k (-i)^k (s)_k x^{-k}.
inline std::complex<double> exp_power_tail_asymptotic(double s, double x) {
  std::complex<double> sum = 0.0, term = 1.0;
  const std::complex<double> minus_i(0.0, -1.0);
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const double mag = std::abs(term);
    if (mag > last) break;  // asymptotic series started diverging
    sum += term;
    if (mag < 1e-18 * std::abs(sum)) break;
    last = mag;
    term *= minus_i * (s + k) / x;
  }
  const std::complex<double> lead = std::complex<double>(0.0, 1.0) *
                                    std::exp(std::complex<double>(0.0, x)) * std::pow(x, -s);
  return lead * sum;
}

inline constexpr double kAsymptoticStart = 40.0;

}  // namespace detail

/// Integral of xi^(-power) * (cos|sin)(omega * xi) over [x0, inf). Requires
/// power > 1 when omega == 0 (cosine) and power > 0 otherwise.
inline QuadResult oscillatory_power_tail(double power, double omega, bool is_sin, double x0) {
  double sign = 1.0;
  if (omega < 0.0) {
    omega = -omega;
    if (is_sin) sign = -1.0;
  }
  QuadResult out;
  if (omega == 0.0) {
    if (!is_sin) {
      if (!(power > 1.0)) throw ValidationError("divergent non-oscillatory tail");
      out.value = std::pow(x0, 1.0 - power) / (power - 1.0);
    }
    return out;
  }
  if (!(power > 0.0)) throw ValidationError("divergent oscillatory tail");
  const double u0 = omega * x0;
  const double ustar = std::max(detail::kAsymptoticStart, u0);
  const std::complex<double> far = detail::exp_power_tail_asymptotic(power, ustar);
  double near = 0.0, near_err = 0.0;
  if (u0 < ustar) {
    std::vector<double> br{u0};
    double u = u0;
    while (u < ustar) {
      u += std::min(std::max(u, 1e-300), std::numbers::pi / 2.0);
      br.push_back(std::min(u, ustar));
    }
    auto integrand = [&](double v) {
      return (is_sin ? std::sin(v) : std::cos(v)) * std::pow(v, -power);
    };
    // absolute floor relative to the integrand size, for near-cancelling tails
    const double floor = 1e-15 * std::pow(std::max(u0, 1.0), -power);
    const QuadResult r = integrate_adaptive(integrand, std::span<const double>(br), floor, 1e-12, 200000);
    near = r.value;
    near_err = r.error;
    out.panels = r.panels;
    out.converged = r.converged;
  }
  const double scale = std::pow(omega, power - 1.0);
  out.value = sign * scale * (near + (is_sin ? far.imag() : far.real()));
  out.error = scale * near_err;
  return out;
}

inline QuadResult evaluate_tail(const TailSeries& tail, double x0) {
  QuadResult out;
  for (const auto& t : tail) {
    if (t.coef == 0.0) continue;
    QuadResult r = oscillatory_power_tail(t.power, t.omega, t.is_sin, x0);
    r.value *= t.coef;
    r.error *= std::abs(t.coef);
    out += r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Half-line spectral integrals  I = int_0^inf g(xi) xi^beta dxi

/// Description of g beyond the adaptive range. `start` is the frequency from
/// which `terms` represent g to double precision; start <= 0 selects the
/// spec's cutoff (the terms are then exact for any xi > 0).
struct SpectralTail {
  double start = 0.0;
  TailSeries terms;
};

/// Integrates g(xi) xi^beta over (0, inf) for beta in (-1, 1):
///  - [0, eps] through xi = eps v^{1/(beta+1)}, which absorbs the power
///    singularity into a smooth integrand in v;
///  - [eps, cutoff] with adaptive panels no wider than xi itself or a quarter
///    period of the fastest oscillation `omega_max`;
///  - [cutoff, inf) from the analytic tail.
/// Throws QuadratureError when the panel budget is exhausted.
template <class G>
QuadResult integrate_half_line(const G& g, double beta, double omega_max,
                               const SpectralTail& tail, const QuadratureSpec& q) {
  if (!(beta > -1.0)) throw ValidationError("spectral exponent must exceed -1");
  double cutoff = tail.start > 0.0 ? tail.start : q.cutoff;
  const double eps = std::min(q.small_xi_eps, 0.5 * cutoff);
  cutoff = std::max(cutoff, 2.0 * eps);

  QuadResult total;
  {
    const double inv = 1.0 / (beta + 1.0);
    const double scale = std::pow(eps, beta + 1.0) * inv;
    auto sub = [&](double v) { return g(eps * std::pow(v, inv)); };
    QuadResult r = integrate_adaptive(sub, 0.0, 1.0, q.abs_tol / scale, q.rel_tol, 2000);
    r.value *= scale;
    r.error *= scale;
    total += r;
  }
  {
    const double cap = omega_max > 0.0 ? std::numbers::pi / (4.0 * omega_max)
                                       : std::numeric_limits<double>::infinity();
    const double est = omega_max > 0.0 ? (cutoff - eps) / cap : 0.0;
    if (est > static_cast<double>(q.max_panels)) {
      throw QuadratureError("spectral integral needs more panels than the budget (" +
                                std::to_string(static_cast<long long>(est)) + ")",
                            std::numeric_limits<double>::infinity());
    }
    std::vector<double> br{eps};
    double xi = eps;
    while (xi < cutoff) {
      xi += std::min(xi, cap);
      br.push_back(std::min(xi, cutoff));
    }
    auto f = [&](double x) { return g(x) * std::pow(x, beta); };
    total += integrate_adaptive(f, std::span<const double>(br), q.abs_tol, q.rel_tol, q.max_panels);
  }
  total += evaluate_tail(tail_shift_power(tail.terms, -beta), cutoff);
  total.converged = total.error <= std::max(q.abs_tol, q.rel_tol * std::abs(total.value));
  if (!total.converged) {
    throw QuadratureError("spectral integral did not reach tolerance", total.error);
  }
  return total;
}

}  // namespace fracfield
