#pragma once

// Covariance kernels: the noise field X^H in closed form and the stochastic
// convolution through its spectral representation
//   E[u(t,x) u(t',x')] = c_H int_R cos(xi (x-x')) K(t,t',xi) |xi|^{1-2H} dxi,
// where K is the time kernel int_0^t FG_{t-s}(xi) FG_{t'-s}(xi) ds.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "fracfield/parallel.hpp"
#include "fracfield/quadrature.hpp"
#include "fracfield/spectral.hpp"
#include "fracfield/types.hpp"

namespace fracfield {

/// Cov(X^H(t1,x1), X^H(t2,x2)) = (t1 ^ t2)/2 (|x1|^2H + |x2|^2H - |x1-x2|^2H).
inline double noise_field_cov(HurstIndex H, const SpaceTimePoint& p1, const SpaceTimePoint& p2) {
  validate_point(p1);
  validate_point(p2);
  const double two_h = 2.0 * H.value();
  const double t = std::min(p1.t, p2.t);
  return 0.5 * t *
         (std::pow(std::abs(p1.x), two_h) + std::pow(std::abs(p2.x), two_h) -
          std::pow(std::abs(p1.x - p2.x), two_h));
}

/// K(t, t', xi) = int_0^t FG_{t-s}(xi) FG_{t'-s}(xi) ds for 0 <= t <= t'.
inline double time_kernel(EquationKind eqn, double t, double t2, double xi) {
  if (!(t >= 0.0) || !(t2 >= t)) throw ValidationError("time_kernel needs 0 <= t <= t'");
  const double a = std::abs(xi);
  const double d = t2 - t;
  if (eqn == EquationKind::Heat) {
    const double x2 = a * a;
    if (x2 == 0.0) return t;
    return std::exp(-0.5 * d * x2) * (-std::expm1(-t * x2)) / x2;
  }
  const double S = t + t2;
  if (S * a < 0.5) {
    // K = 1/2 sum_{k>=1} (-1)^k xi^{2k-2}/(2k)! [t d^{2k} - (S^{2k+1} - d^{2k+1})/(2(2k+1))]
    double sum = 0.0;
    double xi_pow = 1.0;          // xi^{2k-2}
    double d_pow = d * d;         // d^{2k}
    double s_pow = S * S * S;     // S^{2k+1}
    double dd_pow = d * d * d;    // d^{2k+1}
    double fact = 2.0;            // (2k)!
    double sign = -1.0;
    for (int k = 1; k <= 30; ++k) {
      const double term = sign * xi_pow / fact *
                          (t * d_pow - (s_pow - dd_pow) / (2.0 * (2.0 * k + 1.0)));
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      xi_pow *= a * a;
      d_pow *= d * d;
      s_pow *= S * S;
      dd_pow *= d * d;
      fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
      sign = -sign;
    }
    return 0.5 * sum;
  }
  return (0.5 * t * std::cos(d * a) - (std::sin(S * a) - std::sin(d * a)) / (4.0 * a)) / (a * a);
}

namespace detail {

// Large-xi representation of K(t, t', .) and the frequency beyond which it is
// accurate (0 = exact for all xi > 0, use the cutoff).
inline SpectralTail time_kernel_tail(EquationKind eqn, double t, double t2) {
  SpectralTail out;
  if (t == 0.0) return out;
  const double d = t2 - t;
  if (eqn == EquationKind::Heat) {
    if (d > 0.0) {
      out.start = std::sqrt(80.0 / d);  // exp(-d xi^2/2) < e^{-40}
    } else {
      out.start = std::sqrt(40.0 / t);  // exp(-t xi^2) < e^{-40}
      out.terms = {{1.0, 2.0, 0.0, false}};
    }
    return out;
  }
  const double S = t + t2;
  out.terms = {{0.5 * t, 2.0, d, false}, {-0.25, 3.0, S, true}, {0.25, 3.0, d, true}};
  return out;
}

inline double merge_start(double a, double b) {
  if (a <= 0.0) return b;
  if (b <= 0.0) return a;
  return std::max(a, b);
}

}  // namespace detail

/// A covariance value with its quadrature error estimate.
struct CovEntry {
  double value = 0.0;
  double error = 0.0;
};

/// Covariance of the stochastic convolution at two space-time points.
inline CovEntry conv_cov(EquationKind eqn, HurstIndex H, SpaceTimePoint p1, SpaceTimePoint p2,
                         const QuadratureSpec& quad = {}) {
  validate_point(p1);
  validate_point(p2);
  if (p1.t > p2.t) std::swap(p1, p2);
  if (p1.t == 0.0) return {};
  const double t1 = p1.t, t2 = p2.t;
  const double dx = std::abs(p1.x - p2.x);
  const double ch = noise_constant(H);
  const double beta = 1.0 - 2.0 * H.value();
  auto g = [&](double xi) { return 2.0 * ch * std::cos(dx * xi) * time_kernel(eqn, t1, t2, xi); };
  SpectralTail base = detail::time_kernel_tail(eqn, t1, t2);
  SpectralTail tail{base.start, tail_scale(tail_times_cos(base.terms, dx), 2.0 * ch)};
  const double omega = eqn == EquationKind::Wave ? dx + t1 + t2 : std::max(dx, t2);
  const QuadResult r = integrate_half_line(g, beta, omega, tail, quad);
  return {r.value, r.error};
}

/// E|u(p1) - u(p2)|^2 = C(p1,p1) + C(p2,p2) - 2 C(p1,p2), integrated as one
/// spectral integrand so that small lags do not cancel catastrophically.
inline CovEntry increment_moment2(EquationKind eqn, HurstIndex H, SpaceTimePoint p1,
                                  SpaceTimePoint p2, const QuadratureSpec& quad = {}) {
  validate_point(p1);
  validate_point(p2);
  if (p1 == p2) return {};
  if (p1.t > p2.t) std::swap(p1, p2);
  const double t1 = p1.t, t2 = p2.t;
  const double dx = std::abs(p1.x - p2.x);
  const double ch = noise_constant(H);
  const double beta = 1.0 - 2.0 * H.value();
  QuadResult r;
  if (t1 == t2) {
    auto g = [&](double xi) {
      const double s = std::sin(0.5 * dx * xi);
      return 8.0 * ch * s * s * time_kernel(eqn, t1, t1, xi);
    };
    const SpectralTail base = detail::time_kernel_tail(eqn, t1, t1);
    TailSeries terms = tail_concat(tail_scale(base.terms, 4.0 * ch),
                                   tail_scale(tail_times_cos(base.terms, dx), -4.0 * ch));
    const double omega = eqn == EquationKind::Wave ? dx + 2.0 * t1 : std::max(dx, t1);
    r = integrate_half_line(g, beta, omega, SpectralTail{base.start, terms}, quad);
  } else {
    auto g = [&](double xi) {
      return 2.0 * ch *
             (time_kernel(eqn, t1, t1, xi) + time_kernel(eqn, t2, t2, xi) -
              2.0 * std::cos(dx * xi) * time_kernel(eqn, t1, t2, xi));
    };
    const SpectralTail a = detail::time_kernel_tail(eqn, t1, t1);
    const SpectralTail b = detail::time_kernel_tail(eqn, t2, t2);
    const SpectralTail c = detail::time_kernel_tail(eqn, t1, t2);
    TailSeries terms = tail_concat(tail_concat(a.terms, b.terms), tail_scale(tail_times_cos(c.terms, dx), -2.0));
    SpectralTail tail{detail::merge_start(detail::merge_start(a.start, b.start), c.start),
                      tail_scale(terms, 2.0 * ch)};
    const double omega = eqn == EquationKind::Wave ? dx + 2.0 * t2 : std::max(dx, t2);
    r = integrate_half_line(g, beta, omega, tail, quad);
  }
  if (r.value < -1e-10) {
    throw QuadratureError("negative increment second moment " + std::to_string(r.value) +
                              ": inconsistent quadrature",
                          r.error);
  }
  return {std::max(0.0, r.value), r.error};
}

/// Dense symmetric Gram matrix of the stochastic convolution on a point list.
struct CovarianceMatrix {
  std::vector<SpaceTimePoint> points;
  std::vector<double> entries;  // row-major n x n
  std::vector<double> errors;   // quadrature error estimate per entry

  std::size_t size() const noexcept { return points.size(); }
  double operator()(std::size_t i, std::size_t j) const { return entries[i * points.size() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries[i * points.size() + j]; }

  double max_diagonal() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, (*this)(i, i));
    return m;
  }
};

/// Builds the Gram matrix from the upper triangle. Entries depend on
/// (min t, max t, |dx|) only, so each distinct key is integrated once; keys
/// are evaluated in parallel with results identical for any thread count.
inline CovarianceMatrix cov_matrix(EquationKind eqn, HurstIndex H, std::span<const SpaceTimePoint> points,
                                   const QuadratureSpec& quad = {}, unsigned threads = 1) {
  if (points.empty()) throw ValidationError("cov_matrix needs a nonempty point list");
  quad.validate();
  for (const auto& p : points) validate_point(p);
  const std::size_t n = points.size();
  using Key = std::tuple<double, double, double>;
  auto key_of = [&](std::size_t i, std::size_t j) {
    const double ta = std::min(points[i].t, points[j].t);
    const double tb = std::max(points[i].t, points[j].t);
    return Key{ta, tb, std::abs(points[i].x - points[j].x)};
  };
  std::map<Key, std::size_t> index;
  std::vector<Key> keys;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Key k = key_of(i, j);
      if (index.emplace(k, keys.size()).second) keys.push_back(k);
    }
  }
  std::vector<CovEntry> values(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t k) {
    const auto [ta, tb, dx] = keys[k];
    values[k] = conv_cov(eqn, H, {ta, 0.0}, {tb, dx}, quad);
  });
  CovarianceMatrix m;
  m.points.assign(points.begin(), points.end());
  m.entries.assign(n * n, 0.0);
  m.errors.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const CovEntry& e = values[index.at(key_of(i, j))];
      m.entries[i * n + j] = m.entries[j * n + i] = e.value;
      m.errors[i * n + j] = m.errors[j * n + i] = e.error;
    }
  }
  return m;
}

}  // namespace fracfield
