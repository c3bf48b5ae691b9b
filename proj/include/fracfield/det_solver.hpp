#pragma once

// Solution operator F: eta -> z with z = G * b(z) + eta, by Picard iteration
// on the solver grid.
//
// One Picard sweep evaluates the Duhamel term D[f](t,x) of f = b(z):
//  - wave: D = V/2 where V(t,x) is the integral of f over the backward light
//    cone. V obeys the exact diamond identity
//      V(n+1,i) + V(n-1,i) - V(n,i-1) - V(n,i+1) = integral of f over a diamond,
//    and the diamond integral is taken by the midpoint rule 2 dt^2 f(n,i).
//  - heat: D(t_n) = dt * sum'' P^{n-k} f_k (composite trapezoid in s), where
//    P is the normalized discrete Gaussian of variance dt cut at 8 sqrt(dt),
//    computed by the recursion v_{n+1} = P(v_n + dt/2 f_n) + dt/2 f_{n+1}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fracfield/drift.hpp"
#include "fracfield/errors.hpp"
#include "fracfield/grid.hpp"
#include "fracfield/initial.hpp"
#include "fracfield/parallel.hpp"

namespace fracfield {

struct PicardOptions {
  double tol = 1e-8;
  std::size_t max_iter = 200;
  unsigned threads = 1;
};

struct PicardReport {
  std::size_t iterations = 0;
  std::vector<double> increments;  // d_n = sup |z_{n+1} - z_n| over the dependence region
  bool certified = false;          // stopped by the Gronwall tail bound rather than d_n < tol
};

struct SolveResult {
  GridFunction z;
  PicardReport report;
};

namespace detail {

inline std::vector<double> heat_stencil(double dt, double dx) {
  const auto r = static_cast<std::size_t>(std::ceil(8.0 * std::sqrt(dt) / dx));
  std::vector<double> w(2 * r + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double y = (static_cast<double>(k) - static_cast<double>(r)) * dx;
    w[k] = std::exp(-0.5 * y * y / dt);
    sum += w[k];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Nodes whose value only depends on the grid: wave needs the backward cone
// inside the grid, heat uses every node.
inline bool in_dependence_region(EquationKind eqn, const SolverGrid& g, std::size_t k, std::size_t j) {
  if (eqn == EquationKind::Heat) return true;
  const double reach = g.base.L + (g.base.T - g.t(k)) + 0.5 * g.base.dx();
  return std::abs(g.x(j)) <= reach;
}

inline double sup_increment(EquationKind eqn, const GridFunction& a, const GridFunction& b) {
  const SolverGrid& g = a.grid;
  double m = 0.0;
  for (std::size_t k = 0; k < g.nt(); ++k) {
    for (std::size_t j = 0; j < g.nx(); ++j) {
      if (in_dependence_region(eqn, g, k, j)) m = std::max(m, std::abs(a(k, j) - b(k, j)));
    }
  }
  return m;
}

// sum_{k > n} q^k / k!
inline double exp_tail(double q, std::size_t n) {
  if (q == 0.0) return 0.0;
  double term = 1.0;
  for (std::size_t k = 1; k <= n + 1; ++k) term *= q / static_cast<double>(k);
  double sum = 0.0;
  for (std::size_t k = n + 1; k < n + 1000; ++k) {
    sum += term;
    term *= q / static_cast<double>(k + 1);
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

class DuhamelOperator {
 public:
  DuhamelOperator(EquationKind eqn, const SolverGrid& g, unsigned threads)
      : eqn_(eqn), g_(g), threads_(threads) {
    if (eqn_ == EquationKind::Heat) stencil_ = heat_stencil(g.base.dt(), g.base.dx());
  }

  /// out = D[b(z)] + eta
  void apply(const DriftSpec& b, const GridFunction& z, const GridFunction& eta, GridFunction& out) const {
    const std::size_t nt = g_.nt(), nx = g_.nx();
    std::vector<double> f(nt * nx);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = b(z.values[i]);
    if (eqn_ == EquationKind::Wave) {
      wave(f, out);
    } else {
      heat(f, out);
    }
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += eta.values[i];
  }

 private:
  void wave(const std::vector<double>& f, GridFunction& out) const {
    const std::size_t nt = g_.nt(), nx = g_.nx();
    const double h2 = g_.base.dt() * g_.base.dt();
    std::vector<double> prev(nx, 0.0), cur(nx), next(nx);
    for (std::size_t j = 0; j < nx; ++j) {
      cur[j] = h2 * (2.0 * f[j] + f[nx + j]) / 3.0;
      out(0, j) = 0.0;
      out(1, j) = 0.5 * cur[j];
    }
    for (std::size_t k = 1; k + 1 < nt; ++k) {
      const double* fk = &f[k * nx];
      for (std::size_t j = 0; j < nx; ++j) {
        // edge nodes lie outside every dependence region; clamping keeps them finite
        const double left = cur[j == 0 ? 0 : j - 1];
        const double right = cur[j + 1 == nx ? j : j + 1];
        next[j] = left + right - prev[j] + 2.0 * h2 * fk[j];
        out(k + 1, j) = 0.5 * next[j];
      }
      std::swap(prev, cur);
      std::swap(cur, next);
    }
  }

  void heat(const std::vector<double>& f, GridFunction& out) const {
    const std::size_t nt = g_.nt(), nx = g_.nx();
    const double half = 0.5 * g_.base.dt();
    const auto r = static_cast<std::ptrdiff_t>(stencil_.size() / 2);
    const auto last = static_cast<std::ptrdiff_t>(nx) - 1;
    std::vector<double> v(nx, 0.0), tmp(nx);
    for (std::size_t j = 0; j < nx; ++j) out(0, j) = 0.0;
    const std::size_t chunks = std::min<std::size_t>(threads_, nx);
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      for (std::size_t j = 0; j < nx; ++j) tmp[j] = v[j] + half * f[k * nx + j];
      parallel_for(chunks, threads_, [&](std::size_t c) {
        const std::size_t lo = c * nx / chunks, hi = (c + 1) * nx / chunks;
        for (std::size_t j = lo; j < hi; ++j) {
          double s = 0.0;
          for (std::ptrdiff_t m = -r; m <= r; ++m) {
            const std::ptrdiff_t idx = std::clamp(static_cast<std::ptrdiff_t>(j) + m, std::ptrdiff_t{0}, last);
            s += stencil_[static_cast<std::size_t>(m + r)] * tmp[static_cast<std::size_t>(idx)];
          }
          v[j] = s + half * f[(k + 1) * nx + j];
        }
      });
      for (std::size_t j = 0; j < nx; ++j) out(k + 1, j) = v[j];
    }
  }

  EquationKind eqn_;
  SolverGrid g_;
  unsigned threads_;
  std::vector<double> stencil_;
};

}  // namespace detail

/// Fixed point of z = G * b(z) + eta on the solver grid of `eta`. Iterates
/// from `guess` (eta when absent) until the sup increment drops below tol or
/// the Gronwall bound d_0 * sum_{k>n} q^k/k! on the remaining increments does,
/// with q = 2 Lip T^2 (wave) or Lip T (heat).
inline SolveResult solve_F(EquationKind eqn, const DriftSpec& b, const GridFunction& eta,
                           const PicardOptions& opts = {}, const GridFunction* guess = nullptr) {
  const SolverGrid& g = eta.grid;
  g.base.validate(eqn);
  if (!(opts.tol > 0.0)) throw ValidationError("Picard tolerance must be positive");
  if (opts.max_iter < 1) throw ValidationError("Picard max_iter must be at least 1");
  if (!b.fn) throw ValidationError("drift has no function");
  if (eqn == EquationKind::Heat && !b.bounded()) {
    throw ValidationError("heat solution operator requires a bounded drift; drift '" + b.name +
                          "' is unbounded, set a truncation level m");
  }
  if (eta.values.size() != g.nt() * g.nx()) throw ValidationError("eta does not match its grid");
  for (double v : eta.values) {
    if (!std::isfinite(v)) throw ValidationError("eta has non-finite values");
  }
  if (guess && guess->values.size() != eta.values.size()) {
    throw ValidationError("initial guess does not match the grid");
  }

  const double T = g.base.T;
  const double q = eqn == EquationKind::Wave ? 2.0 * b.lipschitz * T * T : b.lipschitz * T;
  detail::DuhamelOperator op(eqn, g, resolve_threads(opts.threads));
  SolveResult res;
  GridFunction z = guess ? *guess : eta;
  GridFunction next(g);
  for (std::size_t n = 0; n < opts.max_iter; ++n) {
    op.apply(b, z, eta, next);
    const double d = detail::sup_increment(eqn, next, z);
    if (!std::isfinite(d)) throw NumericalError("Picard iterate became non-finite");
    res.report.increments.push_back(d);
    std::swap(z, next);
    res.report.iterations = n + 1;
    if (d < opts.tol) {
      res.z = std::move(z);
      return res;
    }
    if (res.report.increments.front() * detail::exp_tail(q, n) < opts.tol) {
      res.report.certified = true;
      res.z = std::move(z);
      return res;
    }
  }
  throw MaxIterExceeded("Picard iteration did not reach tol " + std::to_string(opts.tol) + " in " +
                            std::to_string(opts.max_iter) + " iterations",
                        res.report.increments.back());
}

/// Values of a grid function on the reported window, in (k, j) order.
struct ReportedValues {
  std::vector<SpaceTimePoint> points;
  std::vector<double> values;
};

inline ReportedValues reported_values(const GridFunction& z) {
  ReportedValues out;
  const SolverGrid& g = z.grid;
  for (std::size_t k = 0; k < g.nt(); ++k) {
    for (std::size_t j = g.margin; j <= g.margin + g.base.n_x; ++j) {
      out.points.push_back({g.t(k), g.x(j)});
      out.values.push_back(z(k, j));
    }
  }
  return out;
}

/// Independent check for spatially constant eta: solves the Volterra equation
///  heat: z(t) = int_0^t b(z(s)) ds + eta(t)
///  wave: z(t) = int_0^t (t - s) b(z(s)) ds + eta(t)
/// by trapezoid Picard iteration on steps + 1 nodes of [0, T].
inline std::vector<double> ode_oracle(EquationKind eqn, const DriftSpec& b,
                                      const std::function<double(double)>& eta, double T,
                                      std::size_t steps) {
  if (steps < 100) throw ValidationError("ode_oracle needs at least 100 steps");
  if (!(T > 0.0)) throw ValidationError("ode_oracle needs T > 0");
  const double h = T / static_cast<double>(steps);
  std::vector<double> e(steps + 1), z(steps + 1), f(steps + 1), zn(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) e[k] = eta(h * static_cast<double>(k));
  z = e;
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t k = 0; k <= steps; ++k) f[k] = b(z[k]);
    // S_k = int_0^{t_k} f, R_k = int_0^{t_k} s f(s); wave integral is t S - R
    double S = 0.0, R = 0.0, diff = 0.0;
    zn[0] = e[0];
    for (std::size_t k = 1; k <= steps; ++k) {
      const double s0 = h * static_cast<double>(k - 1), s1 = h * static_cast<double>(k);
      S += 0.5 * h * (f[k - 1] + f[k]);
      R += 0.5 * h * (s0 * f[k - 1] + s1 * f[k]);
      zn[k] = e[k] + (eqn == EquationKind::Heat ? S : s1 * S - R);
    }
    for (std::size_t k = 0; k <= steps; ++k) diff = std::max(diff, std::abs(zn[k] - z[k]));
    std::swap(z, zn);
    if (diff <= 1e-14 * std::max(1.0, std::abs(z.back()))) return z;
  }
  throw MaxIterExceeded("ode_oracle did not converge", 0.0);
}

}  // namespace fracfield
