#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fracfield/covariance.hpp"
#include "fracfield/sampler.hpp"
#include "fracfield/spectral.hpp"

namespace fracfield {

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double stderr_slope = 0.0;
  std::vector<double> lags;
  std::vector<double> moments;
};

/// Least squares fit of log(moment) = intercept + slope * log(lag).
inline ExponentFit fit_power_law(std::span<const double> lags, std::span<const double> moments) {
  if (lags.size() != moments.size()) throw ValidationError("lags and moments differ in length");
  if (lags.size() < 4) throw ValidationError("exponent fit needs at least 4 lags");
  const std::size_t n = lags.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lags[i] > 0.0)) throw ValidationError("lags must be positive");
    if (!(moments[i] > 0.0)) {
      throw NumericalError("degenerate regression: moment at lag " + std::to_string(lags[i]) +
                           " is not positive");
    }
    x[i] = std::log(lags[i]);
    y[i] = std::log(moments[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("exponent fit needs distinct lags");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  fit.lags.assign(lags.begin(), lags.end());
  fit.moments.assign(moments.begin(), moments.end());
  return fit;
}

enum class Direction { Time, Space };

inline Direction parse_direction(std::string_view s) {
  if (s == "time") return Direction::Time;
  if (s == "space") return Direction::Space;
  throw ValidationError("unknown direction '" + std::string(s) + "' (expected time|space)");
}

/// Hölder exponent gamma of the stochastic convolution: H, except H/2 in time
/// for the heat equation.
inline double expected_gamma(EquationKind eqn, double H, Direction dir) {
  return eqn == EquationKind::Heat && dir == Direction::Time ? 0.5 * H : H;
}

inline SpaceTimePoint shifted(const SpaceTimePoint& p, Direction dir, double lag) {
  return dir == Direction::Time ? SpaceTimePoint{p.t + lag, p.x} : SpaceTimePoint{p.t, p.x + lag};
}

inline void validate_lags(std::span<const double> lags) {
  if (lags.size() < 4) throw ValidationError("Hölder fit needs at least 4 lags");
  for (double h : lags) {
    if (!(h > 0.0 && h <= 1.0)) throw ValidationError("lags must lie in (0, 1]");
  }
}

/// Slope of log E|u(p + lag) - u(p)|^p against log lag from exact moments;
/// the expected slope is p * gamma. For p > 2 the Gaussian identity
/// E|X|^p = z_p (E X^2)^{p/2} is used.
inline ExponentFit fit_hoelder(EquationKind eqn, HurstIndex H, Direction dir, int p, std::span<const double> lags,
                               SpaceTimePoint base = {1.0, 0.0}, const QuadratureSpec& quad = {},
                               unsigned threads = 1) {
  if (p < 2 || p % 2 != 0) throw ValidationError("moment order p must be an even integer >= 2");
  validate_lags(lags);
  validate_point(base);
  std::vector<double> m(lags.size());
  parallel_for(lags.size(), threads, [&](std::size_t i) {
    const double m2 = increment_moment2(eqn, H, base, shifted(base, dir, lags[i]), quad).value;
    m[i] = p == 2 ? m2 : gaussian_abs_moment(p) * std::pow(m2, 0.5 * p);
  });
  return fit_power_law(lags, m);
}

struct MonteCarloFit {
  ExponentFit fit;
  std::vector<double> standard_errors;
};

/// Cross-check of fit_hoelder from sampled paths: E|du|^p estimated by the
/// sample mean over replicates, with its standard error.
inline MonteCarloFit fit_hoelder_mc(EquationKind eqn, HurstIndex H, Direction dir, int p,
                                    std::span<const double> lags, SpaceTimePoint base, std::size_t n_replicates,
                                    std::uint64_t seed, const QuadratureSpec& quad = {}, unsigned threads = 1) {
  if (p < 2 || p % 2 != 0) throw ValidationError("moment order p must be an even integer >= 2");
  validate_lags(lags);
  if (n_replicates < 2) throw ValidationError("Monte Carlo fit needs at least 2 replicates");
  std::vector<SpaceTimePoint> pts{base};
  for (double h : lags) pts.push_back(shifted(base, dir, h));
  const FieldSample s = sample_field(factor_psd(cov_matrix(eqn, H, pts, quad, threads)), seed, n_replicates, threads);
  std::vector<double> mean(lags.size()), se(lags.size());
  for (std::size_t i = 0; i < lags.size(); ++i) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < n_replicates; ++r) {
      const double v = std::pow(std::abs(s(r, i + 1) - s(r, 0)), p);
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(n_replicates);
    mean[i] = sum / n;
    se[i] = std::sqrt(std::max(0.0, sq / n - mean[i] * mean[i]) / (n - 1.0));
  }
  return {fit_power_law(lags, mean), se};
}

struct HConvergenceRow {
  double H = 0.0;
  double sup_deviation = 0.0;
  std::vector<double> deviations;  // one per pair
};

using PointPair = std::pair<SpaceTimePoint, SpaceTimePoint>;

/// sup over pairs of |cov_{H_n}(pair) - cov_{H0}(pair)| for each H_n.
inline std::vector<HConvergenceRow> h_convergence(EquationKind eqn, std::span<const double> H_sequence, HurstIndex H0,
                                                  std::span<const PointPair> pairs, const QuadratureSpec& quad = {},
                                                  unsigned threads = 1) {
  if (pairs.empty()) throw ValidationError("h_convergence needs at least one point pair");
  std::vector<HurstIndex> hs;
  for (double h : H_sequence) hs.emplace_back(h);
  auto attributed = [&](HurstIndex H, std::size_t k) {
    try {
      return conv_cov(eqn, H, pairs[k].first, pairs[k].second, quad).value;
    } catch (const QuadratureError& e) {
      throw QuadratureError("H=" + std::to_string(H.value()) + ", pair " + std::to_string(k) + ": " + e.what(),
                            e.achieved_error());
    }
  };
  std::vector<double> ref(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) { ref[k] = attributed(H0, k); });
  std::vector<HConvergenceRow> rows(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    rows[i].H = hs[i].value();
    rows[i].deviations.assign(pairs.size(), 0.0);
  }
  parallel_for(hs.size() * pairs.size(), threads, [&](std::size_t cell) {
    const std::size_t i = cell / pairs.size(), k = cell % pairs.size();
    rows[i].deviations[k] = std::abs(attributed(hs[i], k) - ref[k]);
  });
  for (auto& row : rows) row.sup_deviation = *std::max_element(row.deviations.begin(), row.deviations.end());
  return rows;
}

enum class Lemma { L34, L35 };

inline Lemma parse_lemma(std::string_view s) {
  if (s == "L34") return Lemma::L34;
  if (s == "L35") return Lemma::L35;
  throw ValidationError("unknown lemma '" + std::string(s) + "' (expected L34|L35)");
}

struct LemmaMargin {
  double h = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

/// Left side of the increment lemmas, integrated in closed form over t:
///  L34: int_0^T int_R (1 - cos(h xi)) |FG_t|^2 |xi|^alpha
///  L35: int_0^T int_R |FG_{t+h} - FG_t|^2 |xi|^alpha
inline double lemma_lhs(Lemma lemma, EquationKind eqn, double alpha, double T, double h,
                        const QuadratureSpec& quad = {}) {
  const bool wave = eqn == EquationKind::Wave;
  if (lemma == Lemma::L34) {
    auto g = [&](double xi) {
      const double s = std::sin(0.5 * h * xi);
      return 4.0 * s * s * time_kernel(eqn, T, T, xi);
    };
    const SpectralTail base = detail::time_kernel_tail(eqn, T, T);
    const TailSeries terms =
        tail_concat(tail_scale(base.terms, 2.0), tail_scale(tail_times_cos(base.terms, h), -2.0));
    const double omega = wave ? h + 2.0 * T : h;
    return integrate_half_line(g, alpha, omega, SpectralTail{base.start, terms}, quad).value;
  }
  if (wave) {
    auto g = [&](double xi) {
      const double s = std::sin(0.5 * h * xi);
      const double inner = 0.5 * T + std::cos((T + h) * xi) * std::sin(T * xi) / (2.0 * xi);
      return 8.0 * s * s / (xi * xi) * inner;
    };
    const TailSeries terms{{2.0 * T, 2.0, 0.0, false},          {-2.0 * T, 2.0, h, false},
                           {1.0, 3.0, 2.0 * T + h, true},        {-1.0, 3.0, h, true},
                           {-0.5, 3.0, 2.0 * T + 2.0 * h, true}, {-0.5, 3.0, 2.0 * T, true},
                           {0.5, 3.0, 2.0 * h, true}};
    return integrate_half_line(g, alpha, 2.0 * T + 2.0 * h, SpectralTail{0.0, terms}, quad).value;
  }
  auto g = [&](double xi) {
    const double d = std::expm1(-0.5 * h * xi * xi);
    return 2.0 * d * d * time_kernel(eqn, T, T, xi);
  };
  const double start = std::max({quad.cutoff, std::sqrt(40.0 / T), std::sqrt(80.0 / h)});
  return integrate_half_line(g, alpha, 0.0, SpectralTail{start, {{2.0, 2.0, 0.0, false}}}, quad).value;
}

/// Right side: constant times the lemma's power of h (and T for the wave).
inline double lemma_rhs(Lemma lemma, EquationKind eqn, double alpha, double T, double h,
                        const QuadratureSpec& quad = {}) {
  const bool wave = eqn == EquationKind::Wave;
  if (lemma == Lemma::L34) {
    const double c = lemma_constant(LemmaConstantKind::CosIntegral, alpha, quad);
    return c * std::pow(h, 1.0 - alpha) * (wave ? T : 1.0);
  }
  if (wave) return lemma_constant(LemmaConstantKind::ConeIncrement, alpha, quad) * T * std::pow(h, 1.0 - alpha);
  return lemma_constant(LemmaConstantKind::SmoothingIncrement, alpha, quad) * std::pow(h, 0.5 * (1.0 - alpha));
}

inline std::vector<LemmaMargin> verify_lemma_bound(Lemma lemma, EquationKind eqn, double alpha, double T,
                                                   std::span<const double> h_grid, const QuadratureSpec& quad = {}) {
  require_open_unit(alpha, "lemma exponent alpha");
  if (!(T > 0.0)) throw ValidationError("lemma check needs T > 0");
  std::vector<LemmaMargin> out;
  for (double h : h_grid) {
    if (!(h > 0.0 && h <= 1.0)) throw ValidationError("lemma increments h must lie in (0, 1]");
    LemmaMargin m;
    m.h = h;
    m.lhs = lemma_lhs(lemma, eqn, alpha, T, h, quad);
    m.rhs = lemma_rhs(lemma, eqn, alpha, T, h, quad);
    m.ratio = m.lhs / m.rhs;
    m.pass = m.ratio <= 1.0 + 1e-6;
    out.push_back(m);
  }
  return out;
}

/// Kolmogorov distance between N(0, v1) and N(0, v2). When exactly one
/// variance is zero the distance is the CDF jump 1/2 of the point mass.
inline double normal_ks_distance(double v1, double v2) {
  if (v1 < 0.0 || v2 < 0.0) throw ValidationError("variances must be nonnegative");
  if (v1 == v2) return 0.0;
  if (v1 == 0.0 || v2 == 0.0) return 0.5;
  if (v1 > v2) std::swap(v1, v2);
  const double s1 = std::sqrt(v1), s2 = std::sqrt(v2);
  // the CDFs cross at 0; the gap peaks where the densities are equal
  const double x = std::sqrt(2.0 * v1 * v2 * std::log(s2 / s1) / (v2 - v1));
  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  return phi(x / s1) - phi(x / s2);
}

inline double marginal_distance(EquationKind eqn, HurstIndex H, HurstIndex H0, SpaceTimePoint point,
                                const QuadratureSpec& quad = {}) {
  const double v1 = conv_cov(eqn, H, point, point, quad).value;
  const double v2 = conv_cov(eqn, H0, point, point, quad).value;
  return normal_ks_distance(std::max(0.0, v1), std::max(0.0, v2));
}

}  // namespace fracfield
