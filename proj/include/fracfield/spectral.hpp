#pragma once

// Constants and kernels of the Fourier picture: the spectral density
// constant c_H, Fourier transforms of the Green functions, Gaussian absolute
// moments and the time-integrated squared kernel A_T(alpha) with its
// quadrature cross-check.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fracfield/quadrature.hpp"
#include "fracfield/types.hpp"

namespace fracfield {

/// c_H = Gamma(2H+1) sin(pi H) / (2 pi), the density constant of mu_H.
inline double noise_constant(HurstIndex H) {
  const double h = H.value();
  return std::tgamma(2.0 * h + 1.0) * std::sin(std::numbers::pi * h) / (2.0 * std::numbers::pi);
}

/// Fourier transform of G_t: sin(t|xi|)/|xi| for the wave, exp(-t xi^2/2)
/// for the heat equation.
inline double fourier_kernel(EquationKind eqn, double t, double xi) {
  if (!(t >= 0.0)) throw ValidationError("fourier_kernel needs t >= 0");
  const double a = std::abs(xi);
  if (eqn == EquationKind::Heat) return std::exp(-0.5 * t * xi * xi);
  if (a * t < 1e-4) {
    // sin(z)/z series; exact to double precision here
    const double z2 = (a * t) * (a * t);
    return t * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
  }
  return std::sin(t * a) / a;
}

/// E|Z|^p for a standard normal Z.
inline double gaussian_abs_moment(int p) {
  if (p < 1) throw ValidationError("gaussian_abs_moment needs p >= 1");
  return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi);
}

inline void require_open_unit(double alpha, const char* what) {
  if (!(alpha > -1.0 && alpha < 1.0)) {
    throw ValidationError(std::string(what) + ": alpha must lie in (-1,1), the integral diverges otherwise");
  }
}

/// Piecewise constant C_alpha of the wave case; pi/2 at alpha = 0 where the
/// two branches meet continuously. Equals half of int (1-cos v)|v|^{alpha-2} dv.
inline double cos_alpha_constant(double alpha) {
  require_open_unit(alpha, "cos_alpha_constant");
  const double s = std::sin(std::numbers::pi * alpha / 2.0);
  if (alpha > 0.0) return std::tgamma(alpha) * s / (1.0 - alpha);
  if (alpha < 0.0) return std::tgamma(1.0 + alpha) * s / (alpha * (1.0 - alpha));
  return std::numbers::pi / 2.0;
}

/// A_T(alpha) = int_0^T int_R |F G_t(xi)|^2 |xi|^alpha dxi dt in closed form.
/// Wave:  2^{1-alpha} C_alpha T^{2-alpha} / (2-alpha)
/// Heat:  2/(1-alpha) Gamma((alpha+1)/2) T^{(1-alpha)/2}
inline double dalang_integral_closed(EquationKind eqn, double alpha, double T) {
  require_open_unit(alpha, "dalang_integral");
  if (!(T > 0.0)) throw ValidationError("dalang_integral needs T > 0");
  if (eqn == EquationKind::Wave) {
    return std::pow(2.0, 1.0 - alpha) * cos_alpha_constant(alpha) * std::pow(T, 2.0 - alpha) /
           (2.0 - alpha);
  }
  return 2.0 / (1.0 - alpha) * std::tgamma(0.5 * (alpha + 1.0)) * std::pow(T, 0.5 * (1.0 - alpha));
}

namespace detail {

// int_0^T |F G_t(xi)|^2 dt by composite Gauss-Legendre in t, independent of
// any closed form: uniform panels of half a period of sin^2 for the wave,
// doubling panels from 1/xi^2 for the heat exponential.
inline double time_integrated_square(EquationKind eqn, double T, double xi) {
  std::vector<double> br{0.0};
  if (eqn == EquationKind::Wave) {
    const double width = std::min(T, std::numbers::pi / std::max(xi, 1e-300));
    const auto n = static_cast<std::size_t>(std::ceil(T / width));
    for (std::size_t i = 1; i <= n; ++i) br.push_back(T * static_cast<double>(i) / static_cast<double>(n));
    return integrate_fixed([&](double t) {
      const double k = fourier_kernel(EquationKind::Wave, t, xi);
      return k * k;
    }, br);
  }
  const double end = std::min(T, 40.0 / (xi * xi));
  double w = std::min(end, 1.0 / (xi * xi));
  double t = 0.0;
  while (t < end) {
    t = std::min(end, t + w);
    br.push_back(t);
    w = t;
  }
  return integrate_fixed([&](double s) { return std::exp(-s * xi * xi); }, br);
}

}  // namespace detail

/// A_T(alpha) by two-dimensional quadrature: the inner t-integral is computed
/// numerically at every frequency node; only the tail beyond the cutoff uses
/// the known large-xi form of the inner integral.
inline QuadResult dalang_integral_quad(EquationKind eqn, double alpha, double T,
                                       const QuadratureSpec& quad = {}) {
  require_open_unit(alpha, "dalang_integral_quad");
  if (!(T > 0.0)) throw ValidationError("dalang_integral_quad needs T > 0");
  quad.validate();
  auto inner = [&](double xi) { return 2.0 * detail::time_integrated_square(eqn, T, xi); };
  SpectralTail tail;
  if (eqn == EquationKind::Wave) {
    // int_0^T sin^2(t xi) dt / xi^2 = T/(2 xi^2) - sin(2 T xi)/(4 xi^3)
    tail.terms = {{T, 2.0, 0.0, false}, {-0.5, 3.0, 2.0 * T, true}};
    return integrate_half_line(inner, alpha, 2.0 * T, tail, quad);
  }
  tail.start = std::max(quad.cutoff, std::sqrt(40.0 / T));
  tail.terms = {{2.0, 2.0, 0.0, false}};
  return integrate_half_line(inner, alpha, T, tail, quad);
}

/// Constants of the increment lemmas.
enum class LemmaConstantKind {
  CosIntegral,        // int_R (1 - cos eta)|eta|^{alpha-2} d eta, by quadrature
  SmoothingIncrement, // int_R (1 - e^{-eta^2/2})^2 |eta|^{alpha-2} d eta, by quadrature
  ConeIncrement,      // 4 int_R min(1, eta^2)|eta|^{alpha-2} d eta, closed form
  WaveIncrement,      // M_H = 4 (1/H + 1/(1-H))
  HeatIncrement,      // bound 1/H + 1/(1-H) on N_H
  SpaceIncrement,     // bound 1/H + 1/(1-H) on C_H
};

/// `param` is alpha for the quadrature kinds and H for the others.
inline double lemma_constant(LemmaConstantKind kind, double param, const QuadratureSpec& quad = {}) {
  switch (kind) {
    case LemmaConstantKind::CosIntegral: {
      require_open_unit(param, "CosIntegral");
      auto g = [](double eta) {
        const double s = std::sin(0.5 * eta);
        return 4.0 * s * s / (eta * eta);  // 2 (1 - cos eta) / eta^2
      };
      const SpectralTail tail{0.0, {{2.0, 2.0, 0.0, false}, {-2.0, 2.0, 1.0, false}}};
      return integrate_half_line(g, param, 1.0, tail, quad).value;
    }
    case LemmaConstantKind::SmoothingIncrement: {
      require_open_unit(param, "SmoothingIncrement");
      auto g = [](double eta) {
        const double d = std::expm1(-0.5 * eta * eta);
        return 2.0 * d * d / (eta * eta);
      };
      const SpectralTail tail{std::max(quad.cutoff, 10.0), {{2.0, 2.0, 0.0, false}}};
      return integrate_half_line(g, param, 0.0, tail, quad).value;
    }
    case LemmaConstantKind::ConeIncrement: {
      require_open_unit(param, "ConeIncrement");
      // 8 (int_0^1 eta^alpha + int_1^inf eta^{alpha-2})
      return 8.0 * (1.0 / (1.0 + param) + 1.0 / (1.0 - param));
    }
    case LemmaConstantKind::WaveIncrement: {
      const double h = HurstIndex(param).value();
      return 4.0 * (1.0 / h + 1.0 / (1.0 - h));
    }
    case LemmaConstantKind::HeatIncrement:
    case LemmaConstantKind::SpaceIncrement: {
      const double h = HurstIndex(param).value();
      return 1.0 / h + 1.0 / (1.0 - h);
    }
  }
  return 0.0;
}

}  // namespace fracfield
