#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>

#include "fracfield/errors.hpp"
#include "fracfield/quadrature.hpp"
#include "fracfield/types.hpp"

namespace fracfield {

/// Initial position u0, initial velocity v0 (wave only) and the Hölder
/// exponent the user claims for them.
struct InitialData {
  std::string name = "zero";
  std::function<double(double)> u0 = [](double) { return 0.0; };
  std::function<double(double)> v0 = [](double) { return 0.0; };
  double holder_exponent = 1.0;
  bool bounded = true;
};

/// Named profile for a single function: zero, const(c), linear(a), sin(k), cos(k).
inline std::function<double(double)> make_profile(const std::string& name, std::span<const double> params,
                                                  bool* bounded = nullptr) {
  auto need = [&](std::size_t n) {
    if (params.size() != n) {
      throw ValidationError("initial profile '" + name + "' takes " + std::to_string(n) + " parameter(s)");
    }
  };
  bool b = true;
  std::function<double(double)> f;
  if (name == "zero") {
    need(0);
    f = [](double) { return 0.0; };
  } else if (name == "const") {
    need(1);
    const double c = params[0];
    f = [c](double) { return c; };
  } else if (name == "linear") {
    need(1);
    const double a = params[0];
    f = [a](double x) { return a * x; };
    b = a == 0.0;
  } else if (name == "sin") {
    need(1);
    const double k = params[0];
    f = [k](double x) { return std::sin(k * x); };
  } else if (name == "cos") {
    need(1);
    const double k = params[0];
    f = [k](double x) { return std::cos(k * x); };
  } else {
    throw ValidationError("unknown initial profile '" + name + "' (expected zero|const|linear|sin|cos)");
  }
  if (bounded) *bounded = b;
  return f;
}

/// Largest Hölder quotient |u(x) - u(y)| / |x - y|^alpha over probe pairs
/// with |x - y| <= 1 on a uniform grid of [lo, hi].
inline double holder_quotient(const std::function<double(double)>& u, double alpha, double lo, double hi,
                              std::size_t n = 401) {
  std::vector<double> xs(n), us(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    us[i] = u(xs[i]);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n && xs[j] - xs[i] <= 1.0; ++j) {
      worst = std::max(worst, std::abs(us[j] - us[i]) / std::pow(xs[j] - xs[i], alpha));
    }
  }
  return worst;
}

inline void validate_initial(const InitialData& d) {
  if (!(d.holder_exponent > 0.0 && d.holder_exponent <= 1.0)) {
    throw ValidationError("initial data Hölder exponent must lie in (0, 1]");
  }
}

/// Deterministic part of the mild solution.
///  wave: (u0(x+t) + u0(x-t))/2 + (1/2) int_{x-t}^{x+t} v0
///  heat: int G_t(x-y) u0(y) dy, with y = x + sqrt(t) w
inline double initial_term(EquationKind eqn, const InitialData& data, double t, double x) {
  validate_point({t, x});
  if (t == 0.0) return data.u0(x);
  if (eqn == EquationKind::Wave) {
    const QuadResult v = integrate_adaptive(data.v0, x - t, x + t, 1e-14, 1e-12);
    return 0.5 * (data.u0(x + t) + data.u0(x - t)) + 0.5 * v.value;
  }
  const double s = std::sqrt(t);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double w) { return norm * std::exp(-0.5 * w * w) * data.u0(x + s * w); };
  std::array<double, 25> br{};
  for (std::size_t i = 0; i < br.size(); ++i) br[i] = -12.0 + static_cast<double>(i);
  return integrate_adaptive(f, std::span<const double>(br), 1e-15, 1e-12, 20000).value;
}

}  // namespace fracfield
