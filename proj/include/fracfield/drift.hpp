#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracfield/errors.hpp"

namespace fracfield {

/// Drift coefficient b with its declared Lipschitz constant, an optional
/// known bound sup|b| and an optional truncation level m (b_m = b clipped
/// to [-m, m]).
struct DriftSpec {
  std::string name;
  std::function<double(double)> fn;
  double lipschitz = 0.0;
  std::optional<double> sup_bound;
  std::optional<double> truncation;

  double operator()(double z) const {
    const double v = fn(z);
    if (!truncation) return v;
    const double m = *truncation;
    return v >= 0.0 ? std::min(v, m) : std::max(v, -m);
  }

  bool bounded() const { return sup_bound.has_value() || truncation.has_value(); }

  /// Known bound on |b_m|, infinite when unbounded.
  double sup_norm() const {
    double s = std::numeric_limits<double>::infinity();
    if (sup_bound) s = std::min(s, *sup_bound);
    if (truncation) s = std::min(s, *truncation);
    return s;
  }
};

/// b_m: min(b, m) where b >= 0, max(b, -m) where b < 0. Same Lipschitz constant.
inline DriftSpec drift_truncate(const DriftSpec& b, double m) {
  if (!(m > 0.0)) throw ValidationError("truncation level m must be positive");
  DriftSpec out = b;
  out.truncation = b.truncation ? std::min(*b.truncation, m) : m;
  return out;
}

/// Built-in drifts: zero, const(c), linear(a): a z, tanh_scaled(a): a tanh(z),
/// table(x0,y0,x1,y1,...): piecewise linear, flat outside the table.
inline DriftSpec make_drift(const std::string& name, std::span<const double> params) {
  auto need = [&](std::size_t n) {
    if (params.size() != n) {
      throw ValidationError("drift '" + name + "' takes " + std::to_string(n) + " parameter(s)");
    }
  };
  DriftSpec d;
  d.name = name;
  if (name == "zero") {
    need(0);
    d.fn = [](double) { return 0.0; };
    d.sup_bound = 0.0;
  } else if (name == "const") {
    need(1);
    const double c = params[0];
    d.fn = [c](double) { return c; };
    d.sup_bound = std::abs(c);
  } else if (name == "linear") {
    need(1);
    const double a = params[0];
    d.fn = [a](double z) { return a * z; };
    d.lipschitz = std::abs(a);
    if (a == 0.0) d.sup_bound = 0.0;
  } else if (name == "tanh_scaled") {
    need(1);
    const double a = params[0];
    d.fn = [a](double z) { return a * std::tanh(z); };
    d.lipschitz = std::abs(a);
    d.sup_bound = std::abs(a);
  } else if (name == "table") {
    if (params.size() < 4 || params.size() % 2 != 0) {
      throw ValidationError("drift 'table' needs at least two (x, y) pairs");
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < params.size(); i += 2) {
      xs.push_back(params[i]);
      ys.push_back(params[i + 1]);
    }
    double lip = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sup = std::max(sup, std::abs(ys[i]));
      if (i == 0) continue;
      if (!(xs[i] > xs[i - 1])) throw ValidationError("drift table abscissae must increase");
      lip = std::max(lip, std::abs(ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
    }
    d.fn = [xs, ys](double z) {
      if (z <= xs.front()) return ys.front();
      if (z >= xs.back()) return ys.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), z);
      const std::size_t i = static_cast<std::size_t>(it - xs.begin());
      const double w = (z - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return (1.0 - w) * ys[i - 1] + w * ys[i];
    };
    d.lipschitz = lip;
    d.sup_bound = sup;
  } else {
    throw ValidationError("unknown drift '" + name + "' (expected zero|const|linear|tanh_scaled|table)");
  }
  return d;
}

/// Largest two-point slope |b(z_i+1) - b(z_i)| / (z_i+1 - z_i) on a uniform
/// probe grid over [lo, hi].
inline double probe_lipschitz(const DriftSpec& b, double lo, double hi, std::size_t n = 2001) {
  double worst = 0.0;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  double prev = b(lo);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = b(lo + h * static_cast<double>(i));
    worst = std::max(worst, std::abs(cur - prev) / h);
    prev = cur;
  }
  return worst;
}

/// Throws unless probed slopes stay within 1.01 times the declared constant.
inline void check_lipschitz(const DriftSpec& b, double lo = -50.0, double hi = 50.0) {
  const double slope = probe_lipschitz(b, lo, hi);
  if (slope > 1.01 * b.lipschitz + 1e-12) {
    throw ValidationError("drift '" + b.name + "' has probed slope " + std::to_string(slope) +
                          " above its declared Lipschitz constant " + std::to_string(b.lipschitz));
  }
}

}  // namespace fracfield
