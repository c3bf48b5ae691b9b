#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "fracfield/errors.hpp"

namespace fracfield {

/// Regularity parameter of the spatial noise, strictly inside (0, 1).
class HurstIndex {
 public:
  explicit HurstIndex(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
      throw ValidationError("Hurst index must lie in the open interval (0,1), got " +
                            std::to_string(value));
    }
  }

  double value() const noexcept { return value_; }

  friend bool operator==(HurstIndex a, HurstIndex b) { return a.value_ == b.value_; }

 private:
  double value_;
};

enum class EquationKind { Wave, Heat };

inline std::string_view to_string(EquationKind eqn) {
  return eqn == EquationKind::Wave ? "wave" : "heat";
}

inline EquationKind parse_equation(std::string_view name) {
  if (name == "wave") return EquationKind::Wave;
  if (name == "heat") return EquationKind::Heat;
  throw ValidationError("unknown equation '" + std::string(name) + "' (expected wave|heat)");
}

struct SpaceTimePoint {
  double t = 0.0;
  double x = 0.0;

  friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
};

inline void validate_point(const SpaceTimePoint& p) {
  if (!(p.t >= 0.0) || !std::isfinite(p.t) || !std::isfinite(p.x)) {
    throw ValidationError("space-time point needs finite x and t >= 0");
  }
}

}  // namespace fracfield
