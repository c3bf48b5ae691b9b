#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "fracfield/types.hpp"

namespace fracfield {

/// Rectangular evaluation grid on [0,T] x [-L,L]: nodes t_k = k dt,
/// k = 0..n_t, and x_j = -L + j dx, j = 0..n_x.
struct PointGrid {
  double T = 1.0;
  double L = 1.0;
  std::size_t n_t = 2;
  std::size_t n_x = 2;

  double dt() const { return T / static_cast<double>(n_t); }
  double dx() const { return 2.0 * L / static_cast<double>(n_x); }

  void validate(EquationKind eqn) const {
    if (!(T > 0.0) || !(L > 0.0)) throw ValidationError("grid needs T > 0 and L > 0");
    if (n_t < 2 || n_x < 2) throw ValidationError("grid needs n_t >= 2 and n_x >= 2");
    if (eqn == EquationKind::Wave && std::abs(dx() - dt()) > 1e-9 * dt()) {
      throw ValidationError("wave grid must be light-cone aligned: dx = 2L/n_x must equal dt = T/n_t");
    }
  }
};

/// The grid the solvers work on: the reported grid widened by `margin` nodes
/// on each side. Wave: the margin is T, the backward light cone. Heat: the
/// margin is max(T, 6 sqrt(T)), so the edge clamp of the heat stencil reaches
/// the reported window only through Gaussian mass below e^-18.
struct SolverGrid {
  PointGrid base;
  std::size_t margin = 0;

  std::size_t nt() const { return base.n_t + 1; }
  std::size_t nx() const { return base.n_x + 1 + 2 * margin; }
  double t(std::size_t k) const { return base.dt() * static_cast<double>(k); }
  double x(std::size_t j) const {
    return -base.L + base.dx() * (static_cast<double>(j) - static_cast<double>(margin));
  }
  bool reported(std::size_t j) const { return j >= margin && j <= margin + base.n_x; }
};

inline SolverGrid make_solver_grid(EquationKind eqn, const PointGrid& grid) {
  grid.validate(eqn);
  SolverGrid g{grid, 0};
  const double width = eqn == EquationKind::Wave ? grid.T : std::max(grid.T, 6.0 * std::sqrt(grid.T));
  g.margin = static_cast<std::size_t>(std::ceil(width / grid.dx() - 1e-9));
  return g;
}

/// Values on every node of a SolverGrid, time-major.
struct GridFunction {
  SolverGrid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const SolverGrid& g, double fill = 0.0)
      : grid(g), values(g.nt() * g.nx(), fill) {}

  double& operator()(std::size_t k, std::size_t j) { return values[k * grid.nx() + j]; }
  double operator()(std::size_t k, std::size_t j) const { return values[k * grid.nx() + j]; }

  /// Sup norm of the difference over the reported window [0,T] x [-L,L].
  friend double sup_diff_reported(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.grid.nt(); ++k) {
      for (std::size_t j = a.grid.margin; j <= a.grid.margin + a.grid.base.n_x; ++j) {
        m = std::max(m, std::abs(a(k, j) - b(k, j)));
      }
    }
    return m;
  }
};

inline GridFunction grid_from_function(const SolverGrid& g, const std::function<double(double, double)>& f) {
  GridFunction out(g);
  for (std::size_t k = 0; k < g.nt(); ++k) {
    for (std::size_t j = 0; j < g.nx(); ++j) out(k, j) = f(g.t(k), g.x(j));
  }
  return out;
}

}  // namespace fracfield
