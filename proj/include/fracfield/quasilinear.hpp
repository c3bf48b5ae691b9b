#pragma once

// Pathwise quasi-linear solutions u = F(I_0 + u~), where u~ is the exact
// Gaussian stochastic convolution sampled on the solver grid.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracfield/covariance.hpp"
#include "fracfield/det_solver.hpp"
#include "fracfield/sampler.hpp"

namespace fracfield {

struct SimulationConfig {
  EquationKind eqn = EquationKind::Heat;
  HurstIndex H{0.5};
  DriftSpec drift = make_drift("zero", {});
  InitialData data;
  PointGrid grid;
  std::uint64_t master_seed = 0;
  std::size_t n_replicates = 1;
  std::vector<double> truncation_ladder;  // empty: no ladder
  double noise_scale = 1.0;               // 0 gives the deterministic problem
  QuadratureSpec quad;
  PicardOptions picard;
  unsigned threads = 1;

  void validate() const {
    grid.validate(eqn);
    quad.validate();
    validate_initial(data);
    if (n_replicates < 1) throw ValidationError("n_replicates must be at least 1");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
      throw ValidationError("noise_scale must be finite and nonnegative");
    }
    if (!truncation_ladder.empty()) {
      if (eqn != EquationKind::Heat) throw ValidationError("truncation ladder applies to the heat equation only");
      for (std::size_t i = 0; i < truncation_ladder.size(); ++i) {
        if (!(truncation_ladder[i] > 0.0)) throw ValidationError("truncation levels must be positive");
        if (i > 0 && !(truncation_ladder[i] > truncation_ladder[i - 1])) {
          throw ValidationError("truncation ladder must be strictly increasing");
        }
      }
    }
  }
};

/// Everything that stays fixed across replicates: solver grid, I_0 on it and
/// the covariance factor of u~ on the nodes with t > 0.
struct SimulationPlan {
  SolverGrid grid;
  GridFunction initial;
  std::optional<PsdFactor> factor;
};

inline SimulationPlan plan_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  SimulationPlan plan;
  plan.grid = make_solver_grid(cfg.eqn, cfg.grid);
  plan.initial = GridFunction(plan.grid);
  const SolverGrid& g = plan.grid;
  const unsigned threads = resolve_threads(cfg.threads);
  parallel_for(g.nt(), threads, [&](std::size_t k) {
    for (std::size_t j = 0; j < g.nx(); ++j) plan.initial(k, j) = initial_term(cfg.eqn, cfg.data, g.t(k), g.x(j));
  });
  if (cfg.noise_scale > 0.0) {
    std::vector<SpaceTimePoint> pts;
    for (std::size_t k = 1; k < g.nt(); ++k) {
      for (std::size_t j = 0; j < g.nx(); ++j) pts.push_back({g.t(k), g.x(j)});
    }
    plan.factor = factor_psd(cov_matrix(cfg.eqn, cfg.H, pts, cfg.quad, threads));
  }
  return plan;
}

/// eta = I_0 + noise_scale * u~ for one replicate. u~ vanishes at t = 0.
inline GridFunction sample_eta(const SimulationConfig& cfg, const SimulationPlan& plan, std::size_t r) {
  GridFunction eta = plan.initial;
  if (plan.factor) {
    const std::vector<double> u = sample_replicate(*plan.factor, cfg.master_seed, r);
    const std::size_t nx = plan.grid.nx();
    for (std::size_t i = 0; i < u.size(); ++i) eta.values[nx + i] += cfg.noise_scale * u[i];
  }
  return eta;
}

namespace detail {

template <class F>
auto with_replicate(std::size_t r, F&& f) {
  const std::string tag = "replicate " + std::to_string(r) + ": ";
  try {
    return f();
  } catch (const MaxIterExceeded& e) {
    throw MaxIterExceeded(tag + e.what(), e.last_increment());
  } catch (const NotPsd& e) {
    throw NotPsd(tag + e.what());
  } catch (const QuadratureError& e) {
    throw QuadratureError(tag + e.what(), e.achieved_error());
  } catch (const ValidationError& e) {
    throw ValidationError(tag + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what());
  }
}

inline FieldSample empty_sample(const SimulationConfig& cfg, const SolverGrid& g) {
  FieldSample s;
  s.points = reported_values(GridFunction(g)).points;
  s.n_replicates = cfg.n_replicates;
  s.master_seed = cfg.master_seed;
  s.values.assign(s.points.size() * cfg.n_replicates, 0.0);
  return s;
}

inline void store(FieldSample& s, std::size_t r, const GridFunction& z) {
  const auto v = reported_values(z).values;
  std::copy(v.begin(), v.end(), s.values.begin() + static_cast<std::ptrdiff_t>(r * v.size()));
}

}  // namespace detail

/// Replicates of u on the reported grid. Replicate r depends only on
/// (config, master_seed, r).
inline FieldSample simulate(const SimulationConfig& cfg) {
  const SimulationPlan plan = plan_simulation(cfg);
  FieldSample out = detail::empty_sample(cfg, plan.grid);
  PicardOptions inner = cfg.picard;
  inner.threads = 1;
  parallel_for(cfg.n_replicates, resolve_threads(cfg.threads), [&](std::size_t r) {
    detail::with_replicate(r, [&] {
      const GridFunction eta = sample_eta(cfg, plan, r);
      detail::store(out, r, solve_F(cfg.eqn, cfg.drift, eta, inner).z);
      return 0;
    });
  });
  return out;
}

struct LadderResult {
  std::vector<double> levels;       // m_1 < ... < m_k
  double reference_level = 0.0;     // 2 m_k
  std::vector<FieldSample> rungs;   // one per level
  FieldSample reference;
  std::vector<double> consecutive;  // D(m_j): gap to m_{j+1}; the last rung uses the reference
  std::vector<double> to_reference; // gap of each rung to the reference rung
};

/// max over grid points of the replicate mean of (a - b)^2
inline double mean_square_gap(const FieldSample& a, const FieldSample& b) {
  const std::size_t n = a.points.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.n_replicates; ++r) {
      const double d = a(r, i) - b(r, i);
      s += d * d;
    }
    worst = std::max(worst, s / static_cast<double>(a.n_replicates));
  }
  return worst;
}

/// Runs every truncated drift b_m on the same noise paths (common random
/// numbers), plus a reference rung at twice the largest level.
inline LadderResult truncation_ladder_run(const SimulationConfig& cfg) {
  if (cfg.truncation_ladder.empty()) throw ValidationError("truncation_ladder_run needs a ladder");
  const SimulationPlan plan = plan_simulation(cfg);
  LadderResult res;
  res.levels = cfg.truncation_ladder;
  res.reference_level = 2.0 * res.levels.back();
  std::vector<double> all = res.levels;
  all.push_back(res.reference_level);
  std::vector<DriftSpec> drifts;
  std::vector<FieldSample> samples;
  for (double m : all) {
    drifts.push_back(drift_truncate(cfg.drift, m));
    samples.push_back(detail::empty_sample(cfg, plan.grid));
  }
  PicardOptions inner = cfg.picard;
  inner.threads = 1;
  parallel_for(cfg.n_replicates, resolve_threads(cfg.threads), [&](std::size_t r) {
    detail::with_replicate(r, [&] {
      const GridFunction eta = sample_eta(cfg, plan, r);
      for (std::size_t j = 0; j < all.size(); ++j) {
        detail::store(samples[j], r, solve_F(cfg.eqn, drifts[j], eta, inner).z);
      }
      return 0;
    });
  });
  res.reference = samples.back();
  samples.pop_back();
  res.rungs = std::move(samples);
  for (std::size_t j = 0; j < res.rungs.size(); ++j) {
    const FieldSample& next = j + 1 < res.rungs.size() ? res.rungs[j + 1] : res.reference;
    res.consecutive.push_back(mean_square_gap(res.rungs[j], next));
    res.to_reference.push_back(mean_square_gap(res.rungs[j], res.reference));
  }
  return res;
}

}  // namespace fracfield
