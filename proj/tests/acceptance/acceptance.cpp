// End-to-end acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fracfield/analysis.hpp"
#include "fracfield/det_solver.hpp"
#include "fracfield/quasilinear.hpp"

using namespace fracfield;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.size() < 400) detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0) c.require(s <= budget_s, "runtime " + fmt(s) + " s over budget " + fmt(budget_s) + " s");
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", id, title.c_str(), s,
              c.detail.empty() ? "" : " :: ", c.detail.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

const EquationKind kBoth[] = {EquationKind::Wave, EquationKind::Heat};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double sup_error(const GridFunction& z, const std::vector<double>& oracle) {
  const auto& g = z.grid;
  double e = 0.0;
  for (std::size_t k = 0; k < g.nt(); ++k) {
    for (std::size_t j = g.margin; j <= g.margin + g.base.n_x; ++j) e = std::max(e, std::abs(z(k, j) - oracle[k]));
  }
  return e;
}

}  // namespace

int main() {
  criterion(1, "Dalang integral closed form vs 2-D quadrature", 10.0, [](Check& c) {
    for (auto eqn : kBoth) {
      for (double a : {-0.5, 0.0, 0.5}) {
        for (double T : {0.5, 1.0, 2.0}) {
          const double closed = dalang_integral_closed(eqn, a, T);
          const double quad = dalang_integral_quad(eqn, a, T).value;
          const double rel = std::abs(closed - quad) / closed;
          c.require(rel <= 1e-5, std::string(to_string(eqn)) + " a=" + fmt(a) + " T=" + fmt(T) + " rel=" + fmt(rel));
        }
      }
    }
  });

  criterion(2, "exact variances at H = 1/2 (quadrature and Monte Carlo)", 60.0, [](Check& c) {
    const HurstIndex half(0.5);
    struct Case {
      EquationKind eqn;
      SpaceTimePoint p;
      double exact;
    };
    const Case cases[] = {{EquationKind::Heat, {1.0, 0.3}, 1.0 / std::sqrt(std::numbers::pi)},
                          {EquationKind::Wave, {2.0, -0.7}, 1.0}};
    for (const auto& k : cases) {
      const double v = conv_cov(k.eqn, half, k.p, k.p).value;
      c.require(std::abs(v / k.exact - 1.0) <= 1e-6, std::string(to_string(k.eqn)) + " quadrature " + fmt(v));
      const std::vector<SpaceTimePoint> pts{k.p};
      const auto s = sample_field(factor_psd(cov_matrix(k.eqn, half, pts)), 20260101, 20000);
      double sum = 0.0, sq = 0.0;
      for (double x : s.values) {
        sum += x;
        sq += x * x;
      }
      const double n = 20000.0, mean = sum / n, var = sq / n - mean * mean;
      const double se = k.exact * std::sqrt(2.0 / (n - 1.0));
      c.require(std::abs(var - k.exact) <= 4.0 * se, std::string(to_string(k.eqn)) + " Monte Carlo " + fmt(var));
    }
  });

  criterion(3, "noise field covariance and Brownian sheet", 0.0, [](Check& c) {
    for (double H : {0.2, 0.5, 0.8}) {
      for (double t : {0.3, 1.1}) {
        for (double x : {-1.5, 0.4, 2.0}) {
          for (double y : {-0.2, 0.4, 3.0}) {
            const double want =
                0.5 * std::min(t, 1.7) *
                (std::pow(std::abs(x), 2 * H) + std::pow(std::abs(y), 2 * H) - std::pow(std::abs(x - y), 2 * H));
            c.require(std::abs(noise_field_cov(HurstIndex(H), {t, x}, {1.7, y}) - want) <= 1e-14, "fBm form H=" + fmt(H));
          }
        }
      }
    }
    const double grid[] = {0.25, 0.5, 1.0, 1.5, 2.0};
    for (double t : grid) {
      for (double s : grid) {
        for (double x : grid) {
          for (double y : grid) {
            const double sheet = std::min(t, s) * std::min(x, y);
            for (double sign : {1.0, -1.0}) {
              const double v = noise_field_cov(HurstIndex(0.5), {t, sign * x}, {s, sign * y});
              c.require(std::abs(v - sheet) <= 1e-12, "sheet at " + fmt(t) + "," + fmt(x));
            }
          }
        }
      }
    }
  });

  criterion(4, "Hoelder exponents from exact increment moments", 120.0, [](Check& c) {
    std::vector<double> lags;
    for (int k = 3; k <= 8; ++k) lags.push_back(std::ldexp(1.0, -k));
    for (auto eqn : kBoth) {
      for (double H : {0.3, 0.5, 0.7}) {
        for (auto dir : {Direction::Time, Direction::Space}) {
          const double slope = fit_hoelder(eqn, HurstIndex(H), dir, 2, lags).slope;
          const double want = 2.0 * expected_gamma(eqn, H, dir);
          c.require(std::abs(slope - want) <= 0.1, std::string(to_string(eqn)) + " H=" + fmt(H) +
                                                       (dir == Direction::Time ? " time" : " space") +
                                                       " slope=" + fmt(slope) + " want " + fmt(want));
        }
      }
    }
  });

  criterion(5, "increment lemma margins", 0.0, [](Check& c) {
    std::vector<double> hs;
    for (int k = 1; k <= 6; ++k) hs.push_back(std::ldexp(1.0, -k));
    double worst = 0.0;
    for (auto lemma : {Lemma::L34, Lemma::L35}) {
      for (auto eqn : kBoth) {
        for (double a : {-0.5, 0.0, 0.5}) {
          for (double T : {0.5, 1.0, 2.0}) {
            for (const auto& m : verify_lemma_bound(lemma, eqn, a, T, hs)) {
              worst = std::max(worst, m.ratio);
              c.require(m.pass, std::string(lemma == Lemma::L34 ? "L34 " : "L35 ") + std::string(to_string(eqn)) +
                                    " a=" + fmt(a) + " T=" + fmt(T) + " h=" + fmt(m.h) + " ratio=" + fmt(m.ratio));
            }
          }
        }
      }
    }
    c.require(worst <= 1.0 + 1e-6, "max ratio " + fmt(worst));
  });

  criterion(6, "covariance convergence along H ladders", 0.0, [](Check& c) {
    std::vector<PointPair> pairs;
    for (int i = 0; i < 10; ++i) {
      pairs.push_back({{0.25 + 0.15 * i, -1.0 + 0.2 * i}, {0.5 + 0.1 * (i % 4), 0.3 - 0.1 * i}});
    }
    const std::vector<double> up{0.6, 0.55, 0.51, 0.501}, down{0.4, 0.45, 0.49, 0.499};
    for (auto eqn : kBoth) {
      for (const auto* ladder : {&up, &down}) {
        const auto rows = h_convergence(eqn, *ladder, HurstIndex(0.5), pairs);
        for (std::size_t i = 1; i < rows.size(); ++i) {
          c.require(rows[i].sup_deviation < rows[i - 1].sup_deviation,
                    std::string(to_string(eqn)) + " not decreasing at H=" + fmt(rows[i].H));
        }
        c.require(rows.back().sup_deviation < 0.1 * rows.front().sup_deviation,
                  std::string(to_string(eqn)) + " final/first=" + fmt(rows.back().sup_deviation / rows.front().sup_deviation));
      }
    }
  });

  criterion(7, "deterministic solution operator", 0.0, [](Check& c) {
    const std::vector<double> one{1.0}, minus_one{-1.0};
    // (a) ODE reduction at dt = 1e-3
    struct Example {
      EquationKind eqn;
      DriftSpec b;
      double eta;
      std::string name;
    };
    const Example ex[] = {{EquationKind::Heat, make_drift("const", one), 0.0, "heat b=1"},
                          {EquationKind::Wave, make_drift("const", one), 0.0, "wave b=1"},
                          {EquationKind::Heat, drift_truncate(make_drift("linear", one), 10.0), 1.0, "heat b=z"},
                          {EquationKind::Wave, make_drift("linear", minus_one), 1.0, "wave b=-z"}};
    for (const auto& e : ex) {
      // the wave grid must be light-cone aligned; the heat grid only needs dt = 1e-3
      const PointGrid pg{1.0, e.eqn == EquationKind::Wave ? 0.5 * 1e-3 * 8 : 1.0, 1000, 8};
      const auto g = make_solver_grid(e.eqn, pg);
      const auto z = solve_F(e.eqn, e.b, GridFunction(g, e.eta)).z;
      const double eta = e.eta;
      const auto o = ode_oracle(e.eqn, e.b, [eta](double) { return eta; }, 1.0, 1000);
      const double err = sup_error(z, o);
      c.require(err <= 1e-3, e.name + " oracle error " + fmt(err));
    }
    // (b) factorial decay of Picard increments
    for (auto eqn : kBoth) {
      const double T = 1.0;
      const auto g = make_solver_grid(eqn, PointGrid{T, 0.5 * T / 200 * 20, 200, 20});
      const auto eta = grid_from_function(g, [](double t, double x) { return std::cos(2.0 * x) + t; });
      const auto b = make_drift("tanh_scaled", std::vector<double>{2.0});
      PicardOptions o;
      o.tol = 1e-14;
      const auto& d = solve_F(eqn, b, eta, o).report.increments;
      const double q = (eqn == EquationKind::Wave ? 2.0 * T * T : T) * b.lipschitz;
      double scaled_max = 0.0;
      double factor = 1.0;  // q^n / n!
      for (std::size_t n = 0; n < d.size(); ++n) {
        if (n > 0) factor *= q / static_cast<double>(n);
        scaled_max = std::max(scaled_max, d[n] / (d[0] * factor));
      }
      c.require(d.size() >= 3, std::string(to_string(eqn)) + " too few iterations");
      c.require(scaled_max <= 1.0 + 1e-9, std::string(to_string(eqn)) + " increments exceed d0 q^n/n! by " + fmt(scaled_max));
    }
    // (c) continuity in eta with unit log-log slope
    for (auto eqn : kBoth) {
      const auto g = make_solver_grid(eqn, PointGrid{1.0, 0.5 * 0.01 * 20, 100, 20});
      const auto eta = grid_from_function(g, [](double t, double x) { return std::sin(x) + 0.5 * t; });
      const auto b = make_drift("tanh_scaled", one);
      const auto base = solve_F(eqn, b, eta).z;
      std::vector<double> deltas{1e-5, 1e-4, 1e-3, 1e-2}, gaps;
      for (double delta : deltas) {
        GridFunction moved = eta;
        for (std::size_t i = 0; i < moved.values.size(); ++i) moved.values[i] += delta * std::cos(0.3 * static_cast<double>(i));
        gaps.push_back(sup_diff_reported(solve_F(eqn, b, moved).z, base));
      }
      const auto fit = fit_power_law(deltas, gaps);
      c.require(std::abs(fit.slope - 1.0) <= 0.05, std::string(to_string(eqn)) + " slope " + fmt(fit.slope));
    }
  });

  criterion(8, "truncation ladder for b(z) = z", 0.0, [](Check& c) {
    SimulationConfig cfg;
    cfg.eqn = EquationKind::Heat;
    cfg.H = HurstIndex(0.5);
    cfg.grid = PointGrid{2.0, 1.0, 4, 4};
    cfg.data.u0 = make_profile("const", std::vector<double>{1.0});
    cfg.drift = make_drift("linear", std::vector<double>{1.0});
    cfg.truncation_ladder = {2.0, 4.0, 8.0, 16.0, 32.0};
    cfg.n_replicates = 200;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      cfg.master_seed = seed;
      const auto r = truncation_ladder_run(cfg);
      const auto& D = r.consecutive;
      for (std::size_t j = 1; j < D.size(); ++j) {
        c.require(D[j] <= D[j - 1], "seed " + std::to_string(seed) + " D increases at m=" + fmt(r.levels[j]));
      }
      c.require(D.front() > 0.0, "seed " + std::to_string(seed) + " D(2) vanishes");
      c.require(D.back() <= 0.25 * D.front(), "seed " + std::to_string(seed) + " D(32)/D(2)=" + fmt(D.back() / D.front()));
    }
  });

  criterion(9, "simulate is deterministic across runs and thread counts", 0.0, [](Check& c) {
    const fs::path root = fs::temp_directory_path() / "fracfield_acceptance";
    fs::remove_all(root);
    const std::string cli = FRACFIELD_CLI;
    auto run = [&](const std::string& config, const std::string& extra, const fs::path& out) {
      const std::string cmd = cli + " simulate --config " + std::string(FRACFIELD_CONFIGS) + "/" + config + " " + extra +
                              " --out " + out.string() + " > /dev/null";
      return std::system(cmd.c_str());
    };
    for (const std::string config : {"wave_small.json", "heat_ladder.json"}) {
      const std::string extra = config == "heat_ladder.json" ? "--replicates 20" : "";
      const fs::path a = root / (config + "_a"), b = root / (config + "_b"), t = root / (config + "_t");
      c.require(run(config, extra + " --threads 1", a) == 0, config + " run a failed");
      c.require(run(config, extra + " --threads 1", b) == 0, config + " run b failed");
      c.require(run(config, extra + " --threads 3", t) == 0, config + " threaded run failed");
      std::size_t compared = 0;
      for (const auto& entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".csv") continue;
        const std::string name = entry.path().filename().string();
        const std::string ref = slurp(entry.path());
        c.require(!ref.empty(), config + " " + name + " empty");
        c.require(ref == slurp(b / name), config + " " + name + " differs between runs");
        c.require(ref == slurp(t / name), config + " " + name + " differs across thread counts");
        ++compared;
      }
      c.require(compared > 0, config + " produced no CSV output");
    }
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
