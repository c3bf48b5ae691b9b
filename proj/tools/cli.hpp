#pragma once

// Command line front end: subcommand routing, config parsing, CSV/JSON output
// and run manifests. Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fracfield/analysis.hpp"
#include "fracfield/det_solver.hpp"
#include "fracfield/io.hpp"
#include "fracfield/quasilinear.hpp"

namespace fracfield::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// simulate config

namespace detail {

inline const json& require_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    throw ValidationError("config is missing required field '" + where + key + "'");
  }
  return j.at(key);
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  const json& v = require_field(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field '" + where + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get_as<T>(j, key, where);
}

inline std::vector<double> params_of(const json& j, const std::string& where) {
  return get_or<std::vector<double>>(j, "params", {}, where);
}

}  // namespace detail

/// Builds a SimulationConfig from JSON. Required: eqn, H, grid{T,L,nt,nx},
/// seed, replicates. Optional: drift{name,params,m}, u0/v0{name,params},
/// holder_exponent, truncation_ladder, noise_scale, tol, max_iter.
inline SimulationConfig parse_simulation_config(const json& j) {
  using detail::get_as;
  using detail::get_or;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  SimulationConfig c;
  c.eqn = parse_equation(get_as<std::string>(j, "eqn", ""));
  c.H = HurstIndex(get_as<double>(j, "H", ""));
  const json& g = detail::require_field(j, "grid", "");
  c.grid.T = get_as<double>(g, "T", "grid.");
  c.grid.L = get_as<double>(g, "L", "grid.");
  c.grid.n_t = get_as<std::size_t>(g, "nt", "grid.");
  c.grid.n_x = get_as<std::size_t>(g, "nx", "grid.");
  c.master_seed = get_as<std::uint64_t>(j, "seed", "");
  c.n_replicates = get_as<std::size_t>(j, "replicates", "");
  if (j.contains("drift")) {
    const json& d = j.at("drift");
    c.drift = make_drift(get_as<std::string>(d, "name", "drift."), detail::params_of(d, "drift."));
    if (d.contains("m") && !d.at("m").is_null()) c.drift = drift_truncate(c.drift, get_as<double>(d, "m", "drift."));
  }
  bool bounded = true;
  if (j.contains("u0")) {
    const json& u = j.at("u0");
    c.data.u0 = make_profile(get_as<std::string>(u, "name", "u0."), detail::params_of(u, "u0."), &bounded);
  }
  if (j.contains("v0")) {
    const json& v = j.at("v0");
    c.data.v0 = make_profile(get_as<std::string>(v, "name", "v0."), detail::params_of(v, "v0."));
  }
  c.data.bounded = bounded;
  c.data.holder_exponent = get_or<double>(j, "holder_exponent", 1.0, "");
  c.truncation_ladder = get_or<std::vector<double>>(j, "truncation_ladder", {}, "");
  c.noise_scale = get_or<double>(j, "noise_scale", 1.0, "");
  c.picard.tol = get_or<double>(j, "tol", 1e-8, "");
  c.picard.max_iter = get_or<std::size_t>(j, "max_iter", 200, "");
  c.validate();
  return c;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// output helpers

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ValidationError("cannot create output directory '" + dir + "'");
  }

  std::string path(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
  }

  /// manifest.json: subcommand, resolved config, seed, version, wall clock and
  /// FNV-1a digests of every file written so far.
  void write_manifest(const std::string& subcommand, const json& config, std::optional<std::uint64_t> seed,
                      double seconds) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["master_seed"] = seed ? json(*seed) : json(nullptr);
    m["version"] = kVersion;
    m["wall_clock_seconds"] = seconds;
    json digests = json::object();
    for (const auto& f : files_) digests[f] = file_digest((dir_ / f).string());
    m["outputs"] = digests;
    std::ofstream out((dir_ / "manifest.json").string(), std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

inline std::vector<SpaceTimePoint> parse_points(const std::string& s) {
  std::vector<SpaceTimePoint> pts;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t next = s.find(';', pos);
    const std::string cell = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (!cell.empty()) {
      const auto v = parse_list(cell);
      if (v.size() != 2) throw ValidationError("point '" + cell + "' must be 't,x'");
      pts.push_back({v[0], v[1]});
      validate_point(pts.back());
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (pts.empty()) throw ValidationError("no points given");
  return pts;
}

inline std::vector<SpaceTimePoint> read_points_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read points file '" + path + "'");
  std::vector<SpaceTimePoint> pts;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) continue;
    }
    const auto v = parse_list(line);
    if (v.size() < 2) throw ValidationError("points file row '" + line + "' needs t,x");
    pts.push_back({v[0], v[1]});
    validate_point(pts.back());
  }
  if (pts.empty()) throw ValidationError("points file '" + path + "' has no rows");
  return pts;
}

/// Reads eta on the reported grid from CSV rows (t, x, value) and extends it
/// to the solver margin by holding the edge column constant in x.
inline GridFunction read_eta_csv(const std::string& path, const SolverGrid& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read eta file '" + path + "'");
  const std::size_t nt = g.nt(), nr = g.base.n_x + 1;
  std::vector<double> vals(nt * nr, std::numeric_limits<double>::quiet_NaN());
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) continue;
    }
    const auto v = parse_list(line);
    if (v.size() != 3) throw ValidationError("eta row '" + line + "' must be t,x,value");
    const double kf = v[0] / g.base.dt(), jf = (v[1] + g.base.L) / g.base.dx();
    const double k = std::round(kf), j = std::round(jf);
    if (std::abs(kf - k) > 1e-6 || std::abs(jf - j) > 1e-6 || k < 0 || j < 0 ||
        k >= static_cast<double>(nt) || j >= static_cast<double>(nr)) {
      throw ValidationError("eta row '" + line + "' is not a grid node");
    }
    vals[static_cast<std::size_t>(k) * nr + static_cast<std::size_t>(j)] = v[2];
  }
  for (double v : vals) {
    if (std::isnan(v)) throw ValidationError("eta file does not cover every grid node");
  }
  GridFunction eta(g);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = 0; j < g.nx(); ++j) {
      const std::size_t r = std::clamp(j, g.margin, g.margin + g.base.n_x) - g.margin;
      eta(k, j) = vals[k * nr + r];
    }
  }
  return eta;
}

inline json summary_of(const FieldSample& s) {
  json rows = json::array();
  const double n = static_cast<double>(s.n_replicates);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    double sum = 0.0;
    for (std::size_t r = 0; r < s.n_replicates; ++r) sum += s(r, i);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < s.n_replicates; ++r) ss += (s(r, i) - mean) * (s(r, i) - mean);
    const double var = s.n_replicates > 1 ? ss / (n - 1.0) : 0.0;
    rows.push_back({{"t", s.points[i].t}, {"x", s.points[i].x}, {"mean", mean}, {"variance", var},
                    {"se", std::sqrt(var / n)}});
  }
  return rows;
}

inline void write_replicates(const std::string& path, const FieldSample& s) {
  CsvWriter w(path, {"replicate", "t", "x", "value"});
  for (std::size_t r = 0; r < s.n_replicates; ++r) {
    for (std::size_t i = 0; i < s.points.size(); ++i) w.row() << r << s.points[i].t << s.points[i].x << s(r, i);
  }
}

inline std::vector<double> default_lags() {
  std::vector<double> lags;
  for (int k = 3; k <= 8; ++k) lags.push_back(std::ldexp(1.0, -k));
  return lags;
}

/// Ten fixed point pairs in [0,2] x [-1,1] used by hconv.
inline std::vector<PointPair> default_pairs() {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back({{0.2 + 0.18 * i, -0.5 + 0.1 * i}, {1.0 + 0.1 * (i % 3), -0.3 + 0.13 * i}});
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// subcommands

struct Common {
  std::string out = "out";
  unsigned threads = 0;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"fracfield: fractional-noise wave and heat equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "worker threads (default: FRACFIELD_THREADS, else all cores)");
  };
  std::string eqn_name = "heat";
  double H = 0.5;
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--eqn", eqn_name, "wave | heat")->capture_default_str();
    sub->add_option("--H", H, "Hurst index in (0,1)")->capture_default_str();
  };
  QuadratureSpec quad;
  auto add_quad = [&](CLI::App* sub) {
    sub->add_option("--cutoff", quad.cutoff, "spectral cutoff")->capture_default_str();
    sub->add_option("--rel-tol", quad.rel_tol, "quadrature relative tolerance")->capture_default_str();
  };

  // constants
  auto* c_constants = app.add_subcommand("constants", "print noise and lemma constants");
  std::optional<double> c_alpha, c_T;
  c_constants->add_option("--H", H, "Hurst index in (0,1)")->required();
  c_constants->add_option("--alpha", c_alpha, "also print C_alpha and the lemma constants");
  c_constants->add_option("--T", c_T, "with --alpha, also print A_T(alpha) for both equations");

  // cov
  auto* c_cov = app.add_subcommand("cov", "covariance matrix of the stochastic convolution");
  std::string points_arg, points_file;
  add_model(c_cov);
  add_quad(c_cov);
  add_common(c_cov);
  c_cov->add_option("--points", points_arg, "points 't,x;t,x;...'");
  c_cov->add_option("--points-file", points_file, "CSV of t,x rows");

  // sample
  auto* c_sample = app.add_subcommand("sample", "exact Gaussian samples on a point set");
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  add_model(c_sample);
  add_quad(c_sample);
  add_common(c_sample);
  c_sample->add_option("--points", points_arg, "points 't,x;t,x;...'");
  c_sample->add_option("--points-file", points_file, "CSV of t,x rows");
  c_sample->add_option("--seed", seed, "master seed")->required();
  c_sample->add_option("--replicates", replicates, "number of replicates")->capture_default_str();

  // solve-det
  auto* c_solve = app.add_subcommand("solve-det", "solve z = G * b(z) + eta on a grid");
  std::string drift_name = "zero", drift_params, eta_spec = "const:0";
  std::optional<double> trunc;
  PointGrid grid;
  PicardOptions picard;
  add_common(c_solve);
  c_solve->add_option("--eqn", eqn_name, "wave | heat")->capture_default_str();
  c_solve->add_option("--drift", drift_name, "zero | const | linear | tanh_scaled | table")->capture_default_str();
  c_solve->add_option("--drift-params", drift_params, "comma separated drift parameters");
  c_solve->add_option("--m", trunc, "truncation level");
  c_solve->add_option("--eta", eta_spec, "const:<c> | time:sin | file:<csv of t,x,value>")->capture_default_str();
  c_solve->add_option("--T", grid.T, "time horizon")->capture_default_str();
  c_solve->add_option("--L", grid.L, "spatial half width")->capture_default_str();
  c_solve->add_option("--nt", grid.n_t, "time steps")->capture_default_str();
  c_solve->add_option("--nx", grid.n_x, "space steps")->capture_default_str();
  c_solve->add_option("--tol", picard.tol, "Picard tolerance")->capture_default_str();
  c_solve->add_option("--max-iter", picard.max_iter, "Picard iteration cap")->capture_default_str();

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "quasi-linear solutions from a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> replicates_override;
  add_common(c_sim);
  c_sim->add_option("--config", config_path, "JSON config file")->required();
  c_sim->add_option("--seed", seed_override, "override the config seed");
  c_sim->add_option("--replicates", replicates_override, "override the config replicate count");

  // hoelder
  auto* c_hold = app.add_subcommand("hoelder", "Hölder exponent fit from increment moments");
  std::string direction = "time", lags_arg;
  int p = 2;
  double t0 = 1.0, x0 = 0.0;
  std::size_t mc_replicates = 0;
  add_model(c_hold);
  add_quad(c_hold);
  add_common(c_hold);
  c_hold->add_option("--direction", direction, "time | space")->capture_default_str();
  c_hold->add_option("--p", p, "even moment order")->capture_default_str();
  c_hold->add_option("--lags", lags_arg, "comma separated lags (default 2^-3..2^-8)");
  c_hold->add_option("--t0", t0, "base time")->capture_default_str();
  c_hold->add_option("--x0", x0, "base position")->capture_default_str();
  c_hold->add_option("--mc-replicates", mc_replicates, "also run the Monte Carlo cross-check");
  c_hold->add_option("--seed", seed, "seed of the Monte Carlo cross-check")->capture_default_str();

  // hconv
  auto* c_hconv = app.add_subcommand("hconv", "covariance convergence as H_n -> H0");
  double H0 = 0.5;
  std::string ladder_arg = "0.6,0.55,0.51,0.501";
  add_quad(c_hconv);
  add_common(c_hconv);
  c_hconv->add_option("--eqn", eqn_name, "wave | heat")->capture_default_str();
  c_hconv->add_option("--H0", H0, "limit Hurst index")->capture_default_str();
  c_hconv->add_option("--ladder", ladder_arg, "comma separated H_n")->capture_default_str();

  // verify-lemmas
  auto* c_lem = app.add_subcommand("verify-lemmas", "check the increment lemma bounds on a lattice");
  std::string alphas_arg = "-0.5,0,0.5", Ts_arg = "0.5,1,2";
  add_quad(c_lem);
  add_common(c_lem);
  c_lem->add_option("--alphas", alphas_arg, "comma separated alpha values")->capture_default_str();
  c_lem->add_option("--Ts", Ts_arg, "comma separated horizons")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    const unsigned threads = resolve_threads(common.threads);
    quad.validate();

    if (*c_constants) {
      const HurstIndex h(H);
      char buf[64];
      std::snprintf(buf, sizeof buf, "c_H = %.6g", noise_constant(h));
      out << buf << '\n';
      if (c_alpha) {
        std::snprintf(buf, sizeof buf, "C_alpha = %.6g", cos_alpha_constant(*c_alpha));
        out << buf << '\n';
        std::snprintf(buf, sizeof buf, "lemma34_C = %.6g",
                      lemma_constant(LemmaConstantKind::CosIntegral, *c_alpha, quad));
        out << buf << '\n';
        std::snprintf(buf, sizeof buf, "lemma35_C_heat = %.6g",
                      lemma_constant(LemmaConstantKind::SmoothingIncrement, *c_alpha, quad));
        out << buf << '\n';
        std::snprintf(buf, sizeof buf, "lemma35_C_wave = %.6g",
                      lemma_constant(LemmaConstantKind::ConeIncrement, *c_alpha, quad));
        out << buf << '\n';
        if (c_T) {
          for (auto e : {EquationKind::Wave, EquationKind::Heat}) {
            std::snprintf(buf, sizeof buf, "A_T[%s] = %.6g", std::string(to_string(e)).c_str(),
                          dalang_integral_closed(e, *c_alpha, *c_T));
            out << buf << '\n';
          }
        }
      }
      return 0;
    }

    const EquationKind eqn = parse_equation(eqn_name);

    if (*c_cov || *c_sample) {
      if (points_arg.empty() == points_file.empty()) throw ValidationError("give exactly one of --points, --points-file");
      const auto pts = points_file.empty() ? parse_points(points_arg) : read_points_csv(points_file);
      const HurstIndex h(H);
      const CovarianceMatrix cov = cov_matrix(eqn, h, pts, quad, threads);
      OutputDir dir(common.out);
      json cfg{{"eqn", to_string(eqn)}, {"H", H}, {"n_points", pts.size()}, {"cutoff", quad.cutoff},
               {"rel_tol", quad.rel_tol}};
      if (*c_cov) {
        CsvWriter w(dir.path("cov.csv"), {"i", "j", "t_i", "x_i", "t_j", "x_j", "value", "error"});
        for (std::size_t i = 0; i < pts.size(); ++i) {
          for (std::size_t j = 0; j < pts.size(); ++j) {
            w.row() << i << j << pts[i].t << pts[i].x << pts[j].t << pts[j].x << cov(i, j) << cov.errors[i * pts.size() + j];
          }
        }
        dir.write_manifest("cov", cfg, std::nullopt, seconds_since(start));
        return 0;
      }
      if (replicates < 1) throw ValidationError("--replicates must be at least 1");
      const FieldSample s = sample_field(factor_psd(cov), seed, replicates, threads);
      write_replicates(dir.path("samples.csv"), s);
      cfg["replicates"] = replicates;
      dir.write_manifest("sample", cfg, seed, seconds_since(start));
      return 0;
    }

    if (*c_solve) {
      DriftSpec b = make_drift(drift_name, parse_list(drift_params));
      if (trunc) b = drift_truncate(b, *trunc);
      const SolverGrid g = make_solver_grid(eqn, grid);
      GridFunction eta;
      if (eta_spec.rfind("const:", 0) == 0) {
        const auto v = parse_list(eta_spec.substr(6));
        if (v.size() != 1) throw ValidationError("--eta const:<c> needs one number");
        eta = GridFunction(g, v[0]);
      } else if (eta_spec == "time:sin") {
        eta = grid_from_function(g, [](double t, double) { return std::sin(t); });
      } else if (eta_spec.rfind("file:", 0) == 0) {
        eta = read_eta_csv(eta_spec.substr(5), g);
      } else {
        throw ValidationError("unknown --eta '" + eta_spec + "' (expected const:<c>, time:sin or file:<csv>)");
      }
      picard.threads = threads;
      const SolveResult r = solve_F(eqn, b, eta, picard);
      OutputDir dir(common.out);
      {
        const ReportedValues rv = reported_values(r.z);
        CsvWriter w(dir.path("solution.csv"), {"t", "x", "z"});
        for (std::size_t i = 0; i < rv.points.size(); ++i) w.row() << rv.points[i].t << rv.points[i].x << rv.values[i];
      }
      {
        CsvWriter w(dir.path("picard.csv"), {"iteration", "increment"});
        for (std::size_t n = 0; n < r.report.increments.size(); ++n) w.row() << n << r.report.increments[n];
      }
      json cfg{{"eqn", to_string(eqn)}, {"drift", drift_name}, {"drift_params", parse_list(drift_params)},
               {"m", trunc ? json(*trunc) : json(nullptr)}, {"eta", eta_spec},
               {"grid", {{"T", grid.T}, {"L", grid.L}, {"nt", grid.n_t}, {"nx", grid.n_x}}},
               {"tol", picard.tol}, {"max_iter", picard.max_iter}, {"iterations", r.report.iterations},
               {"certified", r.report.certified}};
      dir.write_manifest("solve-det", cfg, std::nullopt, seconds_since(start));
      return 0;
    }

    if (*c_sim) {
      json j = load_json(config_path);
      if (seed_override) j["seed"] = *seed_override;
      if (replicates_override) j["replicates"] = *replicates_override;
      SimulationConfig c = parse_simulation_config(j);
      c.threads = threads;
      OutputDir dir(common.out);
      json summary;
      if (c.truncation_ladder.empty()) {
        const FieldSample s = simulate(c);
        write_replicates(dir.path("replicates.csv"), s);
        summary["points"] = summary_of(s);
      } else {
        const LadderResult lr = truncation_ladder_run(c);
        CsvWriter w(dir.path("ladder.csv"), {"m", "D_consecutive", "D_reference"});
        for (std::size_t i = 0; i < lr.levels.size(); ++i) w.row() << lr.levels[i] << lr.consecutive[i] << lr.to_reference[i];
        for (std::size_t i = 0; i < lr.levels.size(); ++i) {
          write_replicates(dir.path("replicates_m" + std::to_string(i) + ".csv"), lr.rungs[i]);
        }
        bool monotone = true;
        for (std::size_t i = 1; i < lr.consecutive.size(); ++i) monotone = monotone && lr.consecutive[i] <= lr.consecutive[i - 1];
        summary["ladder"] = {{"levels", lr.levels}, {"reference_level", lr.reference_level},
                             {"D_consecutive", lr.consecutive}, {"D_reference", lr.to_reference},
                             {"nonincreasing", monotone}};
        summary["points"] = summary_of(lr.rungs.back());
      }
      dir.write_json("summary.json", summary);
      dir.write_manifest("simulate", j, c.master_seed, seconds_since(start));
      return 0;
    }

    if (*c_hold) {
      const HurstIndex h(H);
      const Direction dir_kind = parse_direction(direction);
      const std::vector<double> lags = lags_arg.empty() ? default_lags() : parse_list(lags_arg);
      const ExponentFit fit = fit_hoelder(eqn, h, dir_kind, p, lags, {t0, x0}, quad, threads);
      const double expected = p * expected_gamma(eqn, H, dir_kind);
      OutputDir dir(common.out);
      {
        CsvWriter w(dir.path("hoelder.csv"), {"lag", "moment"});
        for (std::size_t i = 0; i < lags.size(); ++i) w.row() << lags[i] << fit.moments[i];
      }
      json summary{{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
                   {"stderr_slope", fit.stderr_slope}, {"expected_slope", expected},
                   {"pass", std::abs(fit.slope - expected) <= 0.1 * p / 2.0}};
      if (mc_replicates > 0) {
        const MonteCarloFit mc = fit_hoelder_mc(eqn, h, dir_kind, p, lags, {t0, x0}, mc_replicates, seed, quad, threads);
        CsvWriter w(dir.path("hoelder_mc.csv"), {"lag", "moment", "se"});
        for (std::size_t i = 0; i < lags.size(); ++i) w.row() << lags[i] << mc.fit.moments[i] << mc.standard_errors[i];
        summary["monte_carlo"] = {{"slope", mc.fit.slope}, {"stderr_slope", mc.fit.stderr_slope},
                                  {"replicates", mc_replicates}, {"seed", seed}};
      }
      dir.write_json("summary.json", summary);
      json cfg{{"eqn", to_string(eqn)}, {"H", H}, {"direction", direction}, {"p", p}, {"lags", lags},
               {"base", {t0, x0}}};
      dir.write_manifest("hoelder", cfg, mc_replicates > 0 ? std::optional<std::uint64_t>(seed) : std::nullopt,
                         seconds_since(start));
      out << "slope = " << format_double(fit.slope) << " (expected " << format_double(expected) << ")\n";
      return 0;
    }

    if (*c_hconv) {
      const std::vector<double> ladder = parse_list(ladder_arg);
      const auto pairs = default_pairs();
      const auto rows = h_convergence(eqn, ladder, HurstIndex(H0), pairs, quad, threads);
      OutputDir dir(common.out);
      {
        CsvWriter w(dir.path("hconv.csv"), {"H", "pair", "t1", "x1", "t2", "x2", "deviation"});
        for (const auto& r : rows) {
          for (std::size_t k = 0; k < pairs.size(); ++k) {
            w.row() << r.H << k << pairs[k].first.t << pairs[k].first.x << pairs[k].second.t << pairs[k].second.x
                    << r.deviations[k];
          }
        }
      }
      bool decreasing = true;
      std::vector<double> sups;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        sups.push_back(rows[i].sup_deviation);
        if (i > 0) decreasing = decreasing && rows[i].sup_deviation < rows[i - 1].sup_deviation;
      }
      const bool shrinks = !rows.empty() && rows.back().sup_deviation < 0.1 * rows.front().sup_deviation;
      dir.write_json("summary.json", {{"H0", H0}, {"ladder", ladder}, {"sup_deviation", sups},
                                      {"strictly_decreasing", decreasing}, {"final_below_tenth_of_first", shrinks},
                                      {"pass", decreasing && shrinks}});
      dir.write_manifest("hconv", {{"eqn", to_string(eqn)}, {"H0", H0}, {"ladder", ladder}}, std::nullopt,
                         seconds_since(start));
      return 0;
    }

    if (*c_lem) {
      const auto alphas = parse_list(alphas_arg);
      const auto Ts = parse_list(Ts_arg);
      std::vector<double> hs;
      for (int k = 1; k <= 6; ++k) hs.push_back(std::ldexp(1.0, -k));
      OutputDir dir(common.out);
      bool all_pass = true;
      double worst = 0.0;
      std::size_t cells = 0;
      {
        CsvWriter w(dir.path("lemma_margins.csv"), {"lemma", "eqn", "alpha", "T", "h", "lhs", "rhs", "ratio", "pass"});
        for (auto lemma : {Lemma::L34, Lemma::L35}) {
          for (auto e : {EquationKind::Wave, EquationKind::Heat}) {
            for (double a : alphas) {
              for (double T : Ts) {
                for (const auto& m : verify_lemma_bound(lemma, e, a, T, hs, quad)) {
                  w.row() << (lemma == Lemma::L34 ? "L34" : "L35") << std::string(to_string(e)) << a << T << m.h
                          << m.lhs << m.rhs << m.ratio << (m.pass ? "true" : "false");
                  all_pass = all_pass && m.pass;
                  worst = std::max(worst, m.ratio);
                  ++cells;
                }
              }
            }
          }
        }
      }
      dir.write_json("summary.json", {{"all_pass", all_pass}, {"max_ratio", worst}, {"cells", cells}});
      dir.write_manifest("verify-lemmas", {{"alphas", alphas}, {"Ts", Ts}, {"h", hs}}, std::nullopt,
                         seconds_since(start));
      out << (all_pass ? "all lemma bounds hold" : "lemma bound violated") << " (max ratio "
          << format_double(worst) << ")\n";
      return all_pass ? 0 : 2;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace fracfield::cli
