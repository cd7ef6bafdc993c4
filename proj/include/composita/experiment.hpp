#pragma once

// Study configs and their execution for the command-line tool. Each study
// reads a JSON config, writes its artifacts atomically under an output
// directory and returns an exit status (0 ok, 2 invalid config, 3 a
// numerical contract failed).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "composita/dag_spec.hpp"
#include "composita/deep_approx.hpp"
#include "composita/error.hpp"
#include "composita/gfunction.hpp"
#include "composita/harmonic_analysis.hpp"
#include "composita/svg.hpp"
#include "composita/zonal_networks.hpp"

#ifndef COMPOSITA_VERSION
#define COMPOSITA_VERSION "0.1.0"
#endif

namespace composita::experiment {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// ---------------------------------------------------------------------------
// Logging: COMPOSITA_LOG = quiet | info (default) | debug.

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  const char* v = std::getenv("COMPOSITA_LOG");
  if (!v) return LogLevel::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

inline void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) std::cerr << "[composita] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Output helpers.

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Writes `content` to dir/name through a temporary file and a rename.
inline std::string write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto target = dir / name;
  const auto tmp = dir / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
  return target.string();
}

// ---------------------------------------------------------------------------
// Config access with bounds.

class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("config must be a JSON object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, _] : j_.items()) {
      bool ok = false;
      for (const char* k : keys) ok = ok || key == k;
      if (!ok) fail("unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double real(const char* key, double def, double lo, double hi) const {
    const double v = has(key) ? get<double>(key) : def;
    if (!(v >= lo && v <= hi)) fail(std::string("'") + key + "' = " + format_real(v) + " outside [" + format_real(lo) + ", " + format_real(hi) + "]");
    return v;
  }

  std::uint64_t integer(const char* key, std::uint64_t def, std::uint64_t lo, std::uint64_t hi) const {
    const std::uint64_t v = has(key) ? get<std::uint64_t>(key) : def;
    if (v < lo || v > hi) fail(std::string("'") + key + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  std::string text(const char* key, const std::string& def) const { return has(key) ? get<std::string>(key) : def; }

  template <class T>
  T get(const char* key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("'") + key + "': " + e.what());
    }
  }

  const nlohmann::json& raw(const char* key) const { return j_.at(key); }

  [[noreturn]] void fail(const std::string& msg) const { throw ValidationError(where_ + ": " + msg); }

 private:
  const nlohmann::json& j_;
  std::string where_;
};

/// Values given on the command line; they override the config.
struct Overrides {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string summary;
  std::vector<std::string> files;
};

namespace detail {

inline std::string header(const nlohmann::json& hashed) {
  return std::string("composita ") + COMPOSITA_VERSION + " config_hash=fnv1a64:" + hex64(fnv1a64(hashed.dump()));
}

/// The DAG spec named by 'dag' (inline) or 'dag_file' (relative to the config).
inline nlohmann::json dag_json_from_config(const ConfigReader& r, const std::string& config_dir) {
  if (r.has("dag") && r.has("dag_file")) r.fail("give either 'dag' or 'dag_file', not both");
  if (r.has("dag")) return r.raw("dag");
  if (r.has("dag_file")) {
    std::filesystem::path p = r.get<std::string>("dag_file");
    if (p.is_relative() && !config_dir.empty()) p = std::filesystem::path(config_dir) / p;
    return read_json_file(p.string());
  }
  r.fail("missing 'dag' or 'dag_file'");
}

/// Config as hashed into output headers: the DAG content replaces its file
/// name and thread counts are dropped.
inline nlohmann::json hashed_config(nlohmann::json cfg, const nlohmann::json& dag) {
  cfg.erase("threads");
  cfg.erase("dag_file");
  cfg["dag"] = dag;
  return cfg;
}

// -- rates ------------------------------------------------------------------

inline RunResult run_rates(const nlohmann::json& cfg, const Overrides& ov, const std::string& config_dir) {
  const ConfigReader r(cfg, "rates config");
  r.allow({"study", "dag", "dag_file", "N", "seeds", "probes", "sample_factor", "relative_ridge", "radius", "node_grid",
           "threads", "csv", "svg", "min_ratio"});
  const auto dag = dag_json_from_config(r, config_dir);
  const auto spec = dag_spec_from_json(dag);
  const auto ns = r.get<std::vector<std::size_t>>("N");
  if (ns.size() < 4) r.fail("'N' needs at least 4 values, got " + std::to_string(ns.size()));
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 4 || ns[i] > 4096) r.fail("'N' entries must lie in [4, 4096]");
    if (i > 0 && ns[i] <= ns[i - 1]) r.fail("'N' must be strictly increasing");
  }
  std::vector<std::uint64_t> seeds = r.has("seeds") ? r.get<std::vector<std::uint64_t>>("seeds") : std::vector<std::uint64_t>{0};
  if (seeds.empty() || seeds.size() > 64) r.fail("'seeds' needs 1 to 64 entries");
  if (ov.seed)
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = *ov.seed + i;

  RateStudyOptions opt;
  opt.probe_count = r.integer("probes", 2000, 16, 200000);
  opt.fit.sample_factor = r.integer("sample_factor", 4, 1, 64);
  opt.fit.fit.relative_ridge = r.real("relative_ridge", kDefaultRelativeRidge, 0.0, 1.0);
  opt.fit.radius = r.real("radius", 1.0, 1e-3, 1e3);
  opt.fit.node_grid = r.integer("node_grid", 2000, 16, 1000000);
  opt.fit.input_min = spec.input_min;
  opt.fit.input_max = spec.input_max;
  opt.threads = ov.threads ? *ov.threads : r.integer("threads", 1, 1, 256);
  if (opt.threads < 1 || opt.threads > 256) r.fail("threads must lie in [1, 256]");
  const double min_ratio = r.real("min_ratio", 0.0, 0.0, 100.0);
  const std::string csv_name = r.text("csv", "rates.csv"), svg_name = r.text("svg", "rates.svg");

  nlohmann::json hashed = hashed_config(cfg, dag);
  hashed["seeds"] = seeds;
  const std::string head = header(hashed);

  log(LogLevel::Debug, "rates: " + std::to_string(ns.size()) + " N values x " + std::to_string(seeds.size()) + " seeds on " +
                           std::to_string(opt.threads) + " threads");
  const RateTable table = rate_study(spec.gfunction, ns, seeds, opt);

  RunResult res;
  res.files.push_back(write_atomic(ov.out_dir, csv_name, table.to_csv(head)));
  res.files.push_back(write_atomic(ov.out_dir, svg_name, table.to_svg("shallow vs deep sup error", head)));

  const std::size_t d_g = compute_dG(spec.gfunction.graph());
  std::string s = "rates: q0=" + std::to_string(spec.gfunction.graph().input_count()) + " d_G=" + std::to_string(d_g);
  auto slope_text = [](const std::optional<SlopeFit>& f) {
    return f ? svg::num(f->slope) + " (se " + svg::num(f->stderr_) + ")" : std::string("n/a");
  };
  s += " shallow_slope=" + slope_text(table.shallow_slope) + " deep_slope=" + slope_text(table.deep_slope);
  if (table.shallow_slope && table.deep_slope) s += " ratio=" + svg::num(table.deep_slope->slope / table.shallow_slope->slope);
  s += " bound_violations=" + std::to_string(table.bound_violations);
  for (const auto& d : table.diagnostics) s += " [" + d + "]";
  res.summary = s;
  if (table.bound_violations > 0) res.exit_code = kExitNumerical;
  if (min_ratio > 0.0 && !(table.shallow_slope && table.deep_slope && table.deep_slope->slope / table.shallow_slope->slope >= min_ratio))
    res.exit_code = kExitNumerical;
  return res;
}

// -- propagation-check ------------------------------------------------------

inline RunResult run_propagation(const nlohmann::json& cfg, const Overrides& ov) {
  const ConfigReader r(cfg, "propagation-check config");
  r.allow({"study", "instances", "probes", "max_delta", "seed", "input_range", "csv", "slack"});
  const std::size_t instances = r.integer("instances", 100, 1, 100000);
  const std::size_t probes = r.integer("probes", 200, 1, 100000);
  const double max_delta = r.real("max_delta", 0.05, 0.0, 10.0);
  const double radius = r.real("input_range", 1.0, 1e-6, 1e6);
  const double slack = r.real("slack", 1e-9, 0.0, 1.0);
  const std::uint64_t seed = ov.seed ? *ov.seed : r.integer("seed", 0, 0, UINT64_MAX);
  const std::string csv_name = r.text("csv", "propagation.csv");

  nlohmann::json hashed = cfg;
  hashed["seed"] = seed;
  std::string csv = "# " + header(hashed) + "\ninstance,nodes,d_G,max_deviation,bound,violations\n";
  std::size_t total = 0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t s = seed * 1000003ULL + i;
    const GFunction f = random_gfunction(s);
    const GFunction g = perturbed_copy(f, max_delta, s ^ 0x5bd1e995ULL);
    const auto xs = random_inputs(f.graph().input_count(), probes, radius, s + 17);
    const auto eps = measured_node_errors(f, g, xs);
    const auto bound = propagation_bound(f.graph(), eps, f.declared_lipschitz());
    double dev = 0.0;
    std::size_t viol = 0;
    for (const auto& x : xs) {
      const double d = std::abs(evaluate(f, x).value - evaluate(g, x).value);
      dev = std::max(dev, d);
      if (d > bound.sink + slack) ++viol;
    }
    total += viol;
    if (bound.sink > 0) worst_ratio = std::max(worst_ratio, dev / bound.sink);
    csv += std::to_string(i) + "," + std::to_string(f.graph().size()) + "," + std::to_string(compute_dG(f.graph())) + "," +
           format_real(dev) + "," + format_real(bound.sink) + "," + std::to_string(viol) + "\n";
  }
  RunResult res;
  res.files.push_back(write_atomic(ov.out_dir, csv_name, csv));
  res.summary = "propagation-check: " + std::to_string(instances) + " instances x " + std::to_string(probes) + " probes, " +
                std::to_string(total) + " violations, max deviation/bound " + svg::num(worst_ratio);
  res.exit_code = total == 0 ? kExitOk : kExitNumerical;
  return res;
}

// -- kernel-table -----------------------------------------------------------

}  // namespace detail

/// phi(t) by direct product-rule quadrature of int |x.u||u.y| dmu*(u).
inline double phi_by_quadrature(int q, double t, int exactness) {
  const auto rule = build_quadrature(q, exactness);
  std::vector<double> x(static_cast<std::size_t>(q) + 1, 0.0), y(x.size(), 0.0);
  x[static_cast<std::size_t>(q)] = 1.0;
  y[static_cast<std::size_t>(q)] = t;
  y[0] = std::sqrt(std::max(0.0, 1.0 - t * t));
  return rule.integrate([&](std::span<const double> u) { return std::abs(dot(x, u)) * std::abs(dot(u, y)); });
}

namespace detail {

inline RunResult run_kernel_table(const nlohmann::json& cfg, const Overrides& ov) {
  const ConfigReader r(cfg, "kernel-table config");
  r.allow({"study", "q", "l_max", "t_count", "exactness", "tolerance", "csv"});
  const int q = static_cast<int>(r.integer("q", 2, 1, 6));
  const int l_max = static_cast<int>(r.integer("l_max", kDefaultPhiDegree, 2, 20000));
  const std::size_t count = r.integer("t_count", 37, 2, 100000);
  const int exactness = static_cast<int>(r.integer("exactness", q <= 2 ? 400 : 120, 2, 4000));
  const double tol = r.real("tolerance", 1e-4, 0.0, 1.0);
  const std::string csv_name = r.text("csv", "kernel_table.csv");

  const auto series = conv_kernel_series(q, l_max);
  std::string csv = "# " + header(cfg) + "\nt,phi_series,phi_quadrature,abs_diff\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = -0.9 + 1.8 * static_cast<double>(i) / static_cast<double>(count - 1);
    const double a = series(t), b = phi_by_quadrature(q, t, exactness);
    worst = std::max(worst, std::abs(a - b));
    csv += format_real(t) + "," + format_real(a) + "," + format_real(b) + "," + format_real(std::abs(a - b)) + "\n";
  }
  const double at_one = series(1.0);
  RunResult res;
  res.files.push_back(write_atomic(ov.out_dir, csv_name, csv));
  res.summary = "kernel-table: q=" + std::to_string(q) + " L_max=" + std::to_string(l_max) + " max|series-quadrature|=" + svg::num(worst) +
                " phi(1)=" + format_real(at_one) + " (1/(q+1)=" + format_real(1.0 / (q + 1)) + ")";
  res.exit_code = worst <= tol ? kExitOk : kExitNumerical;
  return res;
}

// -- dag-eval ---------------------------------------------------------------

inline RunResult run_dag_eval(const nlohmann::json& cfg, const Overrides& ov, const std::string& config_dir) {
  const ConfigReader r(cfg, "dag-eval config");
  r.allow({"study", "dag", "dag_file", "inputs", "random_inputs", "seed", "csv"});
  const auto dag = dag_json_from_config(r, config_dir);
  const auto spec = dag_spec_from_json(dag);
  const auto& gf = spec.gfunction;
  const auto& g = gf.graph();
  std::vector<std::vector<double>> xs;
  if (r.has("inputs")) xs = r.get<std::vector<std::vector<double>>>("inputs");
  const std::uint64_t seed = ov.seed ? *ov.seed : r.integer("seed", 0, 0, UINT64_MAX);
  if (r.has("random_inputs")) {
    const std::size_t n = r.integer("random_inputs", 0, 0, 1000000);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(spec.input_min, spec.input_max);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(g.input_count());
      for (auto& v : x) v = u(rng);
      xs.push_back(std::move(x));
    }
  }
  if (xs.empty()) r.fail("give 'inputs' or 'random_inputs'");
  for (const auto& x : xs)
    if (x.size() != g.input_count()) r.fail("each input needs " + std::to_string(g.input_count()) + " values");

  nlohmann::json hashed = hashed_config(cfg, dag);
  hashed["seed"] = seed;
  std::string csv = "# " + header(hashed) + "\n";
  for (std::size_t k = 0; k < g.input_count(); ++k) csv += "x" + std::to_string(k + 1) + ",";
  csv += "sink";
  for (std::size_t v = 0; v < g.size(); ++v) csv += "," + g.node(v).id;
  csv += "\n";
  for (const auto& x : xs) {
    const auto e = evaluate(gf, x);
    for (double v : x) csv += format_real(v) + ",";
    csv += format_real(e.value);
    for (double v : e.outputs) csv += "," + format_real(v);
    csv += "\n";
  }
  std::string seen;
  for (std::size_t k : variables_seen(g, g.node(g.sink()).id)) seen += (seen.empty() ? "" : ",") + std::string("x") + std::to_string(k + 1);
  RunResult res;
  res.files.push_back(write_atomic(ov.out_dir, r.text("csv", "dag_eval.csv"), csv));
  // Input labels in the CSV and summary are 1-based (x1 .. x_q0).
  res.summary = "dag-eval: " + std::to_string(g.size()) + " nodes, sink '" + g.node(g.sink()).id + "' sees (" + seen +
                "), d_G=" + std::to_string(compute_dG(g)) + ", " + std::to_string(xs.size()) + " inputs evaluated";
  return res;
}

// -- demo-D-plot ------------------------------------------------------------

inline RunResult run_demo_d(const nlohmann::json& cfg, const Overrides& ov) {
  const ConfigReader r(cfg, "demo-D-plot config");
  r.allow({"study", "n_max", "pole", "offset", "power", "lat_cells", "lon_cells", "csv", "svg"});
  const int n_max = static_cast<int>(r.integer("n_max", 24, 4, 80));
  auto pole_v = r.has("pole") ? r.get<std::vector<double>>("pole") : std::vector<double>{1.0, 1.0, 1.0};
  if (pole_v.size() != 3) r.fail("'pole' must have 3 entries");
  const double offset = r.real("offset", 0.1, 0.0, 0.99);
  const int power = static_cast<int>(r.integer("power", 8, 1, 64));
  const std::size_t lat = r.integer("lat_cells", 60, 4, 720), lon = r.integer("lon_cells", 120, 4, 1440);
  const auto pole = SpherePoint::normalized(pole_v);

  auto f = [&](std::span<const double> x) {
    const double t = dot(x, pole.coords());
    return std::pow(std::max(0.0, t - offset), power) + std::pow(std::max(0.0, -t - offset), power);
  };
  const auto rule = build_quadrature(2, 2 * n_max);
  const auto e = HarmonicExpansion::expand(f, n_max, rule);
  std::vector<double> keep(static_cast<std::size_t>(n_max) + 1, 1.0);
  keep[2] = 0.0;
  const auto band = e.scaled(keep);
  const auto d = apply_D(band);

  std::vector<std::vector<double>> fv(lat, std::vector<double>(lon)), dv = fv;
  nlohmann::json hashed = cfg;
  std::string csv = "# " + header(hashed) + "\nlat,lon,f_band,D_f\n";
  std::vector<double> x(3);
  for (std::size_t i = 0; i < lat; ++i) {
    const double theta = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(lat);
    for (std::size_t j = 0; j < lon; ++j) {
      const double phi = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(lon);
      x = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
      fv[i][j] = band(x);
      dv[i][j] = d(x);
      csv += format_real(90.0 - 180.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(lat)) + "," +
             format_real(360.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(lon)) + "," + format_real(fv[i][j]) + "," +
             format_real(dv[i][j]) + "\n";
    }
  }
  RunResult res;
  const std::string head = header(hashed);
  res.files.push_back(write_atomic(ov.out_dir, r.text("csv", "demo_D.csv"), csv));
  res.files.push_back(write_atomic(ov.out_dir, r.text("svg", "demo_D.svg"),
                                   svg::heat_maps({{"f (degree-2 part removed)", fv}, {"D f", dv}}, head)));
  double fmax = 0.0, dmax = 0.0;
  for (std::size_t i = 0; i < lat; ++i)
    for (std::size_t j = 0; j < lon; ++j) fmax = std::max(fmax, std::abs(fv[i][j])), dmax = std::max(dmax, std::abs(dv[i][j]));
  res.summary = "demo-D-plot: n_max=" + std::to_string(n_max) + " nodes=" + std::to_string(rule.size()) + " max|f|=" + svg::num(fmax) +
                " max|D f|=" + svg::num(dmax);
  return res;
}

}  // namespace detail

inline const std::vector<std::string>& study_kinds() {
  static const std::vector<std::string> kinds = {"rates", "propagation-check", "kernel-table", "dag-eval", "demo-D-plot"};
  return kinds;
}

/// Runs one study. `config_dir` resolves relative "dag_file" paths.
/// Library errors are mapped to exit codes; the summary names the failure.
inline RunResult run(const std::string& kind, const nlohmann::json& cfg, const Overrides& ov, const std::string& config_dir = "") {
  try {
    if (cfg.is_object() && cfg.contains("study") && cfg.at("study") != kind)
      throw ValidationError("config is for study '" + cfg.at("study").dump() + "', not '" + kind + "'");
    if (kind == "rates") return detail::run_rates(cfg, ov, config_dir);
    if (kind == "propagation-check") return detail::run_propagation(cfg, ov);
    if (kind == "kernel-table") return detail::run_kernel_table(cfg, ov);
    if (kind == "dag-eval") return detail::run_dag_eval(cfg, ov, config_dir);
    if (kind == "demo-D-plot") return detail::run_demo_d(cfg, ov);
    throw ValidationError("unknown study '" + kind + "'");
  } catch (const ValidationError& e) {
    return {kExitValidation, std::string("error: ") + e.what(), {}};
  } catch (const InvalidInput& e) {
    return {kExitValidation, std::string("error: ") + e.what(), {}};
  } catch (const RangeError& e) {
    return {kExitValidation, std::string("error: ") + e.what(), {}};
  } catch (const Error& e) {
    return {kExitNumerical, std::string("numerical contract failed: ") + e.what(), {}};
  } catch (const std::filesystem::filesystem_error& e) {
    return {kExitValidation, std::string("error: ") + e.what(), {}};
  }
}

}  // namespace composita::experiment
