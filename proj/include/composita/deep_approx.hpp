#pragma once

// Deep approximation of a G-function: one zonal network per node on
// S^{d(v)}, interfaces normalized onto spheres, errors aggregated by the
// propagation bound. Also the shallow-vs-deep rate study.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "composita/error.hpp"
#include "composita/gfunction.hpp"
#include "composita/sphere_geometry.hpp"
#include "composita/svg.hpp"
#include "composita/zonal_networks.hpp"

namespace composita {

/// z = scale * y + shift, sending the declared range [m, M] onto [-R, R].
struct NodeNormalizer {
  double scale = 1.0;
  double shift = 0.0;

  static NodeNormalizer from_range(double m, double big_m, double radius = 1.0) {
    if (!(std::isfinite(m) && std::isfinite(big_m) && m <= big_m))
      detail::fail_invalid("NodeNormalizer", "range must be finite with m <= M");
    if (!(radius > 0.0)) detail::fail_invalid("NodeNormalizer", "R must be > 0");
    if (big_m == m) return {1.0, -m};  // a point range maps to 0
    const double s = 2.0 * radius / (big_m - m);
    return {s, -radius - s * m};
  }

  double apply(double y) const { return scale * y + shift; }
  double inverse(double z) const { return (z - shift) / scale; }
};

/// Normalizers for the argument slots of node v (children, then external inputs).
inline std::vector<NodeNormalizer> slot_normalizers(const GFunction& gf, std::size_t v, double input_min,
                                                    double input_max, double radius) {
  const auto& g = gf.graph();
  std::vector<NodeNormalizer> out;
  for (std::size_t u : g.children(v))
    out.push_back(NodeNormalizer::from_range(gf.function(u).range_min, gf.function(u).range_max, radius));
  for (std::size_t k = 0; k < g.node(v).inputs.size(); ++k) out.push_back(NodeNormalizer::from_range(input_min, input_max, radius));
  return out;
}

/// Point on S^d for a raw argument tuple: normalize each slot, then lift.
inline void normalized_lift(std::span<const NodeNormalizer> norms, std::span<const double> y, std::span<double> out) {
  double s = 1.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double z = norms[k].apply(y[k]);
    out[k] = z;
    s += z * z;
  }
  const double inv = 1.0 / std::sqrt(s);
  for (std::size_t k = 0; k < y.size(); ++k) out[k] *= inv;
  out[y.size()] = inv;
}

/// n quasi-random points of [-R, R]^d, lifted. `salt` decorrelates sets.
inline PointSet lifted_box_points(std::size_t d, std::size_t n, double radius, std::uint64_t seed, std::uint64_t salt) {
  std::vector<double> shift(d);
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + salt);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& s : shift) s = u(rng);
  const auto k = kronecker_sequence(n, d, shift);
  std::vector<double> flat(n * (d + 1)), z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) z[j] = radius * (2.0 * k[i * d + j] - 1.0);
    lift_into(z, std::span<double>(flat.data() + i * (d + 1), d + 1));
  }
  return PointSet(d, std::move(flat));
}

struct DeepFitOptions {
  std::uint64_t seed = 0;
  FitOptions fit;
  double radius = 1.0;              // R of the normalizers
  std::size_t sample_factor = 4;    // samples per center
  std::size_t node_grid = 2000;     // box points per node for measuring eps_v
  double input_min = -1.0;          // external input box
  double input_max = 1.0;
};

struct DeepApproximation {
  GFunction approximant;              // same graph, constituents g_v
  std::vector<ZonalNetwork> networks;  // per node
  std::vector<double> node_errors;    // eps_v
  std::optional<PropagationBound> bound;  // when every node declares L_v
};

namespace detail {

inline GFunction assemble_deep(const GFunction& target, const std::vector<ZonalNetwork>& nets, const DeepFitOptions& opt) {
  std::vector<NodeFunction> fns;
  for (std::size_t v = 0; v < target.graph().size(); ++v) {
    NodeFunction nf = target.function(v);
    const auto norms = slot_normalizers(target, v, opt.input_min, opt.input_max, opt.radius);
    nf.f = [norms, net = nets[v]](std::span<const double> y) {
      std::vector<double> u(y.size() + 1);
      normalized_lift(norms, y, u);
      return net(u);
    };
    nf.descriptor = nlohmann::json();
    fns.push_back(std::move(nf));
  }
  return GFunction(target.graph(), std::move(fns));
}

}  // namespace detail

/// Fits g_v on S^{d(v)} for every node with N centers each. Node errors are
/// sup |f_v - g_v| over a box grid and over the argument tuples reached by
/// both G-functions at `probes`.
inline DeepApproximation lift_to_deep(const GFunction& target, std::size_t n_centers, const DeepFitOptions& opt,
                                      const std::vector<std::vector<double>>& probes) {
  const auto& g = target.graph();
  DeepApproximation out;
  out.networks.resize(g.size());
  out.node_errors.assign(g.size(), 0.0);
  std::vector<std::vector<double>> grid_raw(g.size());

  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::size_t d = g.degree(v);
    const auto norms = slot_normalizers(target, v, opt.input_min, opt.input_max, opt.radius);
    const auto& f = target.function(v).f;
    auto on_sphere = [&](std::span<const double> u) {
      std::vector<double> y(d);
      for (std::size_t k = 0; k < d; ++k) y[k] = norms[k].inverse(u[k] / u[d]);
      return f(y);
    };
    try {
      const PointSet centers = choose_centers(d, n_centers, opt.seed);
      const PointSet samples = lifted_box_points(d, opt.sample_factor * centers.size(), opt.radius, opt.seed, 1);
      out.networks[v] = fit_shallow(on_sphere, centers, samples, opt.fit);
      const PointSet grid = lifted_box_points(d, opt.node_grid, opt.radius, opt.seed, 2);
      double eps = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) eps = std::max(eps, std::abs(on_sphere(grid[i]) - out.networks[v](grid[i])));
      out.node_errors[v] = eps;
    } catch (const Error& e) {
      throw ConstraintFailure("lift_to_deep: fit failed at node '" + g.node(v).id + "': " + e.what());
    }
  }

  out.approximant = detail::assemble_deep(target, out.networks, opt);
  if (!probes.empty()) {
    const auto visited = measured_node_errors(target, out.approximant, probes);
    for (std::size_t v = 0; v < g.size(); ++v) out.node_errors[v] = std::max(out.node_errors[v], visited[v]);
  }
  bool declared = true;
  for (const auto& nf : target.functions()) declared = declared && nf.lipschitz.has_value();
  if (declared) out.bound = propagation_bound(g, out.node_errors, target.declared_lipschitz());
  return out;
}

/// One network on S^{q0} for the whole sink function.
inline ZonalNetwork fit_shallow_baseline(const GFunction& target, std::size_t n_centers, const DeepFitOptions& opt) {
  const std::size_t q0 = target.graph().input_count();
  const auto norm = NodeNormalizer::from_range(opt.input_min, opt.input_max, opt.radius);
  auto on_sphere = [&](std::span<const double> u) {
    std::vector<double> x(q0);
    for (std::size_t k = 0; k < q0; ++k) x[k] = norm.inverse(u[k] / u[q0]);
    return evaluate(target, x).value;
  };
  const PointSet centers = choose_centers(q0, n_centers, opt.seed);
  const PointSet samples = lifted_box_points(q0, opt.sample_factor * centers.size(), opt.radius, opt.seed, 1);
  return fit_shallow(on_sphere, centers, samples, opt.fit);
}

inline double eval_shallow_baseline(const ZonalNetwork& net, std::span<const double> x, const DeepFitOptions& opt) {
  const auto norm = NodeNormalizer::from_range(opt.input_min, opt.input_max, opt.radius);
  std::vector<NodeNormalizer> norms(x.size(), norm);
  std::vector<double> u(x.size() + 1);
  normalized_lift(norms, x, u);
  return net(u);
}

// ---------------------------------------------------------------------------
// Slopes and the rate table.

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log(error) against log(N).
inline SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 3) detail::fail_invalid("fit_loglog_slope", "need at least 3 rows");
  double mx = 0.0, my = 0.0;
  for (const auto& [n, e] : rows) {
    if (!(n > 0.0)) detail::fail_invalid("fit_loglog_slope", "N must be positive");
    if (!(e > 0.0) || !std::isfinite(e))
      throw DomainError("fit_loglog_slope: non-positive error (exact reproduction?), the study is degenerate");
    mx += std::log(n);
    my += std::log(e);
  }
  const double k = static_cast<double>(rows.size());
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : rows) {
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
    sxy += (std::log(n) - mx) * (std::log(e) - my);
  }
  if (!(sxx > 0.0)) detail::fail_invalid("fit_loglog_slope", "need at least two distinct N");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [n, e] : rows) {
    const double r = std::log(e) - fit.intercept - fit.slope * std::log(n);
    rss += r * r;
  }
  fit.stderr_ = rows.size() > 2 ? std::sqrt(rss / (k - 2.0) / sxx) : 0.0;
  return fit;
}

struct RateRow {
  std::size_t n = 0;
  double shallow_err = 0.0;
  double deep_err = 0.0;
  double bound = 0.0;  // NaN when some L_v is undeclared
  double probe_mesh = 0.0;
  std::uint64_t seed = 0;
};

/// Below this, errors are treated as exact reproduction and not fitted.
inline constexpr double kDegenerateError = 1e-10;

struct RateTable {
  std::vector<RateRow> rows;  // ordered by N, then seed
  std::optional<SlopeFit> shallow_slope, deep_slope;
  std::vector<std::string> diagnostics;
  std::size_t bound_violations = 0;

  std::string to_csv(const std::string& header_comment = "") const {
    std::string out;
    if (!header_comment.empty()) out += "# " + header_comment + "\n";
    out += "N,shallow_err,deep_err,bound,probe_mesh,seed\n";
    for (const auto& r : rows)
      out += std::to_string(r.n) + "," + format_real(r.shallow_err) + "," + format_real(r.deep_err) + "," +
             format_real(r.bound) + "," + format_real(r.probe_mesh) + "," + std::to_string(r.seed) + "\n";
    return out;
  }

  std::string to_svg(const std::string& title, const std::string& comment = "") const {
    svg::Series s{"shallow", "#1f5fbf", {}, {}}, d{"deep", "#c0392b", {}, {}};
    for (const auto& r : rows) {
      s.x.push_back(static_cast<double>(r.n));
      s.y.push_back(r.shallow_err);
      d.x.push_back(static_cast<double>(r.n));
      d.y.push_back(r.deep_err);
    }
    if (shallow_slope) s.has_fit = true, s.slope = shallow_slope->slope, s.intercept = shallow_slope->intercept;
    if (deep_slope) d.has_fit = true, d.slope = deep_slope->slope, d.intercept = deep_slope->intercept;
    return svg::loglog_plot(title, "N (centers per network)", "sup error on probes", {s, d}, comment);
  }
};

struct RateStudyOptions {
  DeepFitOptions fit;
  std::size_t probe_count = 2000;
  std::size_t threads = 1;
};

/// Fill distance of the probe set within the input box (Euclidean), estimated
/// from an independent quasi-random check set.
inline double probe_fill_distance(const std::vector<std::vector<double>>& probes, double lo, double hi, std::size_t checks = 2000) {
  if (probes.empty()) return INFINITY;
  const std::size_t q0 = probes[0].size();
  std::vector<double> shift(q0, 0.21);
  const auto k = kronecker_sequence(checks, q0, shift);
  double worst = 0.0;
  for (std::size_t i = 0; i < checks; ++i) {
    double best = INFINITY;
    for (const auto& p : probes) {
      double s = 0.0;
      for (std::size_t j = 0; j < q0; ++j) {
        const double c = lo + (hi - lo) * k[i * q0 + j];
        s += (c - p[j]) * (c - p[j]);
      }
      best = std::min(best, s);
    }
    worst = std::max(worst, std::sqrt(best));
  }
  return worst;
}

/// Quasi-random probe inputs in [lo, hi]^q0, shared by every cell of a study.
inline std::vector<std::vector<double>> study_probes(std::size_t q0, std::size_t count, double lo, double hi) {
  std::vector<double> shift(q0, 0.37);
  const auto k = kronecker_sequence(count, q0, shift);
  std::vector<std::vector<double>> out(count, std::vector<double>(q0));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < q0; ++j) out[i][j] = lo + (hi - lo) * k[i * q0 + j];
  return out;
}

/// Shallow and deep sup errors for every (N, seed) cell. Cells run on up to
/// `threads` workers; results do not depend on the thread count.
inline RateTable rate_study(const GFunction& target, const std::vector<std::size_t>& ns,
                            const std::vector<std::uint64_t>& seeds, const RateStudyOptions& opt) {
  if (ns.size() < 4) detail::fail_invalid("rate_study", "need at least 4 values of N");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) detail::fail_invalid("rate_study", "N list must be strictly increasing");
  if (seeds.empty()) detail::fail_invalid("rate_study", "need at least one seed");

  const auto probes = study_probes(target.graph().input_count(), opt.probe_count, opt.fit.input_min, opt.fit.input_max);
  const double mesh = probe_fill_distance(probes, opt.fit.input_min, opt.fit.input_max);
  std::vector<double> truth(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) truth[i] = evaluate(target, probes[i]).value;

  RateTable table;
  table.rows.resize(ns.size() * seeds.size());
  std::vector<std::size_t> violations(table.rows.size(), 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t cell = next.fetch_add(1);
      if (cell >= table.rows.size()) return;
      try {
        RateRow row;
        row.n = ns[cell / seeds.size()];
        row.seed = seeds[cell % seeds.size()];
        row.probe_mesh = mesh;
        DeepFitOptions fo = opt.fit;
        fo.seed = row.seed;
        const auto shallow = fit_shallow_baseline(target, row.n, fo);
        const auto deep = lift_to_deep(target, row.n, fo, probes);
        row.bound = deep.bound ? deep.bound->sink : std::nan("");
        for (std::size_t i = 0; i < probes.size(); ++i) {
          row.shallow_err = std::max(row.shallow_err, std::abs(eval_shallow_baseline(shallow, probes[i], fo) - truth[i]));
          const double de = std::abs(evaluate(deep.approximant, probes[i]).value - truth[i]);
          row.deep_err = std::max(row.deep_err, de);
          if (deep.bound && de > deep.bound->sink + 1e-9) ++violations[cell];
        }
        table.rows[cell] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = table.rows.size();
        return;
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.threads, table.rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  for (std::size_t v : violations) table.bound_violations += v;

  auto fit_column = [&](auto get, const char* name) -> std::optional<SlopeFit> {
    std::vector<std::pair<double, double>> pts;
    double worst = 0.0;
    for (const auto& r : table.rows) {
      pts.emplace_back(static_cast<double>(r.n), get(r));
      worst = std::max(worst, get(r));
    }
    if (worst < kDegenerateError) {
      table.diagnostics.push_back(std::string(name) + " errors below " + format_real(kDegenerateError) +
                                  " (exact reproduction); slope fit skipped");
      return std::nullopt;
    }
    try {
      return fit_loglog_slope(pts);
    } catch (const DomainError& e) {
      table.diagnostics.push_back(std::string(name) + ": " + e.what());
      return std::nullopt;
    }
  };
  table.shallow_slope = fit_column([](const RateRow& r) { return r.shallow_err; }, "shallow");
  table.deep_slope = fit_column([](const RateRow& r) { return r.deep_err; }, "deep");
  return table;
}

}  // namespace composita
