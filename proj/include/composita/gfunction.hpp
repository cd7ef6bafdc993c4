#pragma once

// DAG-structured compositional functions: graph validation, the variables
// seen by each node, memoized evaluation, Lipschitz estimation and the
// recursive error-propagation bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "composita/error.hpp"
#include "composita/sphere_geometry.hpp"
#include "composita/zonal_networks.hpp"

namespace composita {

// ---------------------------------------------------------------------------
// Graph structure.

/// One node as written by the user: children by id (this order defines the
/// concatenation of seen variables) and 0-based external input indices.
struct DagNode {
  std::string id;
  std::vector<std::string> children;
  std::vector<std::size_t> inputs;
};

struct DagDiagnostics {
  std::vector<std::string> messages;
  bool ok() const { return messages.empty(); }
  std::string joined() const {
    std::string s;
    for (const auto& m : messages) s += (s.empty() ? "" : "; ") + m;
    return s;
  }
};

/// Checks the normal form: unique ids, known children, no cycles, one sink,
/// every node reaches the sink, d(v) >= 1, external inputs only on sources,
/// and external indices partitioning {0, ..., input_count - 1}.
inline DagDiagnostics validate_dag(const std::vector<DagNode>& nodes, std::size_t input_count) {
  DagDiagnostics diag;
  auto report = [&](std::string m) { diag.messages.push_back(std::move(m)); };
  if (nodes.empty()) {
    report("graph has no nodes");
    return diag;
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!index.emplace(nodes[i].id, i).second) report("duplicate node id '" + nodes[i].id + "'");

  std::vector<std::vector<std::size_t>> kids(nodes.size());
  std::vector<std::size_t> parent_count(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& c : nodes[i].children) {
      const auto it = index.find(c);
      if (it == index.end()) {
        report("node '" + nodes[i].id + "' lists unknown child '" + c + "'");
        continue;
      }
      kids[i].push_back(it->second);
      ++parent_count[it->second];
    }
    if (nodes[i].children.empty() && nodes[i].inputs.empty())
      report("node '" + nodes[i].id + "' has in-degree 0");
    if (!nodes[i].children.empty() && !nodes[i].inputs.empty())
      report("non-source node '" + nodes[i].id + "' takes external inputs directly (insert dummy sources)");
  }

  // Cycle detection by colored DFS over child edges.
  std::vector<int> color(nodes.size(), 0);
  std::vector<std::size_t> stack;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    color[v] = 1;
    stack.push_back(v);
    for (std::size_t u : kids[v]) {
      if (color[u] == 1) {
        std::string cyc;
        auto it = std::find(stack.begin(), stack.end(), u);
        for (; it != stack.end(); ++it) cyc += nodes[*it].id + " -> ";
        report("cycle: " + cyc + nodes[u].id);
        return true;
      }
      if (color[u] == 0 && dfs(u)) return true;
    }
    stack.pop_back();
    color[v] = 2;
    return false;
  };
  bool cyclic = false;
  for (std::size_t v = 0; v < nodes.size() && !cyclic; ++v)
    if (color[v] == 0) cyclic = dfs(v);

  std::vector<std::size_t> sinks;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (parent_count[i] == 0) sinks.push_back(i);
  if (sinks.size() != 1) {
    std::string ids;
    for (std::size_t s : sinks) ids += (ids.empty() ? "" : ", ") + nodes[s].id;
    report("expected exactly one sink, found " + std::to_string(sinks.size()) + (ids.empty() ? "" : " (" + ids + ")"));
  } else if (!cyclic) {
    std::vector<bool> reached(nodes.size(), false);
    std::vector<std::size_t> todo = {sinks[0]};
    reached[sinks[0]] = true;
    while (!todo.empty()) {
      const std::size_t v = todo.back();
      todo.pop_back();
      for (std::size_t u : kids[v])
        if (!reached[u]) reached[u] = true, todo.push_back(u);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!reached[i]) report("node '" + nodes[i].id + "' has no path to sink '" + nodes[sinks[0]].id + "'");
  }

  std::vector<int> used(input_count, 0);
  for (const auto& n : nodes) {
    for (std::size_t k : n.inputs) {
      if (k >= input_count) {
        report("node '" + n.id + "' uses input " + std::to_string(k) + " outside [0, " + std::to_string(input_count) + ")");
        continue;
      }
      ++used[k];
    }
  }
  for (std::size_t k = 0; k < input_count; ++k) {
    if (used[k] == 0) report("external input " + std::to_string(k) + " is not used by any source");
    if (used[k] > 1) report("external input " + std::to_string(k) + " is used by " + std::to_string(used[k]) + " sources");
  }
  return diag;
}

/// Rewrites external inputs of non-source nodes as identity dummy sources
/// named "<id>.x<k>", appended after the node's existing children.
inline std::vector<DagNode> insert_dummy_sources(std::vector<DagNode> nodes) {
  std::vector<DagNode> extra;
  for (auto& n : nodes) {
    if (n.children.empty()) continue;
    for (std::size_t k : n.inputs) {
      DagNode d{n.id + ".x" + std::to_string(k), {}, {k}};
      n.children.push_back(d.id);
      extra.push_back(std::move(d));
    }
    n.inputs.clear();
  }
  nodes.insert(nodes.end(), extra.begin(), extra.end());
  return nodes;
}

/// Validated, immutable DAG with index-based adjacency.
class DagGraph {
 public:
  DagGraph() = default;
  DagGraph(std::vector<DagNode> nodes, std::size_t input_count) : nodes_(std::move(nodes)), input_count_(input_count) {
    const auto diag = validate_dag(nodes_, input_count_);
    if (!diag.ok()) throw ValidationError("DagGraph: " + diag.joined());
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].id] = i;
    children_.resize(nodes_.size());
    std::vector<std::size_t> parents(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (const auto& c : nodes_[i].children) {
        children_[i].push_back(index_.at(c));
        ++parents[index_.at(c)];
      }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (parents[i] == 0) sink_ = i;
    // Post-order from the sink: children before parents.
    std::vector<bool> done(nodes_.size(), false);
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
      if (done[v]) return;
      done[v] = true;
      for (std::size_t u : children_[v]) visit(u);
      order_.push_back(v);
    };
    visit(sink_);
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t input_count() const { return input_count_; }
  const DagNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<DagNode>& nodes() const { return nodes_; }
  std::size_t sink() const { return sink_; }
  std::span<const std::size_t> children(std::size_t i) const { return children_.at(i); }
  /// Children before parents; the sink is last.
  std::span<const std::size_t> topological_order() const { return order_; }
  bool is_source(std::size_t i) const { return children_.at(i).empty(); }
  /// d(v): children plus direct external inputs.
  std::size_t degree(std::size_t i) const { return children_.at(i).size() + nodes_.at(i).inputs.size(); }

  std::size_t index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw InvalidInput("DagGraph: unknown node '" + id + "'");
    return it->second;
  }

 private:
  std::vector<DagNode> nodes_;
  std::size_t input_count_ = 0;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> order_;
  std::size_t sink_ = 0;
};

/// Ordered external inputs reachable from `id`.
inline std::vector<std::size_t> variables_seen(const DagGraph& g, const std::string& id) {
  std::function<void(std::size_t, std::vector<std::size_t>&)> collect = [&](std::size_t v, std::vector<std::size_t>& out) {
    for (std::size_t u : g.children(v)) collect(u, out);
    const auto& in = g.node(v).inputs;
    out.insert(out.end(), in.begin(), in.end());
  };
  std::vector<std::size_t> out;
  collect(g.index_of(id), out);
  return out;
}

/// d_G: largest in-degree over non-source nodes, or over all nodes when the
/// graph is a single source.
inline std::size_t compute_dG(const DagGraph& g) {
  std::size_t d = 0;
  bool any_internal = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_source(i)) continue;
    any_internal = true;
    d = std::max(d, g.degree(i));
  }
  if (!any_internal)
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, g.degree(i));
  return d;
}

// ---------------------------------------------------------------------------
// Constituent functions.

using Constituent = std::function<double(std::span<const double>)>;

struct NodeFunction {
  Constituent f;
  double range_min = -1.0;  // declared output interval [m_v, M_v]
  double range_max = 1.0;
  std::optional<double> lipschitz;  // w.r.t. the l1 distance on the input tuple
  nlohmann::json descriptor;        // builtin description, empty for ad-hoc functions
};

namespace builtin {

inline NodeFunction identity() {
  return {[](std::span<const double> y) { return y[0]; }, -1.0, 1.0, 1.0, {{"type", "identity"}}};
}

/// w . y + b
inline NodeFunction affine(std::vector<double> w, double b = 0.0) {
  double lip = 0.0, reach = std::abs(b);
  for (double v : w) lip = std::max(lip, std::abs(v));
  for (double v : w) reach += std::abs(v);
  nlohmann::json d = {{"type", "affine"}, {"weights", w}, {"bias", b}};
  return {[w = std::move(w), b](std::span<const double> y) {
            double s = b;
            for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * y[k];
            return s;
          },
          -reach, reach, lip, std::move(d)};
}

/// c * prod_k y_k; Lipschitz constant depends on the input box and must be declared.
inline NodeFunction product(double c = 1.0) {
  return {[c](std::span<const double> y) {
            double p = c;
            for (double v : y) p *= v;
            return p;
          },
          -std::abs(c), std::abs(c), std::nullopt, {{"type", "product"}, {"scale", c}}};
}

/// c * prod_k tanh(y_k), Lipschitz |c| on all of R^d.
inline NodeFunction tanh_product(double c = 1.0) {
  return {[c](std::span<const double> y) {
            double p = c;
            for (double v : y) p *= std::tanh(v);
            return p;
          },
          -std::abs(c), std::abs(c), std::abs(c), {{"type", "tanh_product"}, {"scale", c}}};
}

/// A sin(w . y + b), Lipschitz |A| max|w_k|.
inline NodeFunction sin_affine(double amplitude, std::vector<double> w, double b = 0.0) {
  double lip = 0.0;
  for (double v : w) lip = std::max(lip, std::abs(v));
  nlohmann::json d = {{"type", "sin_affine"}, {"amplitude", amplitude}, {"weights", w}, {"bias", b}};
  return {[amplitude, w = std::move(w), b](std::span<const double> y) {
            double s = b;
            for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * y[k];
            return amplitude * std::sin(s);
          },
          -std::abs(amplitude), std::abs(amplitude), std::abs(amplitude) * lip, std::move(d)};
}

/// A exp(-|y - c|^2 / s^2), Lipschitz |A| sqrt(2/e) / s.
inline NodeFunction bump(double amplitude, std::vector<double> center, double width) {
  if (!(width > 0.0)) detail::fail_invalid("builtin::bump", "width must be > 0");
  nlohmann::json d = {{"type", "bump"}, {"amplitude", amplitude}, {"center", center}, {"width", width}};
  const double lo = std::min(0.0, amplitude), hi = std::max(0.0, amplitude);
  return {[amplitude, c = std::move(center), width](std::span<const double> y) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) r2 += (y[k] - c[k]) * (y[k] - c[k]);
            return amplitude * std::exp(-r2 / (width * width));
          },
          lo, hi, std::abs(amplitude) * std::sqrt(2.0 / std::numbers::e) / width, std::move(d)};
}

/// G(lift(y)) for a |.| zonal network G on S^d; Lipschitz sum |a_k|.
inline NodeFunction planted_zonal(ZonalNetwork net) {
  const double l1 = net.coefficient_l1();
  nlohmann::json d = {{"type", "planted_zonal"}, {"network", to_json(net)}};
  return {[net = std::move(net)](std::span<const double> y) {
            std::vector<double> u(y.size() + 1);
            lift_into(y, u);
            return net(u);
          },
          -l1, l1, net.kind() == KernelKind::AbsDot ? std::optional<double>(l1) : std::nullopt, std::move(d)};
}

}  // namespace builtin

/// A validated DAG with one constituent per node.
class GFunction {
 public:
  GFunction() = default;
  GFunction(DagGraph graph, std::vector<NodeFunction> functions)
      : graph_(std::move(graph)), fns_(std::move(functions)) {
    if (fns_.size() != graph_.size())
      throw ValidationError("GFunction: " + std::to_string(fns_.size()) + " functions for " +
                            std::to_string(graph_.size()) + " nodes");
    for (std::size_t i = 0; i < fns_.size(); ++i) {
      const auto& id = graph_.node(i).id;
      if (!fns_[i].f) throw ValidationError("GFunction: node '" + id + "' has no function");
      if (!(std::isfinite(fns_[i].range_min) && std::isfinite(fns_[i].range_max) && fns_[i].range_min <= fns_[i].range_max))
        throw ValidationError("GFunction: node '" + id + "' has an invalid declared range");
      if (fns_[i].lipschitz && !(*fns_[i].lipschitz >= 0.0))
        throw ValidationError("GFunction: node '" + id + "' has a negative Lipschitz constant");
    }
  }

  const DagGraph& graph() const { return graph_; }
  const NodeFunction& function(std::size_t i) const { return fns_.at(i); }
  const std::vector<NodeFunction>& functions() const { return fns_; }

  /// Declared Lipschitz constants; throws if any node lacks one.
  std::vector<double> declared_lipschitz() const {
    std::vector<double> l(fns_.size());
    for (std::size_t i = 0; i < fns_.size(); ++i) {
      if (!fns_[i].lipschitz) throw ValidationError("GFunction: node '" + graph_.node(i).id + "' has no declared Lipschitz constant");
      l[i] = *fns_[i].lipschitz;
    }
    return l;
  }

 private:
  DagGraph graph_;
  std::vector<NodeFunction> fns_;
};

/// Arguments of node v: children's outputs in order, then its external inputs.
inline void gather_arguments(const DagGraph& g, std::size_t v, std::span<const double> outputs,
                             std::span<const double> x, std::vector<double>& args) {
  args.clear();
  for (std::size_t u : g.children(v)) args.push_back(outputs[u]);
  for (std::size_t k : g.node(v).inputs) args.push_back(x[k]);
}

struct Evaluation {
  double value = 0.0;
  std::vector<double> outputs;  // per node, indexed like the graph
};

/// Topological evaluation; every node runs exactly once.
inline Evaluation evaluate(const GFunction& gf, std::span<const double> x) {
  const auto& g = gf.graph();
  if (x.size() != g.input_count())
    throw InvalidInput("evaluate: expected " + std::to_string(g.input_count()) + " inputs, got " + std::to_string(x.size()));
  Evaluation e;
  e.outputs.assign(g.size(), 0.0);
  std::vector<double> args;
  for (std::size_t v : g.topological_order()) {
    gather_arguments(g, v, e.outputs, x, args);
    const double y = gf.function(v).f(args);
    if (!std::isfinite(y)) throw EvaluationError("evaluate: node '" + g.node(v).id + "' returned a non-finite value");
    e.outputs[v] = y;
  }
  e.value = e.outputs[g.sink()];
  return e;
}

// ---------------------------------------------------------------------------
// Lipschitz estimation and error propagation.

/// rho_d(a, b) = sum_k |atan a_k - atan b_k|, the l1 sum of geodesic
/// distances between the per-coordinate lifts onto S^1.
inline double rho_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) detail::fail_invalid("rho_distance", "dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(std::atan(a[k]) - std::atan(b[k]));
  return s;
}

using PairSampler = std::function<std::pair<std::vector<double>, std::vector<double>>()>;

/// max |f(a) - f(b)| / rho(a, b) over sampled pairs. A lower estimate of L.
inline double estimate_lipschitz(const Constituent& f, const PairSampler& sampler, std::size_t pairs) {
  if (pairs < 1) detail::fail_invalid("estimate_lipschitz", "pairs must be >= 1");
  double best = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    std::pair<std::vector<double>, std::vector<double>> ab;
    try {
      ab = sampler();
    } catch (const std::exception& e) {
      throw ConstraintFailure(std::string("estimate_lipschitz: sampler failed: ") + e.what());
    }
    const double r = rho_distance(ab.first, ab.second);
    if (!(r > 0.0)) continue;
    best = std::max(best, std::abs(f(ab.first) - f(ab.second)) / r);
  }
  return best;
}

/// Pairs (a, a + h) with a uniform in [lo, hi]^d and h a small random step.
inline PairSampler box_pair_sampler(std::size_t d, double lo, double hi, std::uint64_t seed, double step = 1e-3) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [=]() {
    std::uniform_real_distribution<double> u(lo, hi), s(-step, step);
    std::vector<double> a(d), b(d);
    for (std::size_t k = 0; k < d; ++k) {
      a[k] = u(*rng);
      b[k] = std::clamp(a[k] + s(*rng), lo, hi);
    }
    return std::make_pair(a, b);
  };
}

struct PropagationBound {
  double sink = 0.0;
  std::vector<double> per_node;
};

/// B_v = eps_v + L_v * sum_{children u} B_u.
inline PropagationBound propagation_bound(const DagGraph& g, std::span<const double> eps, std::span<const double> lip) {
  if (eps.size() != g.size() || lip.size() != g.size())
    detail::fail_invalid("propagation_bound", "need one error and one Lipschitz constant per node");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(eps[i] >= 0.0) || !std::isfinite(eps[i]))
      detail::fail_invalid("propagation_bound", "error at node '" + g.node(i).id + "' must be finite and >= 0");
    if (!(lip[i] >= 0.0) || !std::isfinite(lip[i]))
      detail::fail_invalid("propagation_bound", "Lipschitz constant at node '" + g.node(i).id + "' must be finite and >= 0");
  }
  PropagationBound b;
  b.per_node.assign(g.size(), 0.0);
  for (std::size_t v : g.topological_order()) {
    double kids = 0.0;
    for (std::size_t u : g.children(v)) kids += b.per_node[u];
    b.per_node[v] = eps[v] + (g.children(v).empty() ? 0.0 : lip[v] * kids);
  }
  b.sink = b.per_node[g.sink()];
  return b;
}

/// Per-node sup |f_v - g_v| over the argument tuples both G-functions reach
/// at the given inputs (rows of `inputs`, each of length input_count).
inline std::vector<double> measured_node_errors(const GFunction& f, const GFunction& g,
                                                const std::vector<std::vector<double>>& inputs) {
  const auto& graph = f.graph();
  if (g.graph().size() != graph.size()) detail::fail_invalid("measured_node_errors", "graphs differ");
  std::vector<double> eps(graph.size(), 0.0), args;
  for (const auto& x : inputs) {
    const auto ef = evaluate(f, x), eg = evaluate(g, x);
    for (std::size_t v = 0; v < graph.size(); ++v) {
      for (const auto* outs : {&ef.outputs, &eg.outputs}) {
        gather_arguments(graph, v, *outs, x, args);
        eps[v] = std::max(eps[v], std::abs(f.function(v).f(args) - g.function(v).f(args)));
      }
    }
  }
  return eps;
}

// ---------------------------------------------------------------------------
// Random instances for the propagation check.

struct RandomDagOptions {
  std::size_t min_sources = 2;
  std::size_t max_sources = 5;
  std::size_t max_internal = 5;
  std::size_t max_source_inputs = 3;
  double input_range = 1.0;
};

/// Random DAG (shared children allowed) with builtin constituents that carry
/// analytic, globally valid Lipschitz constants.
inline GFunction random_gfunction(std::uint64_t seed, const RandomDagOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto random_fn = [&](std::size_t d, std::size_t kind) -> NodeFunction {
    std::vector<double> w(d);
    for (auto& v : w) v = unit(rng);
    switch (kind % 5) {
      case 0: return builtin::affine(w, 0.5 * unit(rng));
      case 1: return builtin::tanh_product(1.5 * unit(rng));
      case 2: return builtin::sin_affine(unit(rng), w, unit(rng));
      case 3: return builtin::bump(unit(rng), w, 0.5 + std::abs(unit(rng)));
      default: {
        const auto centers = random_sphere_points(d, 4, rng());
        std::vector<double> a(4);
        for (auto& v : a) v = 0.5 * unit(rng);
        return builtin::planted_zonal(ZonalNetwork(KernelKind::AbsDot, centers, a));
      }
    }
  };

  std::vector<DagNode> nodes;
  std::vector<NodeFunction> fns;
  const std::size_t n_sources = uniform_int(opt.min_sources, opt.max_sources);
  std::size_t next_input = 0;
  for (std::size_t s = 0; s < n_sources; ++s) {
    const std::size_t k = uniform_int(1, opt.max_source_inputs);
    DagNode n{"s" + std::to_string(s), {}, {}};
    for (std::size_t j = 0; j < k; ++j) n.inputs.push_back(next_input++);
    nodes.push_back(n);
    fns.push_back(random_fn(k, uniform_int(0, 4)));
  }
  // Internal nodes pick children among earlier nodes; nodes left without a
  // parent are collected by the sink.
  std::vector<std::size_t> parents(nodes.size(), 0);
  const std::size_t n_internal = uniform_int(1, opt.max_internal);
  for (std::size_t i = 0; i < n_internal; ++i) {
    const std::size_t pool = nodes.size();
    const std::size_t k = uniform_int(1, std::min<std::size_t>(3, pool));
    std::vector<std::size_t> pick(pool);
    for (std::size_t j = 0; j < pool; ++j) pick[j] = j;
    std::shuffle(pick.begin(), pick.end(), rng);
    DagNode n{"v" + std::to_string(i), {}, {}};
    for (std::size_t j = 0; j < k; ++j) {
      n.children.push_back(nodes[pick[j]].id);
      ++parents[pick[j]];
    }
    nodes.push_back(n);
    parents.push_back(0);
    fns.push_back(random_fn(k, uniform_int(0, 4)));
  }
  DagNode sink{"sink", {}, {}};
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (parents[j] == 0) sink.children.push_back(nodes[j].id);
  if (sink.children.size() > 1) {
    fns.push_back(random_fn(sink.children.size(), uniform_int(0, 4)));
    nodes.push_back(sink);
  }
  return GFunction(DagGraph(std::move(nodes), next_input), std::move(fns));
}

/// g_v = f_v + delta_v sin(omega_v . y + phase_v) with delta_v in [0, max_delta].
inline GFunction perturbed_copy(const GFunction& f, double max_delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<NodeFunction> fns;
  for (std::size_t v = 0; v < f.graph().size(); ++v) {
    const std::size_t d = f.graph().degree(v);
    std::vector<double> omega(d);
    for (auto& o : omega) o = 4.0 * (unit(rng) - 0.5);
    const double delta = max_delta * unit(rng), phase = 6.0 * unit(rng);
    NodeFunction nf = f.function(v);
    nf.f = [base = f.function(v).f, omega, delta, phase](std::span<const double> y) {
      double s = phase;
      for (std::size_t k = 0; k < omega.size(); ++k) s += omega[k] * y[k];
      return base(y) + delta * std::sin(s);
    };
    nf.descriptor = nlohmann::json();
    fns.push_back(std::move(nf));
  }
  return GFunction(f.graph(), std::move(fns));
}

/// Uniform random input vectors in [-r, r]^q0.
inline std::vector<std::vector<double>> random_inputs(std::size_t q0, std::size_t count, double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<std::vector<double>> xs(count, std::vector<double>(q0));
  for (auto& x : xs)
    for (auto& v : x) v = u(rng);
  return xs;
}

}  // namespace composita
