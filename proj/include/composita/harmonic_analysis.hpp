#pragma once

// Quadrature on S^q, degree-wise harmonic projections through the addition
// formula kernel, filtered polynomial approximation and the spectral operators
// "convolution with |x.u|" and its inverse D.
//
// Normalization: mu* is the probability surface measure. With mass
// mu0 = int_{-1}^{1} (1-t^2)^{q/2-1} dt = omega_q / omega_{q-1}, the
// reproducing kernel of degree-l harmonics under mu* is
//     K_l(t) = mu0 p_l(1) p_l(t),
// and a zonal g(x.u) acts on degree-l harmonics by the multiplier
//     m_l(g) = <g, p_l>_w / (mu0 p_l(1)).

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "composita/error.hpp"
#include "composita/s2_harmonics.hpp"
#include "composita/sphere_geometry.hpp"
#include "composita/ultraspherical.hpp"

namespace composita {

/// Surface area omega_q of S^q.
inline double sphere_area(int q) {
  return 2.0 * std::exp(0.5 * (q + 1) * std::log(std::numbers::pi) - std::lgamma(0.5 * (q + 1)));
}

/// K_l(t) = mu0 p_l(1) p_l(t).
inline double addition_kernel(const UltrasphericalBasis& basis, int l, double t) {
  return basis.mass() * basis.special_values(l).second * basis.eval(l, t);
}

/// kappa(t) = sum_l g_l p_l(t) for a finite coefficient list.
class ZonalKernel {
 public:
  ZonalKernel() = default;
  ZonalKernel(std::shared_ptr<const UltrasphericalBasis> basis, std::vector<double> coeffs)
      : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (!basis_) detail::fail_invalid("ZonalKernel", "null basis");
    if (coeffs_.empty()) detail::fail_invalid("ZonalKernel", "empty coefficient list");
    if (static_cast<int>(coeffs_.size()) - 1 > basis_->max_degree())
      detail::fail_range("ZonalKernel", "degree exceeds basis");
  }

  double operator()(double t) const {
    t = std::clamp(t, -1.0, 1.0);
    double s = 0.0;
    basis_->for_each_degree(t, degree(), [&](int l, double p) { s += coeffs_[static_cast<std::size_t>(l)] * p; });
    return s;
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coefficients() const { return coeffs_; }
  const UltrasphericalBasis& basis() const { return *basis_; }

 private:
  std::shared_ptr<const UltrasphericalBasis> basis_;
  std::vector<double> coeffs_;
};

// ---------------------------------------------------------------------------
// Quadrature.

inline constexpr std::size_t kDefaultNodeLimit = 4'000'000;

/// Positive-weight rule on S^q, weights summing to 1. Cheap to copy.
class QuadratureRule {
 public:
  QuadratureRule() = default;
  QuadratureRule(int q, int exactness, PointSet nodes, std::vector<double> weights)
      : data_(std::make_shared<Data>(Data{q, exactness, std::move(nodes), std::move(weights)})) {}

  int dim() const { return data_->q; }
  int exactness() const { return data_->exactness; }
  const PointSet& nodes() const { return data_->nodes; }
  std::span<const double> weights() const { return data_->weights; }
  std::size_t size() const { return data_->weights.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += data_->weights[j] * f(nodes()[j]);
    return s;
  }

 private:
  struct Data {
    int q;
    int exactness;
    PointSet nodes;
    std::vector<double> weights;
  };
  std::shared_ptr<const Data> data_;
};

inline double quadrature_node_count(int q, int exactness) {
  if (q == 1) return exactness + 1.0;
  return (exactness / 2 + 1.0) * quadrature_node_count(q - 1, exactness);
}

/// Product rule exact for spherical polynomials of degree <= exactness:
/// Gauss nodes in the last coordinate t for (1-t^2)^{q/2-1}, tensored with a
/// rule on S^{q-1} scaled by sqrt(1-t^2). Base case: exactness+1 equispaced
/// points on S^1.
inline QuadratureRule build_quadrature(int q, int exactness, std::size_t node_limit = kDefaultNodeLimit) {
  if (q < 1) detail::fail_invalid("build_quadrature", "q must be >= 1");
  if (exactness < 0) detail::fail_invalid("build_quadrature", "exactness must be >= 0");
  if (quadrature_node_count(q, exactness) > static_cast<double>(node_limit))
    throw ResourceLimit("build_quadrature: node count exceeds limit of " + std::to_string(node_limit));
  if (q == 1) {
    const auto n = static_cast<std::size_t>(exactness + 1);
    return QuadratureRule(1, exactness, detail::equispaced_circle(std::max<std::size_t>(n, 2), 0.0),
                          std::vector<double>(std::max<std::size_t>(n, 2), 1.0 / static_cast<double>(std::max<std::size_t>(n, 2))));
  }
  const QuadratureRule sub = build_quadrature(q - 1, exactness, node_limit);
  const UltrasphericalBasis basis(q, 1);
  const GaussRule polar = basis.gauss_rule(exactness / 2 + 1);
  const std::size_t amb = static_cast<std::size_t>(q) + 1;
  std::vector<double> flat;
  std::vector<double> weights;
  flat.reserve(polar.nodes.size() * sub.size() * amb);
  weights.reserve(polar.nodes.size() * sub.size());
  for (std::size_t i = 0; i < polar.nodes.size(); ++i) {
    const double t = polar.nodes[i];
    const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t j = 0; j < sub.size(); ++j) {
      const auto y = sub.nodes()[j];
      double s = t * t;
      for (double v : y) s += r * v * r * v;
      const double inv = 1.0 / std::sqrt(s);
      for (double v : y) flat.push_back(r * v * inv);
      flat.push_back(t * inv);
      weights.push_back(polar.weights[i] / basis.mass() * sub.weights()[j]);
    }
  }
  return QuadratureRule(q, exactness, PointSet(static_cast<std::size_t>(q), std::move(flat)), std::move(weights));
}

/// x -> sum_j c_j kappa(x . u_j) over the nodes u_j of a quadrature rule.
class NodeKernelSum {
 public:
  NodeKernelSum(QuadratureRule rule, std::vector<double> node_coeffs, ZonalKernel kernel)
      : rule_(std::move(rule)), coeffs_(std::move(node_coeffs)), kernel_(std::move(kernel)) {}

  double operator()(std::span<const double> x) const {
    if (x.size() != rule_.nodes().ambient()) detail::fail_invalid("NodeKernelSum", "dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < coeffs_.size(); ++j)
      if (coeffs_[j] != 0.0) s += coeffs_[j] * kernel_(dot(x, rule_.nodes()[j]));
    return s;
  }
  double operator()(const SpherePoint& x) const { return (*this)(x.coords()); }

  /// Highest polynomial degree of the result.
  int degree() const { return kernel_.degree(); }
  const ZonalKernel& kernel() const { return kernel_; }

 private:
  QuadratureRule rule_;
  std::vector<double> coeffs_;
  ZonalKernel kernel_;
};

namespace detail {

template <class F>
std::vector<double> weighted_samples(F&& f, const QuadratureRule& rule) {
  std::vector<double> c(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) c[j] = rule.weights()[j] * f(rule.nodes()[j]);
  return c;
}

inline std::shared_ptr<const UltrasphericalBasis> basis_for(int q, int degree) {
  return std::make_shared<const UltrasphericalBasis>(q, std::max(degree, 1));
}

}  // namespace detail

/// Degree-l harmonic projection (P_l f)(x) = sum_j w_j K_l(x . u_j) f(u_j).
template <class F>
NodeKernelSum project_degree(F&& f, int l, const QuadratureRule& rule) {
  if (l < 0) detail::fail_range("project_degree", "degree must be >= 0");
  if (2 * l > rule.exactness()) detail::fail_range("project_degree", "rule exactness is below 2l");
  auto basis = detail::basis_for(rule.dim(), l);
  std::vector<double> g(static_cast<std::size_t>(l) + 1, 0.0);
  g[static_cast<std::size_t>(l)] = basis->mass() * basis->special_values(l).second;
  return NodeKernelSum(rule, detail::weighted_samples(f, rule), ZonalKernel(std::move(basis), std::move(g)));
}

// ---------------------------------------------------------------------------
// Filtered approximation.

/// Low-pass filter: 1 on [0, 1/2], 0 on [1, inf), quintic smoothstep (C^2,
/// monotone) in between.
inline double lowpass_filter(double x) {
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  const double s = 2.0 * x - 1.0;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

/// sum_l h(l/n) P_l f, a spherical polynomial of degree < n.
template <class F>
NodeKernelSum filtered_approx(F&& f, int n, const QuadratureRule& rule) {
  if (n < 1) detail::fail_range("filtered_approx", "n must be >= 1");
  if (rule.exactness() < 2 * n) detail::fail_range("filtered_approx", "rule exactness is below 2n");
  auto basis = detail::basis_for(rule.dim(), n);
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  for (int l = 0; l < n; ++l)
    g[static_cast<std::size_t>(l)] = lowpass_filter(static_cast<double>(l) / n) * basis->mass() * basis->special_values(l).second;
  return NodeKernelSum(rule, detail::weighted_samples(f, rule), ZonalKernel(std::move(basis), std::move(g)));
}

/// max over probes of |f - filtered_approx(f, n)|. Up to the constant of the
/// filtered operator this bounds the degree of approximation from above.
template <class F>
double estimate_Eqn(F&& f, int n, const QuadratureRule& rule, const PointSet& probes) {
  if (probes.dim() != static_cast<std::size_t>(rule.dim())) detail::fail_invalid("estimate_Eqn", "probe dimension mismatch");
  const auto approx = filtered_approx(f, n, rule);
  double worst = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) worst = std::max(worst, std::abs(f(probes[i]) - approx(probes[i])));
  return worst;
}

// ---------------------------------------------------------------------------
// Expansions.

/// Degree-wise projections P_0 f .. P_{n_max} f, stored as values on the
/// nodes of a quadrature rule with exactness >= 2 n_max.
class HarmonicExpansion {
 public:
  template <class F>
  static HarmonicExpansion expand(F&& f, int n_max, const QuadratureRule& rule) {
    if (n_max < 0) detail::fail_range("HarmonicExpansion::expand", "n_max must be >= 0");
    if (rule.exactness() < 2 * n_max) detail::fail_range("HarmonicExpansion::expand", "rule exactness is below 2 n_max");
    HarmonicExpansion e(rule, n_max);
    const auto wf = detail::weighted_samples(f, rule);
    const std::size_t m = rule.size();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double t = std::clamp(dot(rule.nodes()[i], rule.nodes()[j]), -1.0, 1.0);
        e.basis_->for_each_degree(t, n_max, [&](int l, double p) {
          e.components_[static_cast<std::size_t>(l)][i] += e.kernel_scale_[static_cast<std::size_t>(l)] * p * wf[j];
        });
      }
    }
    return e;
  }

  int dim() const { return rule_.dim(); }
  int n_max() const { return static_cast<int>(components_.size()) - 1; }
  const QuadratureRule& rule() const { return rule_; }
  const UltrasphericalBasis& basis() const { return *basis_; }

  /// Values of P_l f at the rule's nodes.
  std::span<const double> component(int l) const { return components_.at(static_cast<std::size_t>(l)); }

  /// (P_l f)(x), reproduced from node values through K_l.
  double component_at(int l, std::span<const double> x) const {
    const auto& c = components_.at(static_cast<std::size_t>(l));
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      s += rule_.weights()[j] * c[j] * kernel_at(l, dot(x, rule_.nodes()[j]));
    return s;
  }

  /// sum_l (P_l f)(x).
  double operator()(std::span<const double> x) const {
    double s = 0.0;
    const int n = n_max();
    for (std::size_t j = 0; j < rule_.size(); ++j) {
      const double t = std::clamp(dot(x, rule_.nodes()[j]), -1.0, 1.0);
      double term = 0.0;
      basis_->for_each_degree(t, n, [&](int l, double p) {
        term += kernel_scale_[static_cast<std::size_t>(l)] * p * components_[static_cast<std::size_t>(l)][j];
      });
      s += rule_.weights()[j] * term;
    }
    return s;
  }

  /// Quadrature inner product of two components.
  double inner(int l, int k) const {
    const auto a = component(l), b = component(k);
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += rule_.weights()[j] * a[j] * b[j];
    return s;
  }
  double component_norm(int l) const { return std::sqrt(std::max(0.0, inner(l, l))); }

  /// Largest |P_l f| over the nodes.
  double component_max(int l) const {
    double m = 0.0;
    for (double v : component(l)) m = std::max(m, std::abs(v));
    return m;
  }

  /// Component l multiplied by multipliers[l]; missing entries count as 0.
  HarmonicExpansion scaled(std::span<const double> multipliers) const {
    HarmonicExpansion e = *this;
    for (std::size_t l = 0; l < e.components_.size(); ++l) {
      const double m = l < multipliers.size() ? multipliers[l] : 0.0;
      for (double& v : e.components_[l]) v *= m;
    }
    return e;
  }

  /// Explicit Fourier coefficients fhat(l, m), m = -l..l, on S^2 only.
  std::vector<std::vector<double>> s2_coefficients() const {
    if (dim() != 2) detail::fail_invalid("HarmonicExpansion::s2_coefficients", "only available on S^2");
    std::vector<std::vector<double>> out(components_.size());
    for (std::size_t l = 0; l < out.size(); ++l) out[l].assign(2 * l + 1, 0.0);
    for (std::size_t j = 0; j < rule_.size(); ++j) {
      const auto y = s2::real_harmonics(n_max(), rule_.nodes()[j]);
      for (int l = 0; l <= n_max(); ++l)
        for (int m = -l; m <= l; ++m)
          out[static_cast<std::size_t>(l)][static_cast<std::size_t>(m + l)] +=
              rule_.weights()[j] * components_[static_cast<std::size_t>(l)][j] * y[s2::harmonic_index(l, m)];
    }
    return out;
  }

  /// Rows "l,node_index,value".
  std::string to_csv() const {
    std::string out = "l,node_index,value\n";
    for (std::size_t l = 0; l < components_.size(); ++l)
      for (std::size_t j = 0; j < components_[l].size(); ++j)
        out += std::to_string(l) + "," + std::to_string(j) + "," + format_real(components_[l][j]) + "\n";
    return out;
  }

 private:
  HarmonicExpansion(QuadratureRule rule, int n_max)
      : rule_(std::move(rule)),
        basis_(detail::basis_for(rule_.dim(), n_max)),
        components_(static_cast<std::size_t>(n_max) + 1, std::vector<double>(rule_.size(), 0.0)),
        kernel_scale_(static_cast<std::size_t>(n_max) + 1) {
    for (int l = 0; l <= n_max; ++l)
      kernel_scale_[static_cast<std::size_t>(l)] = basis_->mass() * basis_->special_values(l).second;
  }

  double kernel_at(int l, double t) const {
    return kernel_scale_[static_cast<std::size_t>(l)] * basis_->eval(l, std::clamp(t, -1.0, 1.0));
  }

  QuadratureRule rule_;
  std::shared_ptr<const UltrasphericalBasis> basis_;
  std::vector<std::vector<double>> components_;
  std::vector<double> kernel_scale_;  // mu0 p_l(1)
};

// ---------------------------------------------------------------------------
// |.| convolution and its inverse.

/// Funk-Hecke multipliers of u -> |x.u| under mu*, degrees 0..n_max:
/// m_{2l} = c_l / (mu0 p_{2l}(1)) with c_l the |t| coefficients,
/// and m_{odd} = 0.
inline std::vector<double> abs_convolution_multipliers(int q, int n_max) {
  const UltrasphericalBasis basis(q, std::max(n_max, 1));
  const auto c = abs_series_coefficients(basis, n_max / 2);
  std::vector<double> m(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int l = 0; 2 * l <= n_max; ++l)
    m[static_cast<std::size_t>(2 * l)] = c[static_cast<std::size_t>(l)] / (basis.mass() * basis.special_values(2 * l).second);
  return m;
}

/// Multipliers of D on degrees 0..n_max: 1 on constants, 0 on odd degrees,
/// 1/m_{2l} otherwise, that is -mu0 (2l-1)(l+q/2) p_{2l}(1) / p_{2l}(0).
inline std::vector<double> d_operator_multipliers(int q, int n_max) {
  const UltrasphericalBasis basis(q, std::max(n_max, 1));
  std::vector<double> d(static_cast<std::size_t>(n_max) + 1, 0.0);
  d[0] = 1.0;
  for (int l = 1; 2 * l <= n_max; ++l) {
    const auto [p0, p1] = basis.special_values(2 * l);
    d[static_cast<std::size_t>(2 * l)] = -basis.mass() * (2.0 * l - 1.0) * (l + 0.5 * q) * p1 / p0;
  }
  return d;
}

/// Convolution with |x.u| over mu*, applied degree-wise.
inline HarmonicExpansion apply_abs_convolution(const HarmonicExpansion& e) {
  return e.scaled(abs_convolution_multipliers(e.dim(), e.n_max()));
}

inline constexpr double kDegreeTwoTolerance = 1e-8;

/// D: constants preserved, odd degrees annihilated, degree 2l (l >= 2)
/// scaled by the inverse |.| multiplier. Inputs with a degree-2 component
/// (max node value above `tolerance`) are outside the operator's domain.
inline HarmonicExpansion apply_D(const HarmonicExpansion& e, double tolerance = kDegreeTwoTolerance) {
  if (e.n_max() >= 2 && e.component_max(2) > tolerance)
    throw DomainError("apply_D: input has a nonzero degree-2 component (" +
                      format_real(e.component_max(2)) + "), outside the domain of D");
  auto d = d_operator_multipliers(e.dim(), e.n_max());
  if (d.size() > 2) d[2] = 0.0;
  return e.scaled(d);
}

}  // namespace composita
