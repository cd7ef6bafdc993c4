#pragma once

// Orthonormal ultraspherical polynomials for the weight (1 - t^2)^{q/2 - 1}
// on [-1, 1], Gauss rules for that weight, and the expansion of |t|.

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "composita/error.hpp"

namespace composita {

/// Nodes and weights of a Gauss rule on [-1, 1]; weights sum to the weight's mass.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
inline GaussRule golub_welsch(std::span<const double> diag, std::span<const double> offdiag,
                              double mass) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  GaussRule rule;
  if (n == 0) return rule;
  Eigen::VectorXd d(n), e(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i < n; ++i) d(i) = diag[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) e(i) = offdiag[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mass * v0 * v0;
  }
  return rule;
}

}  // namespace detail

/// Gauss-Jacobi rule with `n` nodes for the weight (1-x)^alpha (1+x)^beta.
inline GaussRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) detail::fail_range("gauss_jacobi", "need at least one node");
  if (!(alpha > -1.0 && beta > -1.0)) detail::fail_range("gauss_jacobi", "alpha, beta must exceed -1");
  const double ab = alpha + beta;
  std::vector<double> diag(static_cast<std::size_t>(n)), off(static_cast<std::size_t>(n > 1 ? n - 1 : 0));
  diag[0] = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    diag[static_cast<std::size_t>(k)] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    double b;
    if (k == 1) {
      b = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    off[static_cast<std::size_t>(k - 1)] = std::sqrt(b);
  }
  const double mass = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                               std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  return detail::golub_welsch(diag, off, mass);
}

/// The family {p_l} orthonormal for w(t) = (1 - t^2)^{q/2 - 1}.
///
/// Built from the monic recurrence of the Gegenbauer family with
/// lambda = (q-1)/2 and normalized, so p_l has positive leading coefficient:
///   sqrt(b_{n+1}) p_{n+1}(t) = t p_n(t) - sqrt(b_n) p_{n-1}(t),
///   b_1 = 1/(q+1),  b_n = n(n+2a) / ((2n+2a+1)(2n+2a-1)),  a = q/2 - 1.
class UltrasphericalBasis {
 public:
  UltrasphericalBasis(int q, int max_degree) : q_(q), max_degree_(max_degree) {
    if (q < 1) detail::fail_invalid("UltrasphericalBasis", "q must be >= 1");
    if (max_degree < 0) detail::fail_invalid("UltrasphericalBasis", "max_degree must be >= 0");
    const double a = 0.5 * q - 1.0;
    sqrt_b_.assign(static_cast<std::size_t>(max_degree) + 2, 0.0);
    for (int n = 1; n <= max_degree + 1; ++n) {
      const double b = n == 1 ? 1.0 / (q + 1.0)
                              : n * (n + 2.0 * a) / ((2.0 * n + 2.0 * a + 1.0) * (2.0 * n + 2.0 * a - 1.0));
      sqrt_b_[static_cast<std::size_t>(n)] = std::sqrt(b);
    }
    mass_ = std::exp(std::lgamma(0.5) + std::lgamma(0.5 * q) - std::lgamma(0.5 * (q + 1)));
    p0_ = 1.0 / std::sqrt(mass_);
  }

  int q() const { return q_; }
  int max_degree() const { return max_degree_; }

  /// Exponent a = q/2 - 1 of the weight.
  double weight_exponent() const { return 0.5 * q_ - 1.0; }
  double weight(double t) const { return std::pow(1.0 - t * t, weight_exponent()); }
  /// Integral of the weight over [-1, 1]; equals omega_q / omega_{q-1}.
  double mass() const { return mass_; }

  double eval(int l, double t) const {
    check_degree(l, "eval_p");
    if (!(std::abs(t) <= 1.0)) detail::fail_range("eval_p", "|t| must be <= 1");
    return eval_unchecked(l, t);
  }
  double operator()(int l, double t) const { return eval(l, t); }

  /// Writes p_0(t) .. p_{out.size()-1}(t).
  void eval_all(double t, std::span<double> out) const {
    if (out.empty()) return;
    if (static_cast<int>(out.size()) - 1 > max_degree_) detail::fail_range("eval_all", "degree exceeds max_degree");
    double prev = 0.0, cur = p0_;
    out[0] = cur;
    for (std::size_t n = 0; n + 1 < out.size(); ++n) {
      const double next = (t * cur - sqrt_b_[n] * prev) / sqrt_b_[n + 1];
      prev = cur;
      cur = next;
      out[n + 1] = cur;
    }
  }

  /// Calls visit(l, p_l(t)) for l = 0..max_l without allocating.
  template <class Visit>
  void for_each_degree(double t, int max_l, Visit&& visit) const {
    if (max_l > max_degree_) detail::fail_range("for_each_degree", "degree exceeds max_degree");
    double prev = 0.0, cur = p0_;
    for (int n = 0;; ++n) {
      visit(n, cur);
      if (n == max_l) break;
      const double next = (t * cur - sqrt_b_[static_cast<std::size_t>(n)] * prev) / sqrt_b_[static_cast<std::size_t>(n) + 1];
      prev = cur;
      cur = next;
    }
  }

  /// (p_l(0), p_l(1)).
  std::pair<double, double> special_values(int l) const {
    check_degree(l, "special_values");
    return {l % 2 == 1 ? 0.0 : eval_unchecked(l, 0.0), eval_unchecked(l, 1.0)};
  }

  /// Gauss rule with `n` nodes for this weight (exact to degree 2n-1).
  GaussRule gauss_rule(int n) const {
    if (n < 1) detail::fail_range("gauss_rule", "need at least one node");
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0), off;
    if (n - 1 <= max_degree_ + 1) {
      off.assign(sqrt_b_.begin() + 1, sqrt_b_.begin() + n);
    } else {
      // Recurrence coefficients beyond max_degree come from a wider basis.
      UltrasphericalBasis wide(q_, n);
      off.assign(wide.sqrt_b_.begin() + 1, wide.sqrt_b_.begin() + n);
    }
    return detail::golub_welsch(diag, off, mass_);
  }

 private:
  void check_degree(int l, const char* where) const {
    if (l < 0 || l > max_degree_) detail::fail_range(where, "degree " + std::to_string(l) + " outside [0, " + std::to_string(max_degree_) + "]");
  }
  double eval_unchecked(int l, double t) const {
    double prev = 0.0, cur = p0_;
    for (int n = 0; n < l; ++n) {
      const double next = (t * cur - sqrt_b_[static_cast<std::size_t>(n)] * prev) / sqrt_b_[static_cast<std::size_t>(n) + 1];
      prev = cur;
      cur = next;
    }
    return cur;
  }

  int q_;
  int max_degree_;
  std::vector<double> sqrt_b_;  // sqrt_b_[n] = sqrt(b_n), sqrt_b_[0] = 0
  double mass_;
  double p0_;
};

/// <|t|, p_degree>_w by Gauss quadrature. |t| is split at 0 and the half
/// integral becomes a polynomial under s = t^2, integrated exactly by a
/// Gauss-Jacobi rule for (1 - s)^a.
inline double abs_inner_product(const UltrasphericalBasis& basis, int degree) {
  if (degree < 0 || degree > basis.max_degree()) detail::fail_range("abs_inner_product", "degree out of range");
  if (degree % 2 == 1) return 0.0;
  const double a = basis.weight_exponent();
  const auto rule = gauss_jacobi(degree / 2 + 10, a, 0.0);
  // 2 * int_0^1 t p(t) (1-t^2)^a dt = int_0^1 p(sqrt s) (1-s)^a ds,  s = (1+x)/2.
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = 0.5 * (1.0 + rule.nodes[i]);
    sum += rule.weights[i] * basis.eval(degree, std::sqrt(s));
  }
  return sum * std::pow(2.0, -a - 1.0);
}

/// Coefficients c_l of p_{2l} in |t| ~ sum_l c_l p_{2l}(t), l = 0..l_max.
///
/// For l >= 1, c_l = -p_{2l}(0) / ((2l - 1)(l + q/2)), obtained by
/// integrating the Sturm-Liouville form of the weight by parts twice on [0, 1].
/// c_0 comes from quadrature (it equals 2 p_0 / q).
inline std::vector<double> abs_series_coefficients(const UltrasphericalBasis& basis, int l_max) {
  if (l_max < 0 || 2 * l_max > basis.max_degree())
    detail::fail_range("abs_series_coefficients", "2*L_max exceeds max_degree");
  std::vector<double> c(static_cast<std::size_t>(l_max) + 1);
  c[0] = abs_inner_product(basis, 0);
  const double half_q = 0.5 * basis.q();
  for (int l = 1; l <= l_max; ++l) {
    const double p0 = basis.special_values(2 * l).first;
    c[static_cast<std::size_t>(l)] = -p0 / ((2.0 * l - 1.0) * (l + half_q));
  }
  return c;
}

/// The printed closed form -(l-1)/(l(2l-1)(l+q/2)) p_{2l}(0) (l >= 1), with
/// leading coefficient 1 for l = 0. It differs from abs_series_coefficients
/// by the factor (l-1)/l and is kept only for comparison.
inline double printed_abs_coefficient(const UltrasphericalBasis& basis, int l) {
  if (l < 0 || 2 * l > basis.max_degree()) detail::fail_range("printed_abs_coefficient", "degree out of range");
  if (l == 0) return 1.0;
  const double p0 = basis.special_values(2 * l).first;
  return -(l - 1.0) / (l * (2.0 * l - 1.0) * (l + 0.5 * basis.q())) * p0;
}

/// Partial sum sum_{l <= l_max} c_l p_{2l}(t).
inline double truncated_abs(const UltrasphericalBasis& basis, std::span<const double> coeffs, double t) {
  if (!(std::abs(t) <= 1.0)) detail::fail_range("truncated_abs", "|t| must be <= 1");
  const int l_max = static_cast<int>(coeffs.size()) - 1;
  if (2 * l_max > basis.max_degree()) detail::fail_range("truncated_abs", "2*L_max exceeds max_degree");
  std::vector<double> p(static_cast<std::size_t>(2 * l_max + 1));
  basis.eval_all(t, p);
  double s = 0.0;
  for (int l = 0; l <= l_max; ++l) s += coeffs[static_cast<std::size_t>(l)] * p[static_cast<std::size_t>(2 * l)];
  return s;
}

inline double truncated_abs(const UltrasphericalBasis& basis, int l_max, double t) {
  return truncated_abs(basis, abs_series_coefficients(basis, l_max), t);
}

}  // namespace composita
