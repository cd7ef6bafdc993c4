#pragma once

// Shallow zonal networks x -> sum_k a_k kappa(x . w_k) on S^q, with kappa
// either |t| or the spherical convolution phi of |.| with itself.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "composita/error.hpp"
#include "composita/harmonic_analysis.hpp"
#include "composita/sphere_geometry.hpp"
#include "composita/ultraspherical.hpp"

namespace composita {

enum class KernelKind { AbsDot, ConvKernel };

inline constexpr int kDefaultPhiDegree = 128;

inline std::string to_string(KernelKind k) { return k == KernelKind::AbsDot ? "abs_dot" : "conv_kernel"; }

inline KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "abs_dot") return KernelKind::AbsDot;
  if (s == "conv_kernel") return KernelKind::ConvKernel;
  detail::fail_invalid("kernel_kind_from_string", "unknown kernel '" + s + "'");
}

/// Spectral coefficients of phi in the p_l basis: g_l = m_l^2 mu0 p_l(1).
inline ZonalKernel conv_kernel_series(int q, int l_max) {
  if (q < 1) detail::fail_invalid("conv_kernel_series", "q must be >= 1");
  if (l_max < 2) detail::fail_range("conv_kernel_series", "L_max must be >= 2");
  auto basis = std::make_shared<const UltrasphericalBasis>(q, l_max);
  const auto m = abs_convolution_multipliers(q, l_max);
  std::vector<double> g(m.size());
  for (std::size_t l = 0; l < m.size(); ++l)
    g[l] = m[l] * m[l] * basis->mass() * basis->special_values(static_cast<int>(l)).second;
  return ZonalKernel(std::move(basis), std::move(g));
}

/// phi(t) = int |x.u| |u.y| dmu*(u) for x.y = t, truncated at degree L_max.
inline double conv_kernel_phi(int q, double t, int l_max = kDefaultPhiDegree) {
  if (!(std::abs(t) <= 1.0)) detail::fail_range("conv_kernel_phi", "|t| must be <= 1");
  return conv_kernel_series(q, l_max)(t);
}

class ZonalNetwork {
 public:
  ZonalNetwork() = default;

  ZonalNetwork(KernelKind kind, PointSet centers, std::vector<double> coefficients, int l_max = kDefaultPhiDegree)
      : kind_(kind), l_max_(l_max), centers_(std::move(centers)), coeffs_(std::move(coefficients)) {
    if (coeffs_.size() != centers_.size())
      detail::fail_invalid("ZonalNetwork", "coefficient count " + std::to_string(coeffs_.size()) +
                                               " != center count " + std::to_string(centers_.size()));
    if (centers_.dim() < 1) detail::fail_invalid("ZonalNetwork", "centers must lie on S^q with q >= 1");
    for (double a : coeffs_)
      if (!std::isfinite(a)) detail::fail_invalid("ZonalNetwork", "non-finite coefficient");
    if (kind_ == KernelKind::ConvKernel) {
      if (l_max_ < 2) detail::fail_range("ZonalNetwork", "L_max must be >= 2");
      phi_ = std::make_shared<const ZonalKernel>(conv_kernel_series(static_cast<int>(centers_.dim()), l_max_));
    }
  }

  std::size_t dim() const { return centers_.dim(); }
  std::size_t size() const { return centers_.size(); }
  KernelKind kind() const { return kind_; }
  int l_max() const { return l_max_; }
  const PointSet& centers() const { return centers_; }
  std::span<const double> coefficients() const { return coeffs_; }

  double kernel(double t) const {
    return kind_ == KernelKind::AbsDot ? std::abs(t) : (*phi_)(std::clamp(t, -1.0, 1.0));
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != centers_.ambient())
      detail::fail_invalid("eval_network", "point has ambient dimension " + std::to_string(x.size()) +
                                               ", network expects " + std::to_string(centers_.ambient()));
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) s += coeffs_[k] * kernel(dot(x, centers_[k]));
    return s;
  }
  double operator()(const SpherePoint& x) const { return (*this)(x.coords()); }

  /// sum_k |a_k| * sup|kappa|, a bound on sup |G|.
  double coefficient_l1() const {
    double s = 0.0;
    for (double a : coeffs_) s += std::abs(a);
    return s;
  }

 private:
  KernelKind kind_ = KernelKind::AbsDot;
  int l_max_ = kDefaultPhiDegree;
  PointSet centers_;
  std::vector<double> coeffs_;
  std::shared_ptr<const ZonalKernel> phi_;
};

inline double eval_network(const ZonalNetwork& net, std::span<const double> x) { return net(x); }
inline double eval_network(const ZonalNetwork& net, const SpherePoint& x) { return net(x.coords()); }

/// Data-independent centers: a quasi-uniform set that passed the uniformity check.
inline PointSet choose_centers(std::size_t q, std::size_t n, std::uint64_t seed) {
  return generate_quasi_uniform(q, n, seed);
}

inline constexpr double kDefaultRelativeRidge = 1e-8;

struct FitOptions {
  KernelKind kernel = KernelKind::AbsDot;
  /// Absolute ridge; when unset, relative_ridge * ||A||_F^2.
  std::optional<double> ridge;
  double relative_ridge = kDefaultRelativeRidge;
  int l_max = kDefaultPhiDegree;
};

/// Collocation matrix A_jk = kappa(x_j . w_k).
inline Eigen::MatrixXd collocation_matrix(const ZonalNetwork& proto, const PointSet& samples) {
  const auto& c = proto.centers();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t j = 0; j < samples.size(); ++j)
    for (std::size_t k = 0; k < c.size(); ++k)
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = proto.kernel(dot(samples[j], c[k]));
  return a;
}

/// Ridge least squares min ||A a - y||^2 + ridge ||a||^2 for given sample values.
inline ZonalNetwork fit_shallow_values(const PointSet& centers, const PointSet& samples, std::span<const double> y,
                                       const FitOptions& opt = {}) {
  if (centers.dim() != samples.dim()) detail::fail_invalid("fit_shallow", "centers and samples live on different spheres");
  if (samples.size() < centers.size())
    detail::fail_invalid("fit_shallow", "need at least as many samples (" + std::to_string(samples.size()) +
                                            ") as centers (" + std::to_string(centers.size()) + ")");
  if (y.size() != samples.size()) detail::fail_invalid("fit_shallow", "one value per sample required");
  if (opt.ridge && !(*opt.ridge >= 0.0)) detail::fail_invalid("fit_shallow", "ridge must be >= 0");
  for (double v : y)
    if (!std::isfinite(v)) detail::fail_invalid("fit_shallow", "non-finite target value");

  const ZonalNetwork proto(opt.kernel, centers, std::vector<double>(centers.size(), 0.0), opt.l_max);
  const Eigen::MatrixXd a = collocation_matrix(proto, samples);
  const auto m = a.rows(), n = a.cols();
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  const double lambda = opt.ridge ? *opt.ridge : opt.relative_ridge * a.squaredNorm();

  Eigen::VectorXd sol;
  if (lambda > 0.0) {
    Eigen::MatrixXd aug(m + n, n);
    aug.topRows(m) = a;
    aug.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd raug = Eigen::VectorXd::Zero(m + n);
    raug.head(m) = rhs;
    sol = aug.householderQr().solve(raug);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < n)
      throw ConstraintFailure("fit_shallow: collocation matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                              " < " + std::to_string(n) + "); use a positive ridge");
    sol = qr.solve(rhs);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    if (!std::isfinite(sol(k))) throw ConstraintFailure("fit_shallow: solve produced non-finite coefficients");
  return ZonalNetwork(opt.kernel, centers, std::vector<double>(sol.data(), sol.data() + n), opt.l_max);
}

/// Fits f (a function of a point on S^q) from its values at `samples`.
inline ZonalNetwork fit_shallow(const std::function<double(std::span<const double>)>& f, const PointSet& centers,
                                const PointSet& samples, const FitOptions& opt = {}) {
  std::vector<double> y(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) y[j] = f(samples[j]);
  return fit_shallow_values(centers, samples, y, opt);
}

/// Default sample set for fitting: 4N quasi-uniform points, decorrelated from the centers.
inline PointSet default_samples(std::size_t q, std::size_t n_centers, std::uint64_t seed) {
  return generate_quasi_uniform(q, 4 * n_centers, seed ^ 0x9e3779b97f4a7c15ULL);
}

// ---------------------------------------------------------------------------
// Affine form  sum_k a_k |x . y_k + b_k|  on R^q.

struct AffineAbsNetwork {
  std::vector<std::vector<double>> directions;  // y_k in R^q
  std::vector<double> offsets;                  // b_k
  std::vector<double> coefficients;             // a_k

  double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) s += coefficients[k] * std::abs(dot(x, directions[k]) + offsets[k]);
    return s;
  }
};

/// Rewrites sum_k a_k |x.y_k + b_k| as sqrt(|x|^2 + 1) * G(lift(x)) with G a
/// zonal |.| network on S^q: w_k = (y_k, b_k) / |(y_k, b_k)|, a_k -> a_k |(y_k, b_k)|.
/// ReLU units fit the same form through t_+ = (t + |t|) / 2.
inline ZonalNetwork to_zonal(const AffineAbsNetwork& net) {
  const std::size_t k_count = net.coefficients.size();
  if (net.directions.size() != k_count || net.offsets.size() != k_count)
    detail::fail_invalid("to_zonal", "directions, offsets and coefficients must have equal length");
  if (k_count == 0) detail::fail_invalid("to_zonal", "empty network");
  const std::size_t q = net.directions[0].size();
  std::vector<double> flat;
  std::vector<double> coeffs;
  flat.reserve(k_count * (q + 1));
  for (std::size_t k = 0; k < k_count; ++k) {
    if (net.directions[k].size() != q) detail::fail_invalid("to_zonal", "inconsistent direction dimension");
    double nrm = net.offsets[k] * net.offsets[k];
    for (double v : net.directions[k]) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0)) detail::fail_invalid("to_zonal", "unit " + std::to_string(k) + " is identically zero");
    for (double v : net.directions[k]) flat.push_back(v / nrm);
    flat.push_back(net.offsets[k] / nrm);
    coeffs.push_back(net.coefficients[k] * nrm);
  }
  return ZonalNetwork(KernelKind::AbsDot, PointSet(q, std::move(flat)), std::move(coeffs));
}

// ---------------------------------------------------------------------------
// JSON: {dim, kernel, l_max?, centers: [[...]], coefficients: [...]}

inline nlohmann::json to_json(const ZonalNetwork& net) {
  nlohmann::json j;
  j["dim"] = net.dim();
  j["kernel"] = to_string(net.kind());
  if (net.kind() == KernelKind::ConvKernel) j["l_max"] = net.l_max();
  auto centers = nlohmann::json::array();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto c = net.centers()[k];
    centers.push_back(std::vector<double>(c.begin(), c.end()));
  }
  j["centers"] = std::move(centers);
  j["coefficients"] = std::vector<double>(net.coefficients().begin(), net.coefficients().end());
  return j;
}

inline ZonalNetwork network_from_json(const nlohmann::json& j) {
  try {
    for (const auto& [key, _] : j.items())
      if (key != "dim" && key != "kernel" && key != "l_max" && key != "centers" && key != "coefficients")
        throw ValidationError("network_from_json: unknown key '" + key + "'");
    const auto dim = j.at("dim").get<std::size_t>();
    const auto kind = kernel_kind_from_string(j.at("kernel").get<std::string>());
    const int l_max = j.value("l_max", kDefaultPhiDegree);
    std::vector<double> flat;
    for (const auto& c : j.at("centers")) {
      const auto v = c.get<std::vector<double>>();
      if (v.size() != dim + 1) throw ValidationError("network_from_json: center has wrong length");
      flat.insert(flat.end(), v.begin(), v.end());
    }
    return ZonalNetwork(kind, PointSet(dim, std::move(flat)), j.at("coefficients").get<std::vector<double>>(), l_max);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network_from_json: ") + e.what());
  }
}

}  // namespace composita
