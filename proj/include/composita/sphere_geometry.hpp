#pragma once

// Points and finite configurations on the unit sphere S^d in R^{d+1}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "composita/error.hpp"

namespace composita {

inline constexpr double kUnitNormTolerance = 1e-12;

/// A unit vector in R^{d+1}, i.e. a point of S^d.
class SpherePoint {
 public:
  /// Normalizes `coords`. Throws InvalidInput for non-finite or zero vectors
  /// and for vectors of length < 2.
  static SpherePoint normalized(std::vector<double> coords) {
    if (coords.size() < 2) detail::fail_invalid("SpherePoint", "need at least 2 coordinates");
    double s = 0.0;
    for (double c : coords) {
      if (!std::isfinite(c)) detail::fail_invalid("SpherePoint", "non-finite coordinate");
      s += c * c;
    }
    if (s == 0.0) detail::fail_invalid("SpherePoint", "zero vector has no direction");
    const double inv = 1.0 / std::sqrt(s);
    for (double& c : coords) c *= inv;
    return SpherePoint(std::move(coords));
  }

  /// Wraps coordinates that are already unit length (checked to 1e-12).
  static SpherePoint from_unit(std::vector<double> coords) {
    if (coords.size() < 2) detail::fail_invalid("SpherePoint", "need at least 2 coordinates");
    double s = 0.0;
    for (double c : coords) s += c * c;
    if (!std::isfinite(s) || std::abs(std::sqrt(s) - 1.0) > kUnitNormTolerance)
      detail::fail_invalid("SpherePoint", "coordinates are not unit length");
    return SpherePoint(std::move(coords));
  }

  /// Basis vector e_axis on S^d.
  static SpherePoint basis(std::size_t d, std::size_t axis, double sign = 1.0) {
    if (axis > d) detail::fail_range("SpherePoint::basis", "axis exceeds dimension");
    std::vector<double> c(d + 1, 0.0);
    c[axis] = sign < 0 ? -1.0 : 1.0;
    return SpherePoint(std::move(c));
  }

  std::size_t dim() const { return coords_.size() - 1; }
  std::size_t ambient() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  SpherePoint antipode() const {
    auto c = coords_;
    for (double& v : c) v = -v;
    return SpherePoint(std::move(c));
  }

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

 private:
  explicit SpherePoint(std::vector<double> c) : coords_(std::move(c)) {}
  std::vector<double> coords_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

/// Nonempty ordered configuration of points on S^d, stored contiguously.
///
/// Distinctness is guaranteed by the generators in this header; for
/// externally supplied data use `PointSet::checked`, which verifies it.
class PointSet {
 public:
  PointSet() = default;

  PointSet(std::size_t d, std::vector<double> flat) : dim_(d), data_(std::move(flat)) {
    if (d < 1) detail::fail_invalid("PointSet", "dimension must be >= 1");
    if (data_.empty() || data_.size() % (d + 1) != 0)
      detail::fail_invalid("PointSet", "coordinate count is not a positive multiple of d+1");
    for (std::size_t i = 0; i < size(); ++i) {
      const double n = std::sqrt(dot((*this)[i], (*this)[i]));
      if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance)
        detail::fail_invalid("PointSet", "point " + std::to_string(i) + " is not unit length");
    }
  }

  explicit PointSet(const std::vector<SpherePoint>& pts) {
    if (pts.empty()) detail::fail_invalid("PointSet", "empty configuration");
    dim_ = pts.front().dim();
    data_.reserve(pts.size() * (dim_ + 1));
    for (const auto& p : pts) {
      if (p.dim() != dim_) detail::fail_invalid("PointSet", "mixed dimensions");
      data_.insert(data_.end(), p.coords().begin(), p.coords().end());
    }
  }

  /// Builds a PointSet and verifies pairwise distinctness (O(N^2)).
  static PointSet checked(std::size_t d, std::vector<double> flat) {
    PointSet s(d, std::move(flat));
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j)
        if (dot(s[i], s[j]) >= 1.0)
          detail::fail_invalid("PointSet", "points " + std::to_string(i) + " and " +
                                               std::to_string(j) + " coincide");
    return s;
  }

  std::size_t dim() const { return dim_; }
  std::size_t ambient() const { return dim_ + 1; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / (dim_ + 1); }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * (dim_ + 1), dim_ + 1};
  }
  SpherePoint point(std::size_t i) const {
    auto c = (*this)[i];
    return SpherePoint::from_unit({c.begin(), c.end()});
  }
  const std::vector<double>& flat() const { return data_; }

  /// Subset in the order given by `indices`.
  PointSet subset(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * ambient());
    for (auto i : indices) out.insert(out.end(), (*this)[i].begin(), (*this)[i].end());
    return PointSet(dim_, std::move(out));
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Lift R^d -> open upper hemisphere S^d_+ and its inverse.

/// (x_1..x_d) -> (x_1..x_d, 1) / sqrt(|x|^2 + 1).
inline SpherePoint lift_to_sphere(std::span<const double> x) {
  if (x.empty()) detail::fail_invalid("lift_to_sphere", "need d >= 1");
  std::vector<double> c(x.size() + 1);
  double s = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) detail::fail_invalid("lift_to_sphere", "non-finite input");
    s += x[i] * x[i];
  }
  const double inv = 1.0 / std::sqrt(s);
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] * inv;
  c.back() = inv;
  return SpherePoint::from_unit(std::move(c));
}

/// Writes the lift of `x` into `out` (size x.size()+1) without allocating.
inline void lift_into(std::span<const double> x, std::span<double> out) {
  double s = 1.0;
  for (double v : x) s += v * v;
  const double inv = 1.0 / std::sqrt(s);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv;
  out[x.size()] = inv;
}

/// Inverse of lift_to_sphere; requires a strictly positive last coordinate.
inline std::vector<double> unlift(std::span<const double> u) {
  if (u.size() < 2 || !(u.back() > 0.0))
    detail::fail_invalid("unlift", "point is not in the open upper hemisphere");
  std::vector<double> x(u.size() - 1);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) x[i] = u[i] / u.back();
  return x;
}

// ---------------------------------------------------------------------------
// Metrics.

inline double geodesic_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) detail::fail_invalid("geodesic_distance", "dimension mismatch");
  double diff = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    diff += (u[i] - v[i]) * (u[i] - v[i]);
    sum += (u[i] + v[i]) * (u[i] + v[i]);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

inline double geodesic_distance(const SpherePoint& u, const SpherePoint& v) {
  return geodesic_distance(u.coords(), v.coords());
}

/// eta(C): smallest pairwise geodesic distance.
inline double minimal_separation(const PointSet& c) {
  if (c.size() < 2)
    throw ConstraintFailure("minimal_separation: undefined for fewer than 2 points");
  double best = -1.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) best = std::max(best, dot(c[i], c[j]));
  return clamped_acos(best);
}

inline constexpr std::size_t kDefaultProbeLimit = 4'000'000;

/// Number of points `probe_lattice(d, resolution)` would produce.
inline double probe_lattice_size(std::size_t d, double resolution) {
  const double h = 4.0 * std::sin(std::min(resolution, std::numbers::pi) / 2.0) /
                   std::sqrt(static_cast<double>(d));
  const double m = std::ceil(2.0 / h);
  return 2.0 * static_cast<double>(d + 1) * std::pow(m + 1.0, static_cast<double>(d));
}

/// Radial projection of a grid on the faces of the cube [-1,1]^{d+1}.
/// Every point of S^d lies within geodesic distance `resolution` of some
/// lattice point: the face grid has Euclidean covering radius h*sqrt(d)/2 and
/// projection onto the ball is 1-Lipschitz outside it.
inline PointSet probe_lattice(std::size_t d, double resolution,
                              std::size_t limit = kDefaultProbeLimit) {
  if (d < 1) detail::fail_invalid("probe_lattice", "d must be >= 1");
  if (!(resolution > 0.0)) detail::fail_invalid("probe_lattice", "resolution must be > 0");
  if (probe_lattice_size(d, resolution) > static_cast<double>(limit))
    throw ResourceLimit("probe_lattice: probe count exceeds limit");
  const double h = 4.0 * std::sin(std::min(resolution, std::numbers::pi) / 2.0) /
                   std::sqrt(static_cast<double>(d));
  const auto m = static_cast<std::size_t>(std::ceil(2.0 / h));
  const std::size_t n = d + 1;
  std::vector<double> flat;
  std::vector<std::size_t> idx(d);
  std::vector<double> p(n);
  for (std::size_t axis = 0; axis < n; ++axis) {
    for (double sign : {1.0, -1.0}) {
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        // Face coordinates, skipping edges owned by a lower-index axis.
        bool keep = true;
        std::size_t k = 0;
        for (std::size_t b = 0; b < n; ++b) {
          if (b == axis) {
            p[b] = sign;
            continue;
          }
          const std::size_t i = idx[k++];
          p[b] = (i == 0) ? -1.0 : (i == m ? 1.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m));
          if ((i == 0 || i == m) && b < axis) keep = false;
        }
        if (keep) {
          double s = 0.0;
          for (double v : p) s += v * v;
          const double inv = 1.0 / std::sqrt(s);
          for (double v : p) flat.push_back(v * inv);
        }
        std::size_t c = 0;
        while (c < d && ++idx[c] > m) idx[c++] = 0;
        if (c == d) break;
      }
    }
  }
  return PointSet(d, std::move(flat));
}

/// Covering radius max_x min_{y in C} rho(x, y), estimated over a probe
/// lattice of spacing `probe_resolution`. The true value lies in
/// [result, result + probe_resolution]; the result never exceeds pi.
inline double mesh_norm(const PointSet& c, double probe_resolution,
                        std::size_t limit = kDefaultProbeLimit) {
  if (c.empty()) detail::fail_invalid("mesh_norm", "empty configuration");
  const PointSet probes = probe_lattice(c.dim(), probe_resolution, limit);
  double worst = 1.0;  // smallest "best dot" seen
  for (std::size_t i = 0; i < probes.size(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < c.size(); ++j) best = std::max(best, dot(probes[i], c[j]));
    worst = std::min(worst, best);
  }
  return std::min(clamped_acos(worst), std::numbers::pi);
}

struct UniformityReport {
  double separation = 0.0;   // eta(C)
  double mesh = 0.0;         // estimated delta(C)
  double resolution = 0.0;   // probe spacing used for `mesh`
  bool ok = false;
};

/// Checks delta(C) <= 2 eta(C) <= 4 delta(C) with delta estimated on a probe
/// lattice: passes when est <= 2 eta <= 4 (est + resolution).
inline UniformityReport check_uniformity(const PointSet& c, double probe_resolution,
                                         std::size_t limit = kDefaultProbeLimit) {
  UniformityReport r;
  r.separation = minimal_separation(c);
  // Coarsen the probe lattice if the requested spacing would exceed the limit.
  double res = probe_resolution;
  while (probe_lattice_size(c.dim(), res) > static_cast<double>(limit)) res *= 1.25;
  r.resolution = res;
  r.mesh = mesh_norm(c, res, limit);
  r.ok = r.mesh <= 2.0 * r.separation && 2.0 * r.separation <= 4.0 * (r.mesh + res);
  return r;
}

// ---------------------------------------------------------------------------
// Generators.

/// Points of the Kronecker (generalized golden ratio) sequence in [0,1)^dim.
inline std::vector<double> kronecker_sequence(std::size_t n, std::size_t dim,
                                              std::span<const double> shift = {}) {
  double g = 2.0;
  for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / static_cast<double>(dim + 1));
  std::vector<double> alpha(dim);
  for (std::size_t k = 0; k < dim; ++k) alpha[k] = std::pow(1.0 / g, static_cast<double>(k + 1));
  std::vector<double> out(n * dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) {
      const double s = k < shift.size() ? shift[k] : 0.5;
      const double v = s + static_cast<double>(i + 1) * alpha[k];
      out[i * dim + k] = v - std::floor(v);
    }
  return out;
}

/// Independent uniform points on S^d (Gaussian normalization).
inline PointSet random_sphere_points(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 1 || n < 1) detail::fail_invalid("random_sphere_points", "need d >= 1 and n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> flat;
  flat.reserve(n * (d + 1));
  std::vector<double> p(d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    do {
      s = 0.0;
      for (double& v : p) {
        v = normal(rng);
        s += v * v;
      }
    } while (s < 1e-20);
    const double inv = 1.0 / std::sqrt(s);
    for (double v : p) flat.push_back(v * inv);
  }
  return PointSet(d, std::move(flat));
}

namespace detail {

// Haar-random rotation of R^n; identity for seed 0.
inline Eigen::MatrixXd seeded_rotation(std::size_t n, std::uint64_t seed) {
  if (seed == 0) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

inline PointSet rotated(const PointSet& c, const Eigen::MatrixXd& rot) {
  std::vector<double> flat(c.flat().size());
  const std::size_t n = c.ambient();
  for (std::size_t i = 0; i < c.size(); ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      double v = 0.0;
      for (std::size_t b = 0; b < n; ++b) v += rot(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * c[i][b];
      flat[i * n + a] = v;
      s += v * v;
    }
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t a = 0; a < n; ++a) flat[i * n + a] *= inv;
  }
  return PointSet(c.dim(), std::move(flat));
}

// Quasi-random pool on S^d: Kronecker points pushed through Box-Muller.
inline PointSet quasi_random_pool(std::size_t d, std::size_t n, std::uint64_t seed) {
  const std::size_t pairs = (d + 2) / 2;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u01;
  std::vector<double> shift(2 * pairs);
  for (double& s : shift) s = u01(rng);
  const auto seq = kronecker_sequence(n, 2 * pairs, shift);
  std::vector<double> flat;
  flat.reserve(n * (d + 1));
  std::vector<double> g(2 * pairs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < pairs; ++k) {
      const double a = std::max(seq[i * 2 * pairs + 2 * k], 1e-300);
      const double b = seq[i * 2 * pairs + 2 * k + 1];
      const double r = std::sqrt(-2.0 * std::log(a));
      g[2 * k] = r * std::cos(2.0 * std::numbers::pi * b);
      g[2 * k + 1] = r * std::sin(2.0 * std::numbers::pi * b);
    }
    double s = 0.0;
    for (std::size_t k = 0; k <= d; ++k) s += g[k] * g[k];
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t k = 0; k <= d; ++k) flat.push_back(g[k] * inv);
  }
  return PointSet(d, std::move(flat));
}

// Greedy farthest-point thinning. Stops after `count` points or when the next
// point would lie closer than `min_distance` to the current selection.
inline std::vector<std::size_t> farthest_point_order(const PointSet& pool, std::size_t count,
                                                     double min_distance = 0.0) {
  std::vector<std::size_t> order;
  if (pool.empty() || count == 0) return order;
  const double max_dot = std::cos(min_distance);
  std::vector<double> best(pool.size(), -2.0);
  std::size_t next = 0;
  while (order.size() < count) {
    order.push_back(next);
    double far = 2.0;
    std::size_t far_i = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      best[i] = std::max(best[i], dot(pool[i], pool[next]));
      if (best[i] < far) {
        far = best[i];
        far_i = i;
      }
    }
    if (far_i == pool.size() || far >= 1.0) break;     // pool exhausted
    if (min_distance > 0.0 && far > max_dot) break;    // next point too close
    next = far_i;
  }
  return order;
}

inline PointSet equispaced_circle(std::size_t n, double offset) {
  std::vector<double> flat(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = offset + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    flat[2 * j] = std::cos(a);
    flat[2 * j + 1] = std::sin(a);
  }
  return PointSet(1, std::move(flat));
}

inline PointSet fibonacci_sphere(std::size_t n) {
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<double> flat(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    flat[3 * i] = r * std::cos(phi);
    flat[3 * i + 1] = r * std::sin(phi);
    flat[3 * i + 2] = z;
  }
  return PointSet(2, std::move(flat));
}

}  // namespace detail

struct QuasiUniformOptions {
  // Probe spacing for the post-hoc uniformity check, relative to eta(C).
  double probe_fraction = 0.25;
  std::size_t probe_limit = 2'000'000;
  std::size_t pool_factor = 24;
  int max_attempts = 4;
};

/// N quasi-uniform points on S^d satisfying delta <= 2 eta <= 4 delta.
///
/// d = 1: equispaced angles; d = 2: Fibonacci lattice; d >= 3: farthest-point
/// thinning of a quasi-random pool. Nonzero seeds apply a seeded rotation
/// (d <= 2) or pool shift (d >= 3). If the check fails, the set is thinned
/// further, so the result may hold fewer than N points.
inline PointSet generate_quasi_uniform(std::size_t d, std::size_t n, std::uint64_t seed,
                                       const QuasiUniformOptions& opt = {}) {
  if (d < 1) detail::fail_invalid("generate_quasi_uniform", "d must be >= 1");
  if (n < 2) detail::fail_invalid("generate_quasi_uniform", "N must be >= 2");
  auto check = [&](const PointSet& c) {
    return check_uniformity(c, opt.probe_fraction * minimal_separation(c), opt.probe_limit);
  };

  PointSet base;
  if (d == 1) {
    std::mt19937_64 rng(seed);
    const double offset = seed == 0 ? 0.0 : std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    base = detail::equispaced_circle(n, offset);
  } else if (d == 2) {
    base = detail::rotated(detail::fibonacci_sphere(n), detail::seeded_rotation(3, seed));
  }
  if (d <= 2) {
    if (check(base).ok) return base;
    // Thin by farthest-point selection until the check passes.
    std::size_t k = n;
    for (int attempt = 0; attempt < opt.max_attempts && k > 2; ++attempt) {
      k = std::max<std::size_t>(2, k * 9 / 10);
      const auto order = detail::farthest_point_order(base, k);
      PointSet sub = base.subset(order);
      if (check(sub).ok) return sub;
    }
    throw ConstraintFailure("generate_quasi_uniform: uniformity check failed after thinning");
  }

  std::size_t pool_size = opt.pool_factor * n;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    const PointSet pool = detail::quasi_random_pool(d, pool_size, seed + static_cast<std::uint64_t>(attempt));
    const auto order = detail::farthest_point_order(pool, n);
    PointSet c = pool.subset(order);
    if (c.size() >= 2 && check(c).ok) return c;
    pool_size *= 2;
  }
  throw ConstraintFailure("generate_quasi_uniform: uniformity check failed after thinning");
}

/// Maximal set with pairwise separation >= eta_target, greedily selected
/// from a dense quasi-uniform pool. Its size grows like eta_target^{-d}.
inline PointSet generate_separated(std::size_t d, double eta_target, std::uint64_t seed,
                                   std::size_t pool_size = 0) {
  if (d < 1) detail::fail_invalid("generate_separated", "d must be >= 1");
  if (!(eta_target > 0.0 && eta_target <= std::numbers::pi))
    detail::fail_invalid("generate_separated", "eta_target must be in (0, pi]");
  if (pool_size == 0) {
    // ~16 pool points per eta-cap.
    const double cap = std::pow(eta_target / 2.0, static_cast<double>(d));
    pool_size = static_cast<std::size_t>(std::clamp(16.0 * 2.0 * std::numbers::pi / cap, 64.0, 2.0e6));
  }
  PointSet pool;
  if (d == 1) pool = detail::equispaced_circle(pool_size, 0.0);
  else if (d == 2) pool = detail::rotated(detail::fibonacci_sphere(pool_size), detail::seeded_rotation(3, seed));
  else pool = detail::quasi_random_pool(d, pool_size, seed);
  const auto order = detail::farthest_point_order(pool, pool.size(), eta_target);
  return pool.subset(order);
}

// ---------------------------------------------------------------------------
// CSV: first line "dim,N", then one row of d+1 coordinates per point.

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const PointSet& c) {
  std::string out = std::to_string(c.dim()) + "," + std::to_string(c.size()) + "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t k = 0; k < c.ambient(); ++k) {
      if (k) out += ',';
      out += format_real(c[i][k]);
    }
    out += '\n';
  }
  return out;
}

/// Parses the CSV produced by to_csv. Lines starting with '#' are ignored.
inline PointSet point_set_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t d = 0, n = 0;
  bool header = false;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        detail::fail_invalid("point_set_from_csv", "unparseable cell '" + cell + "'");
      }
    }
    if (!header) {
      if (vals.size() != 2) detail::fail_invalid("point_set_from_csv", "header must be dim,N");
      d = static_cast<std::size_t>(vals[0]);
      n = static_cast<std::size_t>(vals[1]);
      header = true;
      continue;
    }
    if (vals.size() != d + 1) detail::fail_invalid("point_set_from_csv", "row has wrong width");
    flat.insert(flat.end(), vals.begin(), vals.end());
  }
  if (!header || flat.size() != n * (d + 1))
    detail::fail_invalid("point_set_from_csv", "point count does not match header");
  return PointSet(d, std::move(flat));
}

}  // namespace composita
