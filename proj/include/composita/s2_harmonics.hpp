#pragma once

// Explicit real spherical harmonics on S^2, orthonormal for the normalized
// surface measure (fully normalized associated Legendre functions).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "composita/error.hpp"

namespace composita::s2 {

/// Position of Y_{l,m} (m = -l..l) in the flat arrays returned below.
constexpr std::size_t harmonic_index(int l, int m) {
  return static_cast<std::size_t>(l * l + l + m);
}

/// All Y_{l,m}(x) for l <= l_max; x is a unit vector (x, y, z).
///
/// Y_{l,0} = Pbar_{l,0}(z), Y_{l,m} = Pbar_{l,m}(z) cos(m phi) for m > 0 and
/// Pbar_{l,|m|}(z) sin(|m| phi) for m < 0. Pbar includes the sqrt(2) factor
/// for m > 0, so every Y has unit mean square over the sphere.
inline std::vector<double> real_harmonics(int l_max, std::span<const double> x) {
  if (x.size() != 3) detail::fail_invalid("s2::real_harmonics", "point must lie on S^2");
  if (l_max < 0) detail::fail_range("s2::real_harmonics", "l_max must be >= 0");
  const double z = std::clamp(x[2], -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = std::atan2(x[1], x[0]);

  const auto n = static_cast<std::size_t>(l_max + 1);
  // pbar[l][m], m <= l
  std::vector<double> pbar(n * n, 0.0);
  auto P = [&](int l, int m) -> double& { return pbar[static_cast<std::size_t>(l) * n + static_cast<std::size_t>(m)]; };
  P(0, 0) = 1.0;
  if (l_max >= 1) P(1, 1) = std::sqrt(3.0) * s;
  for (int m = 2; m <= l_max; ++m) P(m, m) = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * P(m - 1, m - 1);
  for (int m = 0; m < l_max; ++m) P(m + 1, m) = std::sqrt(2.0 * m + 3.0) * z * P(m, m);
  for (int m = 0; m <= l_max; ++m) {
    for (int l = m + 2; l <= l_max; ++l) {
      const double lm = static_cast<double>(l - m), lp = static_cast<double>(l + m);
      const double a = std::sqrt((2.0 * l - 1.0) * (2.0 * l + 1.0) / (lm * lp));
      const double b = std::sqrt((2.0 * l + 1.0) * (lp - 1.0) * (lm - 1.0) / (lm * lp * (2.0 * l - 3.0)));
      P(l, m) = a * z * P(l - 1, m) - b * P(l - 2, m);
    }
  }

  std::vector<double> y(n * n);
  for (int l = 0; l <= l_max; ++l) {
    y[harmonic_index(l, 0)] = P(l, 0);
    for (int m = 1; m <= l; ++m) {
      y[harmonic_index(l, m)] = P(l, m) * std::cos(m * phi);
      y[harmonic_index(l, -m)] = P(l, m) * std::sin(m * phi);
    }
  }
  return y;
}

inline double real_harmonic(int l, int m, std::span<const double> x) {
  if (m < -l || m > l) detail::fail_range("s2::real_harmonic", "|m| must be <= l");
  return real_harmonics(l, x)[harmonic_index(l, m)];
}

}  // namespace composita::s2
