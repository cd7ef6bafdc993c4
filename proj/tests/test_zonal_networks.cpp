#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "composita/zonal_networks.hpp"
#include "oracles.hpp"

using namespace composita;

namespace {

PointSet probes_s2() { return random_sphere_points(2, 3000, 991); }

double sup_diff(const PointSet& probes, const auto& f, const auto& g) {
  double m = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) m = std::max(m, std::abs(f(probes[i]) - g(probes[i])));
  return m;
}

ZonalNetwork planted(KernelKind kind, const PointSet& centers, std::vector<std::size_t> idx, std::vector<double> a) {
  return ZonalNetwork(kind, centers.subset(idx), std::move(a), kDefaultPhiDegree);
}

}  // namespace

TEST(ConvKernel, ValueAtOneIsSecondMoment) {
  for (int q : {2, 3, 4}) EXPECT_NEAR(conv_kernel_phi(q, 1.0), 1.0 / (q + 1), 2e-6) << "q=" << q;
  EXPECT_NEAR(conv_kernel_phi(2, 1.0, 2048), 1.0 / 3.0, 1e-10);
}

TEST(ConvKernel, Even) {
  for (int q : {1, 2, 4})
    for (double t : {0.05, 0.3, 0.77, 0.999}) EXPECT_NEAR(conv_kernel_phi(q, t), conv_kernel_phi(q, -t), 1e-14);
}

TEST(ConvKernel, MatchesDirectIntegralOnS2) {
  for (double t : {-0.9, -0.45, 0.0, 0.2, 0.6, 0.9}) EXPECT_NEAR(conv_kernel_phi(2, t), oracle::phi_s2(t, 80), 1e-5) << "t=" << t;
}

TEST(ConvKernel, RejectsOutOfRange) {
  EXPECT_THROW(conv_kernel_phi(2, 1.5), RangeError);
  EXPECT_THROW(ZonalNetwork(KernelKind::ConvKernel, choose_centers(2, 8, 0), std::vector<double>(8, 1.0), 1), RangeError);
}

TEST(ZonalNetwork, SingleUnitIsAbsDot) {
  const auto w = SpherePoint::normalized({0.2, -0.4, 0.9});
  const ZonalNetwork net(KernelKind::AbsDot, PointSet(2, std::vector<double>(w.coords().begin(), w.coords().end())), {1.0});
  const auto probes = probes_s2();
  for (std::size_t i = 0; i < 50; ++i) EXPECT_DOUBLE_EQ(net(probes[i]), std::abs(dot(probes[i], w.coords())));
}

TEST(ZonalNetwork, LinearInCoefficientsAndBounded) {
  const auto c = choose_centers(2, 30, 4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> a(c.size()), b(c.size()), s(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) a[k] = g(rng), b[k] = g(rng), s[k] = a[k] + b[k];
  for (auto kind : {KernelKind::AbsDot, KernelKind::ConvKernel}) {
    const ZonalNetwork na(kind, c, a), nb(kind, c, b), ns(kind, c, s);
    const auto probes = probes_s2();
    for (std::size_t i = 0; i < 200; ++i) {
      EXPECT_NEAR(ns(probes[i]), na(probes[i]) + nb(probes[i]), 1e-12);
      if (kind == KernelKind::AbsDot) {
        EXPECT_LE(std::abs(na(probes[i])), na.coefficient_l1());
      }
    }
  }
}

TEST(ZonalNetwork, DimensionMismatchThrows) {
  const ZonalNetwork net(KernelKind::AbsDot, choose_centers(2, 6, 0), std::vector<double>(6, 1.0));
  const std::vector<double> x = {1, 0, 0, 0};
  EXPECT_THROW(net(x), InvalidInput);
  EXPECT_THROW(ZonalNetwork(KernelKind::AbsDot, choose_centers(2, 6, 0), std::vector<double>(5, 1.0)), InvalidInput);
}

TEST(ChooseCenters, QuasiUniformAndTargetFree) {
  const auto c = choose_centers(2, 50, 0);
  EXPECT_GE(c.size(), 40u);
  const auto rep = check_uniformity(c, 0.2 * minimal_separation(c));
  EXPECT_TRUE(rep.ok) << rep.mesh << " " << rep.separation;
  EXPECT_EQ(choose_centers(2, 50, 0).flat(), c.flat());
}

TEST(FitShallow, RecoversPlantedAbsDotNetwork) {
  const auto c = choose_centers(2, 40, 1);
  const auto net = planted(KernelKind::AbsDot, c, {2, 9, 17, 25, 33}, {0.8, -1.3, 0.5, 2.0, -0.7});
  FitOptions opt;
  opt.ridge = 1e-10;
  const auto fit = fit_shallow([&](std::span<const double> x) { return net(x); }, c, default_samples(2, c.size(), 1), opt);
  EXPECT_LE(sup_diff(probes_s2(), fit, net), 1e-6);
}

TEST(FitShallow, RecoversPlantedConvKernelNetwork) {
  const auto c = choose_centers(2, 24, 2);
  const auto net = planted(KernelKind::ConvKernel, c, {0, 5, 11, 16, 22}, {1.0, 0.4, -0.9, 0.6, 1.5});
  FitOptions opt;
  opt.kernel = KernelKind::ConvKernel;
  opt.ridge = 1e-10;
  const auto fit = fit_shallow([&](std::span<const double> x) { return net(x); }, c, default_samples(2, c.size(), 2), opt);
  EXPECT_LE(sup_diff(probes_s2(), fit, net), 1e-6);
}

TEST(FitShallow, ZeroTargetGivesZeroCoefficients) {
  const auto c = choose_centers(2, 20, 0);
  const auto fit = fit_shallow([](std::span<const double>) { return 0.0; }, c, default_samples(2, c.size(), 0));
  for (double a : fit.coefficients()) EXPECT_EQ(a, 0.0);
}

TEST(FitShallow, LinearInSamples) {
  const auto c = choose_centers(2, 32, 3);
  const auto x = default_samples(2, c.size(), 3);
  auto f = [](std::span<const double> u) { return std::exp(u[0]) - u[1] * u[2]; };
  auto g = [](std::span<const double> u) { return std::cos(3 * u[2]) + u[0]; };
  const double alpha = 1.7, beta = -0.6;
  const auto ff = fit_shallow(f, c, x), fg = fit_shallow(g, c, x);
  const auto fs = fit_shallow([&](std::span<const double> u) { return alpha * f(u) + beta * g(u); }, c, x);
  for (std::size_t k = 0; k < c.size(); ++k)
    EXPECT_NEAR(fs.coefficients()[k], alpha * ff.coefficients()[k] + beta * fg.coefficients()[k], 1e-9);
}

TEST(FitShallow, ErrorDecreasesWithCenters) {
  const auto y0 = SpherePoint::normalized({0.3, -0.5, 0.8});
  auto f = [&](std::span<const double> x) {
    const double t = dot(x, y0.coords());
    return std::exp(-2 * t * t) + 0.5 * std::cos(3 * t);
  };
  const auto probes = probes_s2();
  double prev = INFINITY;
  for (std::size_t n : {16, 32, 64, 128}) {
    double err = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto c = choose_centers(2, n, seed);
      err += sup_diff(probes, fit_shallow(f, c, default_samples(2, c.size(), seed)), f) / 4;
    }
    EXPECT_LT(err, prev) << "N=" << n;
    prev = err;
  }
}

TEST(FitShallow, RankDeficientWithoutRidgeThrows) {
  auto c = choose_centers(2, 10, 0);
  std::vector<double> flat = c.flat();
  flat.insert(flat.end(), c.flat().begin(), c.flat().begin() + 3);
  const PointSet dup(2, flat);
  FitOptions opt;
  opt.ridge = 0.0;
  try {
    fit_shallow([](std::span<const double> x) { return x[0]; }, dup, default_samples(2, dup.size(), 0), opt);
    FAIL() << "expected ConstraintFailure";
  } catch (const ConstraintFailure& e) {
    EXPECT_NE(std::string(e.what()).find("positive ridge"), std::string::npos);
  }
}

TEST(FitShallow, Preconditions) {
  const auto c = choose_centers(2, 20, 0);
  EXPECT_THROW(fit_shallow([](std::span<const double>) { return 1.0; }, c, choose_centers(2, 10, 1)), InvalidInput);
  FitOptions opt;
  opt.ridge = -1.0;
  EXPECT_THROW(fit_shallow([](std::span<const double>) { return 1.0; }, c, default_samples(2, 20, 0), opt), InvalidInput);
}

TEST(ZonalJson, RoundTrip) {
  const auto c = choose_centers(2, 12, 7);
  std::vector<double> a(c.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::sin(1.0 + k) / 3.0;
  for (auto kind : {KernelKind::AbsDot, KernelKind::ConvKernel}) {
    const ZonalNetwork net(kind, c, a, 64);
    const auto back = network_from_json(nlohmann::json::parse(to_json(net).dump()));
    EXPECT_EQ(back.kind(), kind);
    EXPECT_EQ(back.centers().flat(), net.centers().flat());
    EXPECT_EQ(std::vector<double>(back.coefficients().begin(), back.coefficients().end()), a);
    if (kind == KernelKind::ConvKernel) {
      EXPECT_EQ(back.l_max(), 64);
    }
  }
  auto j = to_json(ZonalNetwork(KernelKind::AbsDot, c, a));
  j["bias"] = 1.0;
  EXPECT_THROW(network_from_json(j), ValidationError);
}

TEST(AffineForm, ConvertsToLiftedZonalNetwork) {
  AffineAbsNetwork affine;
  affine.directions = {{1.0, -0.5}, {0.3, 0.8}, {-1.2, 0.1}};
  affine.offsets = {0.4, -0.2, 0.0};
  affine.coefficients = {1.5, -0.7, 0.9};
  const auto net = to_zonal(affine);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x = {u(rng), u(rng)};
    const double scale = std::sqrt(x[0] * x[0] + x[1] * x[1] + 1);
    EXPECT_NEAR(affine(x), scale * net(lift_to_sphere(x)), 1e-12);
  }
}
