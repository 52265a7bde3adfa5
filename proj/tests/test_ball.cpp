#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wproj/ball.hpp"

using namespace wproj;

namespace {
constexpr double kPi = std::numbers::pi;

// Closed forms from the antiderivatives of r (1+r^2)^{1/2} and
// r^2 (1+r^2)^{1/2}:
//   d=2, p=1: 2 pi (2 sqrt(2) - 2) / 3
//   d=2, p=2: 2 pi (1 - 3 sqrt(2)/4 + asinh(1)/4)
const double kBallEnergy21 = 2.0 * kPi * (2.0 * std::sqrt(2.0) - 2.0) / 3.0;
const double kBallEnergy22 =
    2.0 * kPi * (1.0 - 0.75 * std::sqrt(2.0) + 0.25 * std::asinh(1.0));
}  // namespace

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(unit_ball_volume(3) ==
        doctest::Approx(4.0 / 3.0 * kPi).epsilon(1e-14));
}

TEST_CASE("map_T: annulus image, plug-in value, inverse round-trip") {
  for (int d : {2, 3, 4}) {
    std::vector<double> x(d, 0.0);
    x[0] = 1.0;
    auto y = map_T(x);
    double s = 0;
    for (double v : y) s += v * v;
    CHECK(std::sqrt(s) ==
          doctest::Approx(std::pow(2.0, 1.0 / d)).epsilon(1e-14));
  }
  auto y = map_T({1.0, 0.0});
  CHECK(y[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(y[1] == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    if (std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]) < 1e-3) continue;
    auto back = map_T_inverse(map_T(x));
    for (int k = 0; k < 3; ++k)
      CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(map_T({0.0, 0.0}), ConfigError);
}

TEST_CASE("det grad T = 1 in the radial sense") {
  // f(r)^{d-1} f'(r) = r^{d-1} with f = (1+r^d)^{1/d},
  // f' = r^{d-1} (1+r^d)^{1/d - 1}.
  for (int d : {2, 3, 5}) {
    for (int k = 1; k <= 100; ++k) {
      const double r = 0.02 * k;
      const double f = std::pow(1.0 + std::pow(r, d), 1.0 / d);
      const double fp =
          std::pow(r, d - 1) * std::pow(1.0 + std::pow(r, d), 1.0 / d - 1.0);
      CHECK(std::abs(std::pow(f, d - 1) * fp - std::pow(r, d - 1)) < 1e-10);
    }
  }
}

TEST_CASE("ball_energy matches the closed forms") {
  CHECK(std::abs(ball_energy(2, 1.0) - kBallEnergy21) < 1e-9);
  CHECK(std::abs(ball_energy(2, 2.0) - kBallEnergy22) < 1e-9);
  CHECK(ball_energy(3, 1.0) > 0.0);
  CHECK_THROWS_AS(ball_energy(1, 1.0), ConfigError);
  CHECK_THROWS_AS(ball_energy(2, 0.5), ConfigError);
}

TEST_CASE("potentials: p = 1 closed forms") {
  RadialPotentials pot(2, 1.0);
  for (double r : {0.0, 0.3, 1.0, 1.7}) {
    CHECK(pot.phi(r) == -r);
    CHECK(pot.psi(r) == r);
  }
}

TEST_CASE("potentials: duality identity on the graph of T") {
  for (int d : {2, 3}) {
    for (double p : {1.0, 1.5, 2.0}) {
      RadialPotentials pot(d, p);
      for (int k = 0; k <= 200; ++k) {
        const double r = k / 200.0;
        const double fr = std::pow(1.0 + std::pow(r, d), 1.0 / d);
        const double lhs = pot.phi(r) + pot.psi(fr);
        const double rhs = std::pow(fr - r, p);
        CHECK(std::abs(lhs - rhs) < 1e-8);
      }
    }
  }
}

TEST_CASE("potentials: psi nondecreasing and phi nonincreasing on the grid") {
  for (double p : {1.0, 1.5, 2.0}) {
    RadialPotentials pot(2, p);
    const auto& phi = pot.phi_table();
    const auto& psi = pot.psi_table();
    for (std::size_t k = 1; k < phi.size(); ++k) {
      CHECK(phi[k] - phi[k - 1] <= 1e-10);
      CHECK(psi[k] - psi[k - 1] >= -1e-10);
    }
  }
}

TEST_CASE("potentials: dual feasibility off the graph, sampled") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double p : {1.0, 1.5, 2.0}) {
    RadialPotentials pot(2, p);
    double worst = -1e9;
    int tested = 0;
    while (tested < 100000) {
      const double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
      const double rx = std::hypot(x0, x1), ry = std::hypot(y0, y1);
      if (rx > 2.0 || ry > 2.0) continue;
      ++tested;
      const double cost = std::pow(std::hypot(x0 - y0, x1 - y1), p);
      worst = std::max(worst, pot.phi(rx) + pot.psi(ry) - cost);
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("dual_lower_bound is tight at the rasterized ball") {
  Lattice lat(0.02, Vec2{-1.45, -1.45}, 145, 145);
  auto ball = rasterize_ball(lat, Vec2{0, 0}, 1.0, kPi);
  for (double p : {1.0, 2.0}) {
    const double bound = dual_lower_bound(ball, p);
    const double exact = ball_energy(2, p);
    CHECK(std::abs(bound - exact) / exact < 0.03);
  }
}

TEST_CASE("dual_lower_bound rejects sets escaping the annulus ball") {
  Lattice lat(0.1, Vec2{-3, -3}, 60, 60);
  auto big = rasterize_ball(lat, Vec2{0, 0}, 2.0);
  CHECK_THROWS_AS(dual_lower_bound(big, 1.0), ConfigError);
}

TEST_CASE("fuglede_gap: zero profile, positivity, bounded ratio sweep") {
  NearlySphericalProfile zero(std::vector<double>(128, 0.0));
  auto g0 = fuglede_gap(zero, 1.0);
  CHECK(g0.gap_bound == 0.0);
  CHECK(g0.f_l2 == 0.0);

  for (double p : {1.0, 2.0}) {
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      for (int k : {2, 3, 4}) {
        std::vector<double> s(256);
        for (int a = 0; a < 256; ++a)
          s[a] = eps * std::cos(k * (2.0 * kPi * a / 256.0));
        auto g = fuglede_gap(NearlySphericalProfile(s), p);
        CHECK(g.f_l2 == doctest::Approx(kPi * eps * eps).epsilon(1e-3));
        CHECK(g.gap_bound >= 0.0);
        const double ratio = g.gap_bound / g.f_l2;
        CHECK(ratio > 0.1);
        CHECK(ratio < 10.0);
      }
    }
  }
}
