#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wproj/lattice.hpp"

using namespace wproj;

namespace {

constexpr double kPi = std::numbers::pi;

Lattice centered_lattice(double h, double half_extent) {
  const int n = static_cast<int>(std::ceil(2.0 * half_extent / h));
  return Lattice(h, Vec2{-0.5 * n * h, -0.5 * n * h}, n, n);
}

LatticeSet random_blob(const Lattice& lat, std::size_t cells, uint64_t seed) {
  // Eden growth from the central cell; deterministic given the seed.
  std::mt19937_64 rng(seed);
  LatticeSet set(lat);
  std::vector<Cell> frontier;
  auto push_neighbors = [&](Cell c) {
    static constexpr int di[4] = {1, -1, 0, 0};
    static constexpr int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      Cell nb{c.i + di[k], c.j + dj[k]};
      if (lat.in_range(nb) && !set.contains(nb)) frontier.push_back(nb);
    }
  };
  Cell start{lat.nx / 2, lat.ny / 2};
  set.add(start);
  push_neighbors(start);
  while (set.cell_count() < cells && !frontier.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const std::size_t k = pick(rng);
    Cell c = frontier[k];
    frontier[k] = frontier.back();
    frontier.pop_back();
    if (set.contains(c)) continue;
    set.add(c);
    push_neighbors(c);
  }
  return set;
}

}  // namespace

TEST_CASE("volume: empty, single cell, rasterized disk") {
  Lattice unit(0.5, Vec2{0, 0}, 8, 8);
  LatticeSet empty(unit);
  CHECK(volume(empty) == 0.0);

  LatticeSet one(unit);
  one.add(Cell{3, 3});
  CHECK(volume(one) == doctest::Approx(0.25).epsilon(1e-15));

  auto disk = rasterize_ball(centered_lattice(0.01, 1.2), Vec2{0, 0}, 1.0);
  CHECK(volume(disk) == doctest::Approx(kPi).epsilon(0.01));
}

TEST_CASE("perimeter: cell-edge exact on cell unions") {
  Lattice unit(1.0, Vec2{0, 0}, 8, 8);
  LatticeSet one(unit);
  one.add(Cell{2, 2});
  CHECK(perimeter(one, PerimeterEstimator::cell_edge) == 4.0);

  LatticeSet two = one;
  two.add(Cell{3, 2});
  CHECK(perimeter(two, PerimeterEstimator::cell_edge) == 6.0);
}

TEST_CASE("perimeter: marching contour converges to circle length") {
  auto disk = rasterize_ball(centered_lattice(0.005, 1.1), Vec2{0, 0}, 1.0);
  const double p = perimeter(disk, PerimeterEstimator::marching_contour);
  CHECK(std::abs(p - 2.0 * kPi) / (2.0 * kPi) < 0.01);
}

TEST_CASE("perimeter: marching contour within 2% for r in {0.5, 1, 2}") {
  for (double r : {0.5, 1.0, 2.0}) {
    const double h = r / 100.0;
    auto disk = rasterize_ball(centered_lattice(h, 1.1 * r), Vec2{0, 0}, r);
    const double p = perimeter(disk, PerimeterEstimator::marching_contour);
    CHECK(std::abs(p - 2.0 * kPi * r) / (2.0 * kPi * r) < 0.02);
  }
}

TEST_CASE("connected components: basic cases") {
  Lattice unit(1.0, Vec2{0, 0}, 8, 8);
  LatticeSet empty(unit);
  CHECK(connected_components(empty).empty());

  LatticeSet pair(unit);
  pair.add(Cell{1, 1});
  pair.add(Cell{2, 1});
  CHECK(connected_components(pair).size() == 1);

  LatticeSet corner(unit);
  corner.add(Cell{1, 1});
  corner.add(Cell{2, 2});
  auto comps = connected_components(corner);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].contains(Cell{1, 1}));  // tie broken by smallest lex cell
  CHECK(comps[1].contains(Cell{2, 2}));
}

TEST_CASE("connected components: partition property on random blobs") {
  Lattice lat(0.1, Vec2{-3, -3}, 60, 60);
  for (uint64_t seed : {1ull, 7ull, 42ull}) {
    auto blob = random_blob(lat, 200, seed);
    LatticeSet eroded(lat);
    std::mt19937_64 rng(seed * 13 + 1);
    blob.for_each([&](Cell c) {
      if (rng() % 4 != 0) eroded.add(c);
    });
    auto comps = connected_components(eroded);
    LatticeSet reunion(lat);
    std::size_t total = 0;
    for (const auto& comp : comps) {
      comp.for_each([&](Cell c) {
        CHECK(!reunion.contains(c));  // pairwise disjoint
        reunion.add(c);
      });
      total += comp.cell_count();
    }
    CHECK(total == eroded.cell_count());
    CHECK(reunion == eroded);
    for (std::size_t k = 1; k < comps.size(); ++k)
      CHECK(comps[k - 1].cell_count() >= comps[k].cell_count());
  }
}

TEST_CASE("diameter: single cell, two cells, disk") {
  Lattice unit(1.0, Vec2{0, 0}, 8, 8);
  LatticeSet one(unit);
  one.add(Cell{1, 1});
  CHECK(diameter(one) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));

  LatticeSet two(unit);
  two.add(Cell{0, 0});
  two.add(Cell{3, 0});
  CHECK(diameter(two) ==
        doctest::Approx(3.0 + std::numbers::sqrt2).epsilon(1e-12));

  auto disk = rasterize_ball(centered_lattice(0.01, 1.2), Vec2{0, 0}, 1.0);
  CHECK(std::abs(diameter(disk) - 2.0) / 2.0 < 0.02);

  LatticeSet empty(unit);
  CHECK_THROWS_AS(diameter(empty), ConfigError);
}

TEST_CASE("diameter: monotone under inclusion") {
  Lattice lat(0.1, Vec2{-3, -3}, 60, 60);
  auto blob = random_blob(lat, 250, 5);
  auto comps = connected_components(blob);
  LatticeSet shrunk(lat);
  std::size_t budget = blob.cell_count() / 2;
  blob.for_each([&](Cell c) {
    if (shrunk.cell_count() < budget) shrunk.add(c);
  });
  CHECK(diameter(shrunk) <= diameter(blob) + 1e-12);
}

TEST_CASE("rasterize_ball: tiny radius, disk volume, volume matching") {
  Lattice lat = centered_lattice(0.01, 1.3);
  Cell mid{lat.nx / 2, lat.ny / 2};
  auto tiny = rasterize_ball(lat, lat.center(mid), 0.004);
  CHECK(tiny.cell_count() == 1);

  auto disk = rasterize_ball(lat, Vec2{0, 0}, 1.0);
  CHECK(std::abs(volume(disk) - kPi) / kPi < 0.005);

  auto matched = rasterize_ball(lat, Vec2{0, 0}, 1.0, kPi);
  CHECK(std::abs(volume(matched) - kPi) <= 0.5 * lat.cell_volume());

  CHECK_THROWS_AS(rasterize_ball(lat, Vec2{0, 0}, 2.0), ConfigError);
}

TEST_CASE("profile: invalid samples rejected") {
  CHECK_THROWS_AS(NearlySphericalProfile({0.6, 0.0, 0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(NearlySphericalProfile({-1.0, 0.0, 0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(NearlySphericalProfile({0.0, 0.0}), ConfigError);
}

TEST_CASE("rasterize_profile: constant profile equals a ball") {
  Lattice lat = centered_lattice(0.02, 1.4);
  auto zero = rasterize_profile(
      lat, NearlySphericalProfile(std::vector<double>(64, 0.0)));
  auto ball1 = rasterize_ball(lat, Vec2{0, 0}, 1.0);
  CHECK(zero == ball1);

  auto lifted = rasterize_profile(
      lat, NearlySphericalProfile(std::vector<double>(64, 0.1)));
  auto ball11 = rasterize_ball(lat, Vec2{0, 0}, 1.1);
  CHECK(lifted == ball11);
}

TEST_CASE("rasterize_profile: cos mode volume matches polar area oracle") {
  // Oracle: area = integral of (1 + f)^2 / 2 over angle; for f = eps*cos(2t)
  // this is pi * (1 + eps^2 / 2).
  const double eps = 0.05;
  const int k = 512;
  std::vector<double> samples(k);
  for (int a = 0; a < k; ++a)
    samples[a] = eps * std::cos(2.0 * (2.0 * kPi * a / k));
  Lattice lat = centered_lattice(0.01, 1.4);
  auto set = rasterize_profile(lat, NearlySphericalProfile(samples));
  const double oracle = kPi * (1.0 + eps * eps / 2.0);
  CHECK(std::abs(volume(set) - oracle) / oracle < 0.005);
}

TEST_CASE("dilate_spacing scales exactly; translate round-trips") {
  Lattice lat = centered_lattice(0.05, 1.3);
  auto disk = rasterize_ball(lat, Vec2{0, 0}, 1.0);
  for (int t : {2, 3}) {
    auto big = dilate_spacing(disk, t);
    CHECK(volume(big) == doctest::Approx(t * t * volume(disk)).epsilon(1e-12));
    const double p0 = perimeter(disk, PerimeterEstimator::cell_edge);
    const double p1 = perimeter(big, PerimeterEstimator::cell_edge);
    CHECK(p1 == doctest::Approx(t * p0).epsilon(1e-12));
  }
  auto moved = translate(disk, 3, -2);
  CHECK(translate(moved, -3, 2) == disk);
  CHECK_THROWS_AS(translate(disk, 10000, 0), ConfigError);
}

TEST_CASE("set algebra and symmetric difference") {
  Lattice unit(1.0, Vec2{0, 0}, 6, 6);
  LatticeSet a(unit), b(unit);
  a.add(Cell{0, 0});
  a.add(Cell{1, 0});
  b.add(Cell{1, 0});
  b.add(Cell{2, 0});
  CHECK(set_union(a, b).cell_count() == 3);
  CHECK(set_intersection(a, b).cell_count() == 1);
  CHECK(set_difference(a, b).cell_count() == 1);
  CHECK(symmetric_difference_volume(a, b) == 2.0);
}
