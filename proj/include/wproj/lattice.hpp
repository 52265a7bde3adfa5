#pragma once
// Binary sets on a regular planar lattice. A set is a bitmap over the extent;
// cells are squares of side h, cell (i,j) has center origin + (i+1/2, j+1/2)h.
// Volume and the cell-edge perimeter are exact integer counts times powers of
// h. The marching-contour perimeter reconstructs a sub-cell linear interface
// from the indicator averaged to cell corners (a half-cell-shifted field) and
// measures the midpoint-smoothed polyline, which removes the staircase bias
// of the cell-edge count.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wproj/errors.hpp"

namespace wproj {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 a);

struct Cell {
  int i = 0;  // first index, along x
  int j = 0;  // second index, along y
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;  // lexicographic
};

struct Lattice {
  int d = 2;  // grid paths support d = 2 only
  double h = 1.0;
  Vec2 origin{0.0, 0.0};
  int nx = 0;
  int ny = 0;

  Lattice() = default;
  Lattice(double h_, Vec2 origin_, int nx_, int ny_);

  Vec2 center(Cell c) const {
    return {origin.x + (c.i + 0.5) * h, origin.y + (c.j + 0.5) * h};
  }
  bool in_range(Cell c) const {
    return c.i >= 0 && c.i < nx && c.j >= 0 && c.j < ny;
  }
  double cell_volume() const { return h * h; }

  friend bool operator==(const Lattice&, const Lattice&) = default;
};

class LatticeSet {
 public:
  LatticeSet() = default;
  explicit LatticeSet(Lattice lat)
      : lat_(lat), mask_(static_cast<std::size_t>(lat.nx) * lat.ny, 0) {}

  const Lattice& lattice() const { return lat_; }

  bool contains(Cell c) const {
    return lat_.in_range(c) && mask_[idx(c)] != 0;
  }
  void add(Cell c);
  void remove(Cell c);

  std::size_t cell_count() const { return count_; }
  bool empty() const { return count_ == 0; }

  // Cells in lexicographic (i, j) order.
  std::vector<Cell> cells() const;
  void for_each(const std::function<void(Cell)>& fn) const;

  friend bool operator==(const LatticeSet& a, const LatticeSet& b) {
    return a.lat_ == b.lat_ && a.mask_ == b.mask_;
  }

 private:
  std::size_t idx(Cell c) const {
    return static_cast<std::size_t>(c.i) * lat_.ny + c.j;
  }
  Lattice lat_;
  std::vector<uint8_t> mask_;
  std::size_t count_ = 0;
};

enum class PerimeterEstimator { cell_edge, marching_contour };

double volume(const LatticeSet& set);
double perimeter(const LatticeSet& set, PerimeterEstimator estimator);

// Partition under face adjacency, ordered by decreasing volume, ties broken
// by the smallest lexicographic cell.
std::vector<LatticeSet> connected_components(const LatticeSet& set);

// Max Euclidean distance between cell centers plus the h*sqrt(2) cell
// diagonal, so the value dominates the diameter of the union-of-cells
// polygon. Errors on the empty set.
double diameter(const LatticeSet& set);

// Cells whose center lies in the closed ball. With match_volume set, boundary
// cells are added/removed (ordered by |distance - r|, lexicographic ties)
// until |volume - target| <= h^2/2.
LatticeSet rasterize_ball(const Lattice& lat, Vec2 center, double r,
                          std::optional<double> match_volume = std::nullopt);

// Boundary graph (1 + f(theta)) over the unit circle, sampled at uniform
// angles with periodic linear interpolation.
class NearlySphericalProfile {
 public:
  explicit NearlySphericalProfile(std::vector<double> samples);
  double operator()(double theta) const;  // any theta, 2*pi periodic
  const std::vector<double>& samples() const { return samples_; }
  double max_abs() const { return max_abs_; }

 private:
  std::vector<double> samples_;
  double max_abs_ = 0.0;
};

// Cells whose center (r, theta) about the world origin satisfies
// r <= 1 + f(theta).
LatticeSet rasterize_profile(const Lattice& lat,
                             const NearlySphericalProfile& profile,
                             std::optional<double> match_volume = std::nullopt);

// Geometric dilation of the represented polygon by factor t: same cells on a
// lattice with spacing t*h (and origin scaled by t). Exact for every counting
// quantity.
LatticeSet dilate_spacing(const LatticeSet& set, int t);

// Shift all cells by (di, dj); errors if any cell leaves the extent.
LatticeSet translate(const LatticeSet& set, int di, int dj);

// Set algebra; operands must share the same lattice.
LatticeSet set_union(const LatticeSet& a, const LatticeSet& b);
LatticeSet set_intersection(const LatticeSet& a, const LatticeSet& b);
LatticeSet set_difference(const LatticeSet& a, const LatticeSet& b);
double symmetric_difference_volume(const LatticeSet& a, const LatticeSet& b);

}  // namespace wproj
