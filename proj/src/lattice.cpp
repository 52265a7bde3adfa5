#include "wproj/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wproj {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

Lattice::Lattice(double h_, Vec2 origin_, int nx_, int ny_)
    : h(h_), origin(origin_), nx(nx_), ny(ny_) {
  if (!(h > 0.0)) throw ConfigError("lattice: cell size must be positive");
  if (nx < 1 || ny < 1) throw ConfigError("lattice: extent must be >= 1");
}

void LatticeSet::add(Cell c) {
  if (!lat_.in_range(c)) throw ConfigError("lattice set: cell out of range");
  auto& m = mask_[idx(c)];
  if (!m) {
    m = 1;
    ++count_;
  }
}

void LatticeSet::remove(Cell c) {
  if (!lat_.in_range(c)) throw ConfigError("lattice set: cell out of range");
  auto& m = mask_[idx(c)];
  if (m) {
    m = 0;
    --count_;
  }
}

std::vector<Cell> LatticeSet::cells() const {
  std::vector<Cell> out;
  out.reserve(count_);
  for_each([&](Cell c) { out.push_back(c); });
  return out;
}

void LatticeSet::for_each(const std::function<void(Cell)>& fn) const {
  std::size_t k = 0;
  for (int i = 0; i < lat_.nx; ++i)
    for (int j = 0; j < lat_.ny; ++j, ++k)
      if (mask_[k]) fn(Cell{i, j});
}

double volume(const LatticeSet& set) {
  return static_cast<double>(set.cell_count()) * set.lattice().cell_volume();
}

namespace {

int exposed_faces(const LatticeSet& set, Cell c) {
  static constexpr int di[4] = {1, -1, 0, 0};
  static constexpr int dj[4] = {0, 0, 1, -1};
  int n = 0;
  for (int k = 0; k < 4; ++k)
    if (!set.contains(Cell{c.i + di[k], c.j + dj[k]})) ++n;
  return n;
}

// Averaged indicator at vertex (a, b) of the cell grid in units of 1/36: the
// four adjacent cells averaged after a 3x3 prefilter, i.e. tent weights
// {1,2,2,1}^2 over the 4x4 cell block around the vertex. The wider symmetric
// window cuts the anisotropy bias of the plain 2x2 average from ~1.4% to
// ~0.3% on digitized circles while keeping straight edges exact.
int vertex_count(const LatticeSet& set, int a, int b) {
  static constexpr int w[4] = {1, 2, 2, 1};
  int n = 0;
  for (int di = -2; di <= 1; ++di)
    for (int dj = -2; dj <= 1; ++dj)
      if (set.contains(Cell{a + di, b + dj})) n += w[di + 2] * w[dj + 2];
  return n;
}

struct ContourPoint {
  double x, y;
};

struct ContourSeg {
  ContourPoint from, to;
  int from_edge, to_edge;  // 0 bottom, 1 right, 2 top, 3 left
  bool valid = false;
};

// Interface crossing parameter on an edge whose canonical endpoint counts are
// (na, nb); the averaged indicator is linear along the edge and the interface
// sits at level 1/2, i.e. count 18 on the 1/36 scale.
double edge_t(int na, int nb) {
  return (18.0 - na) / static_cast<double>(nb - na);
}

// Up to two oriented interface segments inside cell (i, j), in vertex-grid
// coordinates. Orientation keeps the set on the left.
int cell_segments(const LatticeSet& set, int i, int j, ContourSeg out[2]) {
  const int n00 = vertex_count(set, i, j);
  const int n10 = vertex_count(set, i + 1, j);
  const int n11 = vertex_count(set, i + 1, j + 1);
  const int n01 = vertex_count(set, i, j + 1);
  const int mask = (n00 >= 18 ? 1 : 0) | (n10 >= 18 ? 2 : 0) |
                   (n11 >= 18 ? 4 : 0) | (n01 >= 18 ? 8 : 0);
  if (mask == 0 || mask == 15) return 0;

  // Canonical edge crossings: bottom and top run left to right, left and
  // right run bottom to top, so adjacent cells compute identical points.
  ContourPoint pt[4];
  pt[0] = {i + edge_t(n00, n10), static_cast<double>(j)};
  pt[1] = {static_cast<double>(i + 1), j + edge_t(n10, n11)};
  pt[2] = {i + edge_t(n01, n11), static_cast<double>(j + 1)};
  pt[3] = {static_cast<double>(i), j + edge_t(n00, n01)};

  auto seg = [&](int from, int to) {
    return ContourSeg{pt[from], pt[to], from, to, true};
  };

  switch (mask) {
    case 1: out[0] = seg(0, 3); return 1;
    case 2: out[0] = seg(1, 0); return 1;
    case 3: out[0] = seg(1, 3); return 1;
    case 4: out[0] = seg(2, 1); return 1;
    case 5:
      if (n00 + n10 + n11 + n01 >= 72) {
        out[0] = seg(0, 1);
        out[1] = seg(2, 3);
      } else {
        out[0] = seg(0, 3);
        out[1] = seg(2, 1);
      }
      return 2;
    case 6: out[0] = seg(2, 0); return 1;
    case 7: out[0] = seg(2, 3); return 1;
    case 8: out[0] = seg(3, 2); return 1;
    case 9: out[0] = seg(0, 2); return 1;
    case 10:
      if (n00 + n10 + n11 + n01 >= 72) {
        out[0] = seg(3, 0);
        out[1] = seg(1, 2);
      } else {
        out[0] = seg(1, 0);
        out[1] = seg(3, 2);
      }
      return 2;
    case 11: out[0] = seg(1, 2); return 1;
    case 12: out[0] = seg(3, 1); return 1;
    case 13: out[0] = seg(0, 1); return 1;
    case 14: out[0] = seg(3, 0); return 1;
    default: return 0;
  }
}

double seg_length(const ContourSeg& s) {
  return std::hypot(s.to.x - s.from.x, s.to.y - s.from.y);
}

// Endpoint of the segment continuing through the given exit edge of cell
// (i, j). The contour is consistently oriented, so the crossing appears as a
// "from" in exactly one segment of the adjacent cell.
bool continuation_endpoint(const LatticeSet& set, int i, int j, int exit_edge,
                           ContourPoint* out) {
  static constexpr int ndi[4] = {0, 1, 0, -1};
  static constexpr int ndj[4] = {-1, 0, 1, 0};
  static constexpr int enter_edge[4] = {2, 3, 0, 1};
  ContourSeg segs[2];
  const int n =
      cell_segments(set, i + ndi[exit_edge], j + ndj[exit_edge], segs);
  for (int k = 0; k < n; ++k) {
    if (segs[k].from_edge == enter_edge[exit_edge]) {
      *out = segs[k].to;
      return true;
    }
  }
  return false;
}

}  // namespace

namespace detail {

// Total interface length; smoothing_passes = 1 measures the midpoint-refined
// polyline (sum over segments k of |p_{k+2} - p_k| / 2), which needs only the
// continuation segment in the adjacent cell, so the quantity stays local.
double marching_contour_length(const LatticeSet& set, int smoothing_passes) {
  const Lattice& lat = set.lattice();
  double total = 0.0;
  ContourSeg segs[2];
  for (int i = -3; i <= lat.nx + 2; ++i) {
    for (int j = -3; j <= lat.ny + 2; ++j) {
      const int n = cell_segments(set, i, j, segs);
      for (int k = 0; k < n; ++k) {
        if (smoothing_passes <= 0) {
          total += seg_length(segs[k]);
          continue;
        }
        ContourPoint next;
        if (continuation_endpoint(set, i, j, segs[k].to_edge, &next)) {
          total += 0.5 * std::hypot(next.x - segs[k].from.x,
                                    next.y - segs[k].from.y);
        } else {
          total += seg_length(segs[k]);
        }
      }
    }
  }
  return total * lat.h;
}

}  // namespace detail

double perimeter(const LatticeSet& set, PerimeterEstimator estimator) {
  const Lattice& lat = set.lattice();
  if (lat.d != 2)
    throw ConfigError("perimeter: estimators are implemented for d = 2 only");
  switch (estimator) {
    case PerimeterEstimator::cell_edge: {
      long faces = 0;
      set.for_each([&](Cell c) { faces += exposed_faces(set, c); });
      return static_cast<double>(faces) * lat.h;
    }
    case PerimeterEstimator::marching_contour:
      return detail::marching_contour_length(set, 1);
  }
  throw ConfigError("perimeter: unknown estimator");
}

std::vector<LatticeSet> connected_components(const LatticeSet& set) {
  const Lattice& lat = set.lattice();
  std::vector<uint8_t> seen(static_cast<std::size_t>(lat.nx) * lat.ny, 0);
  auto at = [&](Cell c) -> uint8_t& {
    return seen[static_cast<std::size_t>(c.i) * lat.ny + c.j];
  };
  struct Comp {
    LatticeSet cells;
    Cell anchor;
  };
  std::vector<Comp> comps;
  std::vector<Cell> stack;
  set.for_each([&](Cell c) {
    if (at(c)) return;
    Comp comp{LatticeSet(lat), c};
    stack.push_back(c);
    at(c) = 1;
    while (!stack.empty()) {
      Cell cur = stack.back();
      stack.pop_back();
      comp.cells.add(cur);
      static constexpr int di[4] = {1, -1, 0, 0};
      static constexpr int dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        Cell nb{cur.i + di[k], cur.j + dj[k]};
        if (set.contains(nb) && !at(nb)) {
          at(nb) = 1;
          stack.push_back(nb);
        }
      }
    }
    comps.push_back(std::move(comp));
  });
  std::sort(comps.begin(), comps.end(), [](const Comp& a, const Comp& b) {
    if (a.cells.cell_count() != b.cells.cell_count())
      return a.cells.cell_count() > b.cells.cell_count();
    return a.anchor < b.anchor;
  });
  std::vector<LatticeSet> out;
  out.reserve(comps.size());
  for (auto& c : comps) out.push_back(std::move(c.cells));
  return out;
}

namespace {

std::vector<Cell> boundary_cells(const LatticeSet& set) {
  std::vector<Cell> out;
  set.for_each([&](Cell c) {
    if (exposed_faces(set, c) > 0) out.push_back(c);
  });
  return out;
}

double cross(Vec2 o, Vec2 a, Vec2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Monotone-chain convex hull of cell centers.
std::vector<Vec2> hull_of(const Lattice& lat, std::vector<Cell> cells) {
  std::sort(cells.begin(), cells.end());
  auto build = [&](auto begin, auto end) {
    std::vector<Vec2> chain;
    for (auto it = begin; it != end; ++it) {
      Vec2 p = lat.center(*it);
      while (chain.size() >= 2 &&
             cross(chain[chain.size() - 2], chain.back(), p) <= 0.0)
        chain.pop_back();
      chain.push_back(p);
    }
    return chain;
  };
  auto lower = build(cells.begin(), cells.end());
  auto upper = build(cells.rbegin(), cells.rend());
  lower.pop_back();
  upper.pop_back();
  lower.insert(lower.end(), upper.begin(), upper.end());
  return lower;
}

}  // namespace

double diameter(const LatticeSet& set) {
  if (set.empty()) throw ConfigError("diameter: empty set");
  const Lattice& lat = set.lattice();
  auto hull = hull_of(lat, boundary_cells(set));
  double best = 0.0;
  for (std::size_t a = 0; a < hull.size(); ++a)
    for (std::size_t b = a + 1; b < hull.size(); ++b)
      best = std::max(best, norm(hull[a] - hull[b]));
  return best + lat.h * std::numbers::sqrt2;
}

namespace {

// Adjust the set toward the target volume by adding complement cells closest
// to the reference surface or removing member cells closest to it; score is
// |distance - r| with lexicographic ties.
void match_volume_by_score(LatticeSet& set, double target,
                           const std::function<double(Cell)>& score,
                           const std::vector<Cell>& candidates) {
  const double cv = set.lattice().cell_volume();
  const long want = std::lround(target / cv);
  long have = static_cast<long>(set.cell_count());
  if (want == have) return;
  std::vector<std::pair<double, Cell>> scored;
  scored.reserve(candidates.size());
  const bool adding = want > have;
  for (Cell c : candidates) {
    if (set.contains(c) == adding) continue;
    scored.emplace_back(score(c), c);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::size_t k = 0;
  while (have != want) {
    if (k >= scored.size())
      throw ConfigError("volume matching: not enough boundary candidates");
    if (adding) {
      set.add(scored[k].second);
      ++have;
    } else {
      set.remove(scored[k].second);
      --have;
    }
    ++k;
  }
}

}  // namespace

LatticeSet rasterize_ball(const Lattice& lat, Vec2 center, double r,
                          std::optional<double> match_volume) {
  if (lat.d != 2) throw ConfigError("rasterize_ball: d = 2 only");
  if (!(r > 0.0)) throw ConfigError("rasterize_ball: radius must be positive");
  const double margin = r + 2.0 * lat.h;
  const Vec2 lo = lat.origin;
  const Vec2 hi{lat.origin.x + lat.nx * lat.h, lat.origin.y + lat.ny * lat.h};
  if (center.x - margin < lo.x || center.x + margin > hi.x ||
      center.y - margin < lo.y || center.y + margin > hi.y)
    throw ConfigError("rasterize_ball: ball out of bounds");

  LatticeSet set(lat);
  const int i0 = static_cast<int>(std::floor((center.x - margin - lat.origin.x) / lat.h));
  const int i1 = static_cast<int>(std::ceil((center.x + margin - lat.origin.x) / lat.h));
  const int j0 = static_cast<int>(std::floor((center.y - margin - lat.origin.y) / lat.h));
  const int j1 = static_cast<int>(std::ceil((center.y + margin - lat.origin.y) / lat.h));
  std::vector<Cell> band;
  for (int i = std::max(0, i0); i <= std::min(lat.nx - 1, i1); ++i) {
    for (int j = std::max(0, j0); j <= std::min(lat.ny - 1, j1); ++j) {
      Cell c{i, j};
      const double dist = norm(lat.center(c) - center);
      if (dist <= r) set.add(c);
      if (std::abs(dist - r) <= 4.0 * lat.h) band.push_back(c);
    }
  }
  if (match_volume) {
    match_volume_by_score(
        set, *match_volume,
        [&](Cell c) { return std::abs(norm(lat.center(c) - center) - r); },
        band);
  }
  return set;
}

NearlySphericalProfile::NearlySphericalProfile(std::vector<double> samples)
    : samples_(std::move(samples)) {
  if (samples_.size() < 4)
    throw ConfigError("profile: need at least 4 angle samples");
  for (double v : samples_) {
    if (!(1.0 + v > 0.0)) throw ConfigError("profile: 1 + f must be positive");
    max_abs_ = std::max(max_abs_, std::abs(v));
  }
  if (max_abs_ > 0.5)
    throw ConfigError("profile: sup |f| must be at most 0.5");
}

double NearlySphericalProfile::operator()(double theta) const {
  const double two_pi = 2.0 * std::numbers::pi;
  double u = theta / two_pi;
  u -= std::floor(u);
  const std::size_t k = samples_.size();
  const double s = u * static_cast<double>(k);
  std::size_t a = static_cast<std::size_t>(s);
  if (a >= k) a = k - 1;
  const double t = s - static_cast<double>(a);
  const double fa = samples_[a];
  const double fb = samples_[(a + 1) % k];
  return fa + t * (fb - fa);
}

LatticeSet rasterize_profile(const Lattice& lat,
                             const NearlySphericalProfile& profile,
                             std::optional<double> match_volume) {
  if (lat.d != 2) throw ConfigError("rasterize_profile: d = 2 only");
  const double rmax = 1.0 + profile.max_abs();
  const double margin = rmax + 2.0 * lat.h;
  const Vec2 lo = lat.origin;
  const Vec2 hi{lat.origin.x + lat.nx * lat.h, lat.origin.y + lat.ny * lat.h};
  if (-margin < lo.x || margin > hi.x || -margin < lo.y || margin > hi.y)
    throw ConfigError("rasterize_profile: profile out of bounds");

  auto surface_score = [&](Cell c) {
    const Vec2 p = lat.center(c);
    const double rho = norm(p);
    const double theta = std::atan2(p.y, p.x);
    return rho - (1.0 + profile(theta));
  };

  LatticeSet set(lat);
  std::vector<Cell> band;
  for (int i = 0; i < lat.nx; ++i) {
    for (int j = 0; j < lat.ny; ++j) {
      Cell c{i, j};
      if (norm(lat.center(c)) > rmax + 4.0 * lat.h) continue;
      const double score = surface_score(c);
      if (score <= 0.0) set.add(c);
      if (std::abs(score) <= 4.0 * lat.h) band.push_back(c);
    }
  }
  if (match_volume) {
    match_volume_by_score(
        set, *match_volume,
        [&](Cell c) { return std::abs(surface_score(c)); }, band);
  }
  return set;
}

LatticeSet dilate_spacing(const LatticeSet& set, int t) {
  if (t < 1) throw ConfigError("dilate_spacing: factor must be >= 1");
  const Lattice& lat = set.lattice();
  Lattice scaled(lat.h * t, Vec2{lat.origin.x * t, lat.origin.y * t}, lat.nx,
                 lat.ny);
  LatticeSet out(scaled);
  set.for_each([&](Cell c) { out.add(c); });
  return out;
}

LatticeSet translate(const LatticeSet& set, int di, int dj) {
  LatticeSet out(set.lattice());
  set.for_each([&](Cell c) { out.add(Cell{c.i + di, c.j + dj}); });
  return out;
}

namespace {

void require_same_lattice(const LatticeSet& a, const LatticeSet& b) {
  if (!(a.lattice() == b.lattice()))
    throw ConfigError("set algebra: operands live on different lattices");
}

}  // namespace

LatticeSet set_union(const LatticeSet& a, const LatticeSet& b) {
  require_same_lattice(a, b);
  LatticeSet out = a;
  b.for_each([&](Cell c) { out.add(c); });
  return out;
}

LatticeSet set_intersection(const LatticeSet& a, const LatticeSet& b) {
  require_same_lattice(a, b);
  LatticeSet out(a.lattice());
  a.for_each([&](Cell c) {
    if (b.contains(c)) out.add(c);
  });
  return out;
}

LatticeSet set_difference(const LatticeSet& a, const LatticeSet& b) {
  require_same_lattice(a, b);
  LatticeSet out(a.lattice());
  a.for_each([&](Cell c) {
    if (!b.contains(c)) out.add(c);
  });
  return out;
}

double symmetric_difference_volume(const LatticeSet& a, const LatticeSet& b) {
  require_same_lattice(a, b);
  std::size_t diff = 0;
  a.for_each([&](Cell c) {
    if (!b.contains(c)) ++diff;
  });
  b.for_each([&](Cell c) {
    if (!a.contains(c)) ++diff;
  });
  return static_cast<double>(diff) * a.lattice().cell_volume();
}

}  // namespace wproj
