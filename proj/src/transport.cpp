#include "wproj/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wproj/errors.hpp"
#include "wproj/network_simplex.hpp"

namespace wproj {

double DiscreteMeasure::total_mass() const {
  double s = 0.0;
  for (double m : masses) s += m;
  return s;
}

void DiscreteMeasure::validate() const {
  if (points.size() != masses.size())
    throw ConfigError("measure: points and masses differ in length");
  for (const Vec2& pt : points)
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y))
      throw ConfigError("measure: non-finite point");
  for (double m : masses)
    if (!std::isfinite(m) || m < 0.0)
      throw ConfigError("measure: masses must be finite and nonnegative");
  std::vector<int> order(points.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (points[a].x != points[b].x) return points[a].x < points[b].x;
    return points[a].y < points[b].y;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Vec2 a = points[order[k - 1]], b = points[order[k]];
    if (a.x == b.x && a.y == b.y)
      throw ConfigError("measure: points must be distinct");
  }
}

namespace {

struct UnitMasses {
  std::vector<int64_t> src, dst;
  double quantum = 1.0;
  double drift = 0.0;  // mass moved to repair rounding
};

// Scale masses to integer units. If every mass is an integer multiple of the
// smallest positive one the representation is exact; otherwise a uniform
// quantum small enough for 1e-9 relative resolution is used and the residual
// drift is repaired on the largest entry.
UnitMasses integerize_masses(std::vector<double> a, std::vector<double> b,
                             bool equality, int64_t max_cost_int) {
  const double total_a = [&] {
    double s = 0;
    for (double v : a) s += v;
    return s;
  }();
  if (!(total_a > 0)) throw ConfigError("transport: zero total source mass");

  // Unit budget keeping cost accumulation within int64.
  const int64_t budget =
      std::min<int64_t>(int64_t{1} << 40,
                        (int64_t{1} << 61) / std::max<int64_t>(1, max_cost_int));

  double quantum = 0.0;
  double minpos = std::numeric_limits<double>::infinity();
  for (double v : a)
    if (v > 0) minpos = std::min(minpos, v);
  for (double v : b)
    if (v > 0) minpos = std::min(minpos, v);

  auto try_quantum = [&](double q) {
    double units = 0;
    for (double v : a) units += v / q;
    for (double v : b) units += v / q;
    if (units > static_cast<double>(budget)) return false;
    for (double v : a) {
      const double u = v / q;
      if (std::abs(u - std::round(u)) > 1e-9 * std::max(1.0, u)) return false;
    }
    for (double v : b) {
      const double u = v / q;
      if (std::abs(u - std::round(u)) > 1e-9 * std::max(1.0, u)) return false;
    }
    return true;
  };
  // An exact quantum is usually a small fraction of the least mass
  // (uniform cells, halves, thirds); fall back to a fixed resolution.
  for (int k = 1; k <= 12 && quantum == 0.0; ++k)
    if (try_quantum(minpos / k)) quantum = minpos / k;
  if (quantum == 0.0) {
    const double target_units =
        std::min(static_cast<double>(budget) / 4.0, 1e12);
    quantum = (total_a + [&] {
                double s = 0;
                for (double v : b) s += v;
                return s;
              }()) /
              target_units;
  }

  UnitMasses out;
  out.quantum = quantum;
  out.src.reserve(a.size());
  out.dst.reserve(b.size());
  for (double v : a) {
    out.src.push_back(std::llround(v / quantum));
    out.drift += std::abs(v - static_cast<double>(out.src.back()) * quantum);
  }
  for (double v : b) {
    out.dst.push_back(std::llround(v / quantum));
    out.drift += std::abs(v - static_cast<double>(out.dst.back()) * quantum);
  }

  int64_t sa = 0, sb = 0;
  for (int64_t u : out.src) sa += u;
  for (int64_t u : out.dst) sb += u;
  if (equality) {
    const int64_t diff = sa - sb;
    if (diff != 0) {
      auto it = std::max_element(out.dst.begin(), out.dst.end());
      if (it == out.dst.end() || *it + diff < 0)
        throw SolverError("transport: mass integerization failed");
      *it += diff;
      out.drift += std::abs(static_cast<double>(diff)) * quantum;
    }
  } else if (sb < sa) {
    auto it = std::max_element(out.dst.begin(), out.dst.end());
    if (it == out.dst.end())
      throw ConfigError("transport: no sink capacity");
    *it += sa - sb;
    out.drift += static_cast<double>(sa - sb) * quantum;
  }
  if (sa == 0) throw ConfigError("transport: zero source mass after rounding");
  return out;
}

int64_t cost_int_between(Vec2 a, Vec2 b, double p, double scale) {
  const double dist = std::hypot(a.x - b.x, a.y - b.y);
  return std::llround(std::pow(dist, p) * scale);
}

struct CloudSolveState {
  NetworkSimplex ns;
  std::vector<int> arc_src, arc_snk;  // per NS arc id; -1 for non-bipartite
  int ss_node = -1;
};

void pad_meta(CloudSolveState& st) {
  st.arc_src.resize(st.ns.num_arcs(), -1);
  st.arc_snk.resize(st.ns.num_arcs(), -1);
}

// Shared driver for the equality and capacitated cloud forms.
TransportSolution solve_cloud(const DiscreteMeasure& src,
                              const DiscreteMeasure& dst, double p,
                              bool capacitated, const SolverOptions& opts) {
  src.validate();
  dst.validate();
  if (p < 1.0) throw ConfigError("transport: p must be >= 1");
  const int n = static_cast<int>(src.points.size());
  const int m = static_cast<int>(dst.points.size());
  if (n == 0 || m == 0) throw ConfigError("transport: empty measure");
  if (n > opts.max_points || m > opts.max_points)
    throw ConfigError("transport: instance exceeds the solver size cap");

  const double total_src = src.total_mass();
  std::vector<double> caps = dst.masses;
  if (capacitated) {
    double total_cap = 0;
    for (double& c : caps) {
      c = std::min(c, total_src);  // no sink can receive more than everything
      total_cap += c;
    }
    // compare against unclamped capacity for the feasibility error
    if (dst.total_mass() < total_src * (1.0 - 1e-12))
      throw ConfigError("transport: insufficient sink capacity");
  } else {
    const double total_dst = dst.total_mass();
    if (std::abs(total_src - total_dst) >
        1e-12 * std::max({1.0, total_src, total_dst}))
      throw ConfigError("transport: source and target masses differ");
  }

  // Cost bound over the joint bounding box.
  double lox = src.points[0].x, hix = lox, loy = src.points[0].y, hiy = loy;
  auto extend = [&](const Vec2& v) {
    lox = std::min(lox, v.x);
    hix = std::max(hix, v.x);
    loy = std::min(loy, v.y);
    hiy = std::max(hiy, v.y);
  };
  for (const Vec2& v : src.points) extend(v);
  for (const Vec2& v : dst.points) extend(v);
  const double diam = std::hypot(hix - lox, hiy - loy);
  const int64_t max_cost =
      std::llround(std::pow(diam, p) * opts.cost_scale) + 1;

  UnitMasses units = integerize_masses(src.masses, caps, !capacitated,
                                       max_cost);

  auto cint = [&](int i, int j) {
    return cost_int_between(src.points[i], dst.points[j], p, opts.cost_scale);
  };

  const bool dense =
      static_cast<std::size_t>(n) * static_cast<std::size_t>(m) <=
      opts.dense_arc_limit;

  int knn = std::max(1, opts.initial_neighbors);
  for (;;) {  // rebuild loop; grows knn if the restricted set is infeasible
    CloudSolveState st;
    st.ns.reserve_hint(n + m + 2, max_cost);
    for (int i = 0; i < n; ++i) st.ns.add_node(units.src[i]);
    for (int j = 0; j < m; ++j)
      st.ns.add_node(capacitated ? 0 : -units.dst[j]);
    if (capacitated) {
      int64_t total_units = 0;
      for (int64_t u : units.src) total_units += u;
      st.ss_node = st.ns.add_node(-total_units);
      for (int j = 0; j < m; ++j) {
        st.ns.add_arc(n + j, st.ss_node, units.dst[j], 0);
        pad_meta(st);
      }
    }
    auto add_bipartite = [&](int i, int j) {
      const int id =
          st.ns.add_arc(i, n + j, NetworkSimplex::kInfCap, cint(i, j));
      pad_meta(st);
      st.arc_src[id] = i;
      st.arc_snk[id] = j;
    };
    std::vector<std::vector<int>> adj(n);
    if (dense) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) add_bipartite(i, j);
    } else {
      std::vector<std::pair<double, int>> cand(m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
          const double dx = src.points[i].x - dst.points[j].x;
          const double dy = src.points[i].y - dst.points[j].y;
          cand[j] = {dx * dx + dy * dy, j};
        }
        const int k = std::min(knn, m);
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int q = 0; q < k; ++q) {
          add_bipartite(i, cand[q].second);
          adj[i].push_back(cand[q].second);
        }
        std::sort(adj[i].begin(), adj[i].end());
      }
    }

    bool infeasible = false;
    int rounds = 0;
    for (;;) {
      const auto status = st.ns.solve();
      if (status == NetworkSimplex::Status::infeasible) {
        if (dense) throw SolverError("transport: infeasible instance");
        infeasible = true;
        break;
      }
      if (dense) break;
      // price omitted pairs against the current duals
      if (++rounds > opts.max_pricing_rounds)
        throw SolverError("transport: pricing did not converge");
      const int64_t base = capacitated ? st.ns.potential(st.ss_node)
                                       : st.ns.potential(n);
      std::size_t added = 0;
      for (int i = 0; i < n; ++i) {
        const int64_t phi = st.ns.potential(i) - base;
        for (int j = 0; j < m; ++j) {
          if (std::binary_search(adj[i].begin(), adj[i].end(), j)) continue;
          int64_t psi = base - st.ns.potential(n + j);
          if (capacitated) psi = std::min<int64_t>(psi, 0);
          if (phi + psi > cint(i, j)) {
            add_bipartite(i, j);
            adj[i].push_back(j);
            ++added;
          }
        }
        std::sort(adj[i].begin(), adj[i].end());
      }
      if (st.arc_src.size() > opts.max_arcs)
        throw SolverError("transport: arc budget exceeded");
      if (added == 0) break;
    }
    if (infeasible) {
      if (knn >= m)
        throw SolverError("transport: infeasible restricted instance");
      knn = std::min(m, knn * 2);
      continue;
    }

    // extract
    TransportSolution sol;
    sol.capacitated = capacitated;
    const double scale = opts.cost_scale;
    sol.cost_pp = static_cast<double>(st.ns.total_cost()) / scale *
                  units.quantum;
    int64_t total_units = 0;
    for (int64_t u : units.src) total_units += u;
    sol.cost_rounding_bound =
        static_cast<double>(total_units) * 0.5 / scale * units.quantum;
    sol.mass_rounding_error = units.drift;

    const int64_t base = capacitated ? st.ns.potential(st.ss_node)
                                     : st.ns.potential(n);
    sol.phi.resize(n);
    sol.psi.resize(m);
    int64_t dual_int = 0;
    for (int i = 0; i < n; ++i) {
      const int64_t f = st.ns.potential(i) - base;
      sol.phi[i] = static_cast<double>(f) / scale;
      dual_int += f * units.src[i];
    }
    for (int j = 0; j < m; ++j) {
      int64_t g = base - st.ns.potential(n + j);
      if (capacitated) g = std::min<int64_t>(g, 0);
      sol.psi[j] = static_cast<double>(g) / scale;
      dual_int += g * units.dst[j];
    }
    const int64_t gap_int = st.ns.total_cost() - dual_int;
    if (gap_int != 0)
      throw InvariantError("transport: exact solver lost strong duality");
    sol.duality_gap = 0.0;

    sol.received.assign(capacitated ? m : 0, 0.0);
    for (int a = 0; a < st.ns.num_arcs(); ++a) {
      if (st.arc_src[a] < 0) continue;
      const int64_t f = st.ns.flow(a);
      if (f <= 0) continue;
      const int i = st.arc_src[a], j = st.arc_snk[a];
      sol.plan.push_back(
          {i, j, static_cast<double>(f) * units.quantum});
      if (capacitated) sol.received[j] += static_cast<double>(f) * units.quantum;
      const double disp = std::hypot(src.points[i].x - dst.points[j].x,
                                     src.points[i].y - dst.points[j].y);
      sol.max_displacement = std::max(sol.max_displacement, disp);
    }
    std::sort(sol.plan.begin(), sol.plan.end(),
              [](const PlanEntry& a, const PlanEntry& b) {
                if (a.src != b.src) return a.src < b.src;
                return a.dst < b.dst;
              });
    return sol;
  }
}

}  // namespace

TransportSolution solve_exact(const DiscreteMeasure& src,
                              const DiscreteMeasure& dst, double p,
                              const SolverOptions& opts) {
  return solve_cloud(src, dst, p, false, opts);
}

TransportSolution solve_capacitated(const DiscreteMeasure& src,
                                    const DiscreteMeasure& sinks, double p,
                                    const SolverOptions& opts) {
  return solve_cloud(src, sinks, p, true, opts);
}

TransportSolution solve_entropic(const DiscreteMeasure& src,
                                 const DiscreteMeasure& dst, double p,
                                 double epsilon, int max_iter,
                                 const SolverOptions& opts) {
  (void)opts;
  src.validate();
  dst.validate();
  if (p < 1.0) throw ConfigError("transport: p must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("entropic: epsilon must be positive");
  if (max_iter < 1) throw ConfigError("entropic: max_iter must be >= 1");
  const int n = static_cast<int>(src.points.size());
  const int m = static_cast<int>(dst.points.size());
  if (n == 0 || m == 0) throw ConfigError("transport: empty measure");
  if (static_cast<std::size_t>(n) * m > std::size_t{10000000})
    throw ConfigError("entropic: instance too large for a dense kernel");
  const double total_src = src.total_mass();
  const double total_dst = dst.total_mass();
  if (std::abs(total_src - total_dst) >
      1e-12 * std::max({1.0, total_src, total_dst}))
    throw ConfigError("transport: source and target masses differ");

  std::vector<double> cost(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      cost[static_cast<std::size_t>(i) * m + j] =
          std::pow(std::hypot(src.points[i].x - dst.points[j].x,
                              src.points[i].y - dst.points[j].y),
                   p);

  const auto& a = src.masses;
  const auto& b = dst.masses;
  std::vector<double> f(n, 0.0), g(m, 0.0);
  double epsilon_run = epsilon;  // current level of the epsilon schedule
  auto lse_row = [&](int i) {
    double best = -std::numeric_limits<double>::infinity();
    const double* c = &cost[static_cast<std::size_t>(i) * m];
    for (int j = 0; j < m; ++j)
      best = std::max(best, (g[j] - c[j]) / epsilon_run);
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      s += std::exp((g[j] - c[j]) / epsilon_run - best);
    return best + std::log(s);
  };
  auto lse_col = [&](int j) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      best = std::max(best,
                      (f[i] - cost[static_cast<std::size_t>(i) * m + j]) /
                          epsilon_run);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += std::exp((f[i] - cost[static_cast<std::size_t>(i) * m + j]) /
                        epsilon_run -
                    best);
    return best + std::log(s);
  };

  TransportSolution sol;
  sol.converged = false;
  double err = std::numeric_limits<double>::infinity();
  auto sweep = [&] {
    for (int i = 0; i < n; ++i)
      f[i] = a[i] > 0 ? epsilon_run * std::log(a[i]) - epsilon_run * lse_row(i)
                      : -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      g[j] = b[j] > 0 ? epsilon_run * std::log(b[j]) - epsilon_run * lse_col(j)
                      : -std::numeric_limits<double>::infinity();
  };
  auto row_error = [&] {
    // column marginals are exact right after the g update; check rows
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      const double* c = &cost[static_cast<std::size_t>(i) * m];
      for (int j = 0; j < m; ++j) {
        if (a[i] <= 0 || b[j] <= 0) continue;
        row += std::exp((f[i] + g[j] - c[j]) / epsilon_run);
      }
      e += std::abs(row - a[i]);
    }
    return e;
  };
  // warm start through a geometric epsilon schedule; the duals carry over
  double max_cost = 0.0;
  for (double c : cost) max_cost = std::max(max_cost, c);
  int budget = max_iter;
  for (epsilon_run = std::max(epsilon, max_cost / 4.0);
       epsilon_run > epsilon && budget > max_iter / 2; epsilon_run *= 0.5) {
    for (int it = 0; it < 30 && budget > max_iter / 2; ++it, --budget) sweep();
  }
  epsilon_run = epsilon;
  while (budget-- > 0) {
    sweep();
    if (budget % 5 == 0) {
      err = row_error();
      if (err <= 1e-6 * std::max(1.0, total_src)) {
        sol.converged = true;
        break;
      }
    }
  }
  if (!sol.converged) err = row_error();
  sol.marginal_error = err;

  // plan, cost, and a feasible dual pair via the c-transform of f
  double cost_pp = 0.0;
  const double keep = 1e-15 * std::max(1.0, total_src);
  for (int i = 0; i < n; ++i) {
    if (a[i] <= 0) continue;
    const double* c = &cost[static_cast<std::size_t>(i) * m];
    for (int j = 0; j < m; ++j) {
      if (b[j] <= 0) continue;
      const double mass = std::exp((f[i] + g[j] - c[j]) / epsilon_run);
      cost_pp += mass * c[j];
      if (mass > keep) {
        sol.plan.push_back({i, j, mass});
        const double disp = std::hypot(src.points[i].x - dst.points[j].x,
                                       src.points[i].y - dst.points[j].y);
        sol.max_displacement = std::max(sol.max_displacement, disp);
      }
    }
  }
  sol.cost_pp = cost_pp;
  sol.phi = f;
  sol.psi.assign(m, 0.0);
  double dual = 0.0;
  for (int j = 0; j < m; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      best = std::min(best,
                      cost[static_cast<std::size_t>(i) * m + j] - f[i]);
    sol.psi[j] = best;
    dual += b[j] * best;
  }
  for (int i = 0; i < n; ++i) dual += a[i] * (std::isfinite(f[i]) ? f[i] : 0.0);
  sol.duality_gap = std::max(0.0, cost_pp - dual);
  return sol;
}

DualityReport check_duality(const TransportSolution& sol,
                            const DiscreteMeasure& src,
                            const DiscreteMeasure& dst, double p) {
  DualityReport rep;
  const int n = static_cast<int>(src.points.size());
  const int m = static_cast<int>(dst.points.size());
  if (static_cast<int>(sol.phi.size()) != n ||
      static_cast<int>(sol.psi.size()) != m)
    throw ConfigError("check_duality: potential sizes do not match measures");
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double c = std::pow(std::hypot(src.points[i].x - dst.points[j].x,
                                           src.points[i].y - dst.points[j].y),
                                p);
      worst = std::max(worst, sol.phi[i] + sol.psi[j] - c);
    }
  }
  rep.max_feasibility_violation = worst;
  for (const PlanEntry& e : sol.plan) {
    const double c =
        std::pow(std::hypot(src.points[e.src].x - dst.points[e.dst].x,
                            src.points[e.src].y - dst.points[e.dst].y),
                 p);
    rep.max_support_violation = std::max(
        rep.max_support_violation, std::abs(sol.phi[e.src] + sol.psi[e.dst] - c));
  }
  double dual = 0.0;
  for (int i = 0; i < n; ++i) dual += src.masses[i] * sol.phi[i];
  for (int j = 0; j < m; ++j) dual += dst.masses[j] * sol.psi[j];
  rep.gap = sol.cost_pp - dual;
  if (sol.capacitated) {
    // psi <= 0 and psi < 0 only at saturated sinks
    for (int j = 0; j < m; ++j) {
      rep.max_slackness_violation =
          std::max(rep.max_slackness_violation, sol.psi[j]);
      if (sol.psi[j] < -1e-9) {
        const double received =
            j < static_cast<int>(sol.received.size()) ? sol.received[j] : 0.0;
        rep.max_slackness_violation = std::max(
            rep.max_slackness_violation, dst.masses[j] - received);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lattice projection LP
// ---------------------------------------------------------------------------

namespace {

struct Offset {
  int di, dj;
  int64_t c;
};

// Offsets sorted by (squared distance, di, dj) with their integer costs.
void extend_offsets(std::vector<Offset>& offsets, int radius_cells, double h,
                    double p, double scale) {
  offsets.clear();
  const int64_t r2max =
      static_cast<int64_t>(radius_cells) * radius_cells;
  for (int di = -radius_cells; di <= radius_cells; ++di) {
    for (int dj = -radius_cells; dj <= radius_cells; ++dj) {
      if (di == 0 && dj == 0) continue;
      const int64_t d2 =
          static_cast<int64_t>(di) * di + static_cast<int64_t>(dj) * dj;
      if (d2 > r2max) continue;
      const double dist = h * std::sqrt(static_cast<double>(d2));
      offsets.push_back({di, dj, std::llround(std::pow(dist, p) * scale)});
    }
  }
  std::sort(offsets.begin(), offsets.end(), [](const Offset& a,
                                               const Offset& b) {
    const int64_t da = static_cast<int64_t>(a.di) * a.di +
                       static_cast<int64_t>(a.dj) * a.dj;
    const int64_t db = static_cast<int64_t>(b.di) * b.di +
                       static_cast<int64_t>(b.dj) * b.dj;
    if (da != db) return da < db;
    if (a.di != b.di) return a.di < b.di;
    return a.dj < b.dj;
  });
}

}  // namespace

LatticeProjectionLp solve_lattice_projection_lp(const LatticeSet& E, double p,
                                                int pad_cells,
                                                const SolverOptions& opts) {
  if (E.empty()) throw ConfigError("projection lp: empty set");
  if (p < 1.0) throw ConfigError("projection lp: p must be >= 1");
  if (pad_cells < 1) throw ConfigError("projection lp: padding must be >= 1");
  const Lattice& lat = E.lattice();
  const double h = lat.h, scale = opts.cost_scale;

  LatticeProjectionLp out;
  out.source_cells = E.cells();
  const int n = static_cast<int>(out.source_cells.size());

  int bi0 = INT32_MAX, bi1 = INT32_MIN, bj0 = INT32_MAX, bj1 = INT32_MIN;
  for (const Cell& c : out.source_cells) {
    bi0 = std::min(bi0, c.i);
    bi1 = std::max(bi1, c.i);
    bj0 = std::min(bj0, c.j);
    bj1 = std::max(bj1, c.j);
  }
  const int i0 = bi0 - pad_cells, i1 = bi1 + pad_cells;
  const int j0 = bj0 - pad_cells, j1 = bj1 + pad_cells;
  const int64_t W = i1 - i0 + 1, H = j1 - j0 + 1;
  if (W * H > int64_t{400000000})
    throw SolverError("projection lp: padded box too large");

  const int64_t diag2 = W * W + H * H;
  const int64_t max_cost =
      std::llround(std::pow(h * std::sqrt(static_cast<double>(diag2)), p) *
                   scale) +
      1;

  std::vector<Offset> offsets;
  const int max_radius = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(diag2)))) + 1;

  auto box_index = [&](int bi, int bj) {
    return static_cast<std::size_t>(bi - i0) * H + (bj - j0);
  };
  auto in_box = [&](int bi, int bj) {
    return bi >= i0 && bi <= i1 && bj >= j0 && bj <= j1;
  };

  int ladder_dirs = 12;
  for (;;) {  // rebuild loop, widens the seeding ladder if infeasible
    NetworkSimplex ns;
    ns.reserve_hint(static_cast<int>(n + W * H + 2), max_cost);
    std::vector<int32_t> sink_index(static_cast<std::size_t>(W * H), -1);
    std::vector<Cell> sink_cells;
    std::vector<int> sink_node, sink_ss_arc;
    std::vector<int> arc_src, arc_snk;

    for (int i = 0; i < n; ++i) ns.add_node(1);
    const int ss = ns.add_node(-static_cast<int64_t>(n));
    bool started = false;

    auto pad_arcs = [&] {
      arc_src.resize(ns.num_arcs(), -1);
      arc_snk.resize(ns.num_arcs(), -1);
    };
    auto materialize = [&](int bi, int bj) {
      const std::size_t key = box_index(bi, bj);
      int s = sink_index[key];
      if (s >= 0) return s;
      s = static_cast<int>(sink_cells.size());
      sink_index[key] = s;
      sink_cells.push_back(Cell{bi, bj});
      const int node = ns.add_node(0);
      const int sa = ns.add_arc(node, ss, 1, 0);
      pad_arcs();
      sink_node.push_back(node);
      sink_ss_arc.push_back(sa);
      if (started) ns.attach_node(node, sa);
      return s;
    };
    auto add_arc_to = [&](int src_idx, int bi, int bj, int64_t c) {
      const int s = materialize(bi, bj);
      const int id =
          ns.add_arc(src_idx, sink_node[s], NetworkSimplex::kInfCap, c);
      pad_arcs();
      arc_src[id] = src_idx;
      arc_snk[id] = s;
    };

    // Seed arcs: nearest complement cells plus a geometric ladder of radii
    // in several directions, so the restricted instance stays feasible and
    // the first duals already see every scale.
    extend_offsets(offsets, std::min(max_radius, 64), h, p, scale);
    int offsets_radius = std::min(max_radius, 64);
    for (int i = 0; i < n; ++i) {
      const Cell sc = out.source_cells[i];
      int found = 0;
      std::size_t cursor = 0;
      while (found < opts.initial_neighbors) {
        if (cursor >= offsets.size()) {
          if (offsets_radius >= max_radius) break;
          offsets_radius = std::min(max_radius, offsets_radius * 2);
          // regeneration preserves the sorted prefix under the old radius,
          // so the cursor stays valid
          extend_offsets(offsets, offsets_radius, h, p, scale);
          continue;
        }
        const Offset& o = offsets[cursor++];
        const int bi = sc.i + o.di, bj = sc.j + o.dj;
        if (!in_box(bi, bj) || E.contains(Cell{bi, bj})) continue;
        add_arc_to(i, bi, bj, o.c);
        ++found;
      }
      // ladder: powers of two out to the box scale
      for (int q = 0; q < ladder_dirs; ++q) {
        const double ang = 2.0 * std::numbers::pi * q / ladder_dirs;
        for (int64_t rad = 4; rad <= std::max(W, H); rad *= 2) {
          const int bi = sc.i + static_cast<int>(std::lround(
                                    std::cos(ang) * static_cast<double>(rad)));
          const int bj = sc.j + static_cast<int>(std::lround(
                                    std::sin(ang) * static_cast<double>(rad)));
          if (!in_box(bi, bj) || E.contains(Cell{bi, bj})) continue;
          const int di = bi - sc.i, dj = bj - sc.j;
          const double dist =
              h * std::sqrt(static_cast<double>(static_cast<int64_t>(di) * di +
                                                static_cast<int64_t>(dj) * dj));
          add_arc_to(i, bi, bj, std::llround(std::pow(dist, p) * scale));
        }
      }
    }

    bool infeasible = false;
    for (;;) {
      const auto status = ns.solve();
      started = true;
      if (status == NetworkSimplex::Status::infeasible) {
        infeasible = true;
        break;
      }
      if (++out.pricing_rounds > opts.max_pricing_rounds)
        throw SolverError("projection lp: pricing did not converge");

      // price omitted arcs: psi <= 0 caps the useful scan radius at
      // c(dist) < phi_i
      const int64_t base = ns.potential(ss);
      std::size_t added = 0;
      for (int i = 0; i < n; ++i) {
        const int64_t phi = ns.potential(i) - base;
        if (phi <= 0) continue;
        const Cell sc = out.source_cells[i];
        int added_here = 0;
        for (std::size_t cur = 0; added_here < 64;) {
          if (cur >= offsets.size()) {
            if (offsets_radius >= max_radius) break;
            offsets_radius = std::min(max_radius, offsets_radius * 2);
            extend_offsets(offsets, offsets_radius, h, p, scale);
            continue;
          }
          const Offset& o = offsets[cur++];
          if (o.c >= phi) break;  // no remaining offset can be violated
          const int bi = sc.i + o.di, bj = sc.j + o.dj;
          if (!in_box(bi, bj) || E.contains(Cell{bi, bj})) continue;
          const int32_t s = sink_index[box_index(bi, bj)];
          int64_t psi = 0;
          if (s >= 0) psi = std::min<int64_t>(base - ns.potential(sink_node[s]), 0);
          if (phi + psi > o.c) {
            add_arc_to(i, bi, bj, o.c);
            ++added;
            ++added_here;
          }
        }
      }
      if (arc_src.size() > opts.max_arcs)
        throw SolverError("projection lp: arc budget exceeded");
      if (added == 0) break;
    }
    if (infeasible) {
      if (ladder_dirs >= 96)
        throw SolverError("projection lp: could not seed a feasible instance");
      ladder_dirs *= 2;
      out.pricing_rounds = 0;
      continue;
    }

    // extraction
    out.quantum = lat.cell_volume();
    out.cost_int = ns.total_cost();
    out.cost_pp =
        static_cast<double>(out.cost_int) / scale * out.quantum;
    out.cost_rounding_bound = static_cast<double>(n) * 0.5 / scale *
                              out.quantum;
    const int64_t base = ns.potential(ss);
    out.phi.resize(n);
    out.psi.resize(sink_cells.size());
    int64_t dual_int = 0;
    std::vector<int64_t> phi_int(n), psi_int(sink_cells.size());
    for (int i = 0; i < n; ++i) {
      phi_int[i] = ns.potential(i) - base;
      out.phi[i] = static_cast<double>(phi_int[i]) / scale;
      dual_int += phi_int[i];
    }
    for (std::size_t s = 0; s < sink_cells.size(); ++s) {
      psi_int[s] = std::min<int64_t>(base - ns.potential(sink_node[s]), 0);
      out.psi[s] = static_cast<double>(psi_int[s]) / scale;
      dual_int += psi_int[s];  // capacity is one unit per sink
    }
    if (out.cost_int != dual_int)
      throw InvariantError("projection lp: exact solver lost strong duality");

    for (int a = 0; a < ns.num_arcs(); ++a) {
      if (arc_src[a] < 0) continue;
      const int64_t f = ns.flow(a);
      if (f <= 0) continue;
      const int i = arc_src[a], s = arc_snk[a];
      out.plan.push_back({i, s, static_cast<double>(f) * out.quantum});
      const Cell a_cell = out.source_cells[i], b_cell = sink_cells[s];
      const double di = (a_cell.i - b_cell.i) * h;
      const double dj = (a_cell.j - b_cell.j) * h;
      out.max_displacement =
          std::max(out.max_displacement, std::hypot(di, dj));
      if (b_cell.i == i0 || b_cell.i == i1 || b_cell.j == j0 ||
          b_cell.j == j1)
        out.boundary_shell_used = true;
    }
    std::sort(out.plan.begin(), out.plan.end(),
              [](const PlanEntry& a, const PlanEntry& b) {
                if (a.src != b.src) return a.src < b.src;
                return a.dst < b.dst;
              });

    // certificate that no implicit sink outside the box is attractive
    for (int i = 0; i < n && out.box_certificate_ok; ++i) {
      const Cell sc = out.source_cells[i];
      const int gap = std::min(std::min(sc.i - i0 + 1, i1 - sc.i + 1),
                               std::min(sc.j - j0 + 1, j1 - sc.j + 1));
      const int64_t c_out =
          std::llround(std::pow(h * static_cast<double>(gap), p) * scale);
      if (phi_int[i] > c_out) out.box_certificate_ok = false;
    }
    out.sink_cells = std::move(sink_cells);
    return out;
  }
}

}  // namespace wproj
