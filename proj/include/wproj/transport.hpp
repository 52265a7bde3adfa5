#pragma once
// Discrete optimal transport with ground cost |x - y|^p. The exact backend
// integerizes masses and costs and runs a network simplex over a lazily
// priced arc set; optimality of the full pair set is certified through the
// dual potentials, so the sparsification never changes the optimum. The
// entropic backend runs log-domain scaling iterations. Both report
// Kantorovich potentials and a duality gap.

#include <cstdint>
#include <vector>

#include "wproj/lattice.hpp"

namespace wproj {

struct DiscreteMeasure {
  std::vector<Vec2> points;   // length units
  std::vector<double> masses;  // length^d units; capacities for sinks

  double total_mass() const;
  void validate() const;  // finite, masses >= 0, points distinct
};

struct PlanEntry {
  int src = 0;
  int dst = 0;
  double mass = 0.0;
};

struct TransportSolution {
  double cost_pp = 0.0;               // sum of mass * |x-y|^p
  std::vector<PlanEntry> plan;        // positive entries, sorted by (src, dst)
  std::vector<double> phi, psi;       // Kantorovich potentials, float units
  double duality_gap = 0.0;           // >= 0; 0 for the exact backend
  double max_displacement = 0.0;
  double cost_rounding_bound = 0.0;   // |true - integerized| <= this (exact)
  double mass_rounding_error = 0.0;   // mass integerization drift (exact)
  double marginal_error = 0.0;        // total-variation error (entropic)
  bool converged = true;              // false: entropic hit max_iter
  bool capacitated = false;
  std::vector<double> received;       // realized sink marginal (capacitated)
};

struct SolverOptions {
  double cost_scale = 1e9;          // integerization scale for costs
  int max_points = 20000;           // per-side size cap
  int initial_neighbors = 16;       // arcs per source before pricing
  int max_pricing_rounds = 200;
  std::size_t max_arcs = 30000000;
  std::size_t dense_arc_limit = 4000000;  // below this, build all arcs
};

// Equal-mass transportation (marginals fixed on both sides).
TransportSolution solve_exact(const DiscreteMeasure& src,
                              const DiscreteMeasure& dst, double p,
                              const SolverOptions& opts = {});

// Free sink marginal below per-sink capacities (sinks.masses); total
// capacity must cover the source mass.
TransportSolution solve_capacitated(const DiscreteMeasure& src,
                                    const DiscreteMeasure& sinks, double p,
                                    const SolverOptions& opts = {});

// Log-domain scaling iterations at regularization epsilon. Marginal error
// below 1e-6 in total variation counts as converged; otherwise the solution
// is returned with converged = false.
TransportSolution solve_entropic(const DiscreteMeasure& src,
                                 const DiscreteMeasure& dst, double p,
                                 double epsilon, int max_iter = 20000,
                                 const SolverOptions& opts = {});

struct DualityReport {
  double max_feasibility_violation = 0.0;  // max over all pairs of phi+psi-c
  double max_support_violation = 0.0;      // max over plan of |phi+psi-c|
  double max_slackness_violation = 0.0;    // capacitated sink conditions
  double gap = 0.0;                        // primal minus dual objective
};

DualityReport check_duality(const TransportSolution& sol,
                            const DiscreteMeasure& src,
                            const DiscreteMeasure& dst, double p);

// Capacitated transportation from the unit-supply cells of a lattice set to
// every complement cell of a padded index box (capacity one cell volume
// each). Costs come from integer index offsets, so translated copies of a
// set integerize identically. Used by the projection energy.
struct LatticeProjectionLp {
  std::vector<Cell> source_cells;  // lexicographic
  std::vector<Cell> sink_cells;    // materialized sinks
  std::vector<PlanEntry> plan;     // src index -> sink index, mass
  std::vector<double> phi, psi;    // float units, psi <= 0
  int64_t cost_int = 0;
  double quantum = 0.0;  // mass per unit, h^2
  double cost_pp = 0.0;
  double cost_rounding_bound = 0.0;
  double max_displacement = 0.0;
  bool boundary_shell_used = false;
  bool box_certificate_ok = true;  // no implicit out-of-box sink is priced in
  int pricing_rounds = 0;
};

LatticeProjectionLp solve_lattice_projection_lp(const LatticeSet& E, double p,
                                                int pad_cells,
                                                const SolverOptions& opts = {});

}  // namespace wproj
