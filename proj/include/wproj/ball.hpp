#pragma once
// Closed-form and quadrature oracles for the unit ball: the radial transport
// map onto the surrounding annulus of equal volume, the transport energy of
// the ball in any dimension, the radial dual potentials, and the quadratic
// stability gap bound for nearly spherical sets.

#include <vector>

#include "wproj/lattice.hpp"

namespace wproj {

// Volume of the unit ball in dimension d.
double unit_ball_volume(int d);

// T(x) = (1 + |x|^d)^{1/d} x / |x|; pushes the ball onto the annulus between
// radii 1 and 2^{1/d} with unit Jacobian. Errors on x = 0.
std::vector<double> map_T(const std::vector<double>& x);
// Inverse of T, defined for |y| >= 1.
std::vector<double> map_T_inverse(const std::vector<double>& y);

// Transport energy of the unit ball:
//   d * omega_d * integral_0^1 ((1 + r^d)^{1/d} - r)^p r^{d-1} dr,
// by adaptive quadrature to relative error 1e-10.
double ball_energy(int d, double p);

// Radial dual potentials (phi on sources, psi on targets) normalized by
// phi(0) = 0, tabulated up to r_max with cubic interpolation. For p = 1 the
// closed forms phi = -r, psi = r are used exactly. phi is nonincreasing and
// psi nondecreasing.
class RadialPotentials {
 public:
  RadialPotentials(int d, double p, double r_max = 2.0, int nodes = 10000);

  double phi(double r) const;
  double psi(double r) const;
  int dim() const { return d_; }
  double exponent() const { return p_; }
  double r_max() const { return r_max_; }
  const std::vector<double>& phi_table() const { return phi_; }
  const std::vector<double>& psi_table() const { return psi_; }
  double grid_step() const { return step_; }

 private:
  int d_;
  double p_;
  double r_max_;
  double step_;
  std::vector<double> phi_, psi_;
};

// Duality lower bound for the transport energy of a set contained in the
// ball of radius 2^{1/d}: sum of phi over the set plus psi over the rest of
// that ball, cell centers times h^2. Errors if a cell center lies outside.
double dual_lower_bound(const LatticeSet& E, double p);

struct FugledeGap {
  double gap_bound;  // polar quadrature of (phi - psi - c) over B_1 delta E
  double f_l2;       // integral of f(theta)^2 over the circle
};

// Quadratic stability bound for the boundary graph (1 + f) x, d = 2.
FugledeGap fuglede_gap(const NearlySphericalProfile& profile, double p);

}  // namespace wproj
