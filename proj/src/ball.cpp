#include "wproj/ball.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

constexpr double kPi = std::numbers::pi;

double vec_norm(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Adaptive Simpson to a relative tolerance; fa/fm/fb are f at a, midpoint, b.
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double eps,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double eps = rel_tol * std::max(std::abs(whole), 1e-300);
  return simpson_rec(f, a, b, fa, fm, fb, whole, eps, 48);
}

// Radius of T^{-1}(y) for |y| = s >= 1.
double inverse_radius(double s, int d) {
  return std::pow(std::max(0.0, std::pow(s, d) - 1.0), 1.0 / d);
}

double forward_radius(double r, int d) {
  return std::pow(1.0 + std::pow(r, d), 1.0 / d);
}

}  // namespace

double unit_ball_volume(int d) {
  if (d < 1) throw ConfigError("unit_ball_volume: d must be >= 1");
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

std::vector<double> map_T(const std::vector<double>& x) {
  const int d = static_cast<int>(x.size());
  if (d < 2) throw ConfigError("map_T: d must be >= 2");
  const double r = vec_norm(x);
  if (r == 0.0) throw ConfigError("map_T: undefined at the origin");
  const double scale = forward_radius(r, d) / r;
  std::vector<double> y(x);
  for (double& v : y) v *= scale;
  return y;
}

std::vector<double> map_T_inverse(const std::vector<double>& y) {
  const int d = static_cast<int>(y.size());
  if (d < 2) throw ConfigError("map_T_inverse: d must be >= 2");
  const double s = vec_norm(y);
  if (s < 1.0) throw ConfigError("map_T_inverse: defined for |y| >= 1 only");
  const double scale = inverse_radius(s, d) / s;
  std::vector<double> x(y);
  for (double& v : x) v *= scale;
  return x;
}

double ball_energy(int d, double p) {
  if (d < 2) throw ConfigError("ball_energy: d must be >= 2");
  if (p < 1.0) throw ConfigError("ball_energy: p must be >= 1");
  auto integrand = [d, p](double r) {
    return std::pow(forward_radius(r, d) - r, p) * std::pow(r, d - 1);
  };
  const double integral = adaptive_simpson(integrand, 0.0, 1.0, 1e-11);
  return d * unit_ball_volume(d) * integral;
}

RadialPotentials::RadialPotentials(int d, double p, double r_max, int nodes)
    : d_(d), p_(p), r_max_(r_max) {
  if (d < 2) throw ConfigError("potentials: d must be >= 2");
  if (p < 1.0) throw ConfigError("potentials: p must be >= 1");
  if (nodes < 16 || !(r_max > 1.0))
    throw ConfigError("potentials: invalid tabulation parameters");
  step_ = r_max / nodes;
  phi_.resize(nodes + 1);
  psi_.resize(nodes + 1);
  // phi' has the closed form -p ((1+r^d)^{1/d} - r)^{p-1}; integrate it
  // cumulatively with per-interval Simpson. psi is r^p inside the unit ball
  // and (r - g)^p - phi(g) with g = (r^d - 1)^{1/d} outside; there
  // psi'(r) = p (r - g)^{p-1} exactly, the phi'(g) g' term cancels the
  // blowup of g' at r = 1.
  auto dphi = [this](double r) {
    return -p_ * std::pow(forward_radius(r, d_) - r, p_ - 1.0);
  };
  phi_[0] = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double a = k * step_, b = (k + 1) * step_;
    const double m = 0.5 * (a + b);
    phi_[k + 1] = phi_[k] + step_ / 6.0 * (dphi(a) + 4.0 * dphi(m) + dphi(b));
  }
  for (int k = 0; k <= nodes; ++k) {
    const double r = k * step_;
    if (p_ == 1.0) {
      phi_[k] = -r;
      psi_[k] = r;
    } else if (r <= 1.0) {
      psi_[k] = std::pow(r, p_);
    } else {
      const double g = inverse_radius(r, d_);
      psi_[k] = std::pow(r - g, p_) - phi(g);
    }
  }
}

namespace {

// Cubic Hermite on a uniform table with exact endpoint slopes.
double hermite(double t, double y0, double y1, double m0, double m1,
               double step) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * step * m0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * step * m1;
}

}  // namespace

double RadialPotentials::phi(double r) const {
  if (r < 0.0 || r > r_max_ + 1e-12)
    throw ConfigError("potentials: radius outside tabulated range");
  if (p_ == 1.0) return -r;
  r = std::min(r, r_max_);
  std::size_t k = static_cast<std::size_t>(r / step_);
  if (k >= phi_.size() - 1) k = phi_.size() - 2;
  const double t = (r - k * step_) / step_;
  auto dphi = [this](double rr) {
    return -p_ * std::pow(forward_radius(rr, d_) - rr, p_ - 1.0);
  };
  return hermite(t, phi_[k], phi_[k + 1], dphi(k * step_),
                 dphi((k + 1) * step_), step_);
}

double RadialPotentials::psi(double r) const {
  if (r < 0.0 || r > r_max_ + 1e-12)
    throw ConfigError("potentials: radius outside tabulated range");
  if (p_ == 1.0) return r;
  r = std::min(r, r_max_);
  if (r <= 1.0) return std::pow(r, p_);  // closed form inside the ball
  std::size_t k = static_cast<std::size_t>(r / step_);
  if (k >= psi_.size() - 1) k = psi_.size() - 2;
  const double t = (r - k * step_) / step_;
  auto dpsi = [this](double rr) {
    if (rr <= 1.0) return p_ * std::pow(rr, p_ - 1.0);
    return p_ * std::pow(rr - inverse_radius(rr, d_), p_ - 1.0);
  };
  return hermite(t, psi_[k], psi_[k + 1], dpsi(k * step_),
                 dpsi((k + 1) * step_), step_);
}

double dual_lower_bound(const LatticeSet& E, double p) {
  const Lattice& lat = E.lattice();
  const double R = std::sqrt(2.0);  // 2^{1/d} for d = 2
  RadialPotentials pot(2, p);
  E.for_each([&](Cell c) {
    if (norm(lat.center(c)) > R)
      throw ConfigError("dual_lower_bound: set must lie inside B_{2^{1/2}}");
  });
  const double cv = lat.cell_volume();
  double bound = 0.0;
  E.for_each([&](Cell c) { bound += pot.phi(norm(lat.center(c))) * cv; });
  // Complement side over every cell of the plane whose center lies in B_R;
  // indices may fall outside the extent, where the set has no cells anyway.
  const int i0 = static_cast<int>(std::floor((-R - lat.origin.x) / lat.h)) - 1;
  const int i1 = static_cast<int>(std::ceil((R - lat.origin.x) / lat.h)) + 1;
  const int j0 = static_cast<int>(std::floor((-R - lat.origin.y) / lat.h)) - 1;
  const int j1 = static_cast<int>(std::ceil((R - lat.origin.y) / lat.h)) + 1;
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      Cell c{i, j};
      const double r = norm(lat.center(c));
      if (r > R || E.contains(c)) continue;
      bound += pot.psi(r) * cv;
    }
  }
  return bound;
}

FugledeGap fuglede_gap(const NearlySphericalProfile& profile, double p) {
  RadialPotentials pot(2, p);
  const double c = pot.phi(1.0) - pot.psi(1.0);
  auto excess = [&](double r) { return pot.phi(r) - pot.psi(r) - c; };

  // Per angle, integrate (phi - psi - c) r dr over [min(1,R), max(1,R)] with
  // the sign that counts both the inner deficit and the outer excess
  // positively.
  auto angular = [&](double theta) {
    const double R = 1.0 + profile(theta);
    if (R == 1.0) return 0.0;
    const double lo = std::min(R, 1.0), hi = std::max(R, 1.0);
    const double inner =
        adaptive_simpson([&](double r) { return excess(r) * r; }, lo, hi,
                         1e-10);
    return R < 1.0 ? inner : -inner;
  };

  const auto& samples = profile.samples();
  const std::size_t k = samples.size();
  const double piece = 2.0 * kPi / static_cast<double>(k);
  double gap = 0.0, f_l2 = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    const double t0 = a * piece;
    // f is linear on each sample interval; composite Simpson per piece.
    const int panels = 4;
    double acc = angular(t0) + angular(t0 + piece);
    for (int q = 1; q < 2 * panels; ++q) {
      const double w = (q % 2 == 1) ? 4.0 : 2.0;
      acc += w * angular(t0 + piece * q / (2.0 * panels));
    }
    gap += acc * piece / (6.0 * panels);
    const double fa = samples[a], fb = samples[(a + 1) % k];
    f_l2 += piece * (fa * fa + fa * fb + fb * fb) / 3.0;
  }
  return FugledeGap{gap, f_l2};
}

}  // namespace wproj
