// Geometric hypothesis probes: doubling constant, volume lower bound,
// and an empirical Poincare constant over the breakpoint ball family.
#pragma once

#include "soblab/manifold.hpp"

#include <optional>

namespace soblab {

struct GeometryReport {
  double doubling_constant = 1.0;       // C0 = max mu(B(x,2r)) / mu(B(x,r))
  double homogeneous_dimension = 0.0;   // log2(C0)
  int doubling_center = 0;
  double doubling_radius = 0.0;
  double d_exponent = 0.0;
  double mv_constant = kInf;            // inf_{x, 0<r<=1} mu(B(x,r)) / r^d
  double poincare_constant = 0.0;       // empirical lower bound on the best C in (P_q)
  double poincare_q = 2.0;
  bool poincare_local = false;          // restricted to radii <= 1
  int poincare_fields = 0;
  std::uint64_t poincare_seed = 0;
};

namespace detail {

// Mean oscillation and gradient averages entering (P_q) on one ball.
inline std::optional<double> poincare_ratio(const Manifold& m, const Ball& b,
                                            const RealField& f, const RealField& grad,
                                            double q) {
  double fbar = 0.0;
  for (int y : b.members) fbar += f(y) * m.mu(y);
  fbar /= b.volume;
  double osc = 0.0, gav = 0.0;
  for (int y : b.members) {
    osc += std::pow(std::abs(f(y) - fbar), q) * m.mu(y);
    gav += std::pow(grad(y), q) * m.mu(y);
  }
  osc = std::pow(osc / b.volume, 1.0 / q);
  gav = std::pow(gav / b.volume, 1.0 / q);
  if (gav == 0.0) return std::nullopt;  // flat on the ball => oscillation is 0 too
  return osc / (b.radius * gav);
}

}  // namespace detail

// Probes (D), (MV_d) and (P_q) on the breakpoint grid. The doubling grid is
// sorted_radii plus midpoints; the Poincare balls are the closed balls
// {d <= r_i} paired with radius r_i, where the continuum ratio is extremal.
inline GeometryReport geometry_report(const Manifold& m, double d_exponent,
                                      double poincare_q = 2.0, bool local = false,
                                      int sample_fields = 16, std::uint64_t seed = 1) {
  if (!(d_exponent > 0.0)) throw std::invalid_argument("geometry_report: d must be positive");
  if (!(poincare_q >= 1.0)) throw std::invalid_argument("geometry_report: q must be >= 1");
  const int n = m.vertex_count();
  GeometryReport rep;
  rep.d_exponent = d_exponent;
  rep.poincare_q = poincare_q;
  rep.poincare_local = local;
  rep.poincare_seed = seed;

  std::vector<double> grid;
  if (m.sorted_radii.size() >= 2) {
    for (std::size_t i = 0; i < m.sorted_radii.size(); ++i) {
      grid.push_back(m.sorted_radii[i]);
      if (i + 1 < m.sorted_radii.size())
        grid.push_back(0.5 * (m.sorted_radii[i] + m.sorted_radii[i + 1]));
    }
  } else {
    grid = m.sorted_radii;  // degenerate grids fall back to the radii alone
  }
  if (grid.empty()) grid.push_back(1.0);

  for (int x = 0; x < n; ++x) {
    for (double r : grid) {
      const Ball inner = ball(m, x, r);
      const Ball outer = ball(m, x, 2.0 * r);
      const double ratio = outer.volume / inner.volume;
      if (ratio > rep.doubling_constant) {
        rep.doubling_constant = ratio;
        rep.doubling_center = x;
        rep.doubling_radius = r;
      }
      if (r <= 1.0)
        rep.mv_constant = std::min(rep.mv_constant, inner.volume / std::pow(r, d_exponent));
    }
  }
  rep.homogeneous_dimension = std::log2(rep.doubling_constant);

  // Poincare: exhaustive over breakpoint balls, fields = seeded Gaussians
  // plus the ball indicators themselves.
  std::vector<RealField> fields;
  SplitMix64 rng(seed);
  for (int t = 0; t < sample_fields; ++t) {
    RealField f(n);
    for (int i = 0; i < n; ++i) f(i) = rng.next_normal();
    fields.push_back(std::move(f));
  }
  std::vector<std::pair<Ball, double>> balls;  // (closed ball as open at r+, radius r)
  for (int x = 0; x < n; ++x)
    for (double r : m.sorted_radii) {
      if (local && r > 1.0) break;
      Ball b = ball(m, x, std::nextafter(r, kInf));
      if (static_cast<int>(b.members.size()) < 2) continue;
      b.radius = r;  // the inequality is sharpest at the left end of the radius interval
      balls.emplace_back(std::move(b), r);
    }
  for (const auto& [b, r] : balls) {
    RealField indicator = RealField::Zero(n);
    for (int y : b.members) indicator(y) = 1.0;
    fields.push_back(std::move(indicator));
  }
  rep.poincare_fields = static_cast<int>(fields.size());
  for (const RealField& f : fields) {
    const RealField grad = gradient_norm(m, f);
    for (const auto& [b, r] : balls) {
      const auto ratio = detail::poincare_ratio(m, b, f, grad, poincare_q);
      if (ratio) rep.poincare_constant = std::max(rep.poincare_constant, *ratio);
    }
  }
  return rep;
}

}  // namespace soblab
