// Strichartz-type square functionals: exact piecewise radial integration,
// the Sobolev-characterization experiment, and the pointwise inequalities
// that drive the second route to the algebra property.
#pragma once

#include "soblab/nonlinearity.hpp"
#include "soblab/norms.hpp"

namespace soblab {

struct SFuncRequest {
  double alpha = 0.5;  // in (0, 1)
  double rho = 1.0;    // >= 1
  bool local = false;  // integrate r in (0, 1) instead of (0, inf)

  void validate() const {
    if (!(alpha > 0.0) || !(alpha < 1.0))
      throw std::invalid_argument("SFuncRequest: alpha must be in (0, 1)");
    if (!(rho >= 1.0)) throw std::invalid_argument("SFuncRequest: rho must be >= 1");
  }
};

namespace detail {

// S^2(x) = sum over membership intervals of A_i(x)^{2/rho} * int r^{-2a-1} dr.
// The inner average A is constant between consecutive breakpoint radii, so the
// radial integral has the closed form (lo^{-2a} - hi^{-2a}) / (2a). Extra
// breakpoints refine intervals without changing the value.
template <typename Scalar>
double strichartz_at(const Manifold& m, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                     int x, const SFuncRequest& req, std::span<const double> extra) {
  const int n = m.vertex_count();
  std::vector<std::pair<double, int>> by_dist;
  by_dist.reserve(n - 1);
  for (int y = 0; y < n; ++y)
    if (y != x) by_dist.push_back({m.dist(x, y), y});
  std::sort(by_dist.begin(), by_dist.end());

  // distinct distances from x, with the cumulative rho-averages at each level
  std::vector<double> breaks;
  std::vector<double> averages;  // A on the interval starting at breaks[i]
  double mass = m.mu(x);         // closed ball always contains x, |f(x)-f(x)| = 0
  double osc = 0.0;
  std::size_t idx = 0;
  while (idx < by_dist.size()) {
    const double d = by_dist[idx].first;
    while (idx < by_dist.size() && by_dist[idx].first == d) {
      const int y = by_dist[idx].second;
      osc += std::pow(std::abs(std::complex<double>(f(y) - f(x))), req.rho) * m.mu(y);
      mass += m.mu(y);
      ++idx;
    }
    breaks.push_back(d);
    averages.push_back(osc / mass);
  }
  if (breaks.empty()) return 0.0;

  // merge user-supplied refinement points; values on subintervals are looked
  // up from the enclosing membership level
  std::vector<double> grid(breaks);
  for (double e : extra)
    if (e > breaks.front() && std::find(grid.begin(), grid.end(), e) == grid.end())
      grid.push_back(e);
  std::sort(grid.begin(), grid.end());

  const double two_alpha = 2.0 * req.alpha;
  auto segment = [two_alpha](double lo, double hi) {
    if (std::isinf(hi)) return std::pow(lo, -two_alpha) / two_alpha;
    return (std::pow(lo, -two_alpha) - std::pow(hi, -two_alpha)) / two_alpha;
  };
  auto level_at = [&breaks, &averages](double r) {
    // membership on (breaks[k], breaks[k+1]] is the closed ball at breaks[k]
    const auto it = std::upper_bound(breaks.begin(), breaks.end(), r);
    const std::size_t k = static_cast<std::size_t>(it - breaks.begin());
    return averages[std::min(k == 0 ? 0 : k - 1, averages.size() - 1)];
  };

  const double r_cut = req.local ? 1.0 : kInf;
  std::vector<double> terms;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lo = grid[i];
    const double hi = i + 1 < grid.size() ? grid[i + 1] : kInf;
    if (lo >= r_cut) break;
    const double hi_c = std::min(hi, r_cut);
    if (!(hi_c > lo)) continue;
    const double a = level_at(lo);
    if (a > 0.0) terms.push_back(std::pow(a, 2.0 / req.rho) * segment(lo, hi_c));
  }
  if (terms.empty()) return 0.0;
  return std::sqrt(pairwise_sum(terms));
}

}  // namespace detail

template <typename Scalar>
RealField strichartz_functional(const Manifold& m,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                                const SFuncRequest& req,
                                std::span<const double> extra_breakpoints = {}) {
  req.validate();
  if (f.size() != m.vertex_count())
    throw std::invalid_argument("strichartz_functional: field size mismatch");
  RealField out(m.vertex_count());
  for (int x = 0; x < m.vertex_count(); ++x)
    out(x) = detail::strichartz_at(m, f, x, req, extra_breakpoints);
  return out;
}

struct CheckResult {
  bool holds = true;
  double max_violation = 0.0;  // most negative slack, reported as a positive number
  double max_slack = 0.0;
};

// S^{rho1} f <= S^{rho2} f pointwise for rho1 <= rho2 (power-mean inequality).
template <typename Scalar>
CheckResult rho_monotonicity_check(const Manifold& m,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                                   double alpha, double rho1, double rho2,
                                   bool local = false, double tol = 1e-12) {
  if (!(1.0 <= rho1) || !(rho1 <= rho2))
    throw std::invalid_argument("rho_monotonicity_check: need 1 <= rho1 <= rho2");
  const RealField s1 = strichartz_functional(m, f, {alpha, rho1, local});
  const RealField s2 = strichartz_functional(m, f, {alpha, rho2, local});
  CheckResult res;
  for (int x = 0; x < m.vertex_count(); ++x) {
    const double slack = s2(x) - s1(x);
    res.max_slack = std::max(res.max_slack, slack);
    if (slack < -res.max_violation) res.max_violation = -slack;
  }
  res.holds = res.max_violation <= tol;
  return res;
}

// S(fg) <= ||g||_inf S(f) + ||f||_inf S(g) pointwise (Minkowski).
template <typename Scalar>
CheckResult pointwise_subadditivity_check(const Manifold& m,
                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g,
                                          double alpha, double rho, bool local = false,
                                          double tol = 1e-10) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const SFuncRequest req{alpha, rho, local};
  const RealField sf = strichartz_functional(m, f, req);
  const RealField sg = strichartz_functional(m, g, req);
  const RealField sfg = strichartz_functional(m, Vec(f.cwiseProduct(g)), req);
  double f_sup = 0.0, g_sup = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    f_sup = std::max(f_sup, std::abs(std::complex<double>(f(i))));
    g_sup = std::max(g_sup, std::abs(std::complex<double>(g(i))));
  }
  CheckResult res;
  for (int x = 0; x < m.vertex_count(); ++x) {
    const double slack = g_sup * sf(x) + f_sup * sg(x) - sfg(x);
    res.max_slack = std::max(res.max_slack, slack);
    if (slack < -res.max_violation) res.max_violation = -slack;
  }
  res.holds = res.max_violation <= tol;
  return res;
}

// ---- characterization experiment -------------------------------------------

struct CharacterizationReport {
  double alpha = 0.0, p = 0.0, rho = 0.0;
  bool global = true;
  bool hypothesis_violated = false;  // flags p <= rho
  std::vector<double> ratios;        // ||S f||_p / ||L^{alpha/m} f||_p per trial
  double min_ratio = kInf;           // empirical c_1
  double max_ratio = 0.0;            // empirical c_2
  int excluded = 0;
};

inline CharacterizationReport characterization_report(const SpectralOperator& op,
                                                      const Manifold& m, double alpha,
                                                      double p, double rho, int trials,
                                                      std::uint64_t seed, bool global = true) {
  CharacterizationReport rep;
  rep.alpha = alpha;
  rep.p = p;
  rep.rho = rho;
  rep.global = global;
  rep.hypothesis_violated = !(p > rho);
  const SFuncRequest req{alpha, rho, !global};
  for (int trial = 0; trial < trials; ++trial) {
    RealField f = ensemble_field(op, seed, trial);
    if (global) f = project_zero_mean(op, f);
    const double seminorm =
        detail::lp_norm(op.measure, fractional_power(op, alpha / op.order_m, f), p);
    const RealField s = strichartz_functional(m, f, req);
    double ratio;
    if (global) {
      if (seminorm == 0.0) {
        ++rep.excluded;
        continue;
      }
      ratio = detail::lp_norm(op.measure, s, p) / seminorm;
    } else {
      const double fp = detail::lp_norm(op.measure, f, p);
      const double denom = seminorm + fp;
      if (denom == 0.0) {
        ++rep.excluded;
        continue;
      }
      ratio = (detail::lp_norm(op.measure, s, p) + fp) / denom;
    }
    rep.ratios.push_back(ratio);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

// ---- nonlinearity action -----------------------------------------------------

struct NonlinearityReport {
  std::string nonlinearity;
  double alpha = 0.0, p = 0.0, rho = 1.0;
  double pointwise_max_violation = 0.0;  // S(F(f)) <= Lip * S(f) slack
  bool pointwise_holds = true;
  std::vector<double> norm_ratios;  // ||F(f)||_{W^{alpha,p}} / ||f||_{W^{alpha,p}}
  double max_norm_ratio = 0.0;
  int excluded = 0;
};

// Verifies the mechanism S(F(f)) <= Lip(F) S(f) exactly and reports the
// norm-level constant over the ensemble. F must carry a Lipschitz certificate.
inline NonlinearityReport nonlinearity_report(const SpectralOperator& op, const Manifold& m,
                                              const Nonlinearity& F, double alpha, double p,
                                              int trials, std::uint64_t seed,
                                              double rho = 1.0, double tol = 1e-10) {
  if (!F.real_fn || !F.lipschitz_on)
    throw std::invalid_argument("nonlinearity_report: F has no Lipschitz certificate");
  NonlinearityReport rep;
  rep.nonlinearity = F.name;
  rep.alpha = alpha;
  rep.p = p;
  rep.rho = rho;
  const SFuncRequest req{alpha, rho, false};
  for (int trial = 0; trial < trials; ++trial) {
    const RealField f = ensemble_field(op, seed, trial);
    const double range = f.cwiseAbs().maxCoeff();
    const double lip = F.lipschitz_on(range);
    RealField ff(f.size());
    for (int i = 0; i < f.size(); ++i) ff(i) = F.real_fn(f(i));
    const RealField sf = strichartz_functional(m, f, req);
    const RealField sff = strichartz_functional(m, ff, req);
    for (int x = 0; x < m.vertex_count(); ++x) {
      const double violation = sff(x) - lip * sf(x);
      rep.pointwise_max_violation = std::max(rep.pointwise_max_violation, violation);
    }
    const double wf = sobolev_norm(op, f, alpha, p, /*homogeneous=*/false);
    if (wf == 0.0) {
      ++rep.excluded;
      continue;
    }
    const double ratio = sobolev_norm(op, ff, alpha, p, /*homogeneous=*/false) / wf;
    rep.norm_ratios.push_back(ratio);
    rep.max_norm_ratio = std::max(rep.max_norm_ratio, ratio);
  }
  rep.pointwise_holds = rep.pointwise_max_violation <= tol;
  return rep;
}

}  // namespace soblab
