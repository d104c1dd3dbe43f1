// Semilinear heat and Schrodinger experiments: Picard iteration on the
// Duhamel form with exact semigroup applications, conservation checks, and
// the contraction-vs-interval diagnostic.
#pragma once

#include "soblab/nonlinearity.hpp"
#include "soblab/norms.hpp"

namespace soblab {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: need n >= 1");
    nodes.resize(n);
    weights.resize(n);
    const double pi = 3.141592653589793238462643383279502884;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

enum class EvolutionKind { heat, schrodinger };

inline const char* to_string(EvolutionKind k) {
  return k == EvolutionKind::heat ? "heat" : "schrodinger";
}

inline EvolutionKind evolution_kind_from_string(const std::string& s) {
  if (s == "heat") return EvolutionKind::heat;
  if (s == "schrodinger") return EvolutionKind::schrodinger;
  throw std::invalid_argument("unknown evolution kind '" + s + "'");
}

struct EvolutionProblem {
  EvolutionKind kind = EvolutionKind::heat;
  Nonlinearity nonlinearity = make_nonlinearity("zero");
  ComplexField u0;
  double interval = 0.1;      // |I|
  int time_nodes = 17;        // uniform C^0_I sample
  int tau_nodes = 32;         // Gauss-Legendre points per Duhamel integral
  int picard_iterations = 40;
  double alpha = 0.5;         // regularity of the iteration norm W^{alpha,2}
  double tolerance = 1e-10;

  void validate() const {
    if (!(interval > 0.0)) throw std::invalid_argument("EvolutionProblem: |I| must be positive");
    if (time_nodes < 2) throw std::invalid_argument("EvolutionProblem: need >= 2 time nodes");
    if (tau_nodes < 16) throw std::invalid_argument("EvolutionProblem: need >= 16 tau nodes");
    if (u0.size() == 0) throw std::invalid_argument("EvolutionProblem: empty initial field");
    if (kind == EvolutionKind::heat && u0.imag().cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("EvolutionProblem: heat flow takes real data");
    if (kind == EvolutionKind::schrodinger && !nonlinearity.complex_fn)
      throw std::invalid_argument("EvolutionProblem: nonlinearity lacks a complex extension");
  }
};

struct DuhamelResult {
  std::vector<double> times;
  std::vector<ComplexField> trajectory;  // fixed point (or last iterate) at the time sample
  std::vector<double> picard_distances;  // d_k = sup_t ||u^{k+1} - u^k||_{W^{alpha,2}}
  bool converged = false;
  bool no_contraction = false;
  double fixed_point_residual = kInf;
  int iterations = 0;
};

namespace detail {

// Propagator of the linear part at time s >= 0.
inline ComplexField propagate(const SpectralOperator& op, EvolutionKind kind, double s,
                              const ComplexField& f) {
  if (kind == EvolutionKind::heat) return heat_semigroup(op, s, f);
  return unitary_semigroup(op, s, f);
}

// Local 6-point Lagrange interpolation of the trajectory on the uniform grid;
// the iterates are analytic in time so this sits far below the Picard
// tolerance.
inline ComplexField interpolate_trajectory(const std::vector<double>& times,
                                           const std::vector<ComplexField>& values,
                                           double tau) {
  const int n = static_cast<int>(times.size());
  const int window = std::min(6, n);
  const double h = times[1] - times[0];
  int lo = static_cast<int>(std::floor(tau / h)) - window / 2 + 1;
  lo = std::max(0, std::min(lo, n - window));
  ComplexField out = ComplexField::Zero(values[0].size());
  for (int i = lo; i < lo + window; ++i) {
    double w = 1.0;
    for (int j = lo; j < lo + window; ++j)
      if (j != i) w *= (tau - times[j]) / (times[i] - times[j]);
    out += w * values[i];
  }
  return out;
}

inline ComplexField apply_nonlinearity(const Nonlinearity& F, const ComplexField& u) {
  ComplexField out(u.size());
  if (F.complex_fn) {
    for (int i = 0; i < u.size(); ++i) out(i) = F.complex_fn(u(i));
  } else {
    for (int i = 0; i < u.size(); ++i) out(i) = F.real_fn(u(i).real());
  }
  return out;
}

inline double traj_distance(const SpectralOperator& op, const std::vector<ComplexField>& a,
                            const std::vector<ComplexField>& b, double alpha) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, sobolev_norm(op, ComplexField(a[i] - b[i]), alpha, 2.0, false));
  return d;
}

}  // namespace detail

// Picard iterates of u(t) = e^{-tL}u0 - int_0^t e^{-(t-tau)L} F(u(tau)) dtau
// (heat) or u(t) = e^{itL}u0 - i int_0^t e^{i(t-tau)L} F(u(tau)) dtau.
// Each semigroup application is exact; only the tau-quadrature and the
// in-window time interpolation are approximate.
inline DuhamelResult duhamel_evolve(const EvolutionProblem& problem, const SpectralOperator& op) {
  problem.validate();
  if (problem.u0.size() != op.size())
    throw std::invalid_argument("duhamel_evolve: initial field size mismatch");

  DuhamelResult res;
  const int nt = problem.time_nodes;
  res.times.resize(nt);
  for (int i = 0; i < nt; ++i)
    res.times[i] = problem.interval * static_cast<double>(i) / (nt - 1);

  std::vector<ComplexField> linear(nt);
  for (int i = 0; i < nt; ++i)
    linear[i] = detail::propagate(op, problem.kind, res.times[i], problem.u0);

  const GaussLegendre gl(problem.tau_nodes);
  const std::complex<double> factor =
      problem.kind == EvolutionKind::heat ? std::complex<double>(-1.0, 0.0)
                                          : std::complex<double>(0.0, -1.0);

  auto duhamel_map = [&](const std::vector<ComplexField>& u) {
    std::vector<ComplexField> next(nt);
    next[0] = linear[0];
    for (int i = 1; i < nt; ++i) {
      const double t = res.times[i];
      std::vector<ComplexField> terms(gl.nodes.size());
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double tau = 0.5 * t * (gl.nodes[q] + 1.0);
        const double w = 0.5 * t * gl.weights[q];
        const ComplexField u_tau = detail::interpolate_trajectory(res.times, u, tau);
        terms[q] = w * detail::propagate(op, problem.kind, t - tau,
                                         detail::apply_nonlinearity(problem.nonlinearity, u_tau));
      }
      next[i] = linear[i] + factor * pairwise_sum(terms);
    }
    return next;
  };

  std::vector<ComplexField> current = linear;
  for (int k = 0; k < problem.picard_iterations; ++k) {
    std::vector<ComplexField> next = duhamel_map(current);
    const double d = detail::traj_distance(op, next, current, problem.alpha);
    res.picard_distances.push_back(d);
    current = std::move(next);
    ++res.iterations;
    if (!std::isfinite(d)) break;
    if (d < problem.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.trajectory = current;
  res.no_contraction = !res.converged;
  if (res.converged) {
    const auto mapped = duhamel_map(current);
    res.fixed_point_residual = detail::traj_distance(op, mapped, current, problem.alpha);
  }
  return res;
}

struct ConservationReport {
  double alpha = 0.0;
  std::vector<double> t_grid;
  std::vector<double> unitary_errors;   // | ||e^{itL}u0||_W - ||u0||_W |
  std::vector<double> heat_norms;       // ||e^{-tL}u0||_W, should be non-increasing
  double max_unitary_error = 0.0;
  bool unitary_ok = false;
  bool heat_monotone = false;
};

// The unitary flow preserves every W^{alpha,2} norm; the heat flow shrinks it.
inline ConservationReport conservation_check(const SpectralOperator& op, const ComplexField& u0,
                                             double alpha, std::span<const double> t_grid,
                                             double tol = 1e-10) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("conservation_check: alpha must be >= 0");
  ConservationReport rep;
  rep.alpha = alpha;
  const double base = sobolev_norm(op, u0, alpha, 2.0, false);
  std::vector<double> sorted(t_grid.begin(), t_grid.end());
  std::sort(sorted.begin(), sorted.end());
  rep.t_grid = sorted;
  double prev = base;
  rep.heat_monotone = true;
  for (double t : sorted) {
    const ComplexField u = unitary_semigroup(op, t, u0);
    rep.unitary_errors.push_back(std::abs(sobolev_norm(op, u, alpha, 2.0, false) - base));
    const ComplexField h = heat_semigroup(op, t, u0);
    const double hn = sobolev_norm(op, h, alpha, 2.0, false);
    rep.heat_norms.push_back(hn);
    if (hn > prev + 1e-12 * std::max(1.0, prev)) rep.heat_monotone = false;
    prev = hn;
  }
  for (double e : rep.unitary_errors) rep.max_unitary_error = std::max(rep.max_unitary_error, e);
  rep.unitary_ok = rep.max_unitary_error <= tol * std::max(1.0, base);
  return rep;
}

struct ContractionRung {
  double interval = 0.0;
  double factor = kInf;  // median d_{k+1}/d_k over the geometric regime
  bool converged = false;
};

struct ContractionReport {
  std::vector<ContractionRung> rungs;
  double slope = 0.0;            // least-squares fit of factor ~ slope * |I| through 0
  double threshold = 0.0;        // largest |I| in the ladder with a converged contraction
};

// Measured contraction factor per interval length; the Duhamel bound predicts
// factor ~ |I| * Lip, so the fit slope and the convergence threshold are the
// observables.
inline ContractionReport contraction_estimate(const EvolutionProblem& base,
                                              const SpectralOperator& op,
                                              std::span<const double> interval_ladder) {
  ContractionReport rep;
  double num = 0.0, den = 0.0;
  for (double len : interval_ladder) {
    EvolutionProblem p = base;
    p.interval = len;
    const DuhamelResult r = duhamel_evolve(p, op);
    ContractionRung rung;
    rung.interval = len;
    rung.converged = r.converged;
    std::vector<double> ratios;
    for (std::size_t k = 0; k + 1 < r.picard_distances.size(); ++k) {
      const double a = r.picard_distances[k], b = r.picard_distances[k + 1];
      if (a > 0.0 && b > 1e-13 * std::max(1.0, r.picard_distances.front())) ratios.push_back(b / a);
    }
    if (!ratios.empty()) {
      std::sort(ratios.begin(), ratios.end());
      rung.factor = ratios[ratios.size() / 2];
    }
    if (rung.converged && std::isfinite(rung.factor)) {
      num += rung.factor * len;
      den += len * len;
      rep.threshold = std::max(rep.threshold, len);
    }
    rep.rungs.push_back(rung);
  }
  rep.slope = den > 0.0 ? num / den : 0.0;
  return rep;
}

}  // namespace soblab
