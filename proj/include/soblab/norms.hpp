// Norm evaluations on the discrete space: L^p, Sobolev (homogeneous and
// Bessel-type), BMO in both the classical and semigroup flavors, maximal
// functions, and the embedding experiments.
#pragma once

#include "soblab/geometry.hpp"
#include "soblab/spectral.hpp"

namespace soblab {

namespace detail {

template <typename Scalar>
double lp_norm(const Eigen::VectorXd& measure,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, double p) {
  if (f.size() != measure.size()) throw std::invalid_argument("lp_norm: size mismatch");
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be in [1, inf]");
  if (std::isinf(p)) {
    double mx = 0.0;
    for (int i = 0; i < f.size(); ++i) mx = std::max(mx, std::abs(std::complex<double>(f(i))));
    return mx;
  }
  std::vector<double> terms(f.size());
  for (int i = 0; i < f.size(); ++i)
    terms[i] = std::pow(std::abs(std::complex<double>(f(i))), p) * measure(i);
  return std::pow(pairwise_sum(terms), 1.0 / p);
}

}  // namespace detail

template <typename Scalar>
double lebesgue_norm(const Manifold& m, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                     double p) {
  return detail::lp_norm(m.mu, f, p);
}

// ||L^{alpha/m} f||_p (homogeneous) or ||f||_p + ||L^{alpha/m} f||_p.
// Norms are taken against the operator's measure so the normalized form stays
// consistent with its own inner product.
template <typename Scalar>
double sobolev_norm(const SpectralOperator& op,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, double alpha,
                    double p, bool homogeneous) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("sobolev_norm: alpha must be >= 0");
  const auto lf = fractional_power(op, alpha / op.order_m, f);
  const double seminorm = detail::lp_norm(op.measure, lf, p);
  if (homogeneous) return seminorm;
  return detail::lp_norm(op.measure, f, p) + seminorm;
}

template <typename Scalar>
double bessel_norm(const SpectralOperator& op,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, double alpha, double p) {
  const auto lf = fractional_power(op, alpha / op.order_m, f, /*bessel=*/true);
  return detail::lp_norm(op.measure, lf, p);
}

// Classical BMO: sup over breakpoint balls of the L^1 mean oscillation.
template <typename Scalar>
double bmo_norm(const Manifold& m, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
  if (f.size() != m.vertex_count()) throw std::invalid_argument("bmo_norm: size mismatch");
  double best = 0.0;
  for (double r : radius_grid(m)) {
    for (int x = 0; x < m.vertex_count(); ++x) {
      const Ball b = ball(m, x, r);
      Scalar avg(0);
      for (int y : b.members) avg += f(y) * Scalar(m.mu(y));
      avg /= Scalar(b.volume);
      double osc = 0.0;
      for (int y : b.members)
        osc += std::abs(std::complex<double>(f(y) - avg)) * m.mu(y);
      best = std::max(best, osc / b.volume);
    }
  }
  return best;
}

// Semigroup BMO: sup over x and t = r^m of the ball L^p average of f - e^{-tL}f.
template <typename Scalar>
double bmo_semigroup_norm(const Manifold& m, const SpectralOperator& op,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, double p = 2.0) {
  if (!(p > 1.0) || std::isinf(p))
    throw std::invalid_argument("bmo_semigroup_norm: p must be in (1, inf)");
  double best = 0.0;
  for (double r : radius_grid(m)) {
    const double t = std::pow(r, op.order_m);
    const auto smoothed = heat_semigroup(op, t, f);
    for (int x = 0; x < m.vertex_count(); ++x) {
      const Ball b = ball(m, x, r);
      double acc = 0.0;
      for (int y : b.members)
        acc += std::pow(std::abs(std::complex<double>(f(y) - smoothed(y))), p) * m.mu(y);
      best = std::max(best, std::pow(acc / b.volume, 1.0 / p));
    }
  }
  return best;
}

// Uncentered Hardy-Littlewood maximal function M_s f over the breakpoint ball
// family; M_s f >= |f| pointwise because singleton balls are in the family.
template <typename Scalar>
RealField maximal_function(const Manifold& m,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, double s = 1.0) {
  if (!(s >= 1.0)) throw std::invalid_argument("maximal_function: s must be >= 1");
  const int n = m.vertex_count();
  RealField out = RealField::Zero(n);
  for (double r : radius_grid(m)) {
    for (int c = 0; c < n; ++c) {
      const Ball b = ball(m, c, r);
      double acc = 0.0;
      for (int y : b.members) acc += std::pow(std::abs(std::complex<double>(f(y))), s) * m.mu(y);
      const double avg = std::pow(acc / b.volume, 1.0 / s);
      for (int y : b.members) out(y) = std::max(out(y), avg);
    }
  }
  return out;
}

// ---- seeded field ensemble --------------------------------------------------
// Rough and smooth probes: spectrally colored noise (gamma = 0, 1, 2),
// indicator fields, and heat-smoothed indicators.
inline RealField ensemble_field(const SpectralOperator& op, std::uint64_t seed, int index) {
  SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  const int n = op.size();
  const int kind = index % 5;
  if (kind <= 2) {
    const double gamma = static_cast<double>(kind);
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) {
      const double g = rng.next_normal();
      if (i < op.kernel_dim)
        c(i) = gamma == 0.0 ? g : 0.0;
      else
        c(i) = std::pow(op.eigenvalues(i), -gamma / 2.0) * g;
    }
    return op.eigenvectors * c;
  }
  RealField f = RealField::Zero(n);
  const int hits = 1 + static_cast<int>(rng.next_u64() % std::max(1, n / 4));
  for (int k = 0; k < hits; ++k) f(static_cast<int>(rng.next_u64() % n)) = 1.0;
  if (kind == 3) return f;
  const double t = 0.05 + 0.95 * rng.next_double();
  return heat_semigroup(op, t, f);
}

inline RealField project_zero_mean(const SpectralOperator& op, const RealField& f) {
  return f - RealField::Constant(op.size(), op.mean(f));
}

// ---- embedding experiments --------------------------------------------------

struct EmbeddingReport {
  double s = 0.0, p = 0.0, q = 0.0;
  double homogeneous_dimension = 0.0;
  bool hypothesis_violated = false;
  std::vector<double> resolvent_ratios;  // ||(1+L)^{-s/m} f||_q / ||f||_p
  std::vector<double> direct_ratios;     // ||f||_q / ||f||_{W^{s,p}}
  double max_resolvent_ratio = 0.0;
  double max_direct_ratio = 0.0;
};

inline EmbeddingReport embedding_report(const SpectralOperator& op, const Manifold& m,
                                        double s, double p, double q, int trials,
                                        std::uint64_t seed) {
  if (!(s > 0.0) || !(p >= 1.0) || !(q >= 1.0))
    throw std::invalid_argument("embedding_report: need s > 0 and p, q >= 1");
  EmbeddingReport rep;
  rep.s = s;
  rep.p = p;
  rep.q = q;
  rep.homogeneous_dimension = geometry_report(m, 1.0).homogeneous_dimension;
  const double d = rep.homogeneous_dimension;
  // regime violations are flagged, never fatal: the probe runs either way
  if (q < p)
    rep.hypothesis_violated = true;
  else if (std::isinf(q))
    rep.hypothesis_violated = !(s > d / p);
  else
    rep.hypothesis_violated = !(1.0 / q > 1.0 / p - s / d);
  for (int trial = 0; trial < trials; ++trial) {
    const RealField f = ensemble_field(op, seed, trial);
    const double fp = detail::lp_norm(op.measure, f, p);
    if (fp == 0.0) continue;  // degenerate draw
    const auto resolvent = fractional_power(op, -s / op.order_m, f, /*bessel=*/true);
    rep.resolvent_ratios.push_back(detail::lp_norm(op.measure, resolvent, q) / fp);
    const double wn = sobolev_norm(op, f, s, p, /*homogeneous=*/false);
    rep.direct_ratios.push_back(detail::lp_norm(op.measure, f, q) / wn);
  }
  for (double r : rep.resolvent_ratios) rep.max_resolvent_ratio = std::max(rep.max_resolvent_ratio, r);
  for (double r : rep.direct_ratios) rep.max_direct_ratio = std::max(rep.max_direct_ratio, r);
  return rep;
}

struct LogEmbeddingReport {
  double s = 0.0, p = 0.0;
  bool semigroup_flavor = false;
  double total_measure = 0.0;  // the additive "1 +" is scale-breaking; expose the scale
  std::vector<double> ratios;
  double max_ratio = 0.0;
};

// ||f||_inf vs 1 + ||f||_BMO (1 + log(2 + ||f||_{W^{s,p}})), probed on an
// ensemble plus the rescalings {1, 10, 100, 1000} f that exercise the
// logarithmic growth.
inline LogEmbeddingReport log_embedding_report(const SpectralOperator& op, const Manifold& m,
                                               double s, double p, int trials,
                                               std::uint64_t seed, bool semigroup_flavor,
                                               double bmo_p = 2.0) {
  LogEmbeddingReport rep;
  rep.s = s;
  rep.p = p;
  rep.semigroup_flavor = semigroup_flavor;
  rep.total_measure = m.total_measure();
  for (int trial = 0; trial < trials; ++trial) {
    const RealField base = ensemble_field(op, seed, trial);
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
      const RealField f = scale * base;
      const double sup = f.cwiseAbs().maxCoeff();
      if (sup == 0.0) {
        rep.ratios.push_back(0.0);
        continue;
      }
      const double bmo = semigroup_flavor ? bmo_semigroup_norm(m, op, f, bmo_p) : bmo_norm(m, f);
      const double wn = sobolev_norm(op, f, s, p, /*homogeneous=*/false);
      rep.ratios.push_back(sup / (1.0 + bmo * (1.0 + std::log(2.0 + wn))));
    }
  }
  for (double r : rep.ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  return rep;
}

// Prop-3.1-style equivalence probe: per trial, the ratio
// ||(1+L)^{alpha/m} f||_p / (||f||_p + ||L^{alpha/m} f||_p).
struct EquivalenceReport {
  double alpha = 0.0, p = 0.0;
  std::vector<double> ratios;
  double min_ratio = kInf;
  double max_ratio = 0.0;
  double interval_constant() const { return std::max(max_ratio, 1.0 / min_ratio); }
};

inline EquivalenceReport equivalence_report(const SpectralOperator& op, double alpha, double p,
                                            int trials, std::uint64_t seed) {
  EquivalenceReport rep;
  rep.alpha = alpha;
  rep.p = p;
  for (int trial = 0; trial < trials; ++trial) {
    const RealField f = ensemble_field(op, seed, trial);
    const double denom = sobolev_norm(op, f, alpha, p, /*homogeneous=*/false);
    if (denom == 0.0) continue;
    const double ratio = bessel_norm(op, f, alpha, p) / denom;
    rep.ratios.push_back(ratio);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace soblab
