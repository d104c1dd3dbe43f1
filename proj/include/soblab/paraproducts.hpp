// Semigroup paraproducts: the three flavors built from the Calderon family,
// the product decomposition with its measured normalization, and the Leibniz
// rule experiment.
#pragma once

#include "soblab/norms.hpp"
#include "soblab/symbols.hpp"

namespace soblab {

enum class ParaproductFlavor { HH, LH, HL };

inline const char* to_string(ParaproductFlavor f) {
  switch (f) {
    case ParaproductFlavor::HH: return "hh";
    case ParaproductFlavor::LH: return "lh";
    case ParaproductFlavor::HL: return "hl";
  }
  return "?";
}

inline ParaproductFlavor paraproduct_flavor_from_string(const std::string& s) {
  if (s == "hh") return ParaproductFlavor::HH;
  if (s == "lh") return ParaproductFlavor::LH;
  if (s == "hl") return ParaproductFlavor::HL;
  throw std::invalid_argument("unknown paraproduct flavor '" + s + "'");
}

template <typename Scalar>
struct ParaproductResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> value;
  double tail_estimate = 0.0;  // truncation error estimate, relative to ||fg||
  bool tail_warning = false;
};

namespace detail {

// One integrand sample: outer(tL)[ inner1(tL) f * inner2(tL) g ].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> paraproduct_term(
    const SpectralOperator& op, const SymbolFamily& fam, ParaproductFlavor flavor, double t,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g) {
  auto psi_t = [&fam, t](double lam) { return fam.psi(t * lam); };
  auto phi_t = [&fam, t](double lam) { return fam.phi(t * lam); };
  switch (flavor) {
    case ParaproductFlavor::HH: {
      const auto a = apply_symbol(op, phi_t, f);
      const auto b = apply_symbol(op, phi_t, g);
      return apply_symbol(op, psi_t, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(a.cwiseProduct(b)));
    }
    case ParaproductFlavor::LH: {
      const auto a = apply_symbol(op, psi_t, f);
      const auto b = apply_symbol(op, phi_t, g);
      return apply_symbol(op, phi_t, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(a.cwiseProduct(b)));
    }
    case ParaproductFlavor::HL: {
      const auto a = apply_symbol(op, phi_t, f);
      const auto b = apply_symbol(op, psi_t, g);
      return apply_symbol(op, phi_t, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(a.cwiseProduct(b)));
    }
  }
  throw std::logic_error("paraproduct_term: bad flavor");
}

}  // namespace detail

// Quadrature of the flavor's integrand over [t_min, t_max] with pairwise
// summation. Integrands vanish like t^N at 0 and exponentially at infinity,
// so the attached tail estimate uses the endpoint samples.
template <typename Scalar>
ParaproductResult<Scalar> paraproduct(const SpectralOperator& op, const SymbolFamily& fam,
                                      const TQuadrature& quad,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g,
                                      ParaproductFlavor flavor) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (f.size() != op.size() || g.size() != op.size())
    throw std::invalid_argument("paraproduct: field size mismatch");
  std::vector<Vec> terms(quad.nodes.size());
  for (std::size_t j = 0; j < quad.nodes.size(); ++j)
    terms[j] = quad.weights[j] *
               detail::paraproduct_term(op, fam, flavor, quad.nodes[j], f, g);
  ParaproductResult<Scalar> out;
  out.value = pairwise_sum(terms);

  const double lam_min = op.min_positive_eigenvalue();
  const Vec head = detail::paraproduct_term(op, fam, flavor, quad.t_min, f, g);
  const Vec tail = detail::paraproduct_term(op, fam, flavor, quad.t_max, f, g);
  const double head_est = op.l2_norm(head) / fam.N;
  const double tail_est =
      op.l2_norm(tail) * (lam_min > 0.0 ? std::max(1.0, 1.0 / (lam_min * quad.t_max)) : 1.0);
  const double scale = op.l2_norm(Vec(f.cwiseProduct(g)));
  out.tail_estimate = (head_est + tail_est) / (scale > 0.0 ? scale : 1.0);
  out.tail_warning = out.tail_estimate > 1e-8;
  return out;
}

// fg == K (Pi + Pi_g + Pi_f) + kernel_correction, with the paraproducts
// acting on the mean-free parts and the bilinear terms against constants
// reattached in closed form. K is pinned by the two-point-space measurement
// (held fixed; equals calderon_c_hat()^3, see decomposition_constant).
inline double decomposition_constant(const SymbolFamily& fam) {
  const double c_hat = fam.calderon_c_hat();
  return c_hat * c_hat * c_hat;
}

template <typename Scalar>
struct DecompositionResult {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vec hh, lh, hl;           // the three paraproducts of the mean-free parts
  Vec kernel_correction;    // mean(f) g + f mean(g) - mean(f)mean(g)
  Vec residual;             // fg - K (hh + lh + hl) - kernel_correction
  double normalization = 0.0;
  double residual_rel = 0.0;
  double tail_estimate = 0.0;
  bool tail_warning = false;
};

template <typename Scalar>
DecompositionResult<Scalar> product_decomposition(
    const SpectralOperator& op, const SymbolFamily& fam, const TQuadrature& quad,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar fbar = op.mean(f), gbar = op.mean(g);
  const Vec f_perp = f - Vec::Constant(op.size(), fbar);
  const Vec g_perp = g - Vec::Constant(op.size(), gbar);

  DecompositionResult<Scalar> out;
  out.normalization = decomposition_constant(fam);
  auto hh = paraproduct(op, fam, quad, f_perp, g_perp, ParaproductFlavor::HH);
  auto lh = paraproduct(op, fam, quad, f_perp, g_perp, ParaproductFlavor::LH);
  auto hl = paraproduct(op, fam, quad, f_perp, g_perp, ParaproductFlavor::HL);
  out.hh = std::move(hh.value);
  out.lh = std::move(lh.value);
  out.hl = std::move(hl.value);
  out.tail_estimate = hh.tail_estimate + lh.tail_estimate + hl.tail_estimate;
  out.tail_warning = hh.tail_warning || lh.tail_warning || hl.tail_warning;

  out.kernel_correction = fbar * g + gbar * f - Vec::Constant(op.size(), fbar * gbar);
  const Vec fg = f.cwiseProduct(g);
  out.residual = fg - Scalar(out.normalization) * (out.hh + out.lh + out.hl) -
                 out.kernel_correction;
  const double denom = op.l2_norm(fg);
  out.residual_rel = op.l2_norm(out.residual) / (denom > 0.0 ? denom : 1.0);
  return out;
}

// ---- Leibniz experiment -----------------------------------------------------

struct LeibnizParams {
  double alpha = 0.5;
  double r = 2.0;
  double p1 = 2.0, q1 = kInf;
  double p2 = kInf, q2 = 2.0;
  int trials = 20;
  std::uint64_t seed = 1;
};

struct LeibnizTrial {
  double left = 0.0;          // ||L^{alpha/m}(fg)||_r
  double term1 = 0.0;         // ||L^{alpha/m} f||_{p1} ||g||_{q1}
  double term2 = 0.0;         // ||f||_{p2} ||L^{alpha/m} g||_{q2}
  double ratio = 0.0;
  int dominant_term = 1;
  // alpha = 1 route diagnostics (gradient + Riesz chain)
  double reverse_riesz_ratio = 0.0;  // ||L^{1/m}(fg)||_r / ||grad(fg)||_r
  double gradient_leibniz_ratio = 0.0;
};

struct LeibnizReport {
  LeibnizParams params;
  std::vector<LeibnizTrial> trials;
  double max_ratio = 0.0;
  int excluded = 0;
};

namespace detail {
inline void check_holder(double r, double p, double q) {
  const double lhs = 1.0 / r;
  const double rhs = (std::isinf(p) ? 0.0 : 1.0 / p) + (std::isinf(q) ? 0.0 : 1.0 / q);
  if (std::abs(lhs - rhs) > 1e-12)
    throw std::invalid_argument("leibniz_report: exponents must satisfy 1/r = 1/p + 1/q");
}
}  // namespace detail

// Empirical constant in
//   ||L^{alpha/m}(fg)||_r <= K (||L^{alpha/m}f||_{p1}||g||_{q1} +
//                               ||f||_{p2}||L^{alpha/m}g||_{q2}).
// alpha = 0 collapses to Holder (ratio <= 1 exactly); alpha = 1 additionally
// records the gradient/Riesz chain the endpoint proof uses.
inline LeibnizReport leibniz_report(const SpectralOperator& op, const Manifold& m,
                                    const LeibnizParams& params) {
  if (!(params.alpha >= 0.0) || !(params.alpha <= 1.0))
    throw std::invalid_argument("leibniz_report: alpha must be in [0, 1]");
  detail::check_holder(params.r, params.p1, params.q1);
  detail::check_holder(params.r, params.p2, params.q2);
  LeibnizReport rep;
  rep.params = params;
  const double beta = params.alpha / op.order_m;
  for (int trial = 0; trial < params.trials; ++trial) {
    const RealField f = ensemble_field(op, params.seed, 2 * trial);
    const RealField g = ensemble_field(op, params.seed, 2 * trial + 1);
    const RealField fg = f.cwiseProduct(g);
    LeibnizTrial t;
    if (params.alpha == 0.0) {
      t.left = detail::lp_norm(op.measure, fg, params.r);
      t.term1 = detail::lp_norm(op.measure, f, params.p1) *
                detail::lp_norm(op.measure, g, params.q1);
      t.term2 = detail::lp_norm(op.measure, f, params.p2) *
                detail::lp_norm(op.measure, g, params.q2);
    } else {
      t.left = detail::lp_norm(op.measure, fractional_power(op, beta, fg), params.r);
      t.term1 = detail::lp_norm(op.measure, fractional_power(op, beta, f), params.p1) *
                detail::lp_norm(op.measure, g, params.q1);
      t.term2 = detail::lp_norm(op.measure, f, params.p2) *
                detail::lp_norm(op.measure, fractional_power(op, beta, g), params.q2);
      if (params.alpha == 1.0) {
        const RealField grad_fg = gradient_norm(m, fg);
        const double grad_fg_r = detail::lp_norm(op.measure, grad_fg, params.r);
        if (grad_fg_r > 0.0) t.reverse_riesz_ratio = t.left / grad_fg_r;
        const RealField lhs_split =
            (gradient_norm(m, f).cwiseProduct(g.cwiseAbs()) +
             f.cwiseAbs().cwiseProduct(gradient_norm(m, g)));
        const double split_r = detail::lp_norm(op.measure, lhs_split, params.r);
        if (split_r > 0.0) t.gradient_leibniz_ratio = grad_fg_r / split_r;
      }
    }
    const double denom = t.term1 + t.term2;
    if (denom == 0.0) {
      ++rep.excluded;
      continue;
    }
    t.ratio = t.left / denom;
    t.dominant_term = t.term1 >= t.term2 ? 1 : 2;
    rep.max_ratio = std::max(rep.max_ratio, t.ratio);
    rep.trials.push_back(t);
  }
  return rep;
}

}  // namespace soblab
