// Generator of the semigroup as an exact eigendecomposition, orthonormal in
// the mu-weighted inner product, with the scalar functional calculus b(L),
// fractional powers, the Riesz transform and the off-diagonal decay probe.
#pragma once

#include "soblab/manifold.hpp"

#include <functional>
#include <span>

namespace soblab {

enum class OperatorForm { combinatorial, normalized, divergence };

inline const char* to_string(OperatorForm f) {
  switch (f) {
    case OperatorForm::combinatorial: return "combinatorial";
    case OperatorForm::normalized: return "normalized";
    case OperatorForm::divergence: return "divergence";
  }
  return "?";
}

inline OperatorForm operator_form_from_string(const std::string& s) {
  if (s == "combinatorial") return OperatorForm::combinatorial;
  if (s == "normalized") return OperatorForm::normalized;
  if (s == "divergence") return OperatorForm::divergence;
  throw std::invalid_argument("unknown operator form '" + s + "'");
}

// Non-negative self-adjoint generator, stored as eigenpairs. `measure` is the
// weight of the inner product the eigenbasis is orthonormal against (the
// vertex measure, or the degree for the normalized form). order_m is the
// scaling exponent relating time and radius, t ~ r^m.
struct SpectralOperator {
  Eigen::VectorXd eigenvalues;   // ascending, >= 0
  Eigen::MatrixXd eigenvectors;  // columns e_i, <e_i, e_j>_mu = delta_ij
  Eigen::VectorXd measure;
  double order_m = 2.0;
  int kernel_dim = 1;
  OperatorForm form = OperatorForm::combinatorial;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double max_eigenvalue() const { return eigenvalues(size() - 1); }
  double min_positive_eigenvalue() const {
    return kernel_dim < size() ? eigenvalues(kernel_dim) : 0.0;
  }

  template <typename Scalar>
  Scalar inner(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g) const {
    Scalar acc(0);
    for (int i = 0; i < size(); ++i)
      acc += f(i) * Eigen::numext::conj(g(i)) * Scalar(measure(i));
    return acc;
  }

  template <typename Scalar>
  double l2_norm(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) const {
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) acc += std::norm(std::complex<double>(f(i))) * measure(i);
    return std::sqrt(acc);
  }

  // coefficients c_i = <f, e_i>_mu
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients(
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weighted =
        (f.array() * measure.array().template cast<Scalar>()).matrix();
    if constexpr (std::is_same_v<Scalar, double>) {
      return eigenvectors.transpose() * weighted;
    } else {
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(size());
      out.real() = eigenvectors.transpose() * weighted.real();
      out.imag() = eigenvectors.transpose() * weighted.imag();
      return out;
    }
  }

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> synthesize(
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c) const {
    if constexpr (std::is_same_v<Scalar, double>) {
      return eigenvectors * c;
    } else {
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(size());
      out.real() = eigenvectors * c.real();
      out.imag() = eigenvectors * c.imag();
      return out;
    }
  }

  // Relative size of the kernel component of f.
  template <typename Scalar>
  double kernel_fraction(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) const {
    const auto c = coefficients(f);
    double ker = 0.0, tot = 0.0;
    for (int i = 0; i < size(); ++i) {
      const double a = std::norm(std::complex<double>(c(i)));
      tot += a;
      if (i < kernel_dim) ker += a;
    }
    return tot == 0.0 ? 0.0 : std::sqrt(ker / tot);
  }

  // mean against the kernel: projection of f onto constants
  template <typename Scalar>
  Scalar mean(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) const {
    Scalar acc(0);
    for (int i = 0; i < size(); ++i) acc += f(i) * Scalar(measure(i));
    return acc / Scalar(measure.sum());
  }
};

// L = D_mu^{-1} A with A the (possibly coefficient-scaled) weight Laplacian.
// Diagonalized through the symmetrization D^{1/2} L D^{-1/2}; eigenvectors are
// mapped back so they are orthonormal in the mu inner product.
inline SpectralOperator assemble_operator(const Manifold& m, OperatorForm form,
                                          std::span<const double> coeff = {},
                                          double coeff_lo = 0.0, double coeff_hi = kInf) {
  const int n = m.vertex_count();
  SpectralOperator op;
  op.form = form;
  op.order_m = 2.0;

  if (form == OperatorForm::divergence) {
    if (coeff.size() != m.edges.size())
      throw std::invalid_argument("assemble_operator: divergence form needs one coefficient per edge");
    for (double a : coeff)
      if (!(a >= coeff_lo) || !(a <= coeff_hi) || !(a > 0.0))
        throw std::invalid_argument("assemble_operator: coefficient outside [lambda, Lambda]");
  } else if (!coeff.empty()) {
    throw std::invalid_argument("assemble_operator: coefficients only apply to the divergence form");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    const Edge& e = m.edges[k];
    const double w = e.weight * (form == OperatorForm::divergence ? coeff[k] : 1.0);
    a(e.u, e.u) += w;
    a(e.v, e.v) += w;
    a(e.u, e.v) -= w;
    a(e.v, e.u) -= w;
  }

  if (form == OperatorForm::normalized) {
    Eigen::VectorXd degree(n);
    for (int x = 0; x < n; ++x) {
      double d = 0.0;
      for (const Neighbor& nb : m.adjacency[x]) d += nb.weight;
      if (!(d > 0.0))
        throw std::invalid_argument("assemble_operator: isolated vertex in normalized form");
      degree(x) = d;
    }
    op.measure = degree;
  } else {
    op.measure = m.mu;
  }

  const Eigen::VectorXd s = op.measure.array().sqrt();
  const Eigen::MatrixXd sym =
      s.cwiseInverse().asDiagonal() * a * s.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sym + sym.transpose()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("assemble_operator: eigensolver failed (condition of the symmetrized form)");

  op.eigenvalues = solver.eigenvalues();
  op.eigenvectors = s.cwiseInverse().asDiagonal() * solver.eigenvectors();
  const double lam_max = std::max(1.0, op.eigenvalues(n - 1));
  for (int i = 0; i < n; ++i) {
    if (op.eigenvalues(i) < -1e-8 * lam_max)
      throw std::runtime_error("assemble_operator: negative eigenvalue, operator not PSD");
    if (op.eigenvalues(i) < 0.0) op.eigenvalues(i) = 0.0;
  }
  op.kernel_dim = 0;
  while (op.kernel_dim < n && op.eigenvalues(op.kernel_dim) <= 1e-10 * lam_max) {
    op.eigenvalues(op.kernel_dim) = 0.0;
    ++op.kernel_dim;
  }
  // sign convention: largest-magnitude entry of each eigenvector positive
  for (int i = 0; i < n; ++i) {
    int arg = 0;
    op.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg);
    if (op.eigenvectors(arg, i) < 0.0) op.eigenvectors.col(i) = -op.eigenvectors.col(i);
  }
  return op;
}

// b(L) f = sum_i b(lambda_i) <f, e_i>_mu e_i. Exact: no quadrature enters.
// b may be real- or complex-valued (e.g. e^{it lambda}).
template <typename SymbolFn, typename ScalarF>
auto apply_symbol(const SpectralOperator& op, SymbolFn&& b,
                  const Eigen::Matrix<ScalarF, Eigen::Dynamic, 1>& f) {
  using ScalarB = std::invoke_result_t<SymbolFn, double>;
  using Scalar = decltype(ScalarB{} * ScalarF{});
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (f.size() != op.size()) throw std::invalid_argument("apply_symbol: field size mismatch");
  Vec c = op.coefficients(Vec(f.template cast<Scalar>()));
  for (int i = 0; i < op.size(); ++i) {
    const Scalar bi(b(op.eigenvalues(i)));
    if (!std::isfinite(std::abs(std::complex<double>(bi))))
      throw std::invalid_argument("apply_symbol: symbol undefined at eigenvalue " +
                                  format_double(op.eigenvalues(i)));
    c(i) *= bi;
  }
  return op.synthesize(c);
}

template <typename ScalarF>
auto heat_semigroup(const SpectralOperator& op, double t,
                    const Eigen::Matrix<ScalarF, Eigen::Dynamic, 1>& f) {
  return apply_symbol(op, [t](double lam) { return std::exp(-t * lam); }, f);
}

inline ComplexField unitary_semigroup(const SpectralOperator& op, double t, const ComplexField& f) {
  return apply_symbol(
      op, [t](double lam) { return std::exp(std::complex<double>(0.0, t * lam)); }, f);
}

// L^beta with the kernel convention 0^beta := 0 (constants are projected out,
// the single systematic finite-size correction). Bessel variant (1+L)^beta is
// defined for every beta. beta == 0 is the identity on all fields.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fractional_power(
    const SpectralOperator& op, double beta,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, bool bessel = false) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (f.size() != op.size()) throw std::invalid_argument("fractional_power: field size mismatch");
  if (beta == 0.0) return f;
  Vec c = op.coefficients(f);
  if (!bessel && beta < 0.0) {
    if (op.kernel_fraction(f) > 1e-10)
      throw std::invalid_argument(
          "fractional_power: L is not invertible on constants (field has a kernel component)");
  }
  for (int i = 0; i < op.size(); ++i) {
    double factor;
    if (bessel) {
      factor = std::pow(1.0 + op.eigenvalues(i), beta);
    } else if (i < op.kernel_dim) {
      factor = 0.0;
    } else {
      factor = std::pow(op.eigenvalues(i), beta);
    }
    c(i) *= Scalar(factor);
  }
  return op.synthesize(c);
}

// R f = |grad(L^{-1/m} f)|; requires f orthogonal to constants.
inline RealField riesz_transform(const SpectralOperator& op, const Manifold& m,
                                 const RealField& f) {
  const RealField g = fractional_power(op, -1.0 / op.order_m, f);
  return gradient_norm(m, g);
}

struct RieszReport {
  std::vector<double> p_grid;
  std::vector<double> ratios;  // ||Rf||_p / ||f||_p per p
};

// Empirical boundedness probe for R = grad L^{-1/m}. On a finite space every
// p gives a finite ratio; the table is the observable, nothing is gated.
inline RieszReport riesz_report(const SpectralOperator& op, const Manifold& m,
                                const RealField& f, std::span<const double> p_grid) {
  RieszReport rep;
  const RealField rf = riesz_transform(op, m, f);
  for (double p : p_grid) {
    rep.p_grid.push_back(p);
    double num = 0.0, den = 0.0;
    if (std::isinf(p)) {
      num = rf.cwiseAbs().maxCoeff();
      den = f.cwiseAbs().maxCoeff();
    } else {
      std::vector<double> tn(op.size()), td(op.size());
      for (int i = 0; i < op.size(); ++i) {
        tn[i] = std::pow(std::abs(rf(i)), p) * op.measure(i);
        td[i] = std::pow(std::abs(f(i)), p) * op.measure(i);
      }
      num = std::pow(pairwise_sum(tn), 1.0 / p);
      den = std::pow(pairwise_sum(td), 1.0 / p);
    }
    rep.ratios.push_back(den > 0.0 ? num / den : 0.0);
  }
  return rep;
}

struct OffDiagReport {
  std::vector<double> delta_grid;
  std::vector<double> constants;       // C(delta) = max ratio over (t, ball, field)
  double delta_fitted = 0.0;           // largest delta with C(delta) <= cap
  double constant_cap = 0.0;
  double conservation_error = 0.0;     // max |e^{-tL}1 - 1|
  bool conservation_ok = false;
  int samples = 0;
};

// Empirical L^{s-} -> L^inf decay of e^{-tL} over dyadically dilated balls.
// For each delta on the grid, C(delta) is the smallest constant making
//   sup_B |e^{-tL}f| <= C sum_k 2^{-delta k} (avg_{2^k B} |f|^{s-})^{1/s-}
// hold over every probed (t, ball, field). delta_fitted is the largest grid
// delta whose constant stays below the cap; no pass/fail is attached.
inline OffDiagReport offdiag_probe(const SpectralOperator& op, const Manifold& m,
                                   std::span<const double> t_grid, double s_minus,
                                   std::span<const RealField> fields,
                                   double constant_cap = 0.0) {
  if (!(s_minus >= 1.0)) throw std::invalid_argument("offdiag_probe: s_minus must be >= 1");
  OffDiagReport rep;
  for (int i = 0; i <= 32; ++i) rep.delta_grid.push_back(i * 0.125);
  rep.constants.assign(rep.delta_grid.size(), 0.0);

  const int n = m.vertex_count();
  const RealField ones = RealField::Ones(n);
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("offdiag_probe: t must be positive");
    const RealField conserved = heat_semigroup(op, t, ones);
    rep.conservation_error =
        std::max(rep.conservation_error, (conserved - ones).cwiseAbs().maxCoeff());
  }
  rep.conservation_ok = rep.conservation_error <= 1e-10;

  const double diam = m.diameter();
  for (double t : t_grid) {
    const double r = std::pow(t, 1.0 / op.order_m);
    for (const RealField& f : fields) {
      const RealField u = heat_semigroup(op, t, f);
      for (int x = 0; x < n; ++x) {
        const Ball b = ball(m, x, r);
        double lhs = 0.0;
        for (int y : b.members) lhs = std::max(lhs, std::abs(u(y)));
        // dyadic averages; stop once the dilate covers the whole space
        std::vector<double> avgs;
        for (int k = 0;; ++k) {
          const double rk = std::ldexp(r, k);
          const Ball bk = ball(m, x, rk);
          double acc = 0.0;
          for (int y : bk.members) acc += std::pow(std::abs(f(y)), s_minus) * m.mu(y);
          avgs.push_back(std::pow(acc / bk.volume, 1.0 / s_minus));
          if (rk > diam) break;
        }
        ++rep.samples;
        for (std::size_t di = 0; di < rep.delta_grid.size(); ++di) {
          double rhs = 0.0;
          for (std::size_t k = 0; k < avgs.size(); ++k)
            rhs += std::pow(2.0, -rep.delta_grid[di] * static_cast<double>(k)) * avgs[k];
          if (rhs > 0.0)
            rep.constants[di] = std::max(rep.constants[di], lhs / rhs);
          else if (lhs > 0.0)
            rep.constants[di] = kInf;
        }
      }
    }
  }
  rep.constant_cap = constant_cap > 0.0 ? constant_cap : 10.0 * std::max(rep.constants[0], 1.0);
  for (std::size_t di = 0; di < rep.delta_grid.size(); ++di)
    if (rep.constants[di] <= rep.constant_cap) rep.delta_fitted = rep.delta_grid[di];
  return rep;
}

}  // namespace soblab
