// The Calderon symbol family psi(x) = x^N e^{-x}(1-e^{-x}) with its
// antiderivative-type companions, the reproducing-formula constants, and the
// log-spaced quadrature for integrals of the form int F(t) dt/t.
#pragma once

#include "soblab/common.hpp"

#include <functional>

namespace soblab {

// Upper incomplete gamma for integer order: Gamma(n, x) = (n-1)! e^{-x} sum_{k<n} x^k/k!.
inline double upper_incomplete_gamma(int n, double x) {
  if (n < 1) throw std::invalid_argument("upper_incomplete_gamma: order must be >= 1");
  if (x < 0.0) throw std::invalid_argument("upper_incomplete_gamma: x must be >= 0");
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < n; ++k) {
    term *= x / k;
    sum += term;
  }
  double fact = 1.0;
  for (int k = 2; k < n; ++k) fact *= k;
  return fact * std::exp(-x) * sum;
}

inline double factorial_of(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

struct SymbolFamily {
  int N = 5;

  explicit SymbolFamily(int n = 5) : N(n) {
    if (N < 2) throw std::invalid_argument("SymbolFamily: N must be >= 2");
  }

  // psi(x) = x^N e^{-x} (1 - e^{-x}); evaluated in log form so huge x cannot
  // produce inf * 0.
  double psi(double x) const {
    if (x <= 0.0) return 0.0;
    const double log_head = N * std::log(x) - x;
    if (log_head < -745.0) return 0.0;
    return std::exp(log_head) * (1.0 - std::exp(-x));
  }

  // phi(x) = -int_x^inf psi(y) dy/y = -(Gamma(N,x) - 2^{-N} Gamma(N,2x)).
  // phi'(x) = psi(x)/x exactly; phi(0) = -Gamma(N)(1 - 2^{-N}).
  double phi(double x) const {
    if (x < 0.0) throw std::invalid_argument("phi: x must be >= 0");
    return -(upper_incomplete_gamma(N, x) -
             std::pow(2.0, -N) * upper_incomplete_gamma(N, 2.0 * x));
  }

  // zeta(x) = int_1^inf psi(ux) du/u; equals -phi(x) for x > 0 and 0 at x = 0
  // (the integrand vanishes identically there).
  double zeta(double x) const {
    if (x < 0.0) throw std::invalid_argument("zeta: x must be >= 0");
    if (x == 0.0) return 0.0;
    return -phi(x);
  }

  // psi_tilde(x) = x^{-beta} psi(x); keeps an order-(N-beta) zero at 0, so
  // beta < N is required.
  double psi_tilde(double beta, double x) const {
    if (beta >= static_cast<double>(N))
      throw std::invalid_argument("psi_tilde: beta >= N, symbol no longer vanishes at 0");
    if (x <= 0.0) return 0.0;
    const double log_head = (N - beta) * std::log(x) - x;
    if (log_head < -745.0) return 0.0;
    return std::exp(log_head) * (1.0 - std::exp(-x));
  }

  // phi_tilde(x) = x^beta phi(x); vanishes at 0 for beta > 0.
  double phi_tilde(double beta, double x) const {
    if (x == 0.0) return beta > 0.0 ? 0.0 : phi(0.0);
    return std::pow(x, beta) * phi(x);
  }

  // 1 / int_0^inf psi(y) dy/y = 1 / (Gamma(N)(1 - 2^{-N})): the constant of
  // the psi-reconstruction c_hat * int psi(tL) f dt/t = f on the kernel
  // complement.
  double calderon_c_hat() const {
    return 1.0 / (factorial_of(N - 1) * (1.0 - std::pow(2.0, -N)));
  }

  // 1 / int_0^inf psi(y) dy/y^2 = 1 / (Gamma(N-1)(1 - 2^{1-N})): the constant
  // of the phi'-form reconstruction.
  double calderon_c() const {
    return 1.0 / (factorial_of(N - 2) * (1.0 - std::pow(2.0, 1 - N)));
  }
};

// Midpoint rule in log t for int_{t_min}^{t_max} F(t) dt/t. Exact on F == 1
// and spectrally accurate on integrands decaying at both ends.
struct TQuadrature {
  double t_min = 0.0;
  double t_max = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static TQuadrature log_midpoint(double t_min, double t_max, int node_count) {
    if (!(t_min > 0.0) || !(t_max > t_min))
      throw std::invalid_argument("TQuadrature: need 0 < t_min < t_max");
    if (node_count < 1) throw std::invalid_argument("TQuadrature: need at least one node");
    TQuadrature q;
    q.t_min = t_min;
    q.t_max = t_max;
    const double h = std::log(t_max / t_min) / node_count;
    q.nodes.resize(node_count);
    q.weights.assign(node_count, h);
    for (int j = 0; j < node_count; ++j)
      q.nodes[j] = t_min * std::exp((j + 0.5) * h);
    return q;
  }

  int node_count() const { return static_cast<int>(nodes.size()); }
  double weight_sum() const { return pairwise_sum_values(weights); }

  double integrate(const std::function<double(double)>& f) const {
    std::vector<double> terms(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) terms[j] = weights[j] * f(nodes[j]);
    return pairwise_sum(terms);
  }
};

// Adaptive Simpson on [a, b]; the independent cross-check route for the
// closed-form constants.
namespace detail {
inline double adaptive_simpson_impl(const std::function<double(double)>& f, double a,
                                    double b, double fa, double fm, double fb,
                                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int max_depth = 48) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// int_0^inf g(y) dy/y via the substitution y = e^u and adaptive Simpson on a
// range wide enough that psi-type integrands have vanished.
inline double integrate_dy_over_y(const std::function<double(double)>& g,
                                  double log_lo = -40.0, double log_hi = 12.0,
                                  double tol = 1e-13) {
  return adaptive_simpson([&g](double u) { return g(std::exp(u)); }, log_lo, log_hi, tol);
}

struct CalderonConstants {
  double c = 0.0;               // phi'-form constant
  double c_hat = 0.0;           // psi-form constant
  double c_residual = 0.0;      // |closed form - quadrature| / closed form
  double c_hat_residual = 0.0;
};

// Closed forms with an adaptive-quadrature cross-check. N < 2 is rejected:
// int psi(y) dy/y^2 diverges at 0 for N < 2.
inline CalderonConstants calderon_constant(int N) {
  if (N < 2) throw std::invalid_argument("calderon_constant: N must be >= 2 (divergent integral)");
  const SymbolFamily fam(N);
  CalderonConstants out;
  const double c_hat_inv = factorial_of(N - 1) * (1.0 - std::pow(2.0, -N));
  const double c_inv = factorial_of(N - 2) * (1.0 - std::pow(2.0, 1 - N));
  out.c_hat = 1.0 / c_hat_inv;
  out.c = 1.0 / c_inv;
  const double q_hat = integrate_dy_over_y([&fam](double y) { return fam.psi(y); });
  const double q = integrate_dy_over_y([&fam](double y) { return fam.psi(y) / y; });
  out.c_hat_residual = std::abs(q_hat - c_hat_inv) / c_hat_inv;
  out.c_residual = std::abs(q - c_inv) / c_inv;
  return out;
}

}  // namespace soblab
