// Shared numeric utilities: deterministic RNG streams, pairwise reductions,
// hashing and float formatting used by the report writers.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace soblab {

using RealField = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// splitmix64: the stream behind every seeded ensemble. Chosen over
// std::mt19937 + distributions because its output is bit-stable across
// platforms and standard libraries.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller (no cached spare: keeps the stream
  // position a pure function of the draw count)
  double next_normal() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }
};

// Per-trial seed derivation with the prefix property: seeds[i] does not
// depend on the total trial count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 s(index + 0x9e3779b97f4a7c15ull);
  return master ^ s.next_u64();
}

// FNV-1a 64-bit content hash (manifold files, config echo).
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// Pairwise (tree) summation: deterministic independent of chunking and
// accurate to O(log n) rounding.
template <typename T>
T pairwise_sum(std::vector<T>& terms) {
  if (terms.empty()) throw std::invalid_argument("pairwise_sum: empty input");
  std::size_t n = terms.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i)
      terms[i] = terms[2 * i] + terms[2 * i + 1];
    if (n % 2 == 1) terms[half] = terms[n - 1];
    n = half + n % 2;
  }
  return terms[0];
}

inline double pairwise_sum_values(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  std::vector<double> terms(values);
  return pairwise_sum(terms);
}

// %.17g: enough digits that parse(format(x)) == x exactly.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

inline bool approx_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename Scalar>
struct FieldOf {
  using type = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
};

}  // namespace soblab
