// Built-in scalar nonlinearities with certified Lipschitz constants on a
// given range; shared by the nonlinearity-action report and the PDE runs.
#pragma once

#include "soblab/common.hpp"

#include <functional>

namespace soblab {

struct Nonlinearity {
  std::string name;
  std::function<double(double)> real_fn;
  std::function<std::complex<double>(std::complex<double>)> complex_fn;
  // Lipschitz constant valid on {|x| <= R}; for globally Lipschitz entries
  // the bound is independent of R.
  std::function<double(double)> lipschitz_on;
  bool complex_capable = false;
};

inline Nonlinearity make_nonlinearity(const std::string& name) {
  using C = std::complex<double>;
  if (name == "zero")
    return {name, [](double) { return 0.0; }, [](C) { return C(0.0); },
            [](double) { return 0.0; }, true};
  if (name == "identity")
    return {name, [](double x) { return x; }, [](C z) { return z; },
            [](double) { return 1.0; }, true};
  if (name == "abs")
    return {name, [](double x) { return std::abs(x); }, {},
            [](double) { return 1.0; }, false};
  if (name == "sin")
    return {name, [](double x) { return std::sin(x); }, {},
            [](double) { return 1.0; }, false};
  if (name == "tanh")
    return {name, [](double x) { return std::tanh(x); },
            [](C z) { return std::tanh(z); }, [](double) { return 1.0; }, true};
  if (name == "square" || name == "u2")
    return {name, [](double x) { return x * x; }, [](C z) { return z * z; },
            [](double r) { return 2.0 * r; }, true};
  if (name == "cube" || name == "u3")
    return {name, [](double x) { return x * x * x; }, [](C z) { return z * z * z; },
            [](double r) { return 3.0 * r * r; }, true};
  if (name == "modsq" || name == "|u|2u")
    return {name, [](double x) { return x * x * x; },
            [](C z) { return std::norm(z) * z; },
            [](double r) { return 3.0 * r * r; }, true};
  throw std::invalid_argument("nonlinearity '" + name + "' has no Lipschitz certificate");
}

}  // namespace soblab
