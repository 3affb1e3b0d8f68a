#pragma once

#include "krein/core_model.hpp"

#include <cstddef>
#include <vector>

namespace krein {

struct Pole {
  Rational lambda;
  Rational weight;
};

/// m(z) = constant + sum_k weight_k / (lambda_k - z), poles increasing and
/// weights positive. Built for an interval (a,b) it satisfies m(0) = -1/(b-a).
struct RationalHerglotz {
  Rational constant;
  std::vector<Pole> poles;

  template <class T>
  T value(const T& z) const {
    T v = from_rational<T>(constant);
    for (const auto& p : poles) v += from_rational<T>(p.weight) / (from_rational<T>(p.lambda) - z);
    return v;
  }

  std::complex<double> value(std::complex<double> z) const {
    std::complex<double> v = to_double(constant);
    for (const auto& p : poles) v += to_double(p.weight) / (to_double(p.lambda) - z);
    return v;
  }
};

}  // namespace krein
