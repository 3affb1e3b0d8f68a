#pragma once

// Scalar types shared by the solvers: exact rationals for stored data,
// fixed-precision binary floats for the high-precision paths, and double for
// the fast paths.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace krein {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

constexpr unsigned digits10_for_bits(unsigned bits) {
  // ceil(bits * log10(2)) + 1 keeps at least `bits` binary digits.
  return static_cast<unsigned>((bits * 30103ULL + 99999ULL) / 100000ULL) + 1;
}

template <unsigned Bits>
using Float = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<digits10_for_bits(Bits)>,
    boost::multiprecision::et_off>;

using Float256 = Float<256>;

template <class T>
inline constexpr bool is_double_v = std::is_same_v<T, double>;

/// Binary digits carried by T.
template <class T>
constexpr unsigned bits_of() {
  if constexpr (is_double_v<T>) {
    return 53;
  } else {
    return std::numeric_limits<T>::digits;
  }
}

/// Unit roundoff of T.
template <class T>
T unit_roundoff() {
  if constexpr (is_double_v<T>) {
    return std::numeric_limits<double>::epsilon();
  } else {
    return std::numeric_limits<T>::epsilon();
  }
}

template <class T>
T from_rational(const Rational& q) {
  if constexpr (is_double_v<T>) {
    return q.convert_to<double>();
  } else {
    return T(q.backend());
  }
}

/// Exact conversion of a binary float to a rational.
template <class T>
Rational to_rational(const T& x) {
  if constexpr (is_double_v<T>) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite value");
    return Rational(x);
  } else {
    if (!boost::multiprecision::isfinite(x)) {
      throw std::domain_error("non-finite value");
    }
    Integer mant;
    const long exp = mpfr_get_z_2exp(mant.backend().data(), x.backend().data());
    Rational q(mant);
    if (exp > 0) {
      mpq_mul_2exp(q.backend().data(), q.backend().data(), static_cast<unsigned long>(exp));
    } else if (exp < 0) {
      mpq_div_2exp(q.backend().data(), q.backend().data(), static_cast<unsigned long>(-exp));
    }
    return q;
  }
}

template <class T>
double to_double(const T& x) {
  if constexpr (is_double_v<T>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Precisions the multiprecision paths may run at.
inline constexpr unsigned kPrecisionLadder[] = {256, 512, 1024, 2048, 4096};
inline constexpr unsigned kDefaultPrecisionBits = 256;
inline constexpr unsigned kMaxPrecisionBits = 4096;

/// Smallest supported precision >= bits (53 or less selects double).
unsigned round_precision(unsigned bits);

/// Calls `fn.template operator()<T>()` with the float type matching `bits`
/// (after round_precision).
template <class Fn>
decltype(auto) with_precision(unsigned bits, Fn&& fn) {
  switch (round_precision(bits)) {
    case 53:
      return fn.template operator()<double>();
    case 256:
      return fn.template operator()<Float<256>>();
    case 512:
      return fn.template operator()<Float<512>>();
    case 1024:
      return fn.template operator()<Float<1024>>();
    case 2048:
      return fn.template operator()<Float<2048>>();
    default:
      return fn.template operator()<Float<4096>>();
  }
}

/// Default working precision: KREIN_PRECISION_BITS if set, else 256.
unsigned default_precision_bits();

// Textual form of rationals. Values that are exactly a double print as the
// shortest round-trip double; dyadic values print as exact decimals; all
// others print as "p/q".
bool is_exact_double(const Rational& q);
std::string to_exact_string(const Rational& q);
Rational parse_rational(const std::string& text);

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace krein
