#pragma once

// Forward spectral problem for finite point-mass strings. The numerical
// kernels are templates over the working scalar (double or Float<Bits>);
// the non-template entry points at the bottom run them at a requested
// precision and return exact rationals.

#include "krein/core_model.hpp"
#include "krein/herglotz.hpp"
#include "krein/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace krein {

enum class End { Left, Right };

/// Numeric copy of a string in the working scalar.
template <class T>
struct StringView {
  T a{};
  T b{};
  std::vector<T> lengths;    // l_0..l_N
  std::vector<T> masses;     // m_1..m_N
  std::vector<T> positions;  // x_1..x_N

  std::size_t size() const { return masses.size(); }
};

template <class T>
StringView<T> numeric_view(const StieltjesString& s) {
  StringView<T> v;
  v.a = from_rational<T>(s.interval().a);
  v.b = from_rational<T>(s.interval().b);
  for (const auto& l : s.lengths()) v.lengths.push_back(from_rational<T>(l));
  for (const auto& m : s.masses()) v.masses.push_back(from_rational<T>(m));
  for (const auto& x : s.positions()) v.positions.push_back(from_rational<T>(x));
  return v;
}

/// Solution of the string equation sampled at the masses. slopes[j] is the
/// slope on the j-th subinterval (x_j, x_{j+1}) with x_0 = a, x_{N+1} = b.
template <class Z>
struct TransferState {
  std::vector<Z> values;
  std::vector<Z> slopes;
  Z terminal{};  // value at the far endpoint: phi_a(z,b) or phi_b(z,a)
};

/// phi_a (End::Left) or phi_b (End::Right) at spectral parameter z.
template <class T, class Z>
TransferState<Z> transfer_phi(const StringView<T>& s, const Z& z, End end) {
  const std::size_t n = s.size();
  TransferState<Z> st;
  st.values.assign(n, Z(0));
  st.slopes.assign(n + 1, Z(0));
  if (end == End::Left) {
    Z u = Z(0);
    Z slope = Z(1);
    for (std::size_t j = 0; j < n; ++j) {
      u += Z(s.lengths[j]) * slope;
      st.values[j] = u;
      st.slopes[j] = slope;
      slope -= z * Z(s.masses[j]) * u;
    }
    st.slopes[n] = slope;
    st.terminal = u + Z(s.lengths[n]) * slope;
  } else {
    Z v = Z(0);
    Z slope = Z(-1);
    for (std::size_t j = n; j-- > 0;) {
      v -= Z(s.lengths[j + 1]) * slope;
      st.values[j] = v;
      st.slopes[j + 1] = slope;
      slope += z * Z(s.masses[j]) * v;
    }
    st.slopes[0] = slope;
    st.terminal = v - Z(s.lengths[0]) * slope;
  }
  return st;
}

template <class T>
struct WronskianSample {
  T value{};       // W(z) up to a positive scale factor (double only)
  T derivative{};  // dW/dz with the same scale factor
  std::size_t below = 0;  // number of eigenvalues strictly below z
};

namespace detail {

template <class T>
void rescale(T& u, T& s, T& du, T& ds) {
  if constexpr (is_double_v<T>) {
    const double mag = std::abs(u) + std::abs(s);
    if (mag > 1e200) {
      u *= 1e-200;
      s *= 1e-200;
      du *= 1e-200;
      ds *= 1e-200;
    }
  }
}

}  // namespace detail

/// W(z) = phi_a(z,b) with its z-derivative, plus the oscillation count: the
/// number of sign changes of phi_a(z, .) on (a,b), which equals the number of
/// eigenvalues strictly below z.
template <class T>
WronskianSample<T> sample_wronskian(const StringView<T>& s, const T& z, bool with_derivative = true) {
  const std::size_t n = s.size();
  T u = T(0), slope = T(1), du = T(0), dslope = T(0);
  int prev = 1;
  std::size_t changes = 0;
  auto visit = [&](const T& v, bool terminal) {
    if (v == T(0)) {
      if (!terminal) {
        ++changes;
        prev = -prev;
      }
    } else {
      const int sg = v > T(0) ? 1 : -1;
      if (sg != prev) {
        ++changes;
        prev = sg;
      }
    }
  };
  for (std::size_t j = 0; j < n; ++j) {
    u += s.lengths[j] * slope;
    if (with_derivative) du += s.lengths[j] * dslope;
    visit(u, false);
    if (with_derivative) dslope -= s.masses[j] * (u + z * du);
    slope -= z * s.masses[j] * u;
    detail::rescale(u, slope, du, dslope);
  }
  u += s.lengths[n] * slope;
  if (with_derivative) du += s.lengths[n] * dslope;
  visit(u, true);
  return {u, du, changes};
}

template <class T>
struct SpectrumResult {
  std::vector<T> eigenvalues;
  std::vector<T> widths;  // width of the final sign-change bracket
};

namespace detail {

template <class T>
T sqrt_t(const T& x) {
  using std::sqrt;
  return sqrt(x);
}

/// Interval guaranteed to contain the whole spectrum.
template <class T>
std::pair<T, T> spectrum_bounds(const StringView<T>& s) {
  const std::size_t n = s.size();
  T weighted = T(0);
  T upper = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    weighted += s.masses[j] * (s.b - s.positions[j]) * (s.positions[j] - s.a);
    T row = (T(1) / s.lengths[j] + T(1) / s.lengths[j + 1]) / s.masses[j];
    if (j > 0) row += T(1) / (s.lengths[j] * sqrt_t(s.masses[j - 1] * s.masses[j]));
    if (j + 1 < n) row += T(1) / (s.lengths[j + 1] * sqrt_t(s.masses[j] * s.masses[j + 1]));
    upper = std::max(upper, row);
  }
  // smallest eigenvalue >= 1 / trace(S^{-1})
  const T lower = (s.b - s.a) / weighted / T(2);
  return {lower, upper * T(1.0625)};
}

template <class T>
T bisect_point(const T& lo, const T& hi) {
  if (lo > T(0) && hi > T(4) * lo) return sqrt_t(lo * hi);
  return (lo + hi) / T(2);
}

/// Locates eigenvalue k (0-based) by oscillation-count bisection followed by
/// safeguarded Newton on W; returns (eigenvalue, certified bracket width).
template <class T>
std::pair<T, T> locate_eigenvalue(const StringView<T>& s, std::size_t k, T lo, T hi) {
  using std::abs;
  const T eps = unit_roundoff<T>();
  // isolate: count(lo) == k, count(hi) == k + 1
  for (int it = 0; it < 20000; ++it) {
    const std::size_t c_hi = sample_wronskian(s, hi, false).below;
    const std::size_t c_lo = sample_wronskian(s, lo, false).below;
    if (c_lo == k && c_hi == k + 1) break;
    const T mid = bisect_point(lo, hi);
    if (mid <= lo || mid >= hi) break;
    const std::size_t c_mid = sample_wronskian(s, mid, false).below;
    if (c_mid <= k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // W(lo) has sign (-1)^k
  const int sign_lo = (k % 2 == 0) ? 1 : -1;
  T x = bisect_point(lo, hi);
  for (int it = 0; it < 400; ++it) {
    const auto w = sample_wronskian(s, x, true);
    if (w.value == T(0)) return {x, T(0)};
    const int sg = w.value > T(0) ? 1 : -1;
    if (sg == sign_lo) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= T(4) * eps * hi) break;
    const bool usable = w.derivative != T(0);
    T next = usable ? T(x - w.value / w.derivative) : x;
    if (usable && abs(next - x) <= T(2) * eps * x) {
      // converged: certify with the tightest sign-change bracket around x
      // that rounding noise in the counts allows
      x = std::clamp(next, lo, hi);
      for (T delta = T(8) * eps * x; delta < hi - lo; delta *= T(16)) {
        const T l2 = std::max(lo, T(x - delta));
        const T h2 = std::min(hi, T(x + delta));
        const auto wl = sample_wronskian(s, l2, false);
        const auto wh = sample_wronskian(s, h2, false);
        if (wl.below == k && wh.below == k + 1) return {x, h2 - l2};
      }
      return {x, hi - lo};
    }
    if (!usable || !(next > lo && next < hi)) next = bisect_point(lo, hi);
    x = next;
  }
  return {(lo + hi) / T(2), hi - lo};
}

}  // namespace detail

/// Reference implementation: eigenvalues located one after another.
template <class T>
SpectrumResult<T> dirichlet_spectrum_serial(const StringView<T>& s) {
  SpectrumResult<T> r;
  const std::size_t n = s.size();
  if (n == 0) return r;
  const auto [lo, hi] = detail::spectrum_bounds(s);
  r.eigenvalues.resize(n);
  r.widths.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::tie(r.eigenvalues[k], r.widths[k]) = detail::locate_eigenvalue(s, k, lo, hi);
  }
  return r;
}

/// OpenMP kernel: one task per eigenvalue, results stored by index so the
/// output is identical to the serial reference.
template <class T>
SpectrumResult<T> dirichlet_spectrum_parallel(const StringView<T>& s) {
  SpectrumResult<T> r;
  const std::size_t n = s.size();
  if (n == 0) return r;
  const auto [lo, hi] = detail::spectrum_bounds(s);
  r.eigenvalues.resize(n);
  r.widths.resize(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    std::tie(r.eigenvalues[idx], r.widths[idx]) = detail::locate_eigenvalue(s, idx, lo, hi);
  }
  return r;
}

struct ForwardOptions {
  bool parallel = true;
};

template <class T>
SpectrumResult<T> dirichlet_spectrum(const StringView<T>& s, const ForwardOptions& opts = {}) {
  return opts.parallel ? dirichlet_spectrum_parallel(s) : dirichlet_spectrum_serial(s);
}

template <class T>
struct TripletT {
  T lambda{};
  T gamma_sq{};
  T coupling{};
  int theta = 0;
  T w_dot{};  // dW/dz at lambda, from the derivative recurrence
  T width{};
};

namespace detail {

template <class T>
TripletT<T> triplet_at(const StringView<T>& s, const T& lambda, const T& width) {
  using std::abs;
  TripletT<T> t;
  t.lambda = lambda;
  t.width = width;
  const auto left = transfer_phi(s, lambda, End::Left);
  const auto right = transfer_phi(s, lambda, End::Right);
  T gsq = T(0);
  std::size_t best = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    gsq += s.masses[j] * left.values[j] * left.values[j];
    if (abs(left.values[j]) > abs(left.values[best])) best = j;
  }
  t.gamma_sq = gsq;
  const T ratio = right.values[best] / left.values[best];
  t.theta = ratio < T(0) ? 1 : 0;
  t.coupling = abs(ratio);
  t.w_dot = sample_wronskian(s, lambda, true).derivative;
  return t;
}

}  // namespace detail

/// Eigenvalues with norming constants, couplings and W'(lambda).
template <class T>
std::vector<TripletT<T>> spectral_triplets(const StringView<T>& s, const ForwardOptions& opts = {}) {
  const auto spec = dirichlet_spectrum(s, opts);
  std::vector<TripletT<T>> out(spec.eigenvalues.size());
  const long count = static_cast<long>(out.size());
  if (opts.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < count; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out[i] = detail::triplet_at(s, spec.eigenvalues[i], spec.widths[i]);
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::triplet_at(s, spec.eigenvalues[i], spec.widths[i]);
  }
  return out;
}

// ------------------------------------------------------------------------
// Entry points on exact strings.

struct SpectralData {
  std::vector<SpectralTriplet> triplets;
  SpectralMeasure measure;
  unsigned precision_bits = 0;
};

std::vector<Rational> dirichlet_spectrum(const StieltjesString& s, unsigned bits = 53,
                                         const ForwardOptions& opts = {});
SpectralData spectral_data(const StieltjesString& s, unsigned bits = 53, const ForwardOptions& opts = {});

/// m(z) = phi_b'(z,a) / phi_b(z,a) as constant plus partial fractions.
RationalHerglotz weyl_m(const StieltjesString& s, unsigned bits = 53);

/// Substring on (a, c) with the masses strictly left of c.
StieltjesString left_substring(const StieltjesString& s, const Rational& split);
/// Substring on (c, b) with the masses strictly right of c; a mass at c
/// belongs to [c,b) but the Dirichlet condition at c removes it.
StieltjesString right_substring(const StieltjesString& s, const Rational& split);

ThreeSpectraTriple three_spectra_of(const StieltjesString& s, const Rational& split, unsigned bits = 53);

enum class CharFunction { PhiA, PhiB, PhiAPrime, PhiBPrime, Wronskian };

/// Exact coefficients (in z) of phi_a(z,c), phi_b(z,c), their left-continuous
/// x-derivatives at c, or W(z). `point` is ignored for the Wronskian.
Polynomial<Rational> char_poly(const StieltjesString& s, const Rational& point, CharFunction which);

}  // namespace krein
