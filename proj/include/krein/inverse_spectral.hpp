#pragma once

// Reconstruction of a point-mass string from its spectral measure by the
// Stieltjes continued fraction of the Weyl function, and the truncation
// ladder for infinite measures.

#include "krein/core_model.hpp"
#include "krein/herglotz.hpp"
#include "krein/polynomial.hpp"
#include "krein/stieltjes_forward.hpp"
#include "krein/weakstar.hpp"

#include <optional>
#include <string>
#include <vector>

namespace krein {

/// m(z) = C + sum w_k/(lambda_k - z) with C fixed by m(0) = -1/(b-a).
RationalHerglotz weyl_from_measure(const SpectralMeasure& rho, const Interval& interval);

/// Raw continued-fraction output in the working scalar.
template <class T>
struct CfExpansion {
  std::vector<T> lengths;  // l_0..l_N
  std::vector<T> masses;   // m_1..m_N
  bool positive = true;
};

/// Numerator and denominator of m(z) as polynomials: m = P/Q with
/// Q = prod (1 - z/lambda_k).
template <class T>
std::pair<Polynomial<T>, Polynomial<T>> weyl_polynomials(const RationalHerglotz& m) {
  const T one(1);
  Polynomial<T> q = Polynomial<T>::constant(one);
  std::vector<T> lam, wl;
  for (const auto& p : m.poles) {
    lam.push_back(from_rational<T>(p.lambda));
    wl.push_back(from_rational<T>(p.weight) / from_rational<T>(p.lambda));
  }
  for (const auto& l : lam) q = q * Polynomial<T>(std::vector<T>{one, T(-one / l)});
  // sum_k (w_k/lambda_k) prod_{j != k} (1 - z/lambda_j) via prefix/suffix products
  const std::size_t n = lam.size();
  std::vector<Polynomial<T>> suffix(n + 1, Polynomial<T>::constant(one));
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * Polynomial<T>(std::vector<T>{one, T(-one / lam[k])});
  Polynomial<T> prefix = Polynomial<T>::constant(one);
  Polynomial<T> p = from_rational<T>(m.constant) * q;
  for (std::size_t k = 0; k < n; ++k) {
    p = p + wl[k] * (prefix * suffix[k + 1]);
    prefix = prefix * Polynomial<T>(std::vector<T>{one, T(-one / lam[k])});
  }
  return {p, q};
}

namespace detail {

template <class T>
Polynomial<T> padded(Polynomial<T> p, std::size_t size) {
  p.c.resize(size, T(0));
  return p;
}

}  // namespace detail

/// Stieltjes continued fraction: alternately strips a length (the constant
/// term of 1/m at infinity) and a mass (the linear term of the reciprocal).
/// Leading terms that cancel in exact arithmetic are dropped unconditionally.
template <class T>
CfExpansion<T> cf_expand(const Polynomial<T>& p_in, const Polynomial<T>& q_in, std::size_t n) {
  CfExpansion<T> out;
  // D = 1/m = X/Y, both of degree n
  std::vector<T> x = detail::padded(q_in, n + 1).c;
  std::vector<T> y = detail::padded(p_in, n + 1).c;
  for (std::size_t deg = n;; --deg) {
    if (y[deg] == T(0)) {
      out.positive = false;
      return out;
    }
    const T l = -x[deg] / y[deg];
    out.lengths.push_back(l);
    if (!(l > T(0))) out.positive = false;
    if (deg == 0) break;
    // R = X + l Y, degree deg-1
    std::vector<T> r(deg);
    for (std::size_t k = 0; k < deg; ++k) r[k] = x[k] + l * y[k];
    if (r[deg - 1] == T(0)) {
      out.positive = false;
      return out;
    }
    const T mass = y[deg] / r[deg - 1];
    out.masses.push_back(mass);
    if (!(mass > T(0))) out.positive = false;
    // new m = (Y - z mass R)/R, so the next D = R / (Y - z mass R)
    std::vector<T> ny(deg);
    for (std::size_t k = 0; k < deg; ++k) ny[k] = y[k] - (k > 0 ? mass * r[k - 1] : T(0));
    x = std::move(r);
    y = std::move(ny);
  }
  return out;
}

/// Continued-fraction extraction in exact arithmetic (bits == 0) or at the
/// given precision. Throws NumericalError when a nonpositive parameter
/// appears or the lengths do not add up to b-a within length_tol.
StieltjesString cf_extract(const RationalHerglotz& m, const Interval& interval, unsigned bits = 0,
                           double length_tol = 1e-12);

/// Cross-check oracle: Lanczos tridiagonalization of diag(lambda) with start
/// vector sqrt(w/sum w), then string parameters read off the Jacobi matrix.
StieltjesString lanczos_reconstruct(const SpectralMeasure& rho, const Interval& interval, unsigned bits = 256);

struct InverseOptions {
  unsigned precision_bits = 0;  // starting precision; 0 selects default_precision_bits()
  bool exact_when_possible = true;
  bool verify = true;
  double eigen_tol = 1e-9;
  double weight_tol = 1e-7;
  double length_tol = 1e-12;
  bool lanczos_crosscheck = false;
  ForwardOptions forward{};
};

struct InversionResult {
  StieltjesString string;
  bool exact = false;
  unsigned precision_bits = 0;  // precision of the successful attempt (0 when exact)
  unsigned verify_bits = 0;
  int attempts = 0;
  double eigen_residual = 0.0;   // max relative eigenvalue error of the forward check
  double weight_residual = 0.0;  // max relative weight error of the forward check
  double length_residual = 0.0;  // |sum l - (b-a)| / (b-a) before the last length is fixed
  std::optional<double> lanczos_discrepancy;  // max relative parameter difference
};

/// Inputs eligible for the exact rational path.
bool exact_path_eligible(const SpectralMeasure& rho, std::size_t max_atoms = 32, unsigned max_bits = 128);

/// Continued-fraction inversion with precision escalation up to 4096 bits
/// and an internal forward round-trip check.
InversionResult invert_measure(const SpectralMeasure& rho, const Interval& interval, const InverseOptions& opts = {});
InversionResult invert_measure(const SpectralMeasure& rho, const InverseOptions& opts = {});

/// String -> measure -> string. The inverse map is badly conditioned for
/// strings with widely spread parameters, so the forward data are recomputed
/// at increasing precision until the reconstruction matches within tol.
struct StringRoundTrip {
  InversionResult inversion;
  unsigned forward_bits = 0;
  double length_residual = 0.0;  // max relative length difference
  double mass_residual = 0.0;    // max relative mass difference
  bool ok = false;
};

StringRoundTrip roundtrip_string(const StieltjesString& s, double tol = 1e-7, const InverseOptions& opts = {});

/// Max relative difference of lengths and of masses; infinite when the
/// mass counts differ.
std::pair<double, double> string_residuals(const StieltjesString& got, const StieltjesString& want);

/// Relative residuals of spectral_data(s) against rho (atomwise).
std::pair<double, double> measure_residuals(const StieltjesString& s, const SpectralMeasure& rho, unsigned bits);

// ------------------------------------------------------------------------
// Built-in infinite measures.

/// Spectral measure of the unit-density string on (a,b), L = b-a:
/// eigenvalues (k pi / L)^2 with weights 1/gamma_k^2 = 2 lambda_k / L.
SpectralMeasure uniform_string_measure(const Interval& interval);

/// Eigenvalues (k pi / L)^2, every weight equal to `weight`.
SpectralMeasure constant_weight_measure(const Interval& interval, const Rational& weight);

/// Sums over k > K of 1/k^2 and 1/k^4.
double tail_inverse_squares(std::size_t K);
double tail_inverse_fourth_powers(std::size_t K);

// ------------------------------------------------------------------------
// Truncation ladder.

struct LadderRung {
  Rational cutoff;
  std::size_t atoms = 0;
  std::optional<InversionResult> result;
  std::string error;
  double weighted_total = 0.0;     // sum m_j (b-x_j)(x_j-a)
  bool within_uniform_bound = false;
  std::optional<double> distance_to_previous;
  std::optional<double> distance_to_reference;
};

struct LadderReport {
  double uniform_bound = 0.0;  // (b-a) sum 1/lambda over the whole measure
  std::vector<LadderRung> rungs;
};

/// Inverts 1_[0,cutoff] rho for each cutoff (rungs run in parallel). With a
/// reference measure the weak-star distance of each rung to it is reported.
LadderReport truncation_ladder(const SpectralMeasure& rho, const std::vector<Rational>& cutoffs,
                               const InverseOptions& opts = {}, const MassDistribution* reference = nullptr,
                               const WeakStarMetricConfig& metric = {});

// ------------------------------------------------------------------------
// Endpoint diagnostics.

enum class Trend { Converging, Diverging, Inconclusive };
const char* to_string(Trend t);

struct PartialSums {
  std::vector<double> cutoffs;
  std::vector<double> sums;
  Trend verdict = Trend::Inconclusive;
};

struct EndpointDiagnostics {
  PartialSums left;   // sum lambda^-2 gamma^-2: finite iff omega finite near a
  PartialSums right;  // sum lambda^-2 W'(lambda)^-2 gamma^2: finite iff omega finite near b
  bool finite_near_a = false;
  bool finite_near_b = false;
};

/// Trend of partial sums from the ratios of successive increments.
Trend classify_trend(const std::vector<double>& sums);

/// Partial sums at the given cutoffs. W'(lambda) comes from the zero product
/// (b-a) prod (1 - z/lambda) over the support of rho (tail included for
/// infinite measures); `wronskian` overrides it.
EndpointDiagnostics endpoint_diagnostics(const SpectralMeasure& rho, const std::vector<double>& cutoffs,
                                         const std::optional<ZeroProduct>& wronskian = std::nullopt);

/// The zero product (b-a) prod (1 - z/lambda) over the support of rho.
ZeroProduct wronskian_of_measure(const SpectralMeasure& rho);

}  // namespace krein
