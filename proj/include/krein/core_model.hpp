#pragma once

#include "krein/numeric.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace krein {

/// Input rejected by a validator (malformed or outside the admissible class).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

struct Interval {
  Rational a;
  Rational b;

  Interval() : a(0), b(1) {}
  Interval(Rational left, Rational right);

  Rational length() const { return b - a; }
  double a_d() const { return to_double(a); }
  double b_d() const { return to_double(b); }
  double length_d() const { return to_double(Rational(b - a)); }
  bool contains_open(const Rational& x) const { return a < x && x < b; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct PointMass {
  Rational x;
  Rational m;
};

/// Absolutely continuous part of a mass distribution. The density is
/// regular(x) * (x-a)^(-alpha_a) * (b-x)^(-alpha_b) with regular(x) bounded,
/// nonnegative and continuous on [a,b], and 0 <= alpha_a, alpha_b < 2.
class Density {
 public:
  enum class Kind { Uniform, Power, Table };

  static Density uniform(double value);
  static Density power(double alpha_a, double alpha_b, double coef = 1.0);
  /// Piecewise-linear regular part through (xs[i], vs[i]); xs strictly increasing.
  static Density table(double alpha_a, double alpha_b, std::vector<double> xs, std::vector<double> vs);

  Kind kind() const { return kind_; }
  double alpha_a() const { return alpha_a_; }
  double alpha_b() const { return alpha_b_; }
  double coef() const { return coef_; }
  const std::vector<double>& table_x() const { return xs_; }
  const std::vector<double>& table_v() const { return vs_; }

  double regular(double x) const;
  double value(double x, double a, double b) const;
  /// Points where the regular part has kinks.
  std::vector<double> breakpoints() const { return xs_; }

  friend bool operator==(const Density&, const Density&) = default;

 private:
  Kind kind_ = Kind::Uniform;
  double alpha_a_ = 0.0;
  double alpha_b_ = 0.0;
  double coef_ = 1.0;
  std::vector<double> xs_;
  std::vector<double> vs_;
};

class StieltjesString;

/// A measure in the class M on (a,b): point masses plus an optional density.
class MassDistribution {
 public:
  MassDistribution() = default;
  /// Sorts and merges coincident masses; rejects masses outside (a,b) or <= 0.
  MassDistribution(Interval interval, std::vector<PointMass> masses,
                   std::optional<Density> density = std::nullopt);

  static MassDistribution from_string(const StieltjesString& s);

  const Interval& interval() const { return interval_; }
  const std::vector<PointMass>& point_masses() const { return masses_; }
  const std::optional<Density>& density() const { return density_; }
  bool has_density() const { return density_.has_value(); }

  /// Density value at an interior point (0 without a density part).
  double density_at(double x) const;

 private:
  Interval interval_;
  std::vector<PointMass> masses_;
  std::optional<Density> density_;
};

/// Finite point-mass string with lengths l_0..l_N and masses m_1..m_N.
class StieltjesString {
 public:
  StieltjesString() : lengths_{Rational(1)} {}
  /// Lengths/masses form; requires sum(lengths) == b-a exactly, l_0, l_N > 0
  /// and interior lengths > 0.
  StieltjesString(Interval interval, std::vector<Rational> lengths, std::vector<Rational> masses);

  /// Positions form; coincident masses are merged.
  static StieltjesString from_masses(Interval interval, std::vector<PointMass> masses);
  static StieltjesString empty(Interval interval);

  const Interval& interval() const { return interval_; }
  const std::vector<Rational>& lengths() const { return lengths_; }
  const std::vector<Rational>& masses() const { return masses_; }
  std::size_t size() const { return masses_.size(); }
  std::vector<Rational> positions() const;
  std::vector<PointMass> point_masses() const;

  friend bool operator==(const StieltjesString&, const StieltjesString&) = default;

 private:
  Interval interval_;
  std::vector<Rational> lengths_;
  std::vector<Rational> masses_;
};

struct Atom {
  Rational lambda;
  Rational weight;
};

/// Generator for the atoms of an infinite spectral measure, with a
/// certificate bounding sum_{k>K} 1/lambda_k.
struct MeasureTail {
  std::function<Atom(std::size_t k)> atom;           // k = 1, 2, ...
  std::function<double(std::size_t K)> inverse_sum_after;
  bool inverse_sum_exact = false;  // the certificate is the exact tail sum
  /// Optional closed form of (b-a) prod (1 - z/lambda_k) and its derivative.
  std::function<std::pair<std::complex<double>, std::complex<double>>(std::complex<double>)> wronskian;
  std::string name;
};

/// A discrete measure in the class S: sum of weight * delta_lambda.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  /// Sorts atoms; rejects nonpositive eigenvalues or weights and duplicates.
  SpectralMeasure(Interval interval, std::vector<Atom> atoms);
  static SpectralMeasure infinite(Interval interval, MeasureTail tail);

  const Interval& interval() const { return interval_; }
  bool is_finite() const { return !tail_.has_value(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<MeasureTail>& tail() const { return tail_; }
  std::size_t size() const { return atoms_.size(); }

  /// Atoms with lambda <= cutoff (closed on the right).
  std::vector<Atom> atoms_up_to(const Rational& cutoff) const;
  SpectralMeasure truncated(const Rational& cutoff) const;

 private:
  Interval interval_;
  std::vector<Atom> atoms_;
  std::optional<MeasureTail> tail_;
};

struct SpectralTriplet {
  Rational lambda;
  Rational gamma_sq;
  Rational coupling;
  int theta = 0;
};

struct ThreeSpectraTriple {
  Interval interval;
  Rational split;
  std::vector<Rational> sigma;
  std::vector<Rational> sigma_a;
  std::vector<Rational> sigma_b;
  std::map<Rational, Rational> couplings;  // defined on sigma ∩ sigma_a ∩ sigma_b
};

/// z -> scale * prod (1 - z/lambda); zeros optionally continued by a generator.
struct ZeroProduct {
  double scale = 1.0;
  std::vector<double> zeros;
  std::function<double(std::size_t k)> zero_after;        // k-th zero beyond `zeros`, k = 1, 2, ...
  std::function<double(std::size_t K)> inverse_sum_after;  // sum over zeros beyond index K (1-based, all zeros)
  /// inverse_sum_after is exact rather than an upper bound; the truncated
  /// product is then corrected by exp(-z T_K) and the error is second order.
  bool tail_sum_exact = false;
  /// When set, the product is evaluated from this instead of the zeros.
  std::function<std::pair<std::complex<double>, std::complex<double>>(std::complex<double>)> closed_form;
  bool is_finite() const { return !zero_after; }
};

struct ZeroProductValue {
  std::complex<double> value;
  std::complex<double> derivative;
  std::size_t terms = 0;
  double truncation_bound = 0.0;
};

struct ZeroProductOptions {
  double tol = 1e-14;
  std::size_t max_terms = 50'000'000;
};

/// Value and z-derivative of the zero product, with the truncation bound
/// derived from the inverse-sum certificate for infinite zero lists.
ZeroProductValue zero_product_eval(const ZeroProduct& p, std::complex<double> z,
                                   const ZeroProductOptions& opts = {});

struct QuadratureOptions {
  double tol = 1e-13;
  unsigned max_depth = 18;
};

/// Integral of g over [alpha, beta) with respect to omega; antisymmetric in
/// (alpha, beta). Point masses at alpha count, at beta do not (alpha < beta).
double ls_integral(const MassDistribution& omega, const std::function<double(double)>& g,
                   double alpha, double beta, const QuadratureOptions& opts = {});

/// Integral of g(x) (x-a)^pa (b-x)^pb d omega over [lo, hi) with lo, hi in
/// [a, b]; endpoint singularities of the density are removed by power maps.
double weighted_integral(const MassDistribution& omega, const std::function<double(double)>& g,
                         double lo, double hi, int pa, int pb, const QuadratureOptions& opts = {},
                         const std::vector<double>& extra_breaks = {});

struct MassCertificate {
  double weighted_total = 0.0;  // integral of (b-x)(x-a) d omega
  double error_estimate = 0.0;
  bool finite_near_a = true;
  bool finite_near_b = true;
};

MassCertificate validate_mass(const MassDistribution& omega, const QuadratureOptions& opts = {});

/// sum_j m_j (b - x_j)(x_j - a), exact.
Rational weighted_total_exact(const StieltjesString& s);

}  // namespace krein
