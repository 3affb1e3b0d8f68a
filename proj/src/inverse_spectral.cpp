#include "krein/inverse_spectral.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace krein {

RationalHerglotz weyl_from_measure(const SpectralMeasure& rho, const Interval& interval) {
  if (!rho.is_finite()) throw ValidationError("weyl_from_measure: measure must be finite");
  RationalHerglotz m;
  m.constant = Rational(-1) / interval.length();
  for (const auto& at : rho.atoms()) {
    m.poles.push_back({at.lambda, at.weight});
    m.constant -= at.weight / at.lambda;
  }
  return m;
}

namespace {

struct Extraction {
  StieltjesString string;
  double length_residual = 0.0;
};

// Lengths l_0..l_{N-1} and the masses are taken as computed; l_N closes the
// interval exactly.
template <class T>
Extraction assemble(const std::vector<T>& lengths, const std::vector<T>& masses, const Interval& interval,
                    double length_tol) {
  const Rational total = interval.length();
  std::vector<Rational> ls, ms;
  Rational partial = 0;
  for (std::size_t j = 0; j + 1 < lengths.size(); ++j) {
    ls.push_back(to_rational(lengths[j]));
    partial += ls.back();
  }
  for (const auto& m : masses) ms.push_back(to_rational(m));
  const Rational computed_sum = partial + to_rational(lengths.back());
  const double residual = to_double(Rational(abs(Rational(computed_sum - total)) / total));
  if (!(residual <= length_tol)) {
    throw NumericalError("continued fraction: lengths do not add up to b-a", residual);
  }
  ls.push_back(total - partial);
  if (!(ls.back() > 0)) throw NumericalError("continued fraction: nonpositive final length", residual);
  return {StieltjesString(interval, std::move(ls), std::move(ms)), residual};
}

Extraction cf_extract_impl(const RationalHerglotz& m, const Interval& interval, unsigned bits, double length_tol) {
  const std::size_t n = m.poles.size();
  if (bits == 0) {
    const auto [p, q] = weyl_polynomials<Rational>(m);
    const auto cf = cf_expand(p, q, n);
    if (!cf.positive) {
      throw ValidationError("continued fraction: nonpositive parameter in exact arithmetic (input not a spectral measure)");
    }
    Rational sum = 0;
    for (const auto& l : cf.lengths) sum += l;
    if (sum != interval.length()) throw ValidationError("continued fraction: exact lengths do not add up to b-a");
    return {StieltjesString(interval, cf.lengths, cf.masses), 0.0};
  }
  return with_precision(bits, [&]<class T>() {
    const auto [p, q] = weyl_polynomials<T>(m);
    const auto cf = cf_expand(p, q, n);
    if (!cf.positive || cf.lengths.size() != n + 1) {
      throw NumericalError("continued fraction: nonpositive parameter (precision loss)", 0.0);
    }
    return assemble(cf.lengths, cf.masses, interval, length_tol);
  });
}

}  // namespace

StieltjesString cf_extract(const RationalHerglotz& m, const Interval& interval, unsigned bits, double length_tol) {
  return cf_extract_impl(m, interval, bits, length_tol).string;
}

StieltjesString lanczos_reconstruct(const SpectralMeasure& rho, const Interval& interval, unsigned bits) {
  if (!rho.is_finite()) throw ValidationError("lanczos_reconstruct: measure must be finite");
  const std::size_t n = rho.size();
  if (n == 0) return StieltjesString::empty(interval);
  return with_precision(std::max(bits, 54u), [&]<class T>() {
    using std::sqrt;
    std::vector<T> lam(n), w(n);
    T wsum = T(0), inv = T(0);
    for (std::size_t k = 0; k < n; ++k) {
      lam[k] = from_rational<T>(rho.atoms()[k].lambda);
      w[k] = from_rational<T>(rho.atoms()[k].weight);
      wsum += w[k];
      inv += w[k] / lam[k];
    }
    // Lanczos with full reorthogonalisation on diag(lambda)
    std::vector<std::vector<T>> basis;
    std::vector<T> alpha, beta;
    std::vector<T> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = sqrt(w[k] / wsum);
    for (std::size_t j = 0; j < n; ++j) {
      basis.push_back(v);
      std::vector<T> u(n);
      for (std::size_t k = 0; k < n; ++k) u[k] = lam[k] * v[k];
      T a = T(0);
      for (std::size_t k = 0; k < n; ++k) a += u[k] * v[k];
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& qv : basis) {
          T dot = T(0);
          for (std::size_t k = 0; k < n; ++k) dot += u[k] * qv[k];
          for (std::size_t k = 0; k < n; ++k) u[k] -= dot * qv[k];
        }
      }
      if (j + 1 == n) break;
      T nrm = T(0);
      for (const auto& x : u) nrm += x * x;
      nrm = sqrt(nrm);
      beta.push_back(nrm);
      for (std::size_t k = 0; k < n; ++k) v[k] = u[k] / nrm;
    }
    // diagonal (1/l_{j-1} + 1/l_j)/m_j, off-diagonal 1/(l_j sqrt(m_j m_{j+1}))
    const T length = from_rational<T>(interval.length());
    std::vector<T> ls, ms;
    ls.push_back(T(1) / (T(1) / length + inv));
    ms.push_back(T(1) / (ls[0] * ls[0] * wsum));
    for (std::size_t j = 0; j < n; ++j) {
      ls.push_back(T(1) / (alpha[j] * ms[j] - T(1) / ls[j]));
      if (j + 1 < n) ms.push_back(T(1) / (ls[j + 1] * ls[j + 1] * beta[j] * beta[j] * ms[j]));
    }
    for (const auto& l : ls)
      if (!(l > T(0))) throw NumericalError("Lanczos reconstruction: nonpositive length", 0.0);
    for (const auto& m : ms)
      if (!(m > T(0))) throw NumericalError("Lanczos reconstruction: nonpositive mass", 0.0);
    return assemble(ls, ms, interval, 1e-6).string;
  });
}

bool exact_path_eligible(const SpectralMeasure& rho, std::size_t max_atoms, unsigned max_bits) {
  if (!rho.is_finite() || rho.size() > max_atoms) return false;
  auto small = [max_bits](const Rational& q) {
    return mpz_sizeinbase(numerator(q).backend().data(), 2) <= max_bits &&
           mpz_sizeinbase(denominator(q).backend().data(), 2) <= max_bits;
  };
  for (const auto& at : rho.atoms()) {
    if (!small(at.lambda) || !small(at.weight)) return false;
  }
  return true;
}

std::pair<double, double> measure_residuals(const StieltjesString& s, const SpectralMeasure& rho, unsigned bits) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto data = spectral_data(s, bits);
  const auto& got = data.measure.atoms();
  const auto& want = rho.atoms();
  if (got.size() != want.size()) return {inf, inf};
  double de = 0.0, dw = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    de = std::max(de, to_double(Rational(abs(Rational(got[k].lambda - want[k].lambda)) / want[k].lambda)));
    dw = std::max(dw, to_double(Rational(abs(Rational(got[k].weight - want[k].weight)) / want[k].weight)));
  }
  return {de, dw};
}

InversionResult invert_measure(const SpectralMeasure& rho, const Interval& interval, const InverseOptions& opts) {
  if (!rho.is_finite()) throw ValidationError("invert_measure: measure must be finite (use the truncation ladder)");
  const auto m = weyl_from_measure(rho, interval);
  const unsigned start = round_precision(opts.precision_bits == 0 ? default_precision_bits() : opts.precision_bits);
  InversionResult best;
  best.eigen_residual = best.weight_residual = std::numeric_limits<double>::infinity();
  std::string last_error = "no attempt";

  auto finish = [&](InversionResult r, unsigned verify_bits) {
    r.verify_bits = verify_bits;
    if (opts.verify) std::tie(r.eigen_residual, r.weight_residual) = measure_residuals(r.string, rho, verify_bits);
    if (opts.lanczos_crosscheck && rho.size() > 0) {
      const auto other = lanczos_reconstruct(rho, interval, std::max(verify_bits, 256u));
      double diff = 0.0;
      for (std::size_t j = 0; j < other.lengths().size(); ++j) {
        diff = std::max(diff, to_double(Rational(abs(Rational(other.lengths()[j] - r.string.lengths()[j])) /
                                                 r.string.lengths()[j])));
      }
      for (std::size_t j = 0; j < other.masses().size(); ++j) {
        diff = std::max(diff, to_double(Rational(abs(Rational(other.masses()[j] - r.string.masses()[j])) /
                                                 r.string.masses()[j])));
      }
      r.lanczos_discrepancy = diff;
    }
    return r;
  };
  auto accepted = [&](const InversionResult& r) {
    return !opts.verify || (r.eigen_residual <= opts.eigen_tol && r.weight_residual <= opts.weight_tol);
  };

  int attempts = 0;
  if (rho.size() == 0) {
    InversionResult r;
    r.string = StieltjesString::empty(interval);
    r.exact = true;
    r.attempts = 1;
    return finish(r, start);
  }
  if (opts.exact_when_possible && exact_path_eligible(rho)) {
    ++attempts;
    InversionResult r;
    r.string = cf_extract_impl(m, interval, 0, opts.length_tol).string;
    r.exact = true;
    r.attempts = attempts;
    r = finish(std::move(r), std::max(start, kDefaultPrecisionBits));
    if (accepted(r)) return r;
    best = r;
    last_error = "exact reconstruction failed the forward check";
  }
  for (unsigned bits : kPrecisionLadder) {
    if (bits < start) continue;
    ++attempts;
    try {
      auto ext = cf_extract_impl(m, interval, bits, opts.length_tol);
      InversionResult r;
      r.string = std::move(ext.string);
      r.length_residual = ext.length_residual;
      r.precision_bits = bits;
      r.attempts = attempts;
      r = finish(std::move(r), bits);
      if (accepted(r)) return r;
      if (r.eigen_residual + r.weight_residual < best.eigen_residual + best.weight_residual) best = r;
      last_error = "forward check residual above tolerance";
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  throw NumericalError("invert_measure: " + last_error + " at " + std::to_string(kMaxPrecisionBits) + " bits",
                       std::max(best.eigen_residual, best.weight_residual));
}

InversionResult invert_measure(const SpectralMeasure& rho, const InverseOptions& opts) {
  return invert_measure(rho, rho.interval(), opts);
}

std::pair<double, double> string_residuals(const StieltjesString& got, const StieltjesString& want) {
  const double inf = std::numeric_limits<double>::infinity();
  if (got.size() != want.size()) return {inf, inf};
  auto rel = [](const std::vector<Rational>& x, const std::vector<Rational>& y) {
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, to_double(Rational(abs(Rational(x[i] - y[i])) / y[i])));
    return r;
  };
  return {rel(got.lengths(), want.lengths()), rel(got.masses(), want.masses())};
}

StringRoundTrip roundtrip_string(const StieltjesString& s, double tol, const InverseOptions& opts) {
  StringRoundTrip out;
  const unsigned start = round_precision(opts.precision_bits == 0 ? default_precision_bits() : opts.precision_bits);
  for (unsigned bits : kPrecisionLadder) {
    if (bits < start) continue;
    out.forward_bits = bits;
    const auto rho = spectral_data(s, bits, opts.forward).measure;
    InverseOptions inner = opts;
    inner.precision_bits = bits;
    try {
      out.inversion = invert_measure(rho, s.interval(), inner);
    } catch (const NumericalError&) {
      continue;
    }
    std::tie(out.length_residual, out.mass_residual) = string_residuals(out.inversion.string, s);
    out.ok = out.length_residual <= tol && out.mass_residual <= tol;
    if (out.ok) break;
  }
  return out;
}

// ------------------------------------------------------------------------

double tail_inverse_squares(std::size_t K) { return boost::math::trigamma(static_cast<double>(K) + 1.0); }

double tail_inverse_fourth_powers(std::size_t K) {
  return boost::math::polygamma(3, static_cast<double>(K) + 1.0) / 6.0;
}

namespace {

// (k pi / L)^2 rounded to 256 bits
Rational dirichlet_eigenvalue(std::size_t k, const Rational& length) {
  using F = Float<256>;
  const F root = F(static_cast<double>(k)) * boost::math::constants::pi<F>() / from_rational<F>(length);
  return to_rational(F(root * root));
}

MeasureTail sine_tail(const Interval& interval, std::function<Rational(const Rational&)> weight, std::string name) {
  const Rational length = interval.length();
  const double l2 = to_double(Rational(length * length));
  const double pi2 = boost::math::constants::pi<double>() * boost::math::constants::pi<double>();
  MeasureTail t;
  t.atom = [length, weight](std::size_t k) {
    const Rational lam = dirichlet_eigenvalue(k, length);
    return Atom{lam, weight(lam)};
  };
  t.inverse_sum_after = [l2, pi2](std::size_t K) { return l2 / pi2 * tail_inverse_squares(K); };
  t.inverse_sum_exact = true;
  // sin(L sqrt z)/sqrt z and its derivative; series near 0
  const double len = to_double(length);
  t.wronskian = [len](std::complex<double> z) -> std::pair<std::complex<double>, std::complex<double>> {
    const std::complex<double> u = len * len * z;
    if (std::abs(u) < 1e-3) {
      const auto value = len * (1.0 - u / 6.0 + u * u / 120.0 - u * u * u / 5040.0);
      const auto deriv = len * len * len * (-1.0 / 6.0 + u / 60.0 - u * u / 1680.0 + u * u * u / 90720.0);
      return {value, deriv};
    }
    const std::complex<double> r = std::sqrt(z);
    const std::complex<double> sn = std::sin(len * r), cs = std::cos(len * r);
    return {sn / r, (len * cs / r - sn / z) / (2.0 * r)};
  };
  t.name = std::move(name);
  return t;
}

}  // namespace

SpectralMeasure uniform_string_measure(const Interval& interval) {
  const Rational length = interval.length();
  return SpectralMeasure::infinite(
      interval, sine_tail(interval, [length](const Rational& lam) { return Rational(2 * lam / length); }, "uniform"));
}

SpectralMeasure constant_weight_measure(const Interval& interval, const Rational& weight) {
  if (!(weight > 0)) throw ValidationError("constant_weight_measure: weight must be positive");
  return SpectralMeasure::infinite(
      interval, sine_tail(interval, [weight](const Rational&) { return weight; }, "constant:" + to_exact_string(weight)));
}

// ------------------------------------------------------------------------

LadderReport truncation_ladder(const SpectralMeasure& rho, const std::vector<Rational>& cutoffs,
                               const InverseOptions& opts, const MassDistribution* reference,
                               const WeakStarMetricConfig& metric) {
  for (std::size_t i = 1; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > cutoffs[i - 1])) throw ValidationError("ladder: cutoffs must be increasing");
  }
  const Interval& iv = rho.interval();
  LadderReport report;
  double inv = 0.0;
  for (const auto& at : rho.atoms()) inv += 1.0 / to_double(at.lambda);
  if (rho.tail()) inv += rho.tail()->inverse_sum_after(0);
  report.uniform_bound = iv.length_d() * inv;

  report.rungs.resize(cutoffs.size());
  const long count = static_cast<long>(cutoffs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    auto& rung = report.rungs[static_cast<std::size_t>(i)];
    rung.cutoff = cutoffs[static_cast<std::size_t>(i)];
    try {
      const auto truncated = rho.truncated(rung.cutoff);
      rung.atoms = truncated.size();
      if (rung.atoms == 0) throw ValidationError("empty truncation");
      rung.result = invert_measure(truncated, iv, opts);
      rung.weighted_total = to_double(weighted_total_exact(rung.result->string));
      rung.within_uniform_bound = rung.weighted_total <= report.uniform_bound * (1.0 + 1e-12);
    } catch (const std::exception& e) {
      rung.error = e.what();
    }
  }
  const MassDistribution* previous = nullptr;
  std::optional<MassDistribution> prev_storage;
  for (auto& rung : report.rungs) {
    if (!rung.result) {
      previous = nullptr;
      continue;
    }
    const auto omega = MassDistribution::from_string(rung.result->string);
    if (reference) rung.distance_to_reference = weakstar_distance(omega, *reference, metric);
    if (previous) rung.distance_to_previous = weakstar_distance(omega, *previous, metric);
    prev_storage = omega;
    previous = &*prev_storage;
  }
  return report;
}

// ------------------------------------------------------------------------

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Converging:
      return "converging";
    case Trend::Diverging:
      return "diverging";
    case Trend::Inconclusive:
      break;
  }
  return "inconclusive";
}

Trend classify_trend(const std::vector<double>& sums) {
  if (sums.size() < 2) return Trend::Inconclusive;
  std::vector<double> inc;
  for (std::size_t i = 1; i < sums.size(); ++i) inc.push_back(sums[i] - sums[i - 1]);
  const double scale = std::abs(sums.back());
  if (std::abs(inc.back()) <= 1e-15 * scale) return Trend::Converging;  // exhausted
  if (inc.size() < 3) return Trend::Inconclusive;
  const std::size_t n = inc.size();
  const double r1 = inc[n - 2] > 0 ? inc[n - 1] / inc[n - 2] : 1.0;
  const double r0 = inc[n - 3] > 0 ? inc[n - 2] / inc[n - 3] : 1.0;
  if (std::max(r0, r1) < 0.8) return Trend::Converging;
  if (std::min(r0, r1) >= 0.95) return Trend::Diverging;
  return Trend::Inconclusive;
}

ZeroProduct wronskian_of_measure(const SpectralMeasure& rho) {
  ZeroProduct w;
  w.scale = rho.interval().length_d();
  for (const auto& at : rho.atoms()) w.zeros.push_back(to_double(at.lambda));
  if (rho.tail()) {
    const auto tail = *rho.tail();
    w.zero_after = [tail](std::size_t k) { return to_double(tail.atom(k).lambda); };
    const std::size_t listed = rho.atoms().size();
    w.inverse_sum_after = [tail, listed](std::size_t K) { return tail.inverse_sum_after(K > listed ? K - listed : 0); };
    w.tail_sum_exact = tail.inverse_sum_exact;
    if (rho.atoms().empty()) w.closed_form = tail.wronskian;
  }
  return w;
}

EndpointDiagnostics endpoint_diagnostics(const SpectralMeasure& rho, const std::vector<double>& cutoffs,
                                         const std::optional<ZeroProduct>& wronskian) {
  EndpointDiagnostics out;
  if (cutoffs.empty()) return out;
  std::vector<double> cuts = cutoffs;
  std::sort(cuts.begin(), cuts.end());
  const auto atoms = rho.atoms_up_to(Rational(cuts.back()));
  const ZeroProduct w = wronskian ? *wronskian : wronskian_of_measure(rho);
  double left = 0.0, right = 0.0;
  std::size_t k = 0;
  for (double cut : cuts) {
    for (; k < atoms.size() && to_double(atoms[k].lambda) <= cut; ++k) {
      const double lam = to_double(atoms[k].lambda);
      const double weight = to_double(atoms[k].weight);
      left += weight / (lam * lam);
      const double wd = zero_product_eval(w, lam, {1e-13, 50'000'000}).derivative.real();
      right += 1.0 / (lam * lam * wd * wd * weight);
    }
    out.left.cutoffs.push_back(cut);
    out.left.sums.push_back(left);
    out.right.cutoffs.push_back(cut);
    out.right.sums.push_back(right);
  }
  out.left.verdict = classify_trend(out.left.sums);
  out.right.verdict = classify_trend(out.right.sums);
  out.finite_near_a = out.left.verdict == Trend::Converging;
  out.finite_near_b = out.right.verdict == Trend::Converging;
  return out;
}

}  // namespace krein
