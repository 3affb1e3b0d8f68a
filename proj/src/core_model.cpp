#include "krein/core_model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace krein {

Interval::Interval(Rational left, Rational right) : a(std::move(left)), b(std::move(right)) {
  if (!(a < b)) throw ValidationError("interval: need a < b");
}

// ---------------------------------------------------------------- Density

Density Density::uniform(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ValidationError("density: uniform value must be >= 0");
  Density d;
  d.kind_ = Kind::Uniform;
  d.coef_ = value;
  return d;
}

Density Density::power(double alpha_a, double alpha_b, double coef) {
  if (!(alpha_a >= 0.0 && alpha_a < 2.0 && alpha_b >= 0.0 && alpha_b < 2.0)) {
    throw ValidationError("density: endpoint exponents must lie in [0, 2)");
  }
  if (!(coef >= 0.0) || !std::isfinite(coef)) throw ValidationError("density: coefficient must be >= 0");
  Density d;
  d.kind_ = Kind::Power;
  d.alpha_a_ = alpha_a;
  d.alpha_b_ = alpha_b;
  d.coef_ = coef;
  return d;
}

Density Density::table(double alpha_a, double alpha_b, std::vector<double> xs, std::vector<double> vs) {
  Density d = power(alpha_a, alpha_b, 1.0);
  d.kind_ = Kind::Table;
  if (xs.size() < 2 || xs.size() != vs.size()) throw ValidationError("density: table needs >= 2 matching knots");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !(vs[i] >= 0.0) || !std::isfinite(vs[i])) {
      throw ValidationError("density: table values must be finite and >= 0");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) throw ValidationError("density: table x must be strictly increasing");
  }
  d.xs_ = std::move(xs);
  d.vs_ = std::move(vs);
  return d;
}

double Density::regular(double x) const {
  switch (kind_) {
    case Kind::Uniform:
    case Kind::Power:
      return coef_;
    case Kind::Table: {
      if (x <= xs_.front()) return vs_.front();
      if (x >= xs_.back()) return vs_.back();
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
      const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
      return vs_[i - 1] + t * (vs_[i] - vs_[i - 1]);
    }
  }
  return 0.0;
}

double Density::value(double x, double a, double b) const {
  double v = regular(x);
  if (alpha_a_ != 0.0) v *= std::pow(x - a, -alpha_a_);
  if (alpha_b_ != 0.0) v *= std::pow(b - x, -alpha_b_);
  return v;
}

// ------------------------------------------------------- MassDistribution

namespace {

std::vector<PointMass> normalize_masses(const Interval& iv, std::vector<PointMass> masses) {
  for (const auto& pm : masses) {
    if (!iv.contains_open(pm.x)) throw ValidationError("mass position outside the open interval");
    if (!(pm.m > 0)) throw ValidationError("point masses must be strictly positive");
  }
  std::sort(masses.begin(), masses.end(), [](const PointMass& l, const PointMass& r) { return l.x < r.x; });
  std::vector<PointMass> merged;
  for (auto& pm : masses) {
    if (!merged.empty() && merged.back().x == pm.x) {
      merged.back().m += pm.m;
    } else {
      merged.push_back(std::move(pm));
    }
  }
  return merged;
}

}  // namespace

MassDistribution::MassDistribution(Interval interval, std::vector<PointMass> masses,
                                   std::optional<Density> density)
    : interval_(std::move(interval)),
      masses_(normalize_masses(interval_, std::move(masses))),
      density_(std::move(density)) {}

MassDistribution MassDistribution::from_string(const StieltjesString& s) {
  return MassDistribution(s.interval(), s.point_masses());
}

double MassDistribution::density_at(double x) const {
  if (!density_) return 0.0;
  return density_->value(x, interval_.a_d(), interval_.b_d());
}

// -------------------------------------------------------- StieltjesString

StieltjesString::StieltjesString(Interval interval, std::vector<Rational> lengths,
                                 std::vector<Rational> masses)
    : interval_(std::move(interval)), lengths_(std::move(lengths)), masses_(std::move(masses)) {
  if (lengths_.size() != masses_.size() + 1) throw ValidationError("string: need N+1 lengths for N masses");
  Rational total = 0;
  for (const auto& l : lengths_) {
    if (!(l > 0)) throw ValidationError("string: lengths must be strictly positive");
    total += l;
  }
  for (const auto& m : masses_) {
    if (!(m > 0)) throw ValidationError("string: masses must be strictly positive");
  }
  if (total != interval_.length()) throw ValidationError("string: lengths must sum to b - a");
}

StieltjesString StieltjesString::from_masses(Interval interval, std::vector<PointMass> masses) {
  auto merged = normalize_masses(interval, std::move(masses));
  std::vector<Rational> lengths;
  std::vector<Rational> ms;
  Rational prev = interval.a;
  for (const auto& pm : merged) {
    lengths.push_back(pm.x - prev);
    ms.push_back(pm.m);
    prev = pm.x;
  }
  lengths.push_back(interval.b - prev);
  return StieltjesString(std::move(interval), std::move(lengths), std::move(ms));
}

StieltjesString StieltjesString::empty(Interval interval) {
  Rational len = interval.length();
  return StieltjesString(std::move(interval), {len}, {});
}

std::vector<Rational> StieltjesString::positions() const {
  std::vector<Rational> xs;
  xs.reserve(masses_.size());
  Rational x = interval_.a;
  for (std::size_t j = 0; j < masses_.size(); ++j) {
    x += lengths_[j];
    xs.push_back(x);
  }
  return xs;
}

std::vector<PointMass> StieltjesString::point_masses() const {
  const auto xs = positions();
  std::vector<PointMass> out;
  out.reserve(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) out.push_back({xs[j], masses_[j]});
  return out;
}

Rational weighted_total_exact(const StieltjesString& s) {
  Rational total = 0;
  const auto& iv = s.interval();
  for (const auto& pm : s.point_masses()) total += pm.m * (iv.b - pm.x) * (pm.x - iv.a);
  return total;
}

// -------------------------------------------------------- SpectralMeasure

SpectralMeasure::SpectralMeasure(Interval interval, std::vector<Atom> atoms)
    : interval_(std::move(interval)), atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& l, const Atom& r) { return l.lambda < r.lambda; });
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (!(atoms_[k].lambda > 0)) throw ValidationError("measure: eigenvalues must be positive");
    if (!(atoms_[k].weight > 0)) throw ValidationError("measure: weights must be positive");
    if (k > 0 && atoms_[k].lambda == atoms_[k - 1].lambda) throw ValidationError("measure: repeated eigenvalue");
  }
}

SpectralMeasure SpectralMeasure::infinite(Interval interval, MeasureTail tail) {
  SpectralMeasure m;
  m.interval_ = std::move(interval);
  m.tail_ = std::move(tail);
  return m;
}

std::vector<Atom> SpectralMeasure::atoms_up_to(const Rational& cutoff) const {
  std::vector<Atom> out;
  for (const auto& at : atoms_) {
    if (at.lambda <= cutoff) out.push_back(at);
  }
  if (tail_) {
    for (std::size_t k = 1;; ++k) {
      Atom at = tail_->atom(k);
      if (at.lambda > cutoff) break;
      out.push_back(std::move(at));
    }
  }
  return out;
}

SpectralMeasure SpectralMeasure::truncated(const Rational& cutoff) const {
  return SpectralMeasure(interval_, atoms_up_to(cutoff));
}

// ------------------------------------------------------------ ZeroProduct

ZeroProductValue zero_product_eval(const ZeroProduct& p, std::complex<double> z,
                                   const ZeroProductOptions& opts) {
  ZeroProductValue out;
  if (p.closed_form) {
    std::tie(out.value, out.derivative) = p.closed_form(z);
    return out;
  }
  std::complex<double> v = p.scale;
  std::complex<double> d = 0.0;
  auto absorb = [&](double lambda) {
    const std::complex<double> f = 1.0 - z / lambda;
    d = d * f - v / lambda;
    v = v * f;
  };
  for (double lam : p.zeros) absorb(lam);
  out.terms = p.zeros.size();
  if (p.is_finite()) {
    out.value = v;
    out.derivative = d;
    return out;
  }
  const double az = std::abs(z);
  auto zero_at = [&](std::size_t k) {  // k-th zero overall, 1-based
    return k <= p.zeros.size() ? p.zeros[k - 1] : p.zero_after(k - p.zeros.size());
  };
  double bound = 0.0;
  for (;;) {
    const double t = p.inverse_sum_after(out.terms);
    if (p.tail_sum_exact) {
      const double next = zero_at(out.terms + 1);
      if (next > 2.0 * az) {
        // log(1 - z/l) + z/l summed over the tail, and its z-derivative
        const double e2 = az * az * t / next / (2.0 * (1.0 - az / next));
        const double e1 = az * t / (next - az);
        const std::complex<double> q = std::exp(-z * t);
        const std::complex<double> val = v * q;
        const std::complex<double> der = (d - t * v) * q;
        const double value_err = std::abs(val) * std::expm1(e2);
        const double deriv_err = std::abs(der) * std::expm1(e2) + std::abs(val) * e1 * std::exp(e2);
        bound = std::max(value_err, deriv_err);
        const double scale = std::max({std::abs(val), std::abs(der), 1e-300});
        if (bound <= opts.tol * scale) {
          out.value = val;
          out.derivative = der;
          out.truncation_bound = bound;
          return out;
        }
      }
    } else {
      const double growth = std::exp(az * t);
      const double value_err = std::abs(v) * (growth - 1.0);
      const double deriv_err = std::abs(d) * (growth - 1.0) + std::abs(v) * t * growth;
      bound = std::max(value_err, deriv_err);
      const double scale = std::max({std::abs(v), std::abs(d), 1e-300});
      if (bound <= opts.tol * scale) break;
    }
    if (out.terms >= opts.max_terms) {
      throw NumericalError("zero product: tail bound insufficient for requested tolerance", bound);
    }
    // advance in blocks to amortise certificate calls
    const std::size_t block = std::max<std::size_t>(16, out.terms / 4);
    for (std::size_t i = 0; i < block && out.terms < opts.max_terms; ++i) {
      absorb(zero_at(out.terms + 1));
      ++out.terms;
    }
  }
  out.value = v;
  out.derivative = d;
  out.truncation_bound = bound;
  return out;
}

// ------------------------------------------------------------ Integration

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

double kronrod(const std::function<double(double)>& f, double lo, double hi, const QuadratureOptions& opts,
               double& err_acc) {
  if (!(hi > lo)) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double v = Kronrod::integrate(f, lo, hi, opts.max_depth, opts.tol, &err, &l1);
  if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value", err);
  err_acc += err * std::max(1.0, l1);
  if (err > 1e3 * opts.tol && err * std::max(1.0, l1) > 1e-9 * std::max(1.0, std::abs(v))) {
    throw NumericalError("quadrature did not converge", err);
  }
  return v;
}

// Density part of int_lo^hi g(x) (x-a)^pa (b-x)^pb d omega on a piece that
// touches at most one endpoint of (a,b).
double density_piece(const MassDistribution& omega, const std::function<double(double)>& g, double lo,
                     double hi, int pa, int pb, bool map_left, bool map_right, const QuadratureOptions& opts,
                     double& err) {
  const Density& dens = *omega.density();
  const double a = omega.interval().a_d();
  const double b = omega.interval().b_d();
  const double ea = pa - dens.alpha_a();  // exponent of (x-a)
  const double eb = pb - dens.alpha_b();  // exponent of (b-x)
  // only negative exponents need a map; a positive power is integrable as is
  if (map_left && ea < 0.0) {
    // x - a = L u^p with p = 1/(ea+1): (x-a)^ea dx = p L^(ea+1) du.
    if (!(ea > -1.0)) throw NumericalError("density not integrable at the left endpoint", INFINITY);
    const double L = hi - a;
    const double p = 1.0 / (ea + 1.0);
    const double pref = p * std::pow(L, ea + 1.0);
    auto f = [&](double u) {
      const double x = a + L * std::pow(u, p);
      return pref * g(x) * dens.regular(x) * std::pow(b - x, eb);
    };
    return kronrod(f, 0.0, 1.0, opts, err);
  }
  if (map_right && eb < 0.0) {
    if (!(eb > -1.0)) throw NumericalError("density not integrable at the right endpoint", INFINITY);
    const double L = b - lo;
    const double p = 1.0 / (eb + 1.0);
    const double pref = p * std::pow(L, eb + 1.0);
    auto f = [&](double u) {
      const double x = b - L * std::pow(u, p);
      return pref * g(x) * dens.regular(x) * std::pow(x - a, ea);
    };
    return kronrod(f, 0.0, 1.0, opts, err);
  }
  // a fractional positive power is integrable but not smooth; x - a = L u^4
  // leaves u^(4 ea + 3), which Gauss-Kronrod resolves
  const auto fractional = [](double e) { return e > 0.0 && e != std::floor(e); };
  if (map_left && fractional(ea)) {
    const double L = hi - a;
    auto f = [&](double u) {
      const double u4 = u * u * u * u;
      const double x = a + L * u4;
      return 4.0 * L * u * u * u * g(x) * dens.regular(x) * std::pow(L * u4, ea) * std::pow(b - x, eb);
    };
    return kronrod(f, 0.0, 1.0, opts, err);
  }
  if (map_right && fractional(eb)) {
    const double L = b - lo;
    auto f = [&](double u) {
      const double u4 = u * u * u * u;
      const double x = b - L * u4;
      return 4.0 * L * u * u * u * g(x) * dens.regular(x) * std::pow(x - a, ea) * std::pow(L * u4, eb);
    };
    return kronrod(f, 0.0, 1.0, opts, err);
  }
  auto f = [&](double x) { return g(x) * dens.regular(x) * std::pow(x - a, ea) * std::pow(b - x, eb); };
  return kronrod(f, lo, hi, opts, err);
}

double weighted_integral_impl(const MassDistribution& omega, const std::function<double(double)>& g,
                              double lo, double hi, int pa, int pb, const QuadratureOptions& opts,
                              const std::vector<double>& extra_breaks, double& err) {
  const double a = omega.interval().a_d();
  const double b = omega.interval().b_d();
  if (!(lo >= a && hi <= b && lo <= hi)) throw std::invalid_argument("weighted_integral: range outside [a,b]");
  double total = 0.0;
  for (const auto& pm : omega.point_masses()) {
    const double x = to_double(pm.x);
    if (x >= lo && x < hi) total += g(x) * std::pow(x - a, pa) * std::pow(b - x, pb) * to_double(pm.m);
  }
  if (!omega.has_density() || hi == lo) return total;

  std::vector<double> cuts{lo, hi};
  const double mid = 0.5 * (a + b);
  if (lo < mid && mid < hi) cuts.push_back(mid);
  for (double x : omega.density()->breakpoints()) {
    if (lo < x && x < hi) cuts.push_back(x);
  }
  for (double x : extra_breaks) {
    if (lo < x && x < hi) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // mid is always a cut when [lo,hi) spans it, so each piece touches at most one endpoint
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const bool left = cuts[i] == a;
    const bool right = cuts[i + 1] == b && !left;
    total += density_piece(omega, g, cuts[i], cuts[i + 1], pa, pb, left, right, opts, err);
  }
  return total;
}

}  // namespace

double weighted_integral(const MassDistribution& omega, const std::function<double(double)>& g, double lo,
                         double hi, int pa, int pb, const QuadratureOptions& opts,
                         const std::vector<double>& extra_breaks) {
  double err = 0.0;
  return weighted_integral_impl(omega, g, lo, hi, pa, pb, opts, extra_breaks, err);
}

double ls_integral(const MassDistribution& omega, const std::function<double(double)>& g, double alpha,
                   double beta, const QuadratureOptions& opts) {
  const double a = omega.interval().a_d();
  const double b = omega.interval().b_d();
  if (!(alpha > a && alpha < b && beta > a && beta < b)) {
    throw std::invalid_argument("ls_integral: limits must lie in the open interval");
  }
  if (alpha == beta) return 0.0;
  const double sign = alpha < beta ? 1.0 : -1.0;
  const double lo = std::min(alpha, beta);
  const double hi = std::max(alpha, beta);
  auto checked = [&g](double x) {
    const double v = g(x);
    if (!std::isfinite(v)) throw NumericalError("ls_integral: integrand is not finite", INFINITY);
    return v;
  };
  return sign * weighted_integral(omega, checked, lo, hi, 0, 0, opts);
}

MassCertificate validate_mass(const MassDistribution& omega, const QuadratureOptions& opts) {
  MassCertificate cert;
  double err = 0.0;
  const auto one = [](double) { return 1.0; };
  cert.weighted_total =
      weighted_integral_impl(omega, one, omega.interval().a_d(), omega.interval().b_d(), 1, 1, opts, {}, err);
  cert.error_estimate = err;
  if (!std::isfinite(cert.weighted_total)) {
    throw ValidationError("mass distribution: weighted total mass diverges");
  }
  if (omega.has_density()) {
    const auto& d = *omega.density();
    if (d.alpha_a() >= 2.0 || d.alpha_b() >= 2.0) {
      throw ValidationError("mass distribution: weighted total mass diverges");
    }
    const bool positive = d.kind() != Density::Kind::Table ? d.coef() > 0.0 : true;
    cert.finite_near_a = !(positive && d.alpha_a() >= 1.0);
    cert.finite_near_b = !(positive && d.alpha_b() >= 1.0);
  }
  return cert;
}

}  // namespace krein
