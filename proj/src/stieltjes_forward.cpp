#include "krein/stieltjes_forward.hpp"

#include <cmath>

namespace krein {

std::vector<Rational> dirichlet_spectrum(const StieltjesString& s, unsigned bits, const ForwardOptions& opts) {
  return with_precision(bits, [&]<class T>() {
    const auto view = numeric_view<T>(s);
    const auto r = dirichlet_spectrum(view, opts);
    std::vector<Rational> out;
    out.reserve(r.eigenvalues.size());
    for (const auto& v : r.eigenvalues) out.push_back(to_rational(v));
    return out;
  });
}

SpectralData spectral_data(const StieltjesString& s, unsigned bits, const ForwardOptions& opts) {
  return with_precision(bits, [&]<class T>() {
    const auto view = numeric_view<T>(s);
    const auto trip = spectral_triplets(view, opts);
    SpectralData d;
    d.precision_bits = bits_of<T>();
    std::vector<Atom> atoms;
    for (const auto& t : trip) {
      SpectralTriplet st;
      st.lambda = to_rational(t.lambda);
      st.gamma_sq = to_rational(t.gamma_sq);
      st.coupling = to_rational(t.coupling);
      st.theta = t.theta;
      d.triplets.push_back(st);
      atoms.push_back({st.lambda, to_rational(T(T(1) / t.gamma_sq))});
    }
    d.measure = SpectralMeasure(s.interval(), std::move(atoms));
    return d;
  });
}

RationalHerglotz weyl_m(const StieltjesString& s, unsigned bits) {
  const auto d = spectral_data(s, bits);
  RationalHerglotz m;
  m.constant = Rational(-1) / s.interval().length();
  for (const auto& a : d.measure.atoms()) {
    m.poles.push_back({a.lambda, a.weight});
    m.constant -= a.weight / a.lambda;
  }
  return m;
}

StieltjesString left_substring(const StieltjesString& s, const Rational& split) {
  if (!s.interval().contains_open(split)) throw ValidationError("split point must lie inside the interval");
  std::vector<PointMass> kept;
  for (const auto& pm : s.point_masses())
    if (pm.x < split) kept.push_back(pm);
  return StieltjesString::from_masses(Interval(s.interval().a, split), std::move(kept));
}

StieltjesString right_substring(const StieltjesString& s, const Rational& split) {
  if (!s.interval().contains_open(split)) throw ValidationError("split point must lie inside the interval");
  std::vector<PointMass> kept;
  for (const auto& pm : s.point_masses())
    if (pm.x > split) kept.push_back(pm);
  return StieltjesString::from_masses(Interval(split, s.interval().b), std::move(kept));
}

ThreeSpectraTriple three_spectra_of(const StieltjesString& s, const Rational& split, unsigned bits) {
  ThreeSpectraTriple t;
  t.interval = s.interval();
  t.split = split;
  const auto full = spectral_data(s, bits);
  t.sigma_a = dirichlet_spectrum(left_substring(s, split), bits);
  t.sigma_b = dirichlet_spectrum(right_substring(s, split), bits);
  // eigenvalues shared by all three spectra agree only to working accuracy;
  // matched ones are snapped to the value from sigma
  const double tol = round_precision(bits) > 53 ? 1e-40 : 1e-9;
  auto snap = [&](std::vector<Rational>& part, const Rational& lam) {
    for (auto& v : part) {
      if (to_double(abs(Rational(v - lam))) <= tol * to_double(lam)) {
        v = lam;
        return true;
      }
    }
    return false;
  };
  for (const auto& trip : full.triplets) {
    t.sigma.push_back(trip.lambda);
    std::vector<Rational> a_copy = t.sigma_a, b_copy = t.sigma_b;
    if (snap(a_copy, trip.lambda) && snap(b_copy, trip.lambda)) {
      t.sigma_a = std::move(a_copy);
      t.sigma_b = std::move(b_copy);
      t.couplings[trip.lambda] = trip.coupling;
    }
  }
  return t;
}

namespace {

using RPoly = Polynomial<Rational>;

const RPoly& z_poly() {
  static const RPoly z(std::vector<Rational>{Rational(0), Rational(1)});
  return z;
}

}  // namespace

Polynomial<Rational> char_poly(const StieltjesString& s, const Rational& point, CharFunction which) {
  const auto& iv = s.interval();
  const auto masses = s.point_masses();
  if (which == CharFunction::Wronskian) {
    RPoly u, slope = RPoly::constant(1);
    Rational x = iv.a;
    for (const auto& pm : masses) {
      u = u + Rational(pm.x - x) * slope;
      slope = slope - pm.m * (z_poly() * u);
      x = pm.x;
    }
    return u + Rational(iv.b - x) * slope;
  }
  if (point <= iv.a || point >= iv.b) throw ValidationError("evaluation point must lie inside the interval");
  if (which == CharFunction::PhiA || which == CharFunction::PhiAPrime) {
    RPoly u, slope = RPoly::constant(1);
    Rational x = iv.a;
    for (const auto& pm : masses) {
      if (pm.x >= point) break;
      u = u + Rational(pm.x - x) * slope;
      slope = slope - pm.m * (z_poly() * u);
      x = pm.x;
    }
    return which == CharFunction::PhiA ? u + Rational(point - x) * slope : slope;
  }
  RPoly v, slope = RPoly::constant(-1);
  Rational x = iv.b;
  for (auto it = masses.rbegin(); it != masses.rend(); ++it) {
    if (it->x < point) break;
    v = v - Rational(x - it->x) * slope;
    x = it->x;
    if (it->x == point) {
      // left derivative at a mass includes its jump
      return which == CharFunction::PhiB ? v : slope + it->m * (z_poly() * v);
    }
    slope = slope + it->m * (z_poly() * v);
  }
  return which == CharFunction::PhiB ? v - Rational(x - point) * slope : slope;
}

}  // namespace krein
