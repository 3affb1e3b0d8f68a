// Acceptance run: one PASS/FAIL line per criterion.

#include "krein/convergence_lab.hpp"
#include "krein/inverse_spectral.hpp"
#include "krein/singular_forward.hpp"
#include "krein/stieltjes_forward.hpp"
#include "krein/three_spectra.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

using namespace krein;

namespace {

using Clock = std::chrono::steady_clock;
const double pi = std::numbers::pi;
const double pi2 = pi * pi;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(const Rational& got, const Rational& want) { return to_double(abs(Rational((got - want) / want))); }

/// Log-uniform lengths and masses in [10^-spread, 10^spread].
StieltjesString random_string(std::mt19937_64& rng, std::size_t n, double spread) {
  std::uniform_real_distribution<double> logu(-spread, spread);
  std::vector<Rational> lengths, masses;
  Rational total = 0;
  for (std::size_t j = 0; j <= n; ++j) {
    lengths.emplace_back(std::pow(10.0, logu(rng)));
    total += lengths.back();
  }
  for (std::size_t j = 0; j < n; ++j) masses.emplace_back(std::pow(10.0, logu(rng)));
  return StieltjesString(Interval(0, total), lengths, masses);
}

/// Mirror-symmetric string; splitting it at the centre produces common eigenvalues.
StieltjesString symmetric_string(std::mt19937_64& rng, std::size_t half) {
  std::uniform_int_distribution<int> len(1, 9), mass(1, 20);
  std::vector<Rational> left, masses;
  for (std::size_t j = 0; j <= half; ++j) left.emplace_back(len(rng), 4);
  for (std::size_t j = 0; j < half; ++j) masses.emplace_back(mass(rng), 5);
  std::vector<Rational> lengths(left.begin(), left.end() - 1);
  lengths.push_back(2 * left.back());
  for (std::size_t j = half; j-- > 0;) lengths.push_back(left[j]);
  std::vector<Rational> all = masses;
  for (std::size_t j = half; j-- > 0;) all.push_back(masses[j]);
  Rational total = 0;
  for (const auto& l : lengths) total += l;
  return StieltjesString(Interval(0, total), lengths, all);
}

Rational random_split(std::mt19937_64& rng, const Interval& iv) {
  std::uniform_int_distribution<int> num(1, 999);
  return iv.a + iv.length() * Rational(num(rng), 1000);
}

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& check) {
  Verdict v{false, ""};
  const auto t0 = Clock::now();
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("%s  %d. %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ------------------------------------------------------------------------

Verdict forward_f2() {
  const auto t0 = Clock::now();
  const StieltjesString f2(Interval(0, 1), std::vector<Rational>(3, Rational(1, 3)), {1, 1});
  const auto d = spectral_data(f2, 256);
  const double secs = seconds_since(t0);
  if (d.triplets.size() != 2) return {false, "wrong eigenvalue count"};
  const double want_l[] = {3, 9}, want_g[] = {2.0 / 9, 2.0 / 9};
  const int want_t[] = {0, 1};
  double err = 0.0;
  bool theta = true;
  for (int i = 0; i < 2; ++i) {
    err = std::max(err, std::abs(to_double(d.triplets[i].lambda) - want_l[i]));
    err = std::max(err, std::abs(to_double(d.triplets[i].gamma_sq) - want_g[i]));
    err = std::max(err, std::abs(to_double(d.triplets[i].coupling) - 1.0));
    theta = theta && d.triplets[i].theta == want_t[i];
  }
  return {err <= 1e-12 && theta && secs < 1.0, fmt("max abs error %.2e", err) + fmt(", %.3f s", secs)};
}

Verdict trace_formula() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto s = random_string(rng, 1 + static_cast<std::size_t>(t) % 50, 2.0);
    Rational sum = 0;
    for (const auto& l : dirichlet_spectrum(s, 256)) sum += 1 / l;
    worst = std::max(worst, rel(sum, Rational(weighted_total_exact(s) / s.interval().length())));
  }
  const MassDistribution uni(Interval(0, 1), {}, Density::uniform(1.0));
  const auto ev = eigenvalues_below(uni, 1e4, 1e-10);
  double partial = 0.0;
  for (double l : ev.eigenvalues) partial += 1.0 / l;
  const std::size_t K = ev.eigenvalues.size();
  const double tail = tail_inverse_squares(K) / pi2;
  const double mismatch = std::abs(partial + tail - 1.0 / 6);
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-11 && K == static_cast<std::size_t>(std::floor(std::sqrt(1e4) / pi)) &&
                  mismatch <= 1e-11 && secs < 30;
  return {ok, fmt("strings rel %.1e", worst) + fmt(", uniform |partial + tail - 1/6| = %.1e", mismatch) +
                  ", K = " + std::to_string(K)};
}

Verdict singular_forward() {
  const MassDistribution uni(Interval(0, 1), {}, Density::uniform(1.0));
  const auto ev = eigenvalues_below(uni, 50, 1e-12).eigenvalues;
  double e1 = ev.size() == 2 ? std::max(std::abs(ev[0] - pi2), std::abs(ev[1] - 4 * pi2)) : INFINITY;
  const double m = m_a_series(uni, pi2 / 4, 0.5, 1e-12).value.real();
  const double tr = trace_total(density_fixture("power:alpha=1.5", Interval(0, 1)));
  const bool ok = e1 <= 1e-8 && std::abs(m - 0.900316) <= 1e-6 && std::abs(tr - 4.0 / 3) <= 1e-8;
  return {ok, fmt("eigen err %.1e", e1) + fmt(", m_a = %.7f", m) + fmt(", trace err %.1e", std::abs(tr - 4.0 / 3))};
}

Verdict inverse_roundtrips() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lu(-2.0, 6.0), wu(-6.0, 6.0);
  std::uniform_int_distribution<std::size_t> nu(1, 50);
  double eig = 0.0, wgt = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = nu(rng);
    std::vector<Atom> atoms;
    std::set<double> used;
    while (atoms.size() < n) {
      const double l = std::pow(10.0, lu(rng));
      if (used.insert(l).second) atoms.push_back({Rational(l), Rational(std::pow(10.0, wu(rng)))});
    }
    InverseOptions o;
    o.precision_bits = 256;
    const auto r = invert_measure(SpectralMeasure(Interval(0, 1), atoms), o);
    eig = std::max(eig, r.eigen_residual);
    wgt = std::max(wgt, r.weight_residual);
  }
  double len = 0.0, mass = 0.0;
  std::uniform_int_distribution<std::size_t> ns(1, 30);
  for (int t = 0; t < 30; ++t) {
    const auto r = roundtrip_string(random_string(rng, ns(rng), 3.0));
    len = std::max(len, r.length_residual);
    mass = std::max(mass, r.mass_residual);
  }
  const double secs = seconds_since(t0);
  const bool ok = eig <= 1e-9 && wgt <= 1e-7 && len <= 1e-7 && mass <= 1e-7 && secs < 300;
  return {ok, fmt("A: eigen %.1e", eig) + fmt(", weight %.1e", wgt) + fmt("; B: length %.1e", len) +
                  fmt(", mass %.1e", mass)};
}

Verdict three_spectra_identity() {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<std::size_t> nu(1, 20);
  double gam = 0.0, str = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto s = random_string(rng, nu(rng), 1.0);
    const Rational c = random_split(rng, s.interval());
    const auto triple = three_spectra_of(s, c, 512);
    const auto rho = gamma_from_triple(triple);
    const auto fwd = spectral_data(s, 512).measure;
    if (rho.size() != fwd.size()) return {false, "atom count mismatch"};
    for (std::size_t i = 0; i < rho.size(); ++i) gam = std::max(gam, rel(rho.atoms()[i].weight, fwd.atoms()[i].weight));
    const auto r = invert_triple(triple);
    const auto [dl, dm] = string_residuals(r.inversion.string, s);
    str = std::max({str, dl, dm});
  }
  return {gam <= 1e-7 && str <= 1e-6, fmt("weights rel %.1e", gam) + fmt(", string rel %.1e", str)};
}

Verdict non_uniqueness() {
  ThreeSpectraTriple t{Interval(0, 1), Rational(1, 2), {3, 9}, {9}, {9}, {}};
  std::vector<StieltjesString> strings;
  double triple_err = 0.0;
  for (const Rational c : {Rational(1, 2), Rational(1), Rational(2)}) {
    t.couplings = {{9, c}};
    const auto s = invert_triple(t).inversion.string;
    const auto back = three_spectra_of(s, t.split, 256);
    auto cmp = [&](const std::vector<Rational>& x, const std::vector<Rational>& y) {
      if (x.size() != y.size()) triple_err = INFINITY;
      for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) triple_err = std::max(triple_err, rel(x[i], y[i]));
    };
    cmp(back.sigma, t.sigma);
    cmp(back.sigma_a, t.sigma_a);
    cmp(back.sigma_b, t.sigma_b);
    strings.push_back(s);
  }
  double min_diff = INFINITY;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const auto [dl, dm] = string_residuals(strings[i], strings[j]);
      min_diff = std::min(min_diff, std::max(dl, dm));
    }
  return {min_diff > 1e-3 && triple_err <= 1e-9,
          fmt("min pairwise parameter difference %.3f", min_diff) + fmt(", triple mismatch %.1e", triple_err)};
}

Verdict truncation_ladder_uniform() {
  const Interval iv(0, 1);
  const MassDistribution reference(iv, {}, Density::uniform(1.0));
  const auto rep = truncation_ladder(uniform_string_measure(iv), {15, 45, 95, 165}, {}, &reference);
  bool ok = rep.rungs.size() == 4;
  double eig = 0.0, wgt = 0.0;
  std::string dist;
  for (std::size_t i = 0; ok && i < rep.rungs.size(); ++i) {
    const auto& r = rep.rungs[i];
    if (!r.result || !r.distance_to_reference) {
      ok = false;
      break;
    }
    eig = std::max(eig, r.result->eigen_residual);
    wgt = std::max(wgt, r.result->weight_residual);
    dist += fmt(i ? " > %.4f" : "%.4f", *r.distance_to_reference);
    if (i > 0 && !(*r.distance_to_reference < *rep.rungs[i - 1].distance_to_reference)) ok = false;
  }
  ok = ok && eig <= 1e-9 && wgt <= 1e-7;
  return {ok, "distances " + dist + fmt(", eigen %.1e", eig) + fmt(", weight %.1e", wgt)};
}

/// Random corruption of a valid triple.
ThreeSpectraTriple corrupt(ThreeSpectraTriple t, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 5);
  auto pick = [&](std::vector<Rational>& v) -> Rational& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  auto all = [&] {
    std::vector<Rational> v = t.sigma;
    v.insert(v.end(), t.sigma_a.begin(), t.sigma_a.end());
    v.insert(v.end(), t.sigma_b.begin(), t.sigma_b.end());
    std::sort(v.begin(), v.end());
    return v;
  };
  switch (kind(rng)) {
    case 0:  // drop an eigenvalue of the whole string
      if (!t.sigma.empty()) t.sigma.erase(t.sigma.begin() + static_cast<long>(rng() % t.sigma.size()));
      break;
    case 1:  // move a substring eigenvalue past a neighbour
      if (!t.sigma_a.empty()) {
        auto& x = pick(t.sigma_a);
        const auto v = all();
        const auto it = std::upper_bound(v.begin(), v.end(), x);
        x = it == v.end() ? Rational(2 * x) : Rational((*it) * Rational(101, 100));
        if (it != v.end() && std::next(it) != v.end() && x >= *std::next(it)) x = (*it + *std::next(it)) / 2;
      }
      break;
    case 2:  // extra entry in sigma_b
      t.sigma_b.push_back(Rational(all().empty() ? Rational(1) : Rational(all().back() * 2)));
      break;
    case 3:  // a common value missing from one side
      if (!t.sigma.empty()) t.sigma_a.push_back(pick(t.sigma));
      break;
    case 4:  // swap the roles of sigma and sigma_a
      std::swap(t.sigma, t.sigma_a);
      t.couplings.clear();
      break;
    default:  // shift an eigenvalue of the whole string below the first point
      if (!t.sigma.empty()) {
        const auto v = all();
        pick(t.sigma) = v.front() / 2;
      }
      break;
  }
  for (auto* v : {&t.sigma, &t.sigma_a, &t.sigma_b}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return t;
}

Verdict triple_validation() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<std::size_t> nu(1, 12);
  int disagreements = 0, forward_rejected = 0, corrupted_rejected = 0, common = 0;
  for (int t = 0; t < 250; ++t) {
    ThreeSpectraTriple triple;
    if (t % 3 == 0) {
      const auto s = symmetric_string(rng, nu(rng));
      triple = three_spectra_of(s, Rational(s.interval().b / 2), 256);
    } else {
      const auto s = random_string(rng, nu(rng), 1.0);
      triple = three_spectra_of(s, random_split(rng, s.interval()), 256);
    }
    common += !triple.couplings.empty();
    const auto good = validate_triple(triple);
    if (good.interlacing_member != good.herglotz_member) ++disagreements;
    if (!good.member) ++forward_rejected;

    const auto bad = validate_triple(corrupt(triple, rng));
    if (bad.interlacing_member != bad.herglotz_member) ++disagreements;
    if (!bad.herglotz_member) ++corrupted_rejected;
  }
  return {disagreements == 0 && forward_rejected == 0,
          std::to_string(disagreements) + " disagreements, " + std::to_string(forward_rejected) +
              " forward triples rejected, " + std::to_string(corrupted_rejected) + "/250 corrupted rejected, " +
              std::to_string(common) + " with common eigenvalues"};
}

Verdict endpoint_sums() {
  const Interval iv(0, 1);
  std::vector<double> cuts;
  for (double c = 100; c <= 1e6; c *= 4) cuts.push_back(c);
  const auto lit = endpoint_diagnostics(constant_weight_measure(iv, 2), cuts);
  const auto K = static_cast<std::size_t>(std::floor(std::sqrt(cuts.back() / pi2)));
  const double lit_err = std::abs(lit.left.sums.back() + 2 * tail_inverse_fourth_powers(K) / (pi2 * pi2) - 1.0 / 45);
  const auto uni = endpoint_diagnostics(uniform_string_measure(iv), cuts);
  const double uni_err = std::abs(uni.left.sums.back() + 2 * tail_inverse_squares(K) / pi2 - 1.0 / 3);

  double coup = 0.0;
  for (const Rational c : {Rational(1, 2), Rational(1), Rational(2)}) {
    const ThreeSpectraTriple t{iv, Rational(1, 2), {3, 9}, {9}, {9}, {{9, c}}};
    const auto cs = coupling_form_sums(t);
    const auto g = endpoint_diagnostics(gamma_from_triple(t), {100});
    coup = std::max({coup, std::abs(cs.left - g.left.sums.back()) / cs.left,
                     std::abs(cs.right - g.right.sums.back()) / cs.right});
  }
  const bool ok = lit.finite_near_a && lit_err <= 1e-14 && uni.finite_near_a && uni_err <= 1e-12 && coup <= 1e-12;
  return {ok, fmt("1/45 (constant weight 2) err %.1e", lit_err) + fmt(", 1/3 (uniform string) err %.1e", uni_err) +
                  fmt(", F2 coupling vs gamma form %.1e", coup)};
}

}  // namespace

int main() {
  report(1, "forward exactness (F2)", forward_f2);
  report(2, "trace formula", trace_formula);
  report(3, "singular forward", singular_forward);
  report(4, "inverse round trips A/B", inverse_roundtrips);
  report(5, "three-spectra identity", three_spectra_identity);
  report(6, "non-uniqueness on the F2 triple", non_uniqueness);
  report(7, "truncation ladder", truncation_ladder_uniform);
  report(8, "class T validation", triple_validation);
  report(9, "endpoint diagnostics", endpoint_sums);
  return failures == 0 ? 0 : 1;
}
