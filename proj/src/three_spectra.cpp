#include "krein/three_spectra.hpp"

#include "krein/stieltjes_forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace krein {

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Malformed: return "malformed";
    case ViolationKind::Containment: return "containment";
    case ViolationKind::Iff: return "iff";
    case ViolationKind::Interlacing: return "interlacing";
    case ViolationKind::EndRule: return "end-rule";
    case ViolationKind::Herglotz: return "herglotz";
    case ViolationKind::Coupling: return "coupling";
  }
  return "?";
}

namespace {

using RSet = std::set<Rational>;

std::string str(const Rational& q) { return to_exact_string(q); }

/// Sorted copy; records malformed entries (nonpositive, repeated).
std::vector<Rational> checked_list(const std::vector<Rational>& v, const char* name, std::vector<Violation>& out) {
  std::vector<Rational> s = v;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] <= 0) out.push_back({ViolationKind::Malformed, std::string(name) + " has nonpositive entry " + str(s[i])});
    if (i > 0 && s[i] == s[i - 1]) out.push_back({ViolationKind::Malformed, std::string(name) + " repeats " + str(s[i])});
  }
  return s;
}

RSet intersect(const RSet& x, const RSet& y) {
  RSet r;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::inserter(r, r.end()));
  return r;
}

struct Reduced {
  std::vector<double> zeros;
  std::vector<double> poles;
};

/// Zeros sigma_a + sigma_b (multiset) and poles sigma with common factors cancelled.
Reduced reduce(const ThreeSpectraTriple& t) {
  std::multiset<Rational> zeros(t.sigma_a.begin(), t.sigma_a.end());
  zeros.insert(t.sigma_b.begin(), t.sigma_b.end());
  Reduced r;
  for (const auto& lam : t.sigma) {
    const auto it = zeros.find(lam);
    if (it != zeros.end()) {
      zeros.erase(it);
    } else {
      r.poles.push_back(to_double(lam));
    }
  }
  for (const auto& mu : zeros) r.zeros.push_back(to_double(mu));
  return r;
}

double arg_factor(double root, std::complex<double> z) { return std::arg(1.0 - z / root); }

/// arg F(z), summed factorwise so that large sets cannot overflow.
double arg_reduced(const Reduced& r, std::complex<double> z) {
  double th = 0.0;
  for (double mu : r.zeros) th += arg_factor(mu, z);
  for (double lam : r.poles) th -= arg_factor(lam, z);
  return th;
}

std::vector<std::complex<double>> sample_points(const Reduced& r) {
  std::vector<double> p = r.zeros;
  p.insert(p.end(), r.poles.begin(), r.poles.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  std::vector<std::complex<double>> out;
  if (p.empty()) return out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double g = i == 0 ? p[0] : p[i] - p[i - 1];
    if (i + 1 < p.size()) g = std::min(g, p[i + 1] - p[i]);
    for (double dx : {0.0, -0.3, 0.3})
      for (double y : {0.05, 0.5}) out.emplace_back(p[i] + dx * g, y * g);
    if (i + 1 < p.size()) {
      const double gap = p[i + 1] - p[i];
      for (double y : {0.1, 1.0}) out.emplace_back(0.5 * (p[i] + p[i + 1]), y * gap);
    }
  }
  out.emplace_back(0.5 * p.front(), 0.1 * p.front());
  for (double y : {0.1, 1.0}) out.emplace_back(2.0 * p.back(), y * p.back());
  return out;
}

// W'(lambda) = -(b-a)/lambda prod_{kappa != lambda} (1 - lambda/kappa)
Rational w_dot_exact(const ThreeSpectraTriple& t, const Rational& lam) {
  Rational v = -t.interval.length() / lam;
  for (const auto& k : t.sigma)
    if (k != lam) v *= Rational(1 - lam / k);
  return v;
}

/// A reconstructed mass that should sit on the split lands a rounding error
/// away from it, which would put it inside one substring with a spurious huge
/// eigenvalue. Such masses are moved onto the split.
bool snap_to_split(StieltjesString& s, const Rational& c, double eps) {
  auto masses = s.point_masses();
  bool moved = false;
  const double tol = eps * s.interval().length_d();
  for (auto& pm : masses) {
    if (pm.x != c && to_double(abs(Rational(pm.x - c))) <= tol) {
      pm.x = c;
      moved = true;
    }
  }
  if (moved) s = StieltjesString::from_masses(s.interval(), std::move(masses));
  return moved;
}

}  // namespace

std::complex<double> triple_function(const ThreeSpectraTriple& t, std::complex<double> z) {
  std::complex<double> f(1.0);
  for (const auto& mu : t.sigma_a) f *= 1.0 - z / to_double(mu);
  for (const auto& mu : t.sigma_b) f *= 1.0 - z / to_double(mu);
  for (const auto& lam : t.sigma) f /= 1.0 - z / to_double(lam);
  return f;
}

std::vector<std::complex<double>> herglotz_sample_points(const ThreeSpectraTriple& t) {
  return sample_points(reduce(t));
}

TripleVerdict validate_triple(const ThreeSpectraTriple& t) {
  TripleVerdict v;
  auto& out = v.violations;
  if (!t.interval.contains_open(t.split))
    out.push_back({ViolationKind::Malformed, "split " + str(t.split) + " is not inside the interval"});
  const auto sigma = checked_list(t.sigma, "sigma", out);
  const auto sa = checked_list(t.sigma_a, "sigma_a", out);
  const auto sb = checked_list(t.sigma_b, "sigma_b", out);
  const bool malformed = !out.empty();

  const RSet S(sigma.begin(), sigma.end()), A_(sa.begin(), sa.end()), B_(sb.begin(), sb.end());
  const RSet common_ab = intersect(A_, B_);
  bool comb = !malformed;
  for (const auto& mu : common_ab) {
    if (!S.count(mu)) {
      out.push_back({ViolationKind::Containment, str(mu) + " is in sigma_a and sigma_b but not in sigma"});
      comb = false;
    }
  }
  bool iff = true;
  for (const auto& lam : S) {
    if (A_.count(lam) != B_.count(lam)) {
      out.push_back({ViolationKind::Iff, str(lam) + " is in sigma and only one of sigma_a, sigma_b"});
      iff = false;
    }
  }
  comb = comb && iff;

  // A = sigma_a u sigma_b must strictly interlace B = sigma \ (sigma_a n sigma_b), B first
  const RSet common = intersect(S, common_ab);
  RSet A = A_;
  A.insert(B_.begin(), B_.end());
  std::vector<Rational> B;
  for (const auto& lam : S)
    if (!common.count(lam)) B.push_back(lam);
  std::vector<std::pair<Rational, int>> merged;  // 0 = B, 1 = A
  for (const auto& x : B) merged.emplace_back(x, 0);
  for (const auto& x : A) merged.emplace_back(x, 1);
  std::sort(merged.begin(), merged.end());
  bool inter = true;
  for (std::size_t i = 0; i < merged.size() && inter; ++i) {
    const int want = static_cast<int>(i % 2);
    if (merged[i].second != want) {
      out.push_back({ViolationKind::Interlacing, "position " + std::to_string(i + 1) + " (" + str(merged[i].first) +
                                                     ") breaks b1 < a1 < b2 < ..."});
      inter = false;
    }
  }
  comb = comb && inter;
  if (inter && !(B.size() == A.size() || B.size() == A.size() + 1)) {
    out.push_back({ViolationKind::EndRule, "|B| = " + std::to_string(B.size()) + ", |A| = " + std::to_string(A.size())});
    comb = false;
  }
  v.interlacing_member = comb;

  bool herg = !malformed && iff;
  if (!malformed) {
    const auto red = reduce(t);
    const auto pts = sample_points(red);
    v.samples = pts.size();
    for (const auto& z : pts) {
      const double s = std::sin(arg_reduced(red, z));
      if (!(s > 1e-10)) {
        std::ostringstream os;
        os << "Im F <= 0 at z = " << z.real() << " + " << z.imag() << "i";
        out.push_back({ViolationKind::Herglotz, os.str()});
        herg = false;
        break;
      }
    }
  }
  v.herglotz_member = herg;

  for (const auto& [lam, c] : t.couplings) {
    if (!common.count(lam))
      out.push_back({ViolationKind::Coupling, "coupling given at " + str(lam) + ", which is not a common eigenvalue"});
    else if (c <= 0)
      out.push_back({ViolationKind::Coupling, "coupling at " + str(lam) + " is not positive"});
  }
  v.member = out.empty();
  return v;
}

std::vector<SpectralTriplet> triplets_from_triple(const ThreeSpectraTriple& t) {
  const auto v = validate_triple(t);
  if (!v.member) throw ValidationError(std::string("triple rejected: ") + to_string(v.violations.front().kind) +
                                       ": " + v.violations.front().detail);
  const RSet A(t.sigma_a.begin(), t.sigma_a.end()), B(t.sigma_b.begin(), t.sigma_b.end());
  const Rational& a = t.interval.a;
  const Rational& b = t.interval.b;
  const Rational& c = t.split;
  const Rational pre = (b - a) * (c - a) / (b - c);

  std::vector<Rational> sigma = t.sigma;
  std::sort(sigma.begin(), sigma.end());
  std::vector<SpectralTriplet> out;
  for (const auto& lam : sigma) {
    SpectralTriplet tr;
    tr.lambda = lam;
    const Rational wd = w_dot_exact(t, lam);
    if (A.count(lam)) {
      const auto it = t.couplings.find(lam);
      if (it == t.couplings.end()) throw ValidationError("missing coupling at common eigenvalue " + str(lam));
      tr.coupling = it->second;
      tr.gamma_sq = abs(wd) / tr.coupling;
    } else {
      Rational g = pre / lam;
      for (const auto& k : sigma)
        if (k != lam) g *= Rational(1 - lam / k);
      for (const auto& mu : t.sigma_a) g *= Rational(1 - lam / mu);
      for (const auto& mu : t.sigma_b) g /= Rational(1 - lam / mu);
      if (g <= 0) throw ValidationError("norming constant at " + str(lam) + " is not positive");
      tr.gamma_sq = g;
      tr.coupling = abs(wd) / g;
    }
    tr.theta = wd > 0 ? 1 : 0;  // -W' = (-1)^theta c gamma^2
    out.push_back(tr);
  }
  return out;
}

SpectralMeasure gamma_from_triple(const ThreeSpectraTriple& t) {
  std::vector<Atom> atoms;
  for (const auto& tr : triplets_from_triple(t)) atoms.push_back({tr.lambda, Rational(1 / tr.gamma_sq)});
  return SpectralMeasure(t.interval, std::move(atoms));
}

std::pair<double, double> triple_residuals(const StieltjesString& s, const ThreeSpectraTriple& t, unsigned bits) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto rel = [](std::vector<Rational> want, const std::vector<Rational>& got) {
    std::sort(want.begin(), want.end());
    if (want.size() != got.size()) return inf;
    double r = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i)
      r = std::max(r, to_double(Rational(abs(Rational(got[i] - want[i])) / want[i])));
    return r;
  };
  const auto data = spectral_data(s, bits);
  std::vector<Rational> sigma;
  for (const auto& tr : data.triplets) sigma.push_back(tr.lambda);
  double spec = rel(t.sigma, sigma);
  spec = std::max(spec, rel(t.sigma_a, dirichlet_spectrum(left_substring(s, t.split), bits)));
  spec = std::max(spec, rel(t.sigma_b, dirichlet_spectrum(right_substring(s, t.split), bits)));

  double coup = 0.0;
  for (const auto& [lam, c] : t.couplings) {
    const SpectralTriplet* best = nullptr;
    for (const auto& tr : data.triplets)
      if (!best || abs(Rational(tr.lambda - lam)) < abs(Rational(best->lambda - lam))) best = &tr;
    if (!best) return {spec, inf};
    coup = std::max(coup, to_double(Rational(abs(Rational(best->coupling - c)) / c)));
  }
  return {spec, coup};
}

TripleInversion invert_triple(const ThreeSpectraTriple& t, const TripleOptions& opts) {
  TripleInversion r;
  r.inversion = invert_measure(gamma_from_triple(t), opts.inverse);
  if (!r.inversion.exact) r.snapped = snap_to_split(r.inversion.string, t.split, 1e-20);
  unsigned bits = std::max(opts.verify_bits, r.inversion.precision_bits);
  for (;;) {
    std::tie(r.spectra_residual, r.coupling_residual) = triple_residuals(r.inversion.string, t, bits);
    if (r.spectra_residual <= opts.tol && r.coupling_residual <= opts.tol) return r;
    if (bits >= 4096) break;
    bits = std::min(4096u, bits * 4);
  }
  throw NumericalError("reconstructed string does not reproduce the triple", std::max(r.spectra_residual, r.coupling_residual));
}

CouplingSums coupling_form_sums(const ThreeSpectraTriple& t) {
  CouplingSums s;
  for (const auto& tr : triplets_from_triple(t)) {
    const double lam = to_double(tr.lambda);
    const double wd = std::abs(to_double(w_dot_exact(t, tr.lambda)));
    const double c = to_double(tr.coupling);
    s.left += c / (lam * lam * wd);
    s.right += 1.0 / (lam * lam * wd * c);
  }
  return s;
}

std::vector<SweepEntry> isospectral_sweep(const ThreeSpectraTriple& t,
                                          const std::vector<std::map<Rational, Rational>>& grid,
                                          const TripleOptions& opts) {
  std::vector<SweepEntry> out(grid.size());
  const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto& e = out[static_cast<std::size_t>(i)];
    e.couplings = grid[static_cast<std::size_t>(i)];
    ThreeSpectraTriple ti = t;
    ti.couplings = e.couplings;
    try {
      e.result = invert_triple(ti, opts);
      e.sums = coupling_form_sums(ti);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  }
  return out;
}

ThreeSpectraTriple truncate_triple(const ThreeSpectraTriple& t, const Rational& cutoff) {
  ThreeSpectraTriple r;
  r.interval = t.interval;
  r.split = t.split;
  auto cut = [&](const std::vector<Rational>& v) {
    std::vector<Rational> o;
    for (const auto& x : v)
      if (x <= cutoff) o.push_back(x);
    return o;
  };
  r.sigma = cut(t.sigma);
  r.sigma_a = cut(t.sigma_a);
  r.sigma_b = cut(t.sigma_b);
  for (const auto& [lam, c] : t.couplings)
    if (lam <= cutoff) r.couplings.emplace(lam, c);
  return r;
}

std::vector<TripleRung> triple_ladder(const ThreeSpectraTriple& t, const std::vector<Rational>& cutoffs,
                                      const TripleOptions& opts) {
  std::vector<TripleRung> out;
  for (const auto& cut : cutoffs) {
    TripleRung rung;
    rung.cutoff = cut;
    try {
      rung.result = invert_triple(truncate_triple(t, cut), opts);
    } catch (const std::exception& ex) {
      rung.error = ex.what();
    }
    out.push_back(std::move(rung));
  }
  return out;
}

}  // namespace krein
