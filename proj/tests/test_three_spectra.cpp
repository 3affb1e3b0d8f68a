#include <doctest.h>

#include "krein/inverse_spectral.hpp"
#include "krein/stieltjes_forward.hpp"
#include "krein/three_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace krein;

namespace {

ThreeSpectraTriple triple(std::vector<Rational> s, std::vector<Rational> sa, std::vector<Rational> sb,
                          Rational split = Rational(1, 2), std::map<Rational, Rational> c = {}) {
  return ThreeSpectraTriple{Interval(0, 1), split, std::move(s), std::move(sa), std::move(sb), std::move(c)};
}

bool has(const TripleVerdict& v, ViolationKind k) {
  return std::any_of(v.violations.begin(), v.violations.end(), [k](const Violation& x) { return x.kind == k; });
}

StieltjesString f2() { return StieltjesString(Interval(0, 1), std::vector<Rational>(3, Rational(1, 3)), {1, 1}); }

StieltjesString random_string(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> len(1, 12), mass(1, 30);
  std::vector<Rational> lengths, masses;
  Rational total = 0;
  for (std::size_t j = 0; j <= n; ++j) {
    lengths.emplace_back(len(rng), 8);
    total += lengths.back();
  }
  for (std::size_t j = 0; j < n; ++j) masses.emplace_back(mass(rng), 10);
  return StieltjesString(Interval(0, total), lengths, masses);
}

}  // namespace

TEST_CASE("membership of small triples") {
  const auto a = validate_triple(triple({3, 9}, {9}, {9}, Rational(1, 2), {{9, 1}}));
  CHECK(a.member);
  CHECK(a.interlacing_member);
  CHECK(a.herglotz_member);
  CHECK(validate_triple(triple({3, 9}, {9}, {9})).member);
  CHECK(validate_triple(triple({4}, {}, {6}, Rational(1, 4))).member);
  CHECK(validate_triple(triple({}, {}, {})).member);

  const auto bad = validate_triple(triple({4}, {2}, {}));
  CHECK_FALSE(bad.member);
  CHECK(has(bad, ViolationKind::Interlacing));
  CHECK_FALSE(bad.herglotz_member);

  CHECK(has(validate_triple(triple({3}, {5}, {5})), ViolationKind::Containment));
  CHECK(has(validate_triple(triple({3, 9}, {9}, {})), ViolationKind::Iff));
  CHECK(has(validate_triple(triple({3, 9}, {9}, {9}, Rational(1, 2), {{3, 1}})), ViolationKind::Coupling));
  CHECK(has(validate_triple(triple({3, 3}, {}, {})), ViolationKind::Malformed));
  CHECK(has(validate_triple(triple({3}, {}, {}, Rational(2))), ViolationKind::Malformed));
  // B = {1, 2}, A = {5}: two B entries in a row
  CHECK(has(validate_triple(triple({1, 2}, {5}, {})), ViolationKind::Interlacing));
}

TEST_CASE("norming constants from three spectra") {
  const StieltjesString f1 = StieltjesString::from_masses(Interval(0, 1), {{Rational(1, 2), 1}});
  const auto t1 = three_spectra_of(f1, Rational(1, 4), 256);
  CHECK(t1.sigma == std::vector<Rational>{4});
  CHECK(t1.sigma_a.empty());
  CHECK(t1.sigma_b == std::vector<Rational>{6});
  const auto g1 = triplets_from_triple(t1);
  REQUIRE(g1.size() == 1);
  CHECK(g1[0].gamma_sq == Rational(1, 4));

  const auto t2 = three_spectra_of(f2(), Rational(1, 2), 256);
  REQUIRE(t2.couplings.size() == 1);
  CHECK(std::abs(to_double(t2.couplings.at(9)) - 1.0) < 1e-60);
  auto t2x = t2;
  t2x.couplings[9] = 1;
  const auto g2 = triplets_from_triple(t2x);
  REQUIRE(g2.size() == 2);
  // both weights of the F2 measure are 9/2
  CHECK(g2[0].gamma_sq == Rational(2, 9));
  CHECK(g2[1].gamma_sq == Rational(2, 9));

  // theta and coupling agree with the forward solver
  const auto fwd = spectral_data(f2(), 256).triplets;
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(g2[i].theta == fwd[i].theta);
    CHECK(std::abs(to_double(g2[i].coupling) / to_double(fwd[i].coupling) - 1.0) < 1e-60);
  }

  CHECK_THROWS_AS(triplets_from_triple(triple({3, 9}, {9}, {9})), ValidationError);
  CHECK_THROWS_AS(gamma_from_triple(triple({4}, {2}, {})), ValidationError);
}

TEST_CASE("inversion of the F2 triple and the isospectral family") {
  const auto r = invert_triple(triple({3, 9}, {9}, {9}, Rational(1, 2), {{9, 1}}));
  CHECK(r.inversion.string == f2());
  CHECK(r.spectra_residual == 0.0);

  std::vector<std::map<Rational, Rational>> grid{{{9, Rational(1, 2)}}, {{9, 1}}, {{9, 2}}};
  const auto sweep = isospectral_sweep(triple({3, 9}, {9}, {9}), grid);
  REQUIRE(sweep.size() == 3);
  for (const auto& e : sweep) {
    REQUIRE(e.result.has_value());
    const auto back = three_spectra_of(e.result->inversion.string, Rational(1, 2), 256);
    CHECK(back.sigma.size() == 2);
    CHECK(e.result->spectra_residual < 1e-30);
    CHECK(e.result->coupling_residual < 1e-30);
  }
  CHECK_FALSE(sweep[0].result->inversion.string == sweep[1].result->inversion.string);
  CHECK_FALSE(sweep[1].result->inversion.string == sweep[2].result->inversion.string);
  CHECK_FALSE(sweep[0].result->inversion.string == sweep[2].result->inversion.string);
}

TEST_CASE("coupling-form endpoint sums match the norming-constant form") {
  for (const Rational c9 : {Rational(1, 2), Rational(1), Rational(2)}) {
    const auto t = triple({3, 9}, {9}, {9}, Rational(1, 2), {{9, c9}});
    const auto cs = coupling_form_sums(t);
    const auto diag = endpoint_diagnostics(gamma_from_triple(t), {100});
    CHECK(std::abs(cs.left - diag.left.sums.back()) <= 1e-12 * cs.left);
    CHECK(std::abs(cs.right - diag.right.sums.back()) <= 1e-12 * cs.right);
  }
}

TEST_CASE("triples of random strings reconstruct the string") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 10; ++k) {
    const auto s = random_string(rng, 1 + static_cast<std::size_t>(k) * 2);
    const auto pos = s.positions();
    // split at a mass every other time, to exercise common eigenvalues on symmetric strings
    const Rational split = k % 2 ? pos[pos.size() / 2] : Rational(s.interval().b / 2);
    const auto t = three_spectra_of(s, split, 512);
    const auto v = validate_triple(t);
    CHECK(v.member);
    CHECK(v.herglotz_member);
    const auto r = invert_triple(t);
    const auto [dl, dm] = string_residuals(r.inversion.string, s);
    CHECK(dl < 1e-7);
    CHECK(dm < 1e-7);
  }
}

TEST_CASE("combinatorial and Herglotz verdicts agree on random triples") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(0, 5), val(1, 40), coin(0, 3);
  int members = 0;
  for (int k = 0; k < 400; ++k) {
    auto pick = [&](int n) {
      std::set<Rational> v;
      for (int i = 0; i < n; ++i) v.insert(Rational(val(rng), 1 + coin(rng)));
      return std::vector<Rational>(v.begin(), v.end());
    };
    ThreeSpectraTriple t;
    if (coin(rng) == 0) {
      t = triple(pick(size(rng)), pick(size(rng)), pick(size(rng)));
    } else {
      // interlaced construction, then an optional perturbation
      const auto pts = pick(2 * size(rng) + 1);
      std::vector<Rational> s, sa, sb;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i % 2 == 0) s.push_back(pts[i]);
        else (coin(rng) % 2 ? sa : sb).push_back(pts[i]);
      }
      if (coin(rng) == 0 && !sa.empty()) {
        s.push_back(sa.back());
        sb.push_back(sa.back());
        std::sort(s.begin(), s.end());
        std::sort(sb.begin(), sb.end());
        if (std::adjacent_find(sb.begin(), sb.end()) != sb.end()) continue;
      }
      if (coin(rng) == 0 && !s.empty()) s.erase(s.begin() + coin(rng) % static_cast<long>(s.size()));
      t = triple(s, sa, sb);
    }
    const auto v = validate_triple(t);
    CHECK(v.interlacing_member == v.herglotz_member);
    members += v.interlacing_member;
  }
  CHECK(members > 50);
}

TEST_CASE("truncated triples form a ladder") {
  std::mt19937_64 rng(3);
  const auto s = random_string(rng, 6);
  const auto t = three_spectra_of(s, Rational(s.interval().b / 3), 512);
  const Rational top = t.sigma.back();
  std::vector<Rational> cuts;
  for (std::size_t i = 0; i < t.sigma.size(); i += 2) cuts.push_back(t.sigma[i]);
  const auto ladder = triple_ladder(t, cuts);
  REQUIRE(ladder.size() == cuts.size());
  for (const auto& rung : ladder) {
    CHECK(rung.error.empty());
    CHECK(validate_triple(truncate_triple(t, rung.cutoff)).member);
  }
  CHECK(truncate_triple(t, top).sigma == t.sigma);
}

TEST_CASE("mass at the split and the disjoint sweep") {
  const auto g = triplets_from_triple(triple({4}, {}, {}));
  REQUIRE(g.size() == 1);
  CHECK(g[0].gamma_sq == Rational(1, 4));

  const auto t = triple({4}, {}, {6}, Rational(1, 4));
  const auto sweep = isospectral_sweep(t, {{}});
  REQUIRE(sweep.size() == 1);
  REQUIRE(sweep[0].result.has_value());
  CHECK(sweep[0].result->inversion.string == invert_triple(t).inversion.string);
  CHECK(sweep[0].result->inversion.string == StieltjesString::from_masses(Interval(0, 1), {{Rational(1, 2), 1}}));
}

TEST_CASE("three-spectra norming constants equal the forward measure") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 8; ++k) {
    const auto s = random_string(rng, 2 + static_cast<std::size_t>(k) * 3);
    std::uniform_int_distribution<int> num(1, 99);
    const Rational split = s.interval().b * Rational(num(rng), 100);
    const auto rho = gamma_from_triple(three_spectra_of(s, split, 512));
    const auto fwd = spectral_data(s, 512).measure;
    REQUIRE(rho.size() == fwd.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
      CHECK(to_double(abs(Rational(rho.atoms()[i].weight / fwd.atoms()[i].weight - 1))) < 1e-30);
  }
}

TEST_CASE("the prefactor (b-a)(c-a)/(b-c) is positive") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> v(-1000, 1000), w(1, 1000);
  for (int k = 0; k < 200; ++k) {
    const Rational a(v(rng), 7);
    const Rational b = a + Rational(w(rng), 3);
    const Rational c = a + (b - a) * Rational(w(rng), 1001);
    CHECK((b - a) * (c - a) / (b - c) > 0);
  }
}
