#include <doctest.h>

#include "krein/inverse_spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace krein;

namespace {

double d(const Rational& q) { return to_double(q); }

SpectralMeasure rho_f1() { return SpectralMeasure(Interval(0, 1), {{4, 4}}); }
SpectralMeasure rho_f2() { return SpectralMeasure(Interval(0, 1), {{3, Rational(9, 2)}, {9, Rational(9, 2)}}); }

StieltjesString random_string(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  std::vector<Rational> lengths, masses;
  for (std::size_t j = 0; j <= n; ++j) lengths.emplace_back(std::pow(10.0, logu(rng)));
  for (std::size_t j = 0; j < n; ++j) masses.emplace_back(std::pow(10.0, logu(rng)));
  Rational total = 0;
  for (const auto& l : lengths) total += l;
  return StieltjesString(Interval(0, total), lengths, masses);
}

double max_rel(const std::vector<Rational>& x, const std::vector<Rational>& y) {
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, d(Rational(abs(Rational(x[i] - y[i])) / y[i])));
  return r;
}

}  // namespace

TEST_CASE("Weyl function from a measure") {
  const auto m1 = weyl_from_measure(rho_f1(), Interval(0, 1));
  CHECK(m1.constant == -2);
  CHECK(m1.poles.size() == 1);
  CHECK(weyl_from_measure(rho_f2(), Interval(0, 1)).constant == -3);
  CHECK(weyl_from_measure(SpectralMeasure(Interval(0, 1), {}), Interval(0, 1)).constant == -1);
}

TEST_CASE("continued fraction on the fixtures, exact and at precision") {
  const auto s1 = cf_extract(weyl_from_measure(rho_f1(), Interval(0, 1)), Interval(0, 1));
  CHECK(s1.lengths() == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
  CHECK(s1.masses() == std::vector<Rational>{1});

  const auto m2 = weyl_from_measure(rho_f2(), Interval(0, 1));
  const auto s2 = cf_extract(m2, Interval(0, 1));
  CHECK(s2.lengths() == std::vector<Rational>(3, Rational(1, 3)));
  CHECK(s2.masses() == std::vector<Rational>(2, Rational(1)));

  const auto s2f = cf_extract(m2, Interval(0, 1), 256);
  CHECK(max_rel(s2f.lengths(), s2.lengths()) < 1e-70);
  CHECK(max_rel(s2f.masses(), s2.masses()) < 1e-70);

  const auto empty = cf_extract(weyl_from_measure(SpectralMeasure(Interval(0, 1), {}), Interval(0, 1)), Interval(0, 1));
  CHECK(empty.size() == 0);
  CHECK(empty.lengths() == std::vector<Rational>{1});
}

TEST_CASE("nonpositive extraction is reported") {
  RationalHerglotz bad;
  bad.constant = -1;
  bad.poles = {{4, -4}};
  CHECK_THROWS_AS(cf_extract(bad, Interval(0, 1)), ValidationError);
}

TEST_CASE("invert_measure on the fixtures") {
  const auto r1 = invert_measure(rho_f1());
  CHECK(r1.exact);
  CHECK(r1.string == StieltjesString::from_masses(Interval(0, 1), {{Rational(1, 2), 1}}));
  const auto r2 = invert_measure(rho_f2());
  CHECK(r2.string.masses() == std::vector<Rational>(2, Rational(1)));

  // same atoms on (0,2): only the round trip is asserted
  const auto r3 = invert_measure(SpectralMeasure(Interval(0, 2), {{4, 4}}));
  CHECK(r3.string.interval().length() == 2);
  CHECK(r3.eigen_residual < 1e-30);
  CHECK(r3.weight_residual < 1e-30);

  InverseOptions fl;
  fl.exact_when_possible = false;
  const auto r4 = invert_measure(rho_f2(), fl);
  CHECK_FALSE(r4.exact);
  CHECK(r4.precision_bits == 256);
  CHECK(max_rel(r4.string.masses(), r2.string.masses()) < 1e-60);
}

TEST_CASE("Lanczos oracle agrees with the continued fraction") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 6; ++t) {
    const auto s = random_string(rng, 3 + 4 * t);
    const auto rho = spectral_data(s, 1024).measure;
    InverseOptions o;
    o.precision_bits = 1024;
    const auto cf = invert_measure(rho, o).string;
    const auto lz = lanczos_reconstruct(rho, s.interval(), 1024);
    CHECK(max_rel(lz.masses(), cf.masses()) < 1e-30);
    CHECK(max_rel(lz.lengths(), cf.lengths()) < 1e-30);
    CHECK(max_rel(cf.masses(), s.masses()) < 1e-30);
  }
}

TEST_CASE("round trip: string -> measure -> string") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 12; ++t) {
    const auto s = random_string(rng, 1 + (t * 7) % 40);
    const auto r = roundtrip_string(s);
    CHECK(r.ok);
    CHECK(r.length_residual < 1e-7);
    CHECK(r.mass_residual < 1e-7);
    CHECK(r.inversion.eigen_residual <= 1e-9);
    CHECK(r.inversion.weight_residual <= 1e-7);
  }
}

TEST_CASE("round trip: measure -> string -> measure with wide ranges") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lu(-2.0, 6.0), wu(-6.0, 6.0);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 1 + (t * 11) % 50;
    std::vector<Atom> atoms;
    std::vector<double> lams;
    while (lams.size() < n) {
      const double l = std::pow(10.0, lu(rng));
      if (std::find(lams.begin(), lams.end(), l) == lams.end()) lams.push_back(l);
    }
    for (double l : lams) atoms.push_back({Rational(l), Rational(std::pow(10.0, wu(rng)))});
    const SpectralMeasure rho(Interval(0, 1), atoms);
    const auto r = invert_measure(rho);
    CHECK(r.eigen_residual <= 1e-9);
    CHECK(r.weight_residual <= 1e-7);
    Rational total = 0;
    for (const auto& l : r.string.lengths()) total += l;
    CHECK(total == 1);
  }
}

TEST_CASE("atom order does not matter") {
  const SpectralMeasure a(Interval(0, 1), {{3, 2}, {7, 5}, {20, 1}});
  const SpectralMeasure b(Interval(0, 1), {{20, 1}, {3, 2}, {7, 5}});
  CHECK(invert_measure(a).string == invert_measure(b).string);
}

TEST_CASE("built-in sine measures") {
  const auto uni = uniform_string_measure(Interval(0, 1));
  const auto atoms = uni.atoms_up_to(50);
  REQUIRE(atoms.size() == 2);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(d(atoms[0].lambda) == doctest::Approx(pi2).epsilon(1e-15));
  CHECK(d(atoms[1].weight) == doctest::Approx(8 * pi2).epsilon(1e-15));
  CHECK(uni.tail()->inverse_sum_after(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(tail_inverse_fourth_powers(0) == doctest::Approx(pi2 * pi2 / 90).epsilon(1e-14));
  CHECK(tail_inverse_squares(3) == doctest::Approx(pi2 / 6 - 1 - 0.25 - 1.0 / 9).epsilon(1e-13));
}

TEST_CASE("ladder on the uniform-string measure") {
  const auto uni = uniform_string_measure(Interval(0, 1));
  const MassDistribution reference(Interval(0, 1), {}, Density::uniform(1.0));
  const auto rep = truncation_ladder(uni, {15, 45, 95, 165}, {}, &reference);
  REQUIRE(rep.rungs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(rep.rungs[i].result.has_value());
    CHECK(rep.rungs[i].result->string.size() == i + 1);
    CHECK(rep.rungs[i].within_uniform_bound);
    CHECK(rep.rungs[i].result->eigen_residual <= 1e-9);
    if (i > 0) CHECK(*rep.rungs[i].distance_to_reference < *rep.rungs[i - 1].distance_to_reference);
  }
  CHECK(rep.uniform_bound == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("closed-form Wronskian of the sine measures agrees with the product") {
  auto w = wronskian_of_measure(uniform_string_measure(Interval(0, 2)));
  REQUIRE(w.closed_form);
  for (std::complex<double> z : {std::complex<double>(0.0), {1e-5, 0.0}, {-3.0, 0.0}, {5.0, 2.0}, {40.0, 0.0}}) {
    const auto closed = zero_product_eval(w, z);
    auto generic = w;
    generic.closed_form = nullptr;
    const auto prod = zero_product_eval(generic, z, {1e-9, 50'000'000});
    CHECK(std::abs(closed.value - prod.value) <= 1e-8 * std::max(1.0, std::abs(prod.value)));
    CHECK(std::abs(closed.derivative - prod.derivative) <= 1e-8 * std::max(1.0, std::abs(prod.derivative)));
  }
}

TEST_CASE("endpoint diagnostics") {
  const auto lit = constant_weight_measure(Interval(0, 1), 2);
  std::vector<double> cuts;
  for (double c = 100; c <= 1e6; c *= 4) cuts.push_back(c);
  const auto diag = endpoint_diagnostics(lit, cuts);
  CHECK(diag.left.verdict == Trend::Converging);
  CHECK(diag.finite_near_a);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  // sum_{k<=K} 2/(k pi)^4 against 1/45 with the exact tail
  const std::size_t K = static_cast<std::size_t>(std::floor(std::sqrt(cuts.back() / pi2)));
  CHECK(std::abs(diag.left.sums.back() + 2 * tail_inverse_fourth_powers(K) / (pi2 * pi2) - 1.0 / 45) < 1e-14);

  const auto uni = uniform_string_measure(Interval(0, 1));
  const auto du = endpoint_diagnostics(uni, cuts);
  CHECK(du.finite_near_a);
  CHECK(du.finite_near_b);
  // W'(lambda_k)^2 = 1/(4 lambda_k^2) on (0,1), so the right terms are 2/lambda_k
  CHECK(std::abs(du.right.sums.back() + 2 * tail_inverse_squares(K) / pi2 - 1.0 / 3) < 1e-10);
  CHECK(std::abs(du.left.sums.back() + 2 * tail_inverse_squares(K) / pi2 - 1.0 / 3) < 1e-12);

  const auto fin = endpoint_diagnostics(rho_f2(), {5, 10, 20, 40});
  CHECK(fin.finite_near_a);
  CHECK(fin.finite_near_b);
  CHECK(classify_trend({1, 2, 3, 4, 5}) == Trend::Diverging);
}
