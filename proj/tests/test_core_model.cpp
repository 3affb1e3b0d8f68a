#include <doctest.h>

#include "krein/core_model.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace krein;

TEST_CASE("interval and string validation") {
  CHECK_THROWS_AS(Interval(1, 1), ValidationError);
  CHECK_THROWS_AS(StieltjesString(Interval(0, 1), {Rational(1, 2), Rational(1, 3)}, {Rational(1)}), ValidationError);
  CHECK_THROWS_AS(StieltjesString::from_masses(Interval(0, 1), {{Rational(0), 1}}), ValidationError);
  CHECK_THROWS_AS(StieltjesString::from_masses(Interval(0, 1), {{Rational(1, 2), -1}}), ValidationError);

  const auto merged = StieltjesString::from_masses(Interval(0, 1), {{Rational(1, 2), 1}, {Rational(1, 2), 2}});
  REQUIRE(merged.size() == 1);
  CHECK(merged.masses()[0] == 3);
  CHECK(merged.lengths() == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
}

TEST_CASE("Lebesgue-Stieltjes integral with the half-open convention") {
  const MassDistribution unit(Interval(0, 1), {{Rational(1, 2), 1}});
  auto one = [](double) { return 1.0; };
  CHECK(ls_integral(unit, one, 0.5, 0.9) == 1.0);
  CHECK(ls_integral(unit, one, 0.2, 0.5) == 0.0);
  CHECK(ls_integral(unit, one, 0.9, 0.5) == -1.0);

  const MassDistribution lebesgue(Interval(0, 1), {}, Density::uniform(1.0));
  CHECK(ls_integral(lebesgue, [](double x) { return x; }, 0.25, 0.75) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("antisymmetry and integration by parts") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PointMass> pm;
    for (int j = 0; j < 5; ++j) pm.push_back({Rational(u(rng)), Rational(u(rng) + 0.1)});
    const MassDistribution omega(Interval(0, 1), pm, Density::uniform(u(rng)));
    const double alpha = u(rng), beta = u(rng);
    auto g = [](double x) { return std::cos(3 * x); };
    CHECK(ls_integral(omega, g, alpha, beta) == doctest::Approx(-ls_integral(omega, g, beta, alpha)));

    // piecewise-linear f, F(x) = int_a^x dω: int f dF + int F df = f F |
    const double k1 = u(rng), k2 = u(rng), x0 = 0.4;
    auto f = [&](double x) { return x < x0 ? k1 * x : k1 * x0 + k2 * (x - x0); };
    auto fprime = [&](double x) { return x < x0 ? k1 : k2; };
    const double lo = 0.05, hi = 0.95;
    auto F = [&](double x) { return ls_integral(omega, [](double) { return 1.0; }, lo, x); };
    const double lhs = ls_integral(omega, f, lo, hi);
    // boundary term minus the Lebesgue integral of F f', by composite Simpson on smooth pieces
    double rhs_int = 0.0;
    std::vector<double> cuts{lo, x0, hi};
    for (const auto& p : omega.point_masses()) {
      const double x = to_double(p.x);
      if (x > lo && x < hi) cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double l = cuts[i], r = cuts[i + 1];
      if (r - l < 1e-14) continue;
      const int n = 40;
      const double h = (r - l) / n;
      for (int k = 0; k <= n; ++k) {
        // open-ended samples avoid the jump points of F
        const double x = std::clamp(l + k * h, l + 1e-13, r - 1e-13);
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        rhs_int += w * h / 3.0 * F(x + 1e-15) * fprime(x);
      }
    }
    // F is left-continuous at masses; f F| uses F(hi)
    const double rhs = f(hi) * F(hi) - rhs_int;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
  }
}

TEST_CASE("weighted mass certificates") {
  const MassDistribution unit(Interval(0, 1), {{Rational(1, 2), 1}});
  const auto c1 = validate_mass(unit);
  CHECK(c1.weighted_total == doctest::Approx(0.25));
  CHECK(c1.finite_near_a);
  CHECK(c1.finite_near_b);

  const MassDistribution power(Interval(0, 1), {}, Density::power(1.5, 0.0));
  const auto c2 = validate_mass(power);
  CHECK(std::abs(c2.weighted_total - 4.0 / 3.0) < 1e-12);
  CHECK_FALSE(c2.finite_near_a);
  CHECK(c2.finite_near_b);

  const MassDistribution lebesgue(Interval(0, 1), {}, Density::uniform(1.0));
  const auto c3 = validate_mass(lebesgue);
  CHECK(std::abs(c3.weighted_total - 1.0 / 6.0) < 1e-14);

  const auto s = StieltjesString::from_masses(Interval(0, 2), {{Rational(1, 3), 2}, {Rational(3, 2), Rational(1, 7)}});
  const double exact = to_double(weighted_total_exact(s));
  CHECK(validate_mass(MassDistribution::from_string(s)).weighted_total == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("zero products") {
  ZeroProduct p1{1.0, {4.0}, {}, {}};
  auto v = zero_product_eval(p1, 0.0);
  CHECK(v.value.real() == 1.0);
  CHECK(v.derivative.real() == doctest::Approx(-0.25));

  ZeroProduct p2{1.0, {3.0, 9.0}, {}, {}};
  v = zero_product_eval(p2, 9.0);
  CHECK(std::abs(v.value) < 1e-15);
  CHECK(v.derivative.real() == doctest::Approx(2.0 / 9));

  ZeroProduct empty{1.0, {}, {}, {}};
  v = zero_product_eval(empty, 17.0);
  CHECK(v.value.real() == 1.0);
  CHECK(v.derivative.real() == 0.0);

  // sin(sqrt z)/sqrt z = prod (1 - z/(k pi)^2); crude certificate sum_{k>K} 1/(k^2 pi^2) <= 1/(pi^2 K)
  const double pi2 = std::numbers::pi * std::numbers::pi;
  ZeroProduct sinc{1.0, {}, [pi2](std::size_t k) { return static_cast<double>(k * k) * pi2; },
                   [pi2](std::size_t K) { return K == 0 ? 1.0 / 6.0 : 1.0 / (pi2 * static_cast<double>(K)); }};
  v = zero_product_eval(sinc, 4.0, {1e-6, 50'000'000});
  CHECK(v.value.real() == doctest::Approx(std::sin(2.0) / 2.0).epsilon(1e-6));
  CHECK(v.truncation_bound <= 1e-6);
  CHECK_THROWS_AS(zero_product_eval(sinc, 4.0, {1e-12, 1000}), NumericalError);

  // exact tail sums: trigamma(K+1)/pi^2, accumulated here by direct summation
  sinc.inverse_sum_after = [pi2](std::size_t K) {
    double s = 0.0;
    for (std::size_t k = 2'000'000; k > K; --k) s += 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    return (s + 1.0 / 2'000'000.0) / pi2;
  };
  sinc.tail_sum_exact = true;
  v = zero_product_eval(sinc, 4.0, {1e-12, 50'000'000});
  CHECK(std::abs(v.value.real() - std::sin(2.0) / 2.0) < 1e-11);
  const double dsinc = (std::cos(2.0) * 2.0 - std::sin(2.0)) / (2.0 * 4.0 * 2.0);  // d/dz sin(sqrt z)/sqrt z at 4
  CHECK(std::abs(v.derivative.real() - dsinc) < 1e-11);
}

TEST_CASE("rational text round trip") {
  for (const char* s : {"0.5", "1/3", "-7/9", "1e-3", "0.1", "3"}) {
    const Rational q = parse_rational(s);
    CHECK(parse_rational(to_exact_string(q)) == q);
  }
  CHECK(parse_rational("0.1") == Rational(1, 10));
  CHECK(to_exact_string(Rational(1, 2)) == "0.5");
}
