#include "krein/weakstar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace krein {

namespace {

struct HatGeometry {
  double left, centre, right;
};

HatGeometry hat_geometry(std::size_t i, double a, double b) {
  const auto level = static_cast<unsigned>(std::bit_width(i) - 1);
  const double j = static_cast<double>(i - (std::size_t{1} << level));
  const double cells = std::ldexp(1.0, static_cast<int>(level));
  const double h = (b - a) / cells;
  return {a + j * h, a + (j + 0.5) * h, a + (j + 1.0) * h};
}

}  // namespace

double dyadic_hat(std::size_t i, double a, double b, double x) {
  if (i == 0) throw std::invalid_argument("dyadic_hat: index starts at 1");
  const auto g = hat_geometry(i, a, b);
  if (x <= g.left || x >= g.right) return 0.0;
  return x < g.centre ? (x - g.left) / (g.centre - g.left) : (g.right - x) / (g.right - g.centre);
}

std::vector<double> hat_moments(const MassDistribution& omega, const WeakStarMetricConfig& cfg) {
  const double a = omega.interval().a_d();
  const double b = omega.interval().b_d();
  std::vector<double> out(cfg.max_index, 0.0);
  for (std::size_t i = 1; i <= cfg.max_index; ++i) {
    const auto g = hat_geometry(i, a, b);
    auto f = [&](double x) { return dyadic_hat(i, a, b, x); };
    out[i - 1] = weighted_integral(omega, f, g.left, g.right, 1, 1, cfg.quadrature, {g.centre});
  }
  return out;
}

double weakstar_distance(const MassDistribution& w1, const MassDistribution& w2, const WeakStarMetricConfig& cfg) {
  if (!(w1.interval() == w2.interval())) throw ValidationError("weak-star distance: intervals differ");
  const auto m1 = hat_moments(w1, cfg);
  const auto m2 = hat_moments(w2, cfg);
  double d = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    d += std::ldexp(std::min(1.0, std::abs(m1[i] - m2[i])), -static_cast<int>(i + 1));
  }
  return d;
}

}  // namespace krein
