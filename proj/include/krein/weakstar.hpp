#pragma once

#include "krein/core_model.hpp"

#include <cstddef>

namespace krein {

/// Hat functions on the dyadic grid of (a,b) in level order: f_1 is the hat
/// over the whole interval, f_2 and f_3 the two half-width hats, and so on.
struct WeakStarMetricConfig {
  std::size_t max_index = 24;
  QuadratureOptions quadrature{};
};

/// f_i at x for the interval (a,b).
double dyadic_hat(std::size_t i, double a, double b, double x);

/// Pairing int f_i(x)(b-x)(x-a) d omega for i = 1..max_index.
std::vector<double> hat_moments(const MassDistribution& omega, const WeakStarMetricConfig& cfg = {});

/// sum_i 2^-i min(1, |<f_i, (b-x)(x-a)(omega1 - omega2)>|). Both measures must
/// live on the same interval.
double weakstar_distance(const MassDistribution& w1, const MassDistribution& w2, const WeakStarMetricConfig& cfg = {});

}  // namespace krein
