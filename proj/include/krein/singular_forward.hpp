#pragma once

// Forward problem for a general mass distribution. The Volterra equation
// for m_a (and its mirror image for m_b) is discretized on Chebyshev panels;
// point masses sit on panel ends and a power-law density singularity at the
// starting endpoint is handled by a first-order boundary layer.

#include "krein/core_model.hpp"
#include "krein/inverse_spectral.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace krein {

using Complex = std::complex<double>;

struct SingularOptions {
  unsigned nodes = 24;          // Chebyshev points per panel
  double oscillation = 0.5;     // max of |z| h * (integral of the density over the panel)
  double layer = 1e-13;         // size of the dropped second-order term in the endpoint layer
  std::size_t max_panels = 1'000'000;
  std::size_t max_terms = 5000;  // Neumann series terms
  bool parallel = true;
};

struct SeriesEvaluation {
  Complex value;
  std::size_t terms_used = 0;
  double tail_bound = 0.0;
};

/// Partial sums of sum_k (-z)^k K_a^k 1 (x) until the factorial tail bound
/// sum_{k>K} (|z| I)^k / k!, I = integral of (b-s)(s-a)/(b-a) over (a,x),
/// drops below tol.
SeriesEvaluation m_a_series(const MassDistribution& omega, Complex z, double x, double tol,
                            const SingularOptions& opts = {});

/// phi_a, phi_b and their left-continuous x-derivatives at x.
struct PhiPair {
  Complex phi_a;
  Complex dphi_a;
  Complex phi_b;
  Complex dphi_b;
};

/// Solves (I + z K_a) m_a = 1 (and the mirror equation) by collocation.
PhiPair phi_pair(const MassDistribution& omega, Complex z, double x, const SingularOptions& opts = {});

/// phi_b phi_a' - phi_b' phi_a at the reference point (default: midpoint).
Complex wronskian_fn(const MassDistribution& omega, Complex z, std::optional<double> reference = std::nullopt,
                     const SingularOptions& opts = {});

/// Number of eigenvalues strictly below z: zeros of phi_a on (a,c] plus zeros
/// of phi_b on [c,b) plus the parity correction fixed by sign W(z).
std::size_t eigenvalue_count(const MassDistribution& omega, double z, const SingularOptions& opts = {});

/// int (b-x)(x-a)/(b-a) d omega = sum of 1/lambda over the whole spectrum.
double trace_total(const MassDistribution& omega, const QuadratureOptions& quad = {});

struct EigenvalueSearch {
  std::vector<double> eigenvalues;
  std::vector<double> widths;  // final bracket widths
  double count_bound = 0.0;    // max_lambda * trace_total
};

/// Zeros of W in (0, max_lambda]: counting bisection isolates each one, then
/// TOMS 748 refines the bracket to width <= max(tol, 16 eps lambda).
EigenvalueSearch eigenvalues_below(const MassDistribution& omega, double max_lambda, double tol = 1e-10,
                                   const SingularOptions& opts = {});

struct SingularTriplet {
  double lambda = 0.0;
  double gamma_sq = 0.0;
  double coupling = 0.0;
  int theta = 0;
  double w_dot = 0.0;  // from -W'(lambda) = integral of phi_a phi_b d omega
};

struct TruncatedSpectrum {
  std::vector<SingularTriplet> triplets;
  SpectralMeasure measure;
};

TruncatedSpectrum truncated_spectral_measure(const MassDistribution& omega, double max_lambda, double tol = 1e-10,
                                             const SingularOptions& opts = {});

/// Endpoint sums of the truncated measure with W'(lambda) taken from the
/// solver, so the right sum does not depend on eigenvalues beyond the cutoff.
EndpointDiagnostics singular_endpoint_diagnostics(const MassDistribution& omega, const std::vector<double>& cutoffs,
                                                  double tol = 1e-10, const SingularOptions& opts = {});

/// G(z,c,c) = phi_a(z,c) phi_b(z,c) / W(z).
Complex green_diagonal(const MassDistribution& omega, Complex z, double point, double tol = 1e-12,
                       const SingularOptions& opts = {});

/// Named density fixtures: "uniform", "power:alpha=A" (singular at a),
/// "power:alpha_b=B", "power:alpha=A,alpha_b=B".
MassDistribution density_fixture(const std::string& name, const Interval& interval);

}  // namespace krein
