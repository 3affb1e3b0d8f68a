#pragma once

// Empirical convergence diagnostics for sequences of strings against a
// reference mass distribution: Wronskians on a compact grid, Green function
// at the split, spectra and norming constants below a cutoff, weighted total
// masses and the weak-star distance.

#include "krein/core_model.hpp"
#include "krein/singular_forward.hpp"
#include "krein/weakstar.hpp"

#include <complex>
#include <vector>

namespace krein {

struct ConvergenceOptions {
  std::vector<Complex> grid{{-50.0, 0.0}, {-5.0, 0.0}, {0.0, 2.0}, {5.0, 5.0}, {20.0, 10.0}, {-10.0, 30.0}};
  unsigned bits = 256;              // forward precision for the strings
  double match_tol = 1e-6;          // relative; reference eigenvalues farther than this are unmatched
  double eigen_tol = 1e-11;         // singular eigenvalue refinement
  SingularOptions singular{};
  WeakStarMetricConfig metric{};
};

struct ConvergenceRow {
  std::size_t n = 0;
  std::vector<double> w_delta;      // |W_n(z) - W(z)| per grid point
  std::vector<double> green_delta;  // |G_n(z,c,c) - G(z,c,c)| per grid point
  std::vector<double> w_abs;        // |W_n(z)|
  std::vector<double> spectrum;     // sigma(S_n) in (0, max_lambda]
  double spectral_distance = 0.0;   // Hausdorff distance to the reference spectrum in (0, max_lambda]
  std::vector<double> norming_delta;  // per reference eigenvalue: relative gamma^2 error at the nearest eigenvalue
  bool within_reference_spectrum = true;  // sigma(S_n) in (0, max_lambda] sits on reference eigenvalues
  double weighted_total = 0.0;      // integral of (b-x)(x-a) d omega_n
  double weakstar = 0.0;
};

struct ConvergenceReport {
  std::vector<Complex> grid;
  double split = 0.0;
  double max_lambda = 0.0;
  std::vector<double> reference_spectrum;
  std::vector<double> reference_gamma_sq;
  double reference_total = 0.0;
  std::vector<double> envelope;   // (b-a) prod over the reference spectrum of (1 + |z|/lambda), tail bounded by the trace
  std::vector<ConvergenceRow> rows;
  bool envelope_dominated = true;  // |W_n| <= envelope for every row inside the reference spectrum
  bool masses_converge = false;    // weighted totals approach the reference total
  std::vector<double> unmatched;   // reference eigenvalues the sequence does not approach
  bool exceptional_empty = false;
};

/// Hausdorff distance of two finite point sets; 0 for two empty sets and
/// infinity when exactly one is empty.
double hausdorff_distance(const std::vector<double>& x, const std::vector<double>& y);

ConvergenceReport convergence_report(const std::vector<StieltjesString>& seq, const MassDistribution& reference,
                                     double split, double max_lambda, const ConvergenceOptions& opts = {});

}  // namespace krein
