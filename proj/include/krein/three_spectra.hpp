#pragma once

// Three-spectra problem: membership in the class T, norming constants from
// (sigma, sigma_a, sigma_b) and the couplings on the common part, and the
// inverse solver built on invert_measure.

#include "krein/core_model.hpp"
#include "krein/inverse_spectral.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace krein {

enum class ViolationKind { Malformed, Containment, Iff, Interlacing, EndRule, Herglotz, Coupling };
const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct TripleVerdict {
  bool member = false;
  bool interlacing_member = false;  // containment, iff, interlacing and end rule
  bool herglotz_member = false;     // iff plus Im F > 0 at every sample point
  std::size_t samples = 0;
  std::vector<Violation> violations;
};

TripleVerdict validate_triple(const ThreeSpectraTriple& t);

/// F(z) = prod_sigma (1 - z/lambda)^-1 prod_sigma_a (1 - z/mu) prod_sigma_b (1 - z/mu).
std::complex<double> triple_function(const ThreeSpectraTriple& t, std::complex<double> z);

/// Upper half-plane points where the Herglotz property is sampled.
std::vector<std::complex<double>> herglotz_sample_points(const ThreeSpectraTriple& t);

/// Norming and coupling constants on sigma in exact arithmetic. Throws
/// ValidationError when the triple is not in T, a coupling is missing, or a
/// computed norming constant is not positive.
std::vector<SpectralTriplet> triplets_from_triple(const ThreeSpectraTriple& t);

SpectralMeasure gamma_from_triple(const ThreeSpectraTriple& t);

struct TripleOptions {
  InverseOptions inverse{};
  unsigned verify_bits = 256;
  double tol = 1e-7;  // relative, for the reproduced spectra and couplings
};

struct TripleInversion {
  InversionResult inversion;
  double spectra_residual = 0.0;
  double coupling_residual = 0.0;
  bool snapped = false;  // a mass within 1e-20 (b-a) of the split was moved onto it
};

/// invert_measure(gamma_from_triple(t)), then the three spectra and couplings
/// of the result are recomputed and compared with t.
TripleInversion invert_triple(const ThreeSpectraTriple& t, const TripleOptions& opts = {});

/// Max relative mismatch of the three spectra and common couplings of s
/// against t; infinite when the set sizes differ.
std::pair<double, double> triple_residuals(const StieltjesString& s, const ThreeSpectraTriple& t, unsigned bits);

/// Endpoint sums in coupling form: sum lambda^-2 |W'|^-1 c and sum lambda^-2 |W'|^-1 c^-1.
struct CouplingSums {
  double left = 0.0;
  double right = 0.0;
};
CouplingSums coupling_form_sums(const ThreeSpectraTriple& t);

struct SweepEntry {
  std::map<Rational, Rational> couplings;
  std::optional<TripleInversion> result;
  std::string error;
  CouplingSums sums;
};

/// One reconstruction per coupling map (parallel), all sharing the triple.
std::vector<SweepEntry> isospectral_sweep(const ThreeSpectraTriple& t,
                                          const std::vector<std::map<Rational, Rational>>& grid,
                                          const TripleOptions& opts = {});

/// All three sets cut at lambda <= cutoff, couplings restricted accordingly.
ThreeSpectraTriple truncate_triple(const ThreeSpectraTriple& t, const Rational& cutoff);

struct TripleRung {
  Rational cutoff;
  std::optional<TripleInversion> result;
  std::string error;
};

std::vector<TripleRung> triple_ladder(const ThreeSpectraTriple& t, const std::vector<Rational>& cutoffs,
                                      const TripleOptions& opts = {});

}  // namespace krein
