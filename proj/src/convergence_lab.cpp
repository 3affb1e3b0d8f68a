#include "krein/convergence_lab.hpp"

#include "krein/stieltjes_forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace krein {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double dist_to_set(double x, const std::vector<double>& set) {
  double d = inf;
  for (double y : set) d = std::min(d, std::abs(x - y));
  return d;
}

std::size_t nearest(double x, const std::vector<double>& set) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < set.size(); ++i)
    if (std::abs(set[i] - x) < std::abs(set[best] - x)) best = i;
  return best;
}

bool matched(double x, const std::vector<double>& set, double tol) { return dist_to_set(x, set) <= tol * x; }

}  // namespace

double hausdorff_distance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() && y.empty()) return 0.0;
  if (x.empty() || y.empty()) return inf;
  double d = 0.0;
  for (double v : x) d = std::max(d, dist_to_set(v, y));
  for (double v : y) d = std::max(d, dist_to_set(v, x));
  return d;
}

ConvergenceReport convergence_report(const std::vector<StieltjesString>& seq, const MassDistribution& reference,
                                     double split, double max_lambda, const ConvergenceOptions& opts) {
  ConvergenceReport rep;
  rep.grid = opts.grid;
  rep.split = split;
  rep.max_lambda = max_lambda;
  const Interval& iv = reference.interval();
  for (const auto& s : seq)
    if (!(s.interval() == iv)) throw ValidationError("sequence and reference live on different intervals");

  const auto ref = truncated_spectral_measure(reference, max_lambda, opts.eigen_tol, opts.singular);
  for (const auto& t : ref.triplets) {
    rep.reference_spectrum.push_back(t.lambda);
    rep.reference_gamma_sq.push_back(t.gamma_sq);
  }
  rep.reference_total = validate_mass(reference).weighted_total;

  double partial = 0.0;
  for (double l : rep.reference_spectrum) partial += 1.0 / l;
  const double tail = std::max(0.0, trace_total(reference) - partial);
  std::vector<Complex> w_ref, g_ref;
  for (const auto& z : opts.grid) {
    double env = iv.length_d() * std::exp(std::abs(z) * tail);
    for (double l : rep.reference_spectrum) env *= 1.0 + std::abs(z) / l;
    rep.envelope.push_back(env);
    w_ref.push_back(wronskian_fn(reference, z, split, opts.singular));
    g_ref.push_back(green_diagonal(reference, z, split, 1e-12, opts.singular));
  }

  rep.rows.resize(seq.size());
  const long count = static_cast<long>(seq.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& s = seq[i];
    auto& row = rep.rows[i];
    row.n = i + 1;
    const auto omega = MassDistribution::from_string(s);
    for (std::size_t j = 0; j < opts.grid.size(); ++j) {
      const Complex w = wronskian_fn(omega, opts.grid[j], split, opts.singular);
      row.w_abs.push_back(std::abs(w));
      row.w_delta.push_back(std::abs(w - w_ref[j]));
      row.green_delta.push_back(std::abs(green_diagonal(omega, opts.grid[j], split, 1e-12, opts.singular) - g_ref[j]));
    }
    std::vector<double> gsq;
    for (const auto& t : spectral_data(s, opts.bits).triplets) {
      const double l = to_double(t.lambda);
      if (l > max_lambda) break;
      row.spectrum.push_back(l);
      gsq.push_back(to_double(t.gamma_sq));
    }
    row.spectral_distance = hausdorff_distance(row.spectrum, rep.reference_spectrum);
    for (std::size_t r = 0; r < rep.reference_spectrum.size(); ++r) {
      if (row.spectrum.empty()) {
        row.norming_delta.push_back(inf);
        continue;
      }
      const std::size_t m = nearest(rep.reference_spectrum[r], row.spectrum);
      row.norming_delta.push_back(std::abs(gsq[m] - rep.reference_gamma_sq[r]) / rep.reference_gamma_sq[r]);
    }
    for (double l : row.spectrum)
      if (!matched(l, rep.reference_spectrum, opts.match_tol)) row.within_reference_spectrum = false;
    row.weighted_total = to_double(weighted_total_exact(s));
    row.weakstar = weakstar_distance(omega, reference, opts.metric);
  }

  for (const auto& row : rep.rows) {
    if (!row.within_reference_spectrum) continue;
    for (std::size_t j = 0; j < opts.grid.size(); ++j)
      if (row.w_abs[j] > rep.envelope[j] * (1 + 1e-9)) rep.envelope_dominated = false;
  }

  if (!rep.rows.empty()) {
    const double T = rep.reference_total;
    std::vector<double> gap;
    for (const auto& row : rep.rows) gap.push_back(std::abs(row.weighted_total - T));
    bool monotone = true;
    for (std::size_t i = 1; i < gap.size(); ++i)
      if (gap[i] > gap[i - 1] + 1e-12 * T) monotone = false;
    const bool small = gap.back() <= 1e-9 * T;
    rep.masses_converge = small || (monotone && gap.size() > 1 && gap.back() <= 0.5 * gap.front());
    // a reference eigenvalue counts as approached when the last row hits it
    // or the distances to it shrink monotonically by two orders of magnitude
    for (double l : rep.reference_spectrum) {
      std::vector<double> d;
      for (const auto& row : rep.rows) d.push_back(dist_to_set(l, row.spectrum));
      bool shrinking = d.size() > 1 && std::isfinite(d.front()) && d.back() <= 1e-2 * d.front();
      for (std::size_t i = 1; i < d.size(); ++i)
        if (d[i] > d[i - 1]) shrinking = false;
      if (!(d.back() <= opts.match_tol * l || shrinking)) rep.unmatched.push_back(l);
    }
    rep.exceptional_empty = rep.unmatched.empty();
  }
  return rep;
}

}  // namespace krein
