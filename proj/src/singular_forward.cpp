#include "krein/singular_forward.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace krein {

namespace {

// ---------------------------------------------------------------- panels

/// Chebyshev points of the first kind on [-1,1] (increasing) with the
/// cumulative integration matrix S (S f)_i = int_{-1}^{t_i} f and the full
/// integral row e.
struct ChebRule {
  std::vector<double> t;
  Eigen::MatrixXd S;
  Eigen::MatrixXd S2;
  Eigen::RowVectorXd e;
  Eigen::RowVectorXd eS;
};

ChebRule build_rule(unsigned n) {
  ChebRule r;
  const double pi = std::numbers::pi;
  std::vector<double> theta(n);
  for (unsigned k = 0; k < n; ++k) {
    theta[k] = pi - (2.0 * k + 1.0) * pi / (2.0 * n);
    r.t.push_back(std::cos(theta[k]));
  }
  // values -> coefficients
  Eigen::MatrixXd C(n, n);
  for (unsigned j = 0; j < n; ++j) {
    for (unsigned k = 0; k < n; ++k) C(j, k) = 2.0 / n * std::cos(j * theta[k]);
  }
  C.row(0) *= 0.5;
  // coefficients -> antiderivative coefficients
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(n + 1, n);
  I(1, 0) = 1.0;
  if (n > 1) {
    I(0, 1) = 0.25;
    I(2, 1) = 0.25;
  }
  for (unsigned j = 2; j < n; ++j) {
    I(j + 1, j) += 1.0 / (2.0 * (j + 1));
    I(j - 1, j) -= 1.0 / (2.0 * (j - 1));
  }
  // evaluation minus the value at -1
  Eigen::MatrixXd E(n, n + 1);
  Eigen::RowVectorXd end(n + 1);
  for (unsigned j = 0; j <= n; ++j) {
    const double at_minus = (j % 2 == 0) ? 1.0 : -1.0;
    for (unsigned i = 0; i < n; ++i) E(i, j) = std::cos(j * theta[i]) - at_minus;
    end(j) = 1.0 - at_minus;
  }
  r.S = E * I * C;
  r.S2 = r.S * r.S;
  r.e = end * I * C;
  r.eS = r.e * r.S;
  return r;
}

const ChebRule& rule(unsigned n) {
  static std::mutex mu;
  static std::map<unsigned, ChebRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

/// The mass distribution seen from one endpoint, in the local coordinate
/// s = distance from that endpoint.
struct Medium {
  double length = 0.0;
  bool dense = false;
  double alpha_start = 0.0;
  double alpha_end = 0.0;
  std::optional<Density> density;
  double origin = 0.0;  // global position of s = 0
  bool reflected = false;
  std::vector<std::pair<double, double>> masses;  // (s, m), increasing
  std::vector<double> kinks;

  double rho(double s) const {
    if (!dense) return 0.0;
    const double x = reflected ? origin - s : origin + s;
    double v = density->regular(x);
    if (alpha_start != 0.0) v *= std::pow(s, -alpha_start);
    if (alpha_end != 0.0) v *= std::pow(length - s, -alpha_end);
    return v;
  }
};

Medium make_medium(const MassDistribution& omega, bool from_right) {
  Medium m;
  const Interval& iv = omega.interval();
  m.length = iv.length_d();
  m.reflected = from_right;
  m.origin = from_right ? iv.b_d() : iv.a_d();
  if (omega.density()) {
    const Density& d = *omega.density();
    const bool nonzero = d.kind() == Density::Kind::Table
                             ? std::any_of(d.table_v().begin(), d.table_v().end(), [](double v) { return v > 0.0; })
                             : d.coef() > 0.0;
    if (nonzero) {
      m.dense = true;
      m.density = d;
      m.alpha_start = from_right ? d.alpha_b() : d.alpha_a();
      m.alpha_end = from_right ? d.alpha_a() : d.alpha_b();
      for (double x : d.breakpoints()) {
        const double s = from_right ? iv.b_d() - x : x - iv.a_d();
        if (s > 0.0 && s < m.length) m.kinks.push_back(s);
      }
      std::sort(m.kinks.begin(), m.kinks.end());
    }
  }
  for (const auto& pm : omega.point_masses()) {
    const double s = to_double(from_right ? Rational(iv.b - pm.x) : Rational(pm.x - iv.a));
    m.masses.emplace_back(s, to_double(pm.m));
  }
  std::sort(m.masses.begin(), m.masses.end());
  return m;
}

struct Panel {
  double p = 0.0;
  double q = 0.0;
  bool dense = false;
  std::vector<double> s;    // nodes
  std::vector<double> rho;  // density at the nodes
  double mass_at_q = 0.0;   // point mass sitting at q (applied after the panel)
};

/// Leading behaviour rho(s) ~ coef * s^-alpha of a singular start.
struct Layer {
  double width = 0.0;
  double coef = 0.0;
  double alpha = 0.0;
  bool active() const { return width > 0.0 && coef > 0.0; }
};

struct Discretization {
  Layer layer;
  std::vector<Panel> panels;
  double mass_at_target = 0.0;
};

/// Panels covering (0, target]; masses strictly inside become panel ends.
Discretization discretize(const Medium& m, double target, double zabs, const SingularOptions& opts) {
  Discretization d;
  const ChebRule& cr = rule(opts.nodes);
  std::vector<double> breaks{0.0, target};
  for (const auto& [s, mass] : m.masses) {
    if (s < target) breaks.push_back(s);
  }
  for (double k : m.kinks) {
    if (k < target) breaks.push_back(k);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  if (m.dense && m.alpha_start > 0.0) {
    const double probe = std::min(1e-8 * m.length, breaks[1] / 4.0);
    Layer& ly = d.layer;
    ly.alpha = m.alpha_start;
    ly.coef = m.rho(probe) * std::pow(probe, ly.alpha);
    if (ly.coef > 0.0) {
      const double g = 2.0 - ly.alpha;
      // |z| coef w^g / g <= layer keeps the dropped second-order term negligible
      ly.width = std::pow(opts.layer * g / (std::max(zabs, 1.0) * ly.coef), 1.0 / g);
      ly.width = std::min({ly.width, breaks[1] / 4.0, 1e-3 * m.length});
      ly.width = std::max(ly.width, 1e-280);
      breaks.insert(breaks.begin() + 1, ly.width);
    }
  }

  auto fine_enough = [&](double p, double q) {
    const double h = q - p;
    if (h > m.length / 4.0) return false;
    if (!m.dense) return true;
    if (d.layer.active() && h > p) return false;
    if (m.alpha_end > 0.0 && h > m.length - q) return false;
    double peak = 0.0;
    for (double t : {-0.95, 0.0, 0.95}) peak = std::max(peak, m.rho(p + (t + 1.0) * h / 2.0));
    return zabs * h * h * peak <= opts.oscillation;
  };

  auto mass_at = [&](double s) {
    double total = 0.0;
    for (const auto& [pos, mass] : m.masses) {
      if (pos == s) total += mass;
    }
    return total;
  };

  const std::size_t first = d.layer.active() ? 1 : 0;
  for (std::size_t i = first; i + 1 < breaks.size(); ++i) {
    std::vector<std::pair<double, double>> pieces;
    // depth-first halving, pieces collected in increasing order
    std::vector<std::pair<double, double>> todo{{breaks[i], breaks[i + 1]}};
    while (!todo.empty()) {
      auto [p, q] = todo.back();
      todo.pop_back();
      if (fine_enough(p, q) || q - p <= 4.0 * std::numeric_limits<double>::epsilon() * q) {
        pieces.emplace_back(p, q);
      } else {
        const double mid = (p > 0.0 && q > 4.0 * p) ? std::sqrt(p * q) : 0.5 * (p + q);
        todo.emplace_back(mid, q);
        todo.emplace_back(p, mid);
      }
      if (d.panels.size() + pieces.size() > opts.max_panels) {
        throw NumericalError("singular solver: panel budget exceeded", static_cast<double>(pieces.size()));
      }
    }
    for (const auto& [p, q] : pieces) {
      Panel pn;
      pn.p = p;
      pn.q = q;
      pn.dense = m.dense;
      if (pn.dense) {
        for (double t : cr.t) {
          const double s = p + (t + 1.0) * (q - p) / 2.0;
          pn.s.push_back(s);
          pn.rho.push_back(m.rho(s));
        }
      }
      d.panels.push_back(std::move(pn));
    }
    if (!d.panels.empty() && breaks[i + 1] < target) d.panels.back().mass_at_q = mass_at(breaks[i + 1]);
  }
  d.mass_at_target = mass_at(target);
  return d;
}

// ---------------------------------------------------------------- solver

template <class Z>
struct Sweep {
  Z u{};
  Z v{};  // slope just left of the target
  Z norm{};  // integral of u^2 over (0, target)
  std::size_t sign_changes = 0;
};

template <class Z>
Sweep<Z> sweep(const Discretization& d, const Z& z, const SingularOptions& opts, bool count_signs) {
  using Mat = Eigen::Matrix<Z, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Z, Eigen::Dynamic, 1>;
  const ChebRule& cr = rule(opts.nodes);
  const auto n = static_cast<Eigen::Index>(opts.nodes);
  Sweep<Z> out;
  Z u = Z(0), v = Z(1), norm = Z(0);
  int prev = 1;
  auto visit = [&](const Z& val) {
    if (!count_signs) return;
    const double r = std::real(val);
    const int sg = r > 0.0 ? 1 : (r < 0.0 ? -1 : 0);
    if (sg == 0) {
      ++out.sign_changes;
      prev = -prev;
    } else if (sg != prev) {
      ++out.sign_changes;
      prev = sg;
    }
  };
  if (d.layer.active()) {
    const Layer& ly = d.layer;
    const double g = 2.0 - ly.alpha;
    const double w = ly.width;
    const double i1 = ly.coef * std::pow(w, g) / g;                     // int rho s
    const double i2 = ly.coef * std::pow(w, 3.0 - ly.alpha) / (g * (3.0 - ly.alpha));  // int (w-s) rho s
    const double i3 = ly.coef * std::pow(w, 3.0 - ly.alpha) / (3.0 - ly.alpha);        // int rho s^2
    u = Z(w) - z * Z(i2);
    v = Z(1) - z * Z(i1);
    norm = Z(i3);
  }
  Mat A(n, n);
  Vec rhs(n);
  for (const Panel& pn : d.panels) {
    const double h = pn.q - pn.p;
    if (!pn.dense) {
      u += Z(h) * v;
    } else {
      const double hh = h / 2.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const Z col = z * Z(hh * hh * pn.rho[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < n; ++i) A(i, j) = Z(cr.S2(i, j)) * col;
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) += Z(1);
        rhs(i) = u + v * Z(pn.s[static_cast<std::size_t>(i)] - pn.p);
      }
      const Vec nodes = A.partialPivLu().solve(rhs);
      Z eg = Z(0), esg = Z(0), en = Z(0);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Z g = Z(pn.rho[static_cast<std::size_t>(i)]) * nodes(i);
        eg += Z(cr.e(i)) * g;
        esg += Z(cr.eS(i)) * g;
        en += Z(cr.e(i)) * g * nodes(i);
        visit(nodes(i));
      }
      u = u + v * Z(h) - z * Z(hh * hh) * esg;
      v = v - z * Z(hh) * eg;
      norm += Z(hh) * en;
    }
    visit(u);
    if (pn.mass_at_q != 0.0) {
      norm += Z(pn.mass_at_q) * u * u;
      v -= z * Z(pn.mass_at_q) * u;
    }
  }
  out.u = u;
  out.v = v;
  out.norm = norm;
  return out;
}

struct Sides {
  Medium left;
  Medium right;
};

Sides sides(const MassDistribution& omega) { return {make_medium(omega, false), make_medium(omega, true)}; }

/// phi_a data at local position x (left medium) and phi_b data at the same
/// point (right medium, mass at the point included so that the derivative is
/// the left limit).
template <class Z>
std::pair<Sweep<Z>, Sweep<Z>> solve_at(const Sides& sd, const Z& z, double x_local, const SingularOptions& opts,
                                       bool count_signs) {
  const double zabs = std::abs(z);
  const auto dl = discretize(sd.left, x_local, zabs, opts);
  const auto dr = discretize(sd.right, sd.left.length - x_local, zabs, opts);
  auto a = sweep(dl, z, opts, count_signs);
  auto b = sweep(dr, z, opts, count_signs);
  if (dr.mass_at_target != 0.0) {
    b.norm += Z(dr.mass_at_target) * b.u * b.u;
    b.v -= z * Z(dr.mass_at_target) * b.u;
  }
  b.v = -b.v;  // back to the original orientation
  return {a, b};
}

double local(const MassDistribution& omega, double x) {
  const double a = omega.interval().a_d();
  const double b = omega.interval().b_d();
  if (!(x > a && x < b)) throw ValidationError("singular solver: point must lie inside (a,b)");
  return x - a;
}

/// Reference point: midpoint of (a,b), moved off a point mass.
double reference_point(const MassDistribution& omega) {
  const Interval& iv = omega.interval();
  Rational c = (iv.a + iv.b) / 2;
  for (int i = 0; i < 64; ++i) {
    const bool hit = std::any_of(omega.point_masses().begin(), omega.point_masses().end(),
                                 [&](const PointMass& pm) { return pm.x == c; });
    if (!hit) break;
    c += iv.length() / Rational(1 << 10) / (i + 1);
  }
  return to_double(c);
}

struct RealEval {
  double w = 0.0;
  std::size_t count = 0;
};

RealEval evaluate_real(const Sides& sd, double z, double c_local, const SingularOptions& opts) {
  const auto [a, b] = solve_at(sd, z, c_local, opts, true);
  RealEval r;
  r.w = b.u * a.v - b.v * a.u;
  const std::size_t zeros = a.sign_changes + b.sign_changes;
  r.count = zeros + ((zeros + (r.w < 0.0 ? 1 : 0)) % 2);
  return r;
}

}  // namespace

// ---------------------------------------------------------------- public

SeriesEvaluation m_a_series(const MassDistribution& omega, Complex z, double x, double tol,
                            const SingularOptions& opts) {
  if (!(tol > 0.0)) throw ValidationError("m_a_series: tol must be positive");
  const double xl = local(omega, x);
  const Medium med = make_medium(omega, false);
  const auto d = discretize(med, xl, std::abs(z), opts);
  const ChebRule& cr = rule(opts.nodes);
  const std::size_t n = opts.nodes;
  const double L = med.length;

  // weighted mass I(x) for the factorial bound
  double weighted = 0.0;
  if (d.layer.active()) {
    const double g = 2.0 - d.layer.alpha;
    weighted += d.layer.coef * std::pow(d.layer.width, g) / g;
  }
  for (const Panel& pn : d.panels) {
    const double hh = (pn.q - pn.p) / 2.0;
    for (std::size_t i = 0; i < pn.s.size(); ++i) {
      weighted += hh * cr.e(static_cast<Eigen::Index>(i)) * pn.rho[i] * pn.s[i] * (L - pn.s[i]) / L;
    }
    if (pn.mass_at_q != 0.0) weighted += pn.mass_at_q * pn.q * (L - pn.q) / L;
  }
  const double rate = std::abs(z) * weighted;

  // iterates g_k(s) = (K_a^k 1)(s) * s at the nodes and panel ends
  std::vector<std::vector<double>> g(d.panels.size());
  std::vector<double> g_end(d.panels.size());
  for (std::size_t k = 0; k < d.panels.size(); ++k) {
    g[k] = d.panels[k].s;
    g_end[k] = d.panels[k].q;
  }
  double layer_end = d.layer.active() ? d.layer.width : 0.0;
  SeriesEvaluation out;
  Complex sum = 1.0;
  Complex power = 1.0;
  double term_bound = 1.0;  // (rate)^k / k!
  std::size_t k = 0;
  for (;;) {
    // tail after term k: sum_{j>k} rate^j / j!
    double next = term_bound * rate / static_cast<double>(k + 1);
    double tail = 0.0;
    if (static_cast<double>(k + 2) > rate) {
      tail = next / (1.0 - rate / static_cast<double>(k + 2));
    } else {
      tail = std::numeric_limits<double>::infinity();
    }
    if (tail <= tol) {
      out.tail_bound = tail;
      break;
    }
    if (k + 1 >= opts.max_terms) {
      throw NumericalError("m_a_series: tolerance not reached within the term limit", tail);
    }
    // one application of the integral operator on s * f
    double U = 0.0, V = 0.0;
    if (d.layer.active() && k == 0) {
      const double gexp = 2.0 - d.layer.alpha;
      const double w = d.layer.width;
      V = d.layer.coef * std::pow(w, gexp) / gexp;
      U = d.layer.coef * std::pow(w, 3.0 - d.layer.alpha) / (gexp * (3.0 - d.layer.alpha));
    }
    layer_end = U;
    std::vector<std::vector<double>> ng(d.panels.size());
    std::vector<double> ng_end(d.panels.size());
    for (std::size_t pi = 0; pi < d.panels.size(); ++pi) {
      const Panel& pn = d.panels[pi];
      const double h = pn.q - pn.p;
      if (pn.dense) {
        const double hh = h / 2.0;
        Eigen::VectorXd f(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) f(static_cast<Eigen::Index>(i)) = pn.rho[i] * g[pi][i];
        const Eigen::VectorXd twice = cr.S2 * f;
        ng[pi].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          ng[pi][i] = U + V * (pn.s[i] - pn.p) + hh * hh * twice(static_cast<Eigen::Index>(i));
        }
        U += V * h + hh * hh * cr.eS.dot(f);
        V += hh * cr.e.dot(f);
      } else {
        U += V * h;
      }
      ng_end[pi] = U;
      if (pn.mass_at_q != 0.0) V += pn.mass_at_q * g_end[pi];
    }
    g = std::move(ng);
    g_end = std::move(ng_end);
    ++k;
    power *= -z;
    const double at_x = g_end.empty() ? layer_end : g_end.back();
    sum += power * (at_x / xl);
    term_bound = next;
  }
  out.value = sum;
  out.terms_used = k + 1;
  return out;
}

PhiPair phi_pair(const MassDistribution& omega, Complex z, double x, const SingularOptions& opts) {
  const double xl = local(omega, x);
  const auto sd = sides(omega);
  const auto [a, b] = solve_at(sd, z, xl, opts, false);
  return {a.u, a.v, b.u, b.v};
}

Complex wronskian_fn(const MassDistribution& omega, Complex z, std::optional<double> reference,
                     const SingularOptions& opts) {
  const double c = reference ? *reference : reference_point(omega);
  const auto p = phi_pair(omega, z, c, opts);
  return p.phi_b * p.dphi_a - p.dphi_b * p.phi_a;
}

std::size_t eigenvalue_count(const MassDistribution& omega, double z, const SingularOptions& opts) {
  if (!(z > 0.0)) return 0;
  const auto sd = sides(omega);
  return evaluate_real(sd, z, local(omega, reference_point(omega)), opts).count;
}

double trace_total(const MassDistribution& omega, const QuadratureOptions& quad) {
  return validate_mass(omega, quad).weighted_total / omega.interval().length_d();
}

EigenvalueSearch eigenvalues_below(const MassDistribution& omega, double max_lambda, double tol,
                                   const SingularOptions& opts) {
  if (!(max_lambda > 0.0)) throw ValidationError("eigenvalues_below: the cutoff must be positive");
  EigenvalueSearch out;
  const double trace = trace_total(omega);
  out.count_bound = max_lambda * trace;
  if (!(trace > 0.0)) return out;
  const auto sd = sides(omega);
  const double c = local(omega, reference_point(omega));
  auto eval = [&](double z) { return evaluate_real(sd, z, c, opts); };

  const auto top = eval(max_lambda);
  const std::size_t total = top.count + (top.w == 0.0 ? 1 : 0);
  if (static_cast<double>(total) > out.count_bound * (1.0 + 1e-12) + 1e-12) {
    std::ostringstream msg;
    msg << "eigenvalues_below: " << total << " sign changes exceed the trace bound " << out.count_bound
        << "; refine the panels (smaller oscillation parameter)";
    throw NumericalError(msg.str(), static_cast<double>(total));
  }
  // lambda_1 >= 1/trace
  const double floor = std::min(max_lambda, 0.5 / trace);
  if (eval(floor).count != 0) throw NumericalError("eigenvalues_below: eigenvalue below the trace bound", floor);

  // slice (floor, max_lambda] until every piece holds one eigenvalue
  struct Piece {
    double lo, hi;
    std::size_t below;
  };
  std::vector<Piece> isolated;
  std::vector<std::tuple<double, double, std::size_t, std::size_t>> todo{{floor, max_lambda, 0, total}};
  while (!todo.empty()) {
    auto [lo, hi, clo, chi] = todo.back();
    todo.pop_back();
    if (chi == clo) continue;
    if (chi == clo + 1) {
      isolated.push_back({lo, hi, clo});
      continue;
    }
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) {
      throw NumericalError("eigenvalues_below: eigenvalues closer than the working precision", hi - lo);
    }
    const std::size_t cm = eval(mid).count;
    if (cm < clo || cm > chi) throw NumericalError("eigenvalues_below: counting function not monotone", mid);
    todo.emplace_back(mid, hi, cm, chi);
    todo.emplace_back(lo, mid, clo, cm);
  }
  std::sort(isolated.begin(), isolated.end(), [](const Piece& x, const Piece& y) { return x.lo < y.lo; });

  out.eigenvalues.assign(isolated.size(), 0.0);
  out.widths.assign(isolated.size(), 0.0);
  const long count = static_cast<long>(isolated.size());
  std::vector<std::string> errors(isolated.size());
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Piece& pc = isolated[idx];
    try {
      auto w = [&](double z) { return eval(z).w; };
      double lo = pc.lo, hi = pc.hi;
      double wl = w(lo), wh = w(hi);
      if (hi == max_lambda && wh == 0.0) {
        out.eigenvalues[idx] = hi;
        continue;
      }
      if (wl == 0.0 || wh == 0.0 || (wl > 0.0) == (wh > 0.0)) {
        throw NumericalError("eigenvalues_below: no sign change in an isolating bracket", hi - lo);
      }
      const double eps = std::numeric_limits<double>::epsilon();
      auto stop = [&](double x, double y) { return std::abs(y - x) <= std::max(tol, 16.0 * eps * std::abs(y)); };
      std::uintmax_t iters = 200;
      const auto [x, y] = boost::math::tools::toms748_solve(w, lo, hi, wl, wh, stop, iters);
      out.eigenvalues[idx] = 0.5 * (x + y);
      out.widths[idx] = y - x;
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericalError(e, 0.0);
  }
  return out;
}

TruncatedSpectrum truncated_spectral_measure(const MassDistribution& omega, double max_lambda, double tol,
                                             const SingularOptions& opts) {
  const auto found = eigenvalues_below(omega, max_lambda, tol, opts);
  TruncatedSpectrum out;
  out.triplets.resize(found.eigenvalues.size());
  const auto sd = sides(omega);
  const double c = local(omega, reference_point(omega));
  const double L = sd.left.length;
  const long count = static_cast<long>(found.eigenvalues.size());
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double lam = found.eigenvalues[idx];
    const auto [a, b] = solve_at(sd, lam, c, opts, false);
    // phi_b = r phi_a at an eigenvalue; least squares over value and slope
    const double r = (b.u * a.u + L * L * b.v * a.v) / (a.u * a.u + L * L * a.v * a.v);
    SingularTriplet& t = out.triplets[idx];
    t.lambda = lam;
    t.gamma_sq = a.norm + b.norm / (r * r);
    t.coupling = std::abs(r);
    t.theta = r < 0.0 ? 1 : 0;
    // -W'(lambda) = int phi_a phi_b = r int_a^c phi_a^2 + (1/r) int_c^b phi_b^2
    t.w_dot = -(r * a.norm + b.norm / r);
  }
  std::vector<Atom> atoms;
  for (const auto& t : out.triplets) atoms.push_back({Rational(t.lambda), Rational(1.0 / t.gamma_sq)});
  out.measure = SpectralMeasure(omega.interval(), std::move(atoms));
  return out;
}

Complex green_diagonal(const MassDistribution& omega, Complex z, double point, double tol,
                       const SingularOptions& opts) {
  const auto p = phi_pair(omega, z, point, opts);
  const Complex w = p.phi_b * p.dphi_a - p.dphi_b * p.phi_a;
  if (std::abs(w) <= tol * omega.interval().length_d()) {
    throw NumericalError("green_diagonal: z is within tolerance of an eigenvalue", std::abs(w));
  }
  return p.phi_a * p.phi_b / w;
}

EndpointDiagnostics singular_endpoint_diagnostics(const MassDistribution& omega, const std::vector<double>& cutoffs,
                                                  double tol, const SingularOptions& opts) {
  if (cutoffs.empty()) throw ValidationError("endpoint diagnostics need at least one cutoff");
  const double top = *std::max_element(cutoffs.begin(), cutoffs.end());
  const auto tr = truncated_spectral_measure(omega, top, tol, opts);
  EndpointDiagnostics d;
  d.left.cutoffs = d.right.cutoffs = cutoffs;
  for (double cut : cutoffs) {
    double left = 0.0, right = 0.0;
    for (const auto& t : tr.triplets) {
      if (t.lambda > cut) break;
      const double l2 = t.lambda * t.lambda;
      left += 1.0 / (l2 * t.gamma_sq);
      right += t.gamma_sq / (l2 * t.w_dot * t.w_dot);
    }
    d.left.sums.push_back(left);
    d.right.sums.push_back(right);
  }
  d.left.verdict = classify_trend(d.left.sums);
  d.right.verdict = classify_trend(d.right.sums);
  d.finite_near_a = d.left.verdict == Trend::Converging;
  d.finite_near_b = d.right.verdict == Trend::Converging;
  return d;
}

MassDistribution density_fixture(const std::string& name, const Interval& interval) {
  if (name == "uniform") return MassDistribution(interval, {}, Density::uniform(1.0));
  if (name.rfind("power:", 0) == 0) {
    double alpha_a = 0.0, alpha_b = 0.0;
    std::stringstream ss(name.substr(6));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ValidationError("density fixture: expected key=value in '" + item + "'");
      const std::string key = item.substr(0, eq);
      double value = 0.0;
      try {
        value = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw ValidationError("density fixture: bad number in '" + item + "'");
      }
      if (key == "alpha" || key == "alpha_a") {
        alpha_a = value;
      } else if (key == "alpha_b") {
        alpha_b = value;
      } else {
        throw ValidationError("density fixture: unknown key '" + key + "'");
      }
    }
    return MassDistribution(interval, {}, Density::power(alpha_a, alpha_b));
  }
  throw ValidationError("density fixture: unknown name '" + name + "'");
}

}  // namespace krein
