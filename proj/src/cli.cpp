#include "krein/cli.hpp"

#include "krein/inverse_spectral.hpp"
#include "krein/io.hpp"
#include "krein/singular_forward.hpp"
#include "krein/stieltjes_forward.hpp"
#include "krein/three_spectra.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace krein {

namespace {

struct Flags {
  std::string string_path, measure_path, triple_path, out_path;
  std::vector<std::string> interval;
  std::string split;
  double max_lambda = 0.0;
  std::string cutoffs;
  double tol = 1e-7;
  unsigned precision_bits = 0;
  std::string output = "json";
  std::uint64_t seed = 0;
  bool seeded = false;
  std::size_t count = 100;
  std::size_t max_masses = 30;
  std::string sweep_lambda, sweep_values;
};

/// Result document plus the exit status it implies.
struct Outcome {
  Json doc;
  std::string csv;
  int code = kExitOk;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Rational flag_rational(const std::string& text, const char* flag) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("--") + flag, e.what());
  }
}

std::vector<Rational> flag_rationals(const std::string& text, const char* flag) {
  std::vector<Rational> out;
  for (const auto& item : split_list(text)) out.push_back(flag_rational(item, flag));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

Json dbl(const Rational& q) { return to_double(q); }

Json base(const char* command, unsigned bits) {
  return Json{{"command", command}, {"precision_bits", bits}};
}

Json triple_summary(const ThreeSpectraTriple& t) {
  Json j = triple_to_json(t);
  for (const char* key : {"sigma", "sigma_a", "sigma_b"}) {
    Json a = Json::array();
    for (const auto& v : j[key]) a.push_back(to_double(rational_from_json(v, key)));
    j[key] = a;
  }
  Json c = Json::object();
  for (const auto& [lam, v] : t.couplings) c[fmt(to_double(lam))] = to_double(v);
  j["couplings"] = c;
  return j;
}

/// Input document, with the interval replaced by --interval when given.
Json load_doc(const std::string& path, const char* flag, const Flags& f) {
  if (path.empty()) throw InputError(std::string("--") + flag, "required");
  Json j = read_json_file(path);
  if (!f.interval.empty()) {
    if (!j.is_object()) throw InputError("/", "expected an object");
    j["interval"] = Json::array({f.interval[0], f.interval[1]});
  }
  return j;
}

StieltjesString load_string(const Flags& f) { return string_from_json(load_doc(f.string_path, "string", f)); }

// ------------------------------------------------------------------------

Outcome cmd_forward(const Flags& f, unsigned bits) {
  Outcome o;
  o.doc = base("forward", bits);
  const Json in = load_doc(f.string_path, "string", f);
  std::ostringstream csv;
  csv << "lambda,gamma_sq,coupling,theta,w_dot\n";
  if (in.contains("density")) {
    if (!(f.max_lambda > 0)) throw InputError("--max-lambda", "required and positive for a density");
    const auto omega = mass_from_json(in);
    const auto tr = truncated_spectral_measure(omega, f.max_lambda, 1e-10);
    Json ev = Json::array(), g = Json::array(), c = Json::array(), th = Json::array(), wd = Json::array();
    for (const auto& t : tr.triplets) {
      ev.push_back(t.lambda);
      g.push_back(t.gamma_sq);
      c.push_back(t.coupling);
      th.push_back(t.theta);
      wd.push_back(t.w_dot);
      csv << fmt(t.lambda) << ',' << fmt(t.gamma_sq) << ',' << fmt(t.coupling) << ',' << t.theta << ','
          << fmt(t.w_dot) << '\n';
    }
    o.doc["max_lambda"] = f.max_lambda;
    o.doc["eigenvalues"] = ev;
    o.doc["gamma_sq"] = g;
    o.doc["coupling"] = c;
    o.doc["theta"] = th;
    o.doc["w_dot"] = wd;
    o.doc["trace_total"] = trace_total(omega);
    o.csv = csv.str();
    return o;
  }
  const auto s = string_from_json(in);
  const auto data = spectral_data(s, bits);
  Json ev = Json::array(), g = Json::array(), c = Json::array(), th = Json::array(), w = Json::array(),
       wd = Json::array();
  for (const auto& t : data.triplets) {
    // -W'(lambda) = (-1)^theta c gamma^2
    const Rational w_dot = (t.theta ? 1 : -1) * t.coupling * t.gamma_sq;
    ev.push_back(dbl(t.lambda));
    g.push_back(dbl(t.gamma_sq));
    c.push_back(dbl(t.coupling));
    th.push_back(t.theta);
    w.push_back(dbl(Rational(1 / t.gamma_sq)));
    wd.push_back(dbl(w_dot));
    csv << fmt(to_double(t.lambda)) << ',' << fmt(to_double(t.gamma_sq)) << ',' << fmt(to_double(t.coupling)) << ','
        << t.theta << ',' << fmt(to_double(w_dot)) << '\n';
  }
  o.doc["interval"] = Json::array({dbl(s.interval().a), dbl(s.interval().b)});
  o.doc["eigenvalues"] = ev;
  o.doc["gamma_sq"] = g;
  o.doc["coupling"] = c;
  o.doc["theta"] = th;
  o.doc["weights"] = w;
  o.doc["w_dot"] = wd;
  o.doc["weighted_total"] = dbl(weighted_total_exact(s));
  if (!f.split.empty()) {
    const Rational c0 = flag_rational(f.split, "split");
    if (!s.interval().contains_open(c0)) throw InputError("--split", "must lie inside the interval");
    const auto t = three_spectra_of(s, c0, bits);
    const auto j = triple_summary(t);
    for (const char* key : {"sigma", "sigma_a", "sigma_b", "couplings"}) o.doc[key] = j[key];
    o.doc["split"] = dbl(c0);
  }
  o.csv = csv.str();
  return o;
}

Outcome cmd_spectrum(const Flags& f, unsigned bits) {
  if (!(f.max_lambda > 0)) throw InputError("--max-lambda", "required and positive");
  const Json in = load_doc(f.string_path, "string", f);
  Outcome o;
  o.doc = base("spectrum", bits);
  o.doc["max_lambda"] = f.max_lambda;
  Json ev = Json::array();
  std::ostringstream csv;
  csv << "index,lambda\n";
  std::vector<double> values;
  if (in.contains("density")) {
    const auto omega = mass_from_json(in);
    const auto res = eigenvalues_below(omega, f.max_lambda, 1e-10);
    values = res.eigenvalues;
    o.doc["count_bound"] = res.count_bound;
  } else {
    for (const auto& l : dirichlet_spectrum(string_from_json(in), bits))
      if (to_double(l) <= f.max_lambda) values.push_back(to_double(l));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    ev.push_back(values[i]);
    csv << i + 1 << ',' << fmt(values[i]) << '\n';
  }
  o.doc["eigenvalues"] = ev;
  o.csv = csv.str();
  return o;
}

Json inversion_json(const InversionResult& r) {
  return Json{{"string", string_to_json(r.string)},
              {"exact", r.exact},
              {"inversion_bits", r.precision_bits},
              {"eigen_residual", r.eigen_residual},
              {"weight_residual", r.weight_residual}};
}

std::string string_csv(const StieltjesString& s) {
  std::ostringstream csv;
  csv << "index,position,mass\n";
  const auto pos = s.positions();
  for (std::size_t i = 0; i < s.size(); ++i)
    csv << i + 1 << ',' << fmt(to_double(pos[i])) << ',' << fmt(to_double(s.masses()[i])) << '\n';
  return csv.str();
}

InverseOptions inverse_options(unsigned bits) {
  InverseOptions opts;
  opts.precision_bits = bits;
  return opts;
}

Outcome cmd_inverse_measure(const Flags& f, unsigned bits) {
  auto rho = measure_from_json(load_doc(f.measure_path, "measure", f));
  if (!rho.is_finite()) {
    if (!(f.max_lambda > 0)) throw InputError("--max-lambda", "required to truncate an infinite measure");
    rho = rho.truncated(Rational(f.max_lambda));
  }
  Outcome o;
  o.doc = base("inverse-measure", bits);
  const auto r = invert_measure(rho, inverse_options(bits));
  o.doc.update(inversion_json(r));
  o.csv = string_csv(r.string);
  return o;
}

Outcome cmd_inverse_three(const Flags& f, unsigned bits) {
  const auto t = triple_from_json(load_doc(f.triple_path, "triple", f));
  TripleOptions opts;
  opts.inverse = inverse_options(bits);
  opts.tol = f.tol;
  Outcome o;
  o.doc = base("inverse-three", bits);
  if (f.sweep_lambda.empty()) {
    const auto r = invert_triple(t, opts);
    o.doc.update(inversion_json(r.inversion));
    o.doc["spectra_residual"] = r.spectra_residual;
    o.doc["coupling_residual"] = r.coupling_residual;
    o.csv = string_csv(r.inversion.string);
    return o;
  }
  const Rational lam = flag_rational(f.sweep_lambda, "sweep-lambda");
  std::vector<std::map<Rational, Rational>> grid;
  for (const auto& v : flag_rationals(f.sweep_values, "sweep-values")) {
    auto c = t.couplings;
    c[lam] = v;
    grid.push_back(c);
  }
  if (grid.empty()) throw InputError("--sweep-values", "required with --sweep-lambda");
  const auto sweep = isospectral_sweep(t, grid, opts);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "index,coupling,status,left_sum,right_sum,masses,spectra_residual\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& e = sweep[i];
    Json row{{"coupling", to_double(e.couplings.at(lam))}};
    csv << i + 1 << ',' << fmt(to_double(e.couplings.at(lam))) << ',';
    if (e.result) {
      row["string"] = string_to_json(e.result->inversion.string);
      row["left_sum"] = e.sums.left;
      row["right_sum"] = e.sums.right;
      row["spectra_residual"] = e.result->spectra_residual;
      csv << "ok," << fmt(e.sums.left) << ',' << fmt(e.sums.right) << ',' << e.result->inversion.string.size() << ','
          << fmt(e.result->spectra_residual) << '\n';
    } else {
      row["error"] = e.error;
      csv << "error,,,,\n";
      o.code = kExitNumerical;
    }
    rows.push_back(row);
  }
  o.doc["sweep_lambda"] = dbl(lam);
  o.doc["sweep"] = rows;
  o.csv = csv.str();
  return o;
}

Outcome cmd_validate_triple(const Flags& f, unsigned bits) {
  const auto t = triple_from_json(load_doc(f.triple_path, "triple", f));
  const auto v = validate_triple(t);
  Outcome o;
  o.doc = base("validate-triple", bits);
  o.doc["member"] = v.member;
  o.doc["interlacing_member"] = v.interlacing_member;
  o.doc["herglotz_member"] = v.herglotz_member;
  o.doc["samples"] = v.samples;
  Json viol = Json::array();
  std::ostringstream csv;
  csv << "kind,detail\n";
  for (const auto& x : v.violations) {
    viol.push_back(Json{{"kind", to_string(x.kind)}, {"detail", x.detail}});
    csv << to_string(x.kind) << ",\"" << x.detail << "\"\n";
  }
  o.doc["violations"] = viol;
  o.csv = csv.str();
  o.code = v.member ? kExitOk : kExitValidation;
  return o;
}

Outcome cmd_ladder(const Flags& f, unsigned bits) {
  const auto cutoffs = flag_rationals(f.cutoffs, "cutoffs");
  if (cutoffs.empty()) throw InputError("--cutoffs", "required");
  Outcome o;
  o.doc = base("ladder", bits);
  Json rungs = Json::array();
  std::ostringstream csv;
  csv << "cutoff,atoms,status,eigen_residual,weight_residual,distance_to_reference\n";
  if (!f.triple_path.empty()) {
    const auto t = triple_from_json(load_doc(f.triple_path, "triple", f));
    TripleOptions opts;
    opts.inverse = inverse_options(bits);
    opts.tol = f.tol;
    for (const auto& r : triple_ladder(t, cutoffs, opts)) {
      Json row{{"cutoff", dbl(r.cutoff)}};
      csv << fmt(to_double(r.cutoff)) << ',';
      if (r.result) {
        row.update(inversion_json(r.result->inversion));
        row["spectra_residual"] = r.result->spectra_residual;
        csv << r.result->inversion.string.size() << ",ok," << fmt(r.result->inversion.eigen_residual) << ','
            << fmt(r.result->inversion.weight_residual) << ",\n";
      } else {
        row["error"] = r.error;
        csv << ",error,,,\n";
        o.code = kExitNumerical;
      }
      rungs.push_back(row);
    }
    o.doc["rungs"] = rungs;
    o.csv = csv.str();
    return o;
  }
  if (f.measure_path.empty()) throw InputError("--measure", "required (or --triple)");
  const Json in = load_doc(f.measure_path, "measure", f);
  const auto rho = measure_from_json(in);
  std::optional<MassDistribution> reference;
  if (in.contains("builtin") && in["builtin"] == "uniform-string")
    reference = MassDistribution(rho.interval(), {}, Density::uniform(1.0));
  const auto rep = truncation_ladder(rho, cutoffs, inverse_options(bits), reference ? &*reference : nullptr);
  o.doc["uniform_bound"] = rep.uniform_bound;
  for (const auto& r : rep.rungs) {
    Json row{{"cutoff", dbl(r.cutoff)}, {"atoms", r.atoms}, {"weighted_total", r.weighted_total},
             {"within_uniform_bound", r.within_uniform_bound}};
    csv << fmt(to_double(r.cutoff)) << ',' << r.atoms << ',';
    if (r.result) {
      row.update(inversion_json(*r.result));
      csv << "ok," << fmt(r.result->eigen_residual) << ',' << fmt(r.result->weight_residual) << ',';
    } else {
      row["error"] = r.error;
      csv << "error,,,";
      o.code = kExitNumerical;
    }
    if (r.distance_to_reference) {
      row["distance_to_reference"] = *r.distance_to_reference;
      csv << fmt(*r.distance_to_reference);
    }
    csv << '\n';
    rungs.push_back(row);
  }
  o.doc["rungs"] = rungs;
  o.csv = csv.str();
  return o;
}

StieltjesString random_string(std::mt19937_64& rng, std::size_t max_masses) {
  std::uniform_int_distribution<std::size_t> count(1, max_masses);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  const std::size_t n = count(rng);
  std::vector<Rational> lengths, masses;
  Rational total = 0;
  for (std::size_t j = 0; j <= n; ++j) {
    lengths.emplace_back(std::pow(10.0, logu(rng)));
    total += lengths.back();
  }
  for (std::size_t j = 0; j < n; ++j) masses.emplace_back(std::pow(10.0, logu(rng)));
  return StieltjesString(Interval(0, total), lengths, masses);
}

Outcome cmd_roundtrip(const Flags& f, unsigned bits) {
  std::vector<StieltjesString> strings;
  if (!f.string_path.empty()) {
    strings.push_back(load_string(f));
  } else if (f.seeded) {
    std::mt19937_64 rng(f.seed);
    for (std::size_t i = 0; i < f.count; ++i) strings.push_back(random_string(rng, f.max_masses));
  } else {
    throw InputError("--string", "required (or --seed)");
  }
  Outcome o;
  o.doc = base("roundtrip", bits);
  if (f.seeded) o.doc["seed"] = f.seed;
  o.doc["tol"] = f.tol;
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "index,masses,forward_bits,length_residual,mass_residual,eigen_residual,weight_residual,ok\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < strings.size(); ++i) {
    const auto r = roundtrip_string(strings[i], f.tol, inverse_options(bits));
    worst = std::max({worst, r.length_residual, r.mass_residual});
    rows.push_back(Json{{"masses", strings[i].size()},
                        {"forward_bits", r.forward_bits},
                        {"length_residual", r.length_residual},
                        {"mass_residual", r.mass_residual},
                        {"eigen_residual", r.inversion.eigen_residual},
                        {"weight_residual", r.inversion.weight_residual},
                        {"ok", r.ok}});
    csv << i + 1 << ',' << strings[i].size() << ',' << r.forward_bits << ',' << fmt(r.length_residual) << ','
        << fmt(r.mass_residual) << ',' << fmt(r.inversion.eigen_residual) << ','
        << fmt(r.inversion.weight_residual) << ',' << (r.ok ? 1 : 0) << '\n';
    if (!r.ok) o.code = kExitNumerical;
  }
  o.doc["max_residual"] = worst;
  o.doc["results"] = rows;
  o.csv = csv.str();
  return o;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--string", f.string_path, "string or mass distribution JSON");
  sub->add_option("--measure", f.measure_path, "spectral measure JSON");
  sub->add_option("--triple", f.triple_path, "three-spectra triple JSON");
  sub->add_option("--interval", f.interval, "interval A B (overrides the input)")->expected(2);
  sub->add_option("--split", f.split, "split point c");
  sub->add_option("--max-lambda", f.max_lambda, "spectral cutoff")->check(CLI::PositiveNumber);
  sub->add_option("--cutoffs", f.cutoffs, "comma-separated cutoffs");
  sub->add_option("--tol", f.tol, "relative tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--precision-bits", f.precision_bits, "working precision in bits")->check(CLI::PositiveNumber);
  sub->add_option("--output", f.output, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", f.out_path, "write the result here instead of stdout");
  sub->add_option("--seed", f.seed, "seed for generated inputs");
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Krein strings: forward solves, inverse problems and diagnostics", "krein"};
  app.require_subcommand(1);
  Flags f;
  struct Entry {
    const char* name;
    const char* help;
    Outcome (*run)(const Flags&, unsigned);
  };
  const Entry entries[] = {
      {"forward", "spectral data of a string or mass distribution", cmd_forward},
      {"spectrum", "eigenvalues below --max-lambda", cmd_spectrum},
      {"inverse-measure", "string from a spectral measure", cmd_inverse_measure},
      {"inverse-three", "string from three spectra and couplings", cmd_inverse_three},
      {"validate-triple", "membership of a triple in the class T", cmd_validate_triple},
      {"ladder", "truncation ladder of a measure or triple", cmd_ladder},
      {"roundtrip", "string -> spectral data -> string", cmd_roundtrip},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, f);
    subs.push_back(sub);
  }
  subs[3]->add_option("--sweep-lambda", f.sweep_lambda, "common eigenvalue whose coupling is swept");
  subs[3]->add_option("--sweep-values", f.sweep_values, "comma-separated coupling values");
  subs[6]->add_option("--count", f.count, "number of generated strings")->check(CLI::PositiveNumber);
  subs[6]->add_option("--max-masses", f.max_masses, "largest generated mass count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  f.seeded = subs[which]->count("--seed") > 0;
  const unsigned bits = f.precision_bits ? round_precision(f.precision_bits) : default_precision_bits();

  Outcome o;
  try {
    o = entries[which].run(f, bits);
  } catch (const InputError& e) {
    err << "input error at " << e.pointer() << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "rejected: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kExitNumerical;
  }

  const std::string text = f.output == "csv" ? o.csv : o.doc.dump(2) + "\n";
  if (f.out_path.empty()) {
    out << text;
  } else {
    write_file_atomic(f.out_path, text);
  }
  return o.code;
}

}  // namespace krein
