#include "krein/io.hpp"

#include "krein/inverse_spectral.hpp"
#include "krein/singular_forward.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace krein {

namespace {

const Json& field(const Json& j, const std::string& key, const std::string& pointer) {
  if (!j.is_object()) throw InputError(pointer.empty() ? "/" : pointer, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(pointer + "/" + key, "missing field");
  return *it;
}

std::vector<Rational> rational_list(const Json& j, const std::string& pointer) {
  if (!j.is_array()) throw InputError(pointer, "expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rational_from_json(j[i], pointer + "/" + std::to_string(i)));
  return out;
}

Json rational_array(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(rational_to_json(q));
  return a;
}

Interval interval_from_json(const Json& j) {
  const auto& iv = field(j, "interval", "");
  if (!iv.is_array() || iv.size() != 2) throw InputError("/interval", "expected [a, b]");
  const Rational a = rational_from_json(iv[0], "/interval/0");
  const Rational b = rational_from_json(iv[1], "/interval/1");
  if (!(a < b)) throw InputError("/interval", "requires a < b");
  return Interval(a, b);
}

Json interval_to_json(const Interval& iv) { return Json::array({rational_to_json(iv.a), rational_to_json(iv.b)}); }

double number(const Json& j, const std::string& pointer) { return to_double(rational_from_json(j, pointer)); }

/// Constructor failures are reported against the document root.
template <class Fn>
auto at_root(Fn&& fn) {
  try {
    return fn();
  } catch (const InputError&) {
    throw;
  } catch (const ValidationError& e) {
    throw InputError("/", e.what());
  }
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("/", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("/", std::string("malformed JSON in ") + path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Rational rational_from_json(const Json& j, const std::string& pointer) {
  try {
    if (j.is_number_integer()) return j.is_number_unsigned() ? Rational(j.get<std::uint64_t>()) : Rational(j.get<std::int64_t>());
    if (j.is_number_float()) {
      const double d = j.get<double>();
      if (!std::isfinite(d)) throw InputError(pointer, "not finite");
      return Rational(d);
    }
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw InputError(pointer, e.what());
  }
  throw InputError(pointer, "expected a number");
}

Json rational_to_json(const Rational& q) {
  if (is_exact_double(q)) return to_double(q);
  return to_exact_string(q);
}

StieltjesString string_from_json(const Json& j) {
  const Interval iv = interval_from_json(j);
  const auto masses = rational_list(field(j, "masses", ""), "/masses");
  if (j.contains("lengths")) {
    const auto lengths = rational_list(j["lengths"], "/lengths");
    if (lengths.size() != masses.size() + 1) throw InputError("/lengths", "needs one more entry than /masses");
    return at_root([&] { return StieltjesString(iv, lengths, masses); });
  }
  const auto positions = rational_list(field(j, "positions", ""), "/positions");
  if (positions.size() != masses.size()) throw InputError("/positions", "needs as many entries as /masses");
  std::vector<PointMass> pm;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!iv.contains_open(positions[i])) throw InputError("/positions/" + std::to_string(i), "outside the open interval");
    if (masses[i] <= 0) throw InputError("/masses/" + std::to_string(i), "mass must be positive");
    pm.push_back({positions[i], masses[i]});
  }
  return at_root([&] { return StieltjesString::from_masses(iv, pm); });
}

Json string_to_json(const StieltjesString& s) {
  return Json{{"interval", interval_to_json(s.interval())},
              {"lengths", rational_array(s.lengths())},
              {"masses", rational_array(s.masses())}};
}

MassDistribution mass_from_json(const Json& j) {
  const Interval iv = interval_from_json(j);
  std::vector<PointMass> pm;
  if (j.contains("masses")) pm = string_from_json(j).point_masses();
  if (!j.contains("density")) return at_root([&] { return MassDistribution(iv, pm); });
  const auto& d = j["density"];
  std::optional<Density> density;
  try {
    if (d.contains("fixture")) {
      if (!d["fixture"].is_string()) throw InputError("/density/fixture", "expected a string");
      density = density_fixture(d["fixture"].get<std::string>(), iv).density();
    } else {
      const auto& kind = field(d, "kind", "/density");
      if (kind == "uniform") {
        density = Density::uniform(number(field(d, "value", "/density"), "/density/value"));
      } else if (kind == "power") {
        const double aa = d.contains("alpha_a") ? number(d["alpha_a"], "/density/alpha_a") : 0.0;
        const double ab = d.contains("alpha_b") ? number(d["alpha_b"], "/density/alpha_b") : 0.0;
        const double coef = d.contains("coef") ? number(d["coef"], "/density/coef") : 1.0;
        density = Density::power(aa, ab, coef);
      } else {
        throw InputError("/density/kind", "expected \"uniform\" or \"power\"");
      }
    }
  } catch (const InputError&) {
    throw;
  } catch (const ValidationError& e) {
    throw InputError("/density", e.what());
  }
  return at_root([&] { return MassDistribution(iv, pm, density); });
}

SpectralMeasure measure_from_json(const Json& j) {
  const Interval iv = interval_from_json(j);
  if (j.contains("builtin")) {
    const auto& name = j["builtin"];
    if (name == "uniform-string") return uniform_string_measure(iv);
    if (name == "constant-weight") {
      const Rational w = rational_from_json(field(j, "weight", ""), "/weight");
      if (w <= 0) throw InputError("/weight", "must be positive");
      return constant_weight_measure(iv, w);
    }
    throw InputError("/builtin", "expected \"uniform-string\" or \"constant-weight\"");
  }
  const auto& atoms = field(j, "atoms", "");
  if (!atoms.is_array()) throw InputError("/atoms", "expected an array");
  std::vector<Atom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string p = "/atoms/" + std::to_string(i);
    if (!atoms[i].is_array() || atoms[i].size() != 2) throw InputError(p, "expected [lambda, weight]");
    const Rational lam = rational_from_json(atoms[i][0], p + "/0");
    const Rational w = rational_from_json(atoms[i][1], p + "/1");
    if (lam <= 0) throw InputError(p + "/0", "eigenvalue must be positive");
    if (w <= 0) throw InputError(p + "/1", "weight must be positive");
    out.push_back({lam, w});
  }
  return at_root([&] { return SpectralMeasure(iv, out); });
}

Json measure_to_json(const SpectralMeasure& rho) {
  Json atoms = Json::array();
  for (const auto& a : rho.atoms()) atoms.push_back(Json::array({rational_to_json(a.lambda), rational_to_json(a.weight)}));
  return Json{{"interval", interval_to_json(rho.interval())}, {"atoms", atoms}};
}

ThreeSpectraTriple triple_from_json(const Json& j) {
  ThreeSpectraTriple t;
  t.interval = interval_from_json(j);
  t.split = rational_from_json(field(j, "split", ""), "/split");
  t.sigma = rational_list(field(j, "sigma", ""), "/sigma");
  t.sigma_a = j.contains("sigma_a") ? rational_list(j["sigma_a"], "/sigma_a") : std::vector<Rational>{};
  t.sigma_b = j.contains("sigma_b") ? rational_list(j["sigma_b"], "/sigma_b") : std::vector<Rational>{};
  if (j.contains("couplings")) {
    const auto& c = j["couplings"];
    if (!c.is_object()) throw InputError("/couplings", "expected an object keyed by eigenvalue");
    for (const auto& [key, value] : c.items()) {
      const std::string p = "/couplings/" + key;
      Rational lam;
      try {
        lam = parse_rational(key);
      } catch (const std::invalid_argument& e) {
        throw InputError(p, e.what());
      }
      t.couplings[lam] = rational_from_json(value, p);
    }
  }
  return t;
}

Json triple_to_json(const ThreeSpectraTriple& t) {
  Json c = Json::object();
  for (const auto& [lam, v] : t.couplings) c[to_exact_string(lam)] = rational_to_json(v);
  return Json{{"interval", interval_to_json(t.interval)},
              {"split", rational_to_json(t.split)},
              {"sigma", rational_array(t.sigma)},
              {"sigma_a", rational_array(t.sigma_a)},
              {"sigma_b", rational_array(t.sigma_b)},
              {"couplings", c}};
}

}  // namespace krein
