#pragma once

// JSON input/output for strings, mass distributions, measures and triples.
// Numbers may be JSON numbers (taken exactly) or strings such as "2/9".
// Rationals are written with to_exact_string.

#include "krein/core_model.hpp"

#include <json.hpp>

#include <string>

namespace krein {

using Json = nlohmann::json;

/// Rejected input; `pointer` is the JSON pointer of the offending field.
class InputError : public ValidationError {
 public:
  InputError(const std::string& pointer, const std::string& what)
      : ValidationError(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

Json read_json_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

Rational rational_from_json(const Json& j, const std::string& pointer);
Json rational_to_json(const Rational& q);

/// {"interval":[a,b], "lengths":[...], "masses":[...]} or
/// {"interval":[a,b], "positions":[...], "masses":[...]}.
StieltjesString string_from_json(const Json& j);
Json string_to_json(const StieltjesString& s);

/// A string document plus an optional "density": {"kind":"uniform","value":v},
/// {"kind":"power","alpha_a":..,"alpha_b":..,"coef":..} or {"fixture":"power:alpha=1.5"}.
MassDistribution mass_from_json(const Json& j);

/// {"interval":[a,b], "atoms":[[lambda, weight], ...]} or
/// {"interval":[a,b], "builtin":"uniform-string"} or
/// {"interval":[a,b], "builtin":"constant-weight", "weight":w}.
SpectralMeasure measure_from_json(const Json& j);
Json measure_to_json(const SpectralMeasure& rho);

/// {"interval":[a,b],"split":c,"sigma":[...],"sigma_a":[...],"sigma_b":[...],"couplings":{"<lambda>":c}}.
ThreeSpectraTriple triple_from_json(const Json& j);
Json triple_to_json(const ThreeSpectraTriple& t);

}  // namespace krein
