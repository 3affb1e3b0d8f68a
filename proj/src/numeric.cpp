#include "krein/numeric.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace krein {

unsigned round_precision(unsigned bits) {
  if (bits <= 53) return 53;
  for (unsigned p : kPrecisionLadder) {
    if (bits <= p) return p;
  }
  throw std::invalid_argument("precision above " + std::to_string(kMaxPrecisionBits) +
                              " bits is not supported");
}

unsigned default_precision_bits() {
  if (const char* env = std::getenv("KREIN_PRECISION_BITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return round_precision(static_cast<unsigned>(v));
  }
  return kDefaultPrecisionBits;
}

bool is_exact_double(const Rational& q) {
  const double d = q.convert_to<double>();
  if (!std::isfinite(d)) return false;
  return Rational(d) == q;
}

namespace {

bool is_dyadic(const Rational& q) {
  const mpz_srcptr den = mpq_denref(q.backend().data());
  return mpz_scan1(den, 0) + 1 == mpz_sizeinbase(den, 2);
}

std::string shortest_double(double d) {
  for (int prec = 15; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << d;
    if (std::strtod(os.str().c_str(), nullptr) == d) return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace

std::string to_exact_string(const Rational& q) {
  if (is_exact_double(q)) return shortest_double(q.convert_to<double>());
  if (is_dyadic(q)) {
    // n / 2^e == n * 5^e / 10^e
    const Integer num = numerator(q);
    const Integer den = denominator(q);
    const unsigned long e = mpz_sizeinbase(den.backend().data(), 2) - 1;
    Integer five_e;
    mpz_ui_pow_ui(five_e.backend().data(), 5, e);
    Integer scaled = num * five_e;
    const bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string digits = scaled.str();
    if (digits.size() <= e) digits.insert(0, e - digits.size() + 1, '0');
    digits.insert(digits.size() - e, ".");
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    if (!digits.empty() && digits.back() == '.') digits.pop_back();
    return (neg ? "-" : "") + digits;
  }
  return numerator(q).str() + "/" + denominator(q).str();
}

Rational parse_rational(const std::string& text) {
  const auto fail = [&]() -> Rational {
    throw std::invalid_argument("not a number: \"" + text + "\"");
  };
  if (text.empty()) return fail();
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    try {
      const Integer p(text.substr(0, slash));
      const Integer q(text.substr(slash + 1));
      if (q == 0) return fail();
      return Rational(p, q);
    } catch (const std::runtime_error&) {
      return fail();
    }
  }
  // [sign] digits [. digits] [e|E [sign] digits]
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
  std::string mant;
  long scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    mant += text[i++];
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      mant += text[i++];
      --scale;
      any = true;
    }
  }
  if (!any) return fail();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    char* end = nullptr;
    const long e = std::strtol(text.c_str() + i, &end, 10);
    if (end == text.c_str() + i) return fail();
    i = static_cast<std::size_t>(end - text.c_str());
    scale += e;
  }
  if (i != text.size()) return fail();
  Rational r{Integer(mant)};
  Integer ten_pow;
  mpz_ui_pow_ui(ten_pow.backend().data(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  r = scale < 0 ? Rational(r / Rational(ten_pow)) : Rational(r * Rational(ten_pow));
  return neg ? Rational(-r) : r;
}

}  // namespace krein
