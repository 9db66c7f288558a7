#pragma once
// Exact rational scalars and the error hierarchy shared by all rotflow modules.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rotflow {

using Rational = mpq_class;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class JetOrderOverflow : public Error {
 public:
  using Error::Error;
};

class UnboundSymbol : public Error {
 public:
  using Error::Error;
};

class DegreeError : public Error {
 public:
  using Error::Error;
};

/// Bad user input (malformed files, out-of-range options).
class InputError : public Error {
 public:
  using Error::Error;
};

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Parses "3/2", "-4", "0.125", "1e-3", "2.5E+2" exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw InputError("empty rational literal");

  if (s.find('/') != std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0 || q.get_den() == 0) throw InputError("malformed rational '" + s + "'");
    q.canonicalize();
    return q;
  }

  std::string mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    mantissa = s.substr(0, e);
    try {
      std::size_t used = 0;
      exponent = std::stol(s.substr(e + 1), &used);
      if (used != s.size() - e - 1) throw InputError("malformed exponent in '" + s + "'");
    } catch (const std::logic_error&) {
      throw InputError("malformed exponent in '" + s + "'");
    }
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa = mantissa.substr(1);
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  for (char c : mantissa) {
    if (c == '.') {
      if (seen_point) throw InputError("malformed decimal '" + s + "'");
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else {
      throw InputError("malformed decimal '" + s + "'");
    }
  }
  if (digits.empty()) throw InputError("malformed decimal '" + s + "'");
  mpz_class num(digits, 10);
  long shift = exponent - frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational q = shift >= 0 ? Rational(num * scale) : Rational(num, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

/// Snaps a double onto the grid k * granularity (default 1e-15) and returns it exactly.
/// Magnitudes too large for a 64-bit grid index keep their exact binary value.
inline Rational rational_from_double(double x, double granularity = 1e-15) {
  if (!std::isfinite(x)) throw InputError("non-finite value cannot be made rational");
  const long double scaled = std::nearbyintl(static_cast<long double>(x) / static_cast<long double>(granularity));
  if (std::fabs(scaled) > 9.0e18L) {
    Rational exact(x);
    exact.canonicalize();
    return exact;
  }
  const long decimals = std::lround(-std::log10(granularity));
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(decimals));
  Rational q(mpz_class(std::to_string(static_cast<long long>(scaled))), den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace rotflow
