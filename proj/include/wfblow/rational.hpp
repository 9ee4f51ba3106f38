#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace wfblow {

// Exact rational scalar. All polynomial coefficients and time factors use
// this type so that identity checks certify to exact zero.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Parses "a", "-a", or "a/b". Throws on malformed input.
inline Rational parse_rational(const std::string& text) {
  try {
    Rational q(text);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw std::domain_error("malformed rational literal: " + text);
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace wfblow
