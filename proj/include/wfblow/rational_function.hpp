#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "wfblow/polynomial.hpp"

namespace wfblow {

// Denominator magnitude below this is treated as a pole at evaluation time.
inline constexpr double kDenominatorEpsilon = 1e-10;

struct AlgebraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation hit a (near-)zero denominator. `where` describes the offending
// point or stratum for diagnostics.
struct PoleError : std::runtime_error {
  explicit PoleError(const std::string& where)
      : std::runtime_error("denominator vanishes at " + where) {}
};

// Quotient of exact polynomials. Reduced by content only: the denominator is
// normalised to unit content with a positive leading coefficient. Zero
// certification works through cross-multiplied numerators, so no polynomial
// gcd is ever required.
class RationalFunction {
 public:
  RationalFunction() : num_(), den_(Polynomial::constant(1)) {}
  explicit RationalFunction(Polynomial numerator)
      : RationalFunction(std::move(numerator), Polynomial::constant(1)) {}
  RationalFunction(Polynomial numerator, Polynomial denominator);

  static RationalFunction constant(const Rational& c) {
    return RationalFunction(Polynomial::constant(c));
  }
  static RationalFunction constant(long c) { return constant(Rational(c)); }
  static RationalFunction variable(int index) {
    return RationalFunction(Polynomial::variable(index));
  }

  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  std::set<int> variables() const;

  RationalFunction operator-() const;
  RationalFunction operator+(const RationalFunction& rhs) const;
  RationalFunction operator-(const RationalFunction& rhs) const;
  RationalFunction operator*(const RationalFunction& rhs) const;
  RationalFunction operator/(const RationalFunction& rhs) const;

  RationalFunction scaled(const Rational& c) const;

  // Exact quotient-rule derivative.
  RationalFunction differentiate(int index) const;

  // Simultaneous composition; unbound variables pass through. Throws
  // AlgebraError if the composed denominator is identically zero.
  RationalFunction substitute(
      const std::map<int, RationalFunction>& bindings) const;

  double evaluate(const std::map<int, double>& point) const;
  Rational evaluate_exact(const std::map<int, Rational>& point) const;

  // Exact equality as functions (cross-multiplied).
  bool equals(const RationalFunction& rhs) const;

  std::string to_string() const;

 private:
  Polynomial num_;
  Polynomial den_;
};

inline bool is_identically_zero(const RationalFunction& f) {
  return f.is_zero();
}

RationalFunction operator*(const Rational& c, const RationalFunction& f);

// Textual algebra form, e.g. "(-1/2)*p1^2*p2 + p3" or "p1/(p1+p2)".
// Grammar: + - * / ^ with parentheses, rational literals and variables pN.
RationalFunction parse_expression(const std::string& text);

}  // namespace wfblow
