#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wfblow/rational.hpp"

namespace wfblow {

// Coordinate indices are small non-negative integers (p^0 ... p^n). The
// dense exponent vector keeps monomial arithmetic branch-free.
inline constexpr int kMaxVariables = 16;

class Monomial {
 public:
  Monomial() { exps_.fill(0); }

  static Monomial variable(int index, int exponent = 1);

  int exponent(int index) const { return exps_.at(checked(index)); }
  int degree() const;
  bool is_constant() const;

  Monomial times(const Monomial& other) const;
  // Exact division; throws if any exponent would go negative.
  Monomial divided_by(const Monomial& other) const;

  // Decrements the exponent of `index`; second member is the old exponent
  // (0 means the derivative term vanishes).
  std::pair<Monomial, int> differentiate(int index) const;

  auto operator<=>(const Monomial&) const = default;

  template <typename Fn>
  void for_each_variable(Fn&& fn) const {
    for (int v = 0; v < kMaxVariables; ++v)
      if (exps_[v] > 0) fn(v, static_cast<int>(exps_[v]));
  }

 private:
  static int checked(int index);
  std::array<std::uint8_t, kMaxVariables> exps_;
};

// Exact multivariate polynomial with rational coefficients. Terms are kept
// sorted by monomial with no zero coefficients, so structural equality is
// mathematical equality.
class Polynomial {
 public:
  using Term = std::pair<Monomial, Rational>;

  Polynomial() = default;
  static Polynomial constant(const Rational& c);
  static Polynomial constant(long c) { return constant(Rational(c)); }
  static Polynomial variable(int index);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // Constant term (the whole value if is_constant()).
  Rational constant_value() const;
  int degree() const;
  int degree_in(int index) const;
  std::set<int> variables() const;
  std::size_t term_count() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }

  Polynomial operator-() const;
  Polynomial operator+(const Polynomial& rhs) const;
  Polynomial operator-(const Polynomial& rhs) const;
  Polynomial operator*(const Polynomial& rhs) const;
  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);

  Polynomial scaled(const Rational& c) const;
  Polynomial pow(int exponent) const;

  Polynomial differentiate(int index) const;
  // Simultaneous replacement; unbound variables pass through.
  Polynomial substitute(const std::map<int, Polynomial>& bindings) const;

  double evaluate(const std::map<int, double>& point) const;
  Rational evaluate_exact(const std::map<int, Rational>& point) const;

  // gcd of coefficient numerators over lcm of denominators, with the sign
  // of the leading (canonically first) term. Zero polynomial -> 0.
  Rational content() const;
  Polynomial divided_by_scalar(const Rational& c) const;

  bool operator==(const Polynomial& rhs) const = default;

  std::string to_string() const;

  // Terms must be sorted, nonzero, unique; used by internal builders.
  static Polynomial from_sorted_terms(std::vector<Term> terms);

 private:
  std::vector<Term> terms_;
};

Polynomial operator*(const Rational& c, const Polynomial& p);

// Collects an unsorted (monomial, coefficient) list into a canonical
// polynomial, summing duplicates and dropping zeros.
Polynomial collect_terms(std::vector<Polynomial::Term>&& raw);

}  // namespace wfblow
