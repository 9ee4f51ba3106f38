#include "wfblow/rational_function.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace wfblow {

RationalFunction::RationalFunction(Polynomial numerator, Polynomial denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.is_zero())
    throw AlgebraError("rational function with zero denominator");
  if (num_.is_zero()) {
    den_ = Polynomial::constant(1);
    return;
  }
  Rational c = den_.content();
  if (c != 1) {
    num_ = num_.divided_by_scalar(c);
    den_ = den_.divided_by_scalar(c);
  }
}

std::set<int> RationalFunction::variables() const {
  std::set<int> vars = num_.variables();
  for (int v : den_.variables()) vars.insert(v);
  return vars;
}

RationalFunction RationalFunction::operator-() const {
  return RationalFunction(-num_, den_);
}

RationalFunction RationalFunction::operator+(const RationalFunction& rhs) const {
  if (den_ == rhs.den_)
    return RationalFunction(num_ + rhs.num_, den_);
  return RationalFunction(num_ * rhs.den_ + rhs.num_ * den_, den_ * rhs.den_);
}

RationalFunction RationalFunction::operator-(const RationalFunction& rhs) const {
  if (den_ == rhs.den_)
    return RationalFunction(num_ - rhs.num_, den_);
  return RationalFunction(num_ * rhs.den_ - rhs.num_ * den_, den_ * rhs.den_);
}

RationalFunction RationalFunction::operator*(const RationalFunction& rhs) const {
  return RationalFunction(num_ * rhs.num_, den_ * rhs.den_);
}

RationalFunction RationalFunction::operator/(const RationalFunction& rhs) const {
  if (rhs.is_zero()) throw AlgebraError("division by zero rational function");
  return RationalFunction(num_ * rhs.den_, den_ * rhs.num_);
}

RationalFunction RationalFunction::scaled(const Rational& c) const {
  return RationalFunction(num_.scaled(c), den_);
}

RationalFunction operator*(const Rational& c, const RationalFunction& f) {
  return f.scaled(c);
}

RationalFunction RationalFunction::differentiate(int index) const {
  if (is_polynomial())
    return RationalFunction(num_.differentiate(index),
                            Polynomial::constant(den_.content()));
  Polynomial dn = num_.differentiate(index);
  Polynomial dd = den_.differentiate(index);
  return RationalFunction(dn * den_ - num_ * dd, den_ * den_);
}

RationalFunction RationalFunction::substitute(
    const std::map<int, RationalFunction>& bindings) const {
  std::set<int> vars = variables();
  // Per-variable degree bound shared by numerator and denominator, so both
  // compose over the same denominator scale (which then cancels).
  std::map<int, int> max_deg;
  for (int v : vars)
    if (bindings.count(v))
      max_deg[v] = std::max(num_.degree_in(v), den_.degree_in(v));

  std::map<int, std::vector<Polynomial>> num_pow, den_pow;
  for (const auto& [v, d] : max_deg) {
    const auto& b = bindings.at(v);
    num_pow[v].push_back(Polynomial::constant(1));
    den_pow[v].push_back(Polynomial::constant(1));
    for (int e = 1; e <= d; ++e) {
      num_pow[v].push_back(num_pow[v].back() * b.numerator());
      den_pow[v].push_back(den_pow[v].back() * b.denominator());
    }
  }

  auto compose = [&](const Polynomial& p) {
    Polynomial result;
    for (const auto& [m, c] : p.terms()) {
      Polynomial term = Polynomial::constant(c);
      m.for_each_variable([&](int v, int e) {
        auto it = max_deg.find(v);
        if (it == max_deg.end()) {
          term = term * Polynomial::variable(v).pow(e);
        } else {
          term = term * num_pow[v][e] * den_pow[v][it->second - e];
        }
      });
      result += term;
    }
    return result;
  };

  Polynomial new_num = compose(num_);
  Polynomial new_den = compose(den_);
  if (new_den.is_zero())
    throw AlgebraError("substitution produced an identically zero denominator");
  return RationalFunction(std::move(new_num), std::move(new_den));
}

double RationalFunction::evaluate(const std::map<int, double>& point) const {
  double den_value = den_.evaluate(point);
  if (std::abs(den_value) < kDenominatorEpsilon) {
    std::ostringstream where;
    where << "(";
    bool first = true;
    for (const auto& [v, x] : point) {
      if (!first) where << ", ";
      where << "p" << v << "=" << x;
      first = false;
    }
    where << ")";
    throw PoleError(where.str());
  }
  return num_.evaluate(point) / den_value;
}

Rational RationalFunction::evaluate_exact(
    const std::map<int, Rational>& point) const {
  Rational den_value = den_.evaluate_exact(point);
  if (den_value == 0) throw PoleError("exact evaluation point");
  return num_.evaluate_exact(point) / den_value;
}

bool RationalFunction::equals(const RationalFunction& rhs) const {
  return (num_ * rhs.den_ - rhs.num_ * den_).is_zero();
}

std::string RationalFunction::to_string() const {
  if (is_polynomial()) {
    Rational c = den_.constant_value();
    if (c == 1) return num_.to_string();
    return "(" + num_.to_string() + ")/" + wfblow::to_string(c);
  }
  return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
}

namespace {

// Recursive-descent parser for the textual algebra form.
class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& text) : text_(text) {}

  RationalFunction parse() {
    RationalFunction value = parse_sum();
    skip_space();
    if (pos_ != text_.size())
      throw AlgebraError("trailing input in expression at position " +
                         std::to_string(pos_));
    return value;
  }

 private:
  RationalFunction parse_sum() {
    RationalFunction value = parse_product();
    for (;;) {
      skip_space();
      if (consume('+')) {
        value = value + parse_product();
      } else if (consume('-')) {
        value = value - parse_product();
      } else {
        return value;
      }
    }
  }

  RationalFunction parse_product() {
    RationalFunction value = parse_power();
    for (;;) {
      skip_space();
      if (consume('*')) {
        value = value * parse_power();
      } else if (consume('/')) {
        value = value / parse_power();
      } else {
        return value;
      }
    }
  }

  RationalFunction parse_power() {
    RationalFunction base = parse_atom();
    skip_space();
    if (!consume('^')) return base;
    skip_space();
    bool negative = consume('-');
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(text_[pos_])) ++pos_;
    if (start == pos_) throw AlgebraError("expected integer exponent");
    int e = std::stoi(text_.substr(start, pos_ - start));
    RationalFunction value = RationalFunction::constant(1);
    for (int i = 0; i < e; ++i) value = value * base;
    if (negative) value = RationalFunction::constant(1) / value;
    return value;
  }

  RationalFunction parse_atom() {
    skip_space();
    if (consume('(')) {
      RationalFunction value = parse_sum();
      skip_space();
      if (!consume(')')) throw AlgebraError("missing closing parenthesis");
      return value;
    }
    if (consume('-')) return -parse_power();
    if (consume('+')) return parse_power();
    if (pos_ < text_.size() && (text_[pos_] == 'p' || text_[pos_] == 'P')) {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(text_[pos_])) ++pos_;
      if (start == pos_) throw AlgebraError("expected variable index after p");
      return RationalFunction::variable(
          std::stoi(text_.substr(start, pos_ - start)));
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(text_[pos_])) ++pos_;
    if (start == pos_)
      throw AlgebraError("unexpected character in expression at position " +
                         std::to_string(pos_));
    return RationalFunction::constant(
        parse_rational(text_.substr(start, pos_ - start)));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(text_[pos_])) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

RationalFunction parse_expression(const std::string& text) {
  return ExpressionParser(text).parse();
}

}  // namespace wfblow
