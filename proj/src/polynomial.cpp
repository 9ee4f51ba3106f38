#include "wfblow/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wfblow {

int Monomial::checked(int index) {
  if (index < 0 || index >= kMaxVariables)
    throw std::domain_error("coordinate index out of range: " +
                            std::to_string(index));
  return index;
}

Monomial Monomial::variable(int index, int exponent) {
  if (exponent < 0) throw std::domain_error("negative exponent");
  Monomial m;
  m.exps_[checked(index)] = static_cast<std::uint8_t>(exponent);
  return m;
}

int Monomial::degree() const {
  int d = 0;
  for (auto e : exps_) d += e;
  return d;
}

bool Monomial::is_constant() const { return degree() == 0; }

Monomial Monomial::times(const Monomial& other) const {
  Monomial out;
  for (int v = 0; v < kMaxVariables; ++v) {
    int e = exps_[v] + other.exps_[v];
    if (e > 255) throw std::overflow_error("monomial exponent overflow");
    out.exps_[v] = static_cast<std::uint8_t>(e);
  }
  return out;
}

Monomial Monomial::divided_by(const Monomial& other) const {
  Monomial out;
  for (int v = 0; v < kMaxVariables; ++v) {
    int e = exps_[v] - other.exps_[v];
    if (e < 0) throw std::domain_error("monomial division is not exact");
    out.exps_[v] = static_cast<std::uint8_t>(e);
  }
  return out;
}

std::pair<Monomial, int> Monomial::differentiate(int index) const {
  int e = exps_[checked(index)];
  Monomial out = *this;
  if (e > 0) out.exps_[index] = static_cast<std::uint8_t>(e - 1);
  return {out, e};
}

Polynomial Polynomial::constant(const Rational& c) {
  Polynomial p;
  if (c != 0) p.terms_.push_back({Monomial(), c});
  return p;
}

Polynomial Polynomial::variable(int index) {
  Polynomial p;
  p.terms_.push_back({Monomial::variable(index), Rational(1)});
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_constant());
}

Rational Polynomial::constant_value() const {
  for (const auto& [m, c] : terms_)
    if (m.is_constant()) return c;
  return Rational(0);
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

int Polynomial::degree_in(int index) const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.exponent(index));
  return d;
}

std::set<int> Polynomial::variables() const {
  std::set<int> vars;
  for (const auto& [m, c] : terms_)
    m.for_each_variable([&](int v, int) { vars.insert(v); });
  return vars;
}

Polynomial Polynomial::from_sorted_terms(std::vector<Term> terms) {
  Polynomial p;
  p.terms_ = std::move(terms);
  return p;
}

Polynomial collect_terms(std::vector<Polynomial::Term>&& raw) {
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Polynomial::Term> out;
  out.reserve(raw.size());
  for (auto& term : raw) {
    if (!out.empty() && out.back().first == term.first) {
      out.back().second += term.second;
      if (out.back().second == 0) out.pop_back();
    } else if (term.second != 0) {
      out.push_back(std::move(term));
    }
  }
  return Polynomial::from_sorted_terms(std::move(out));
}

Polynomial Polynomial::operator-() const {
  Polynomial out;
  out.terms_.reserve(terms_.size());
  for (const auto& [m, c] : terms_) out.terms_.push_back({m, -c});
  return out;
}

namespace {

// Merge of two sorted term lists; `sign` applies to rhs.
std::vector<Polynomial::Term> merge_terms(const std::vector<Polynomial::Term>& a,
                                          const std::vector<Polynomial::Term>& b,
                                          int sign) {
  std::vector<Polynomial::Term> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      out.push_back(a[i++]);
    } else if (b[j].first < a[i].first) {
      out.push_back({b[j].first, sign > 0 ? b[j].second : -b[j].second});
      ++j;
    } else {
      Rational c;
      if (sign > 0)
        c = a[i].second + b[j].second;
      else
        c = a[i].second - b[j].second;
      if (c != 0) out.push_back({a[i].first, std::move(c)});
      ++i;
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j)
    out.push_back({b[j].first, sign > 0 ? b[j].second : -b[j].second});
  return out;
}

}  // namespace

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
  return from_sorted_terms(merge_terms(terms_, rhs.terms_, +1));
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
  return from_sorted_terms(merge_terms(terms_, rhs.terms_, -1));
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  terms_ = merge_terms(terms_, rhs.terms_, +1);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  terms_ = merge_terms(terms_, rhs.terms_, -1);
  return *this;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
  if (terms_.empty() || rhs.terms_.empty()) return {};
  std::vector<Term> raw;
  raw.reserve(terms_.size() * rhs.terms_.size());
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : rhs.terms_)
      raw.push_back({ma.times(mb), ca * cb});
  return collect_terms(std::move(raw));
}

Polynomial Polynomial::scaled(const Rational& c) const {
  if (c == 0) return {};
  Polynomial out;
  out.terms_.reserve(terms_.size());
  for (const auto& [m, coeff] : terms_) out.terms_.push_back({m, coeff * c});
  return out;
}

Polynomial operator*(const Rational& c, const Polynomial& p) {
  return p.scaled(c);
}

Polynomial Polynomial::pow(int exponent) const {
  if (exponent < 0) throw std::domain_error("negative polynomial power");
  Polynomial out = constant(1);
  for (int i = 0; i < exponent; ++i) out = out * *this;
  return out;
}

Polynomial Polynomial::differentiate(int index) const {
  std::vector<Term> raw;
  raw.reserve(terms_.size());
  for (const auto& [m, c] : terms_) {
    auto [dm, e] = m.differentiate(index);
    if (e > 0) raw.push_back({dm, c * e});
  }
  // Differentiation preserves the term order, so no re-sort is needed.
  return from_sorted_terms(std::move(raw));
}

Polynomial Polynomial::substitute(const std::map<int, Polynomial>& bindings) const {
  // Cached powers keep repeated exponents cheap.
  std::map<int, std::vector<Polynomial>> powers;
  auto power_of = [&](int v, int e) -> const Polynomial& {
    auto& cache = powers[v];
    if (cache.empty()) cache.push_back(Polynomial::constant(1));
    while (static_cast<int>(cache.size()) <= e)
      cache.push_back(cache.back() * bindings.at(v));
    return cache[e];
  };

  Polynomial result;
  for (const auto& [m, c] : terms_) {
    Polynomial term = Polynomial::constant(c);
    Monomial passthrough;
    m.for_each_variable([&](int v, int e) {
      if (bindings.count(v)) {
        term = term * power_of(v, e);
      } else {
        passthrough = passthrough.times(Monomial::variable(v, e));
      }
    });
    if (!passthrough.is_constant()) {
      Polynomial mono;
      mono = Polynomial::from_sorted_terms({{passthrough, Rational(1)}});
      term = term * mono;
    }
    result += term;
  }
  return result;
}

double Polynomial::evaluate(const std::map<int, double>& point) const {
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double value = to_double(c);
    m.for_each_variable([&](int v, int e) {
      auto it = point.find(v);
      if (it == point.end())
        throw std::domain_error("unbound variable p" + std::to_string(v) +
                                " in evaluation");
      value *= std::pow(it->second, e);
    });
    total += value;
  }
  return total;
}

Rational Polynomial::evaluate_exact(const std::map<int, Rational>& point) const {
  Rational total(0);
  for (const auto& [m, c] : terms_) {
    Rational value = c;
    m.for_each_variable([&](int v, int e) {
      auto it = point.find(v);
      if (it == point.end())
        throw std::domain_error("unbound variable p" + std::to_string(v) +
                                " in evaluation");
      for (int i = 0; i < e; ++i) value *= it->second;
    });
    total += value;
  }
  return total;
}

Rational Polynomial::content() const {
  if (terms_.empty()) return Rational(0);
  mpz_class num_gcd(0), den_lcm(1);
  for (const auto& [m, c] : terms_) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(),
            c.get_num().get_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(),
            c.get_den().get_mpz_t());
  }
  Rational content(num_gcd, den_lcm);
  content.canonicalize();
  if (terms_.front().second < 0) content = -content;
  return content;
}

Polynomial Polynomial::divided_by_scalar(const Rational& c) const {
  if (c == 0) throw std::domain_error("division by zero scalar");
  Rational inv = Rational(1) / c;
  return scaled(inv);
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rational abs_c = c < 0 ? Rational(-c) : c;
    if (first) {
      if (c < 0) out += "-";
      first = false;
    } else {
      out += c < 0 ? " - " : " + ";
    }
    std::string factors;
    m.for_each_variable([&](int v, int e) {
      if (!factors.empty()) factors += "*";
      factors += "p" + std::to_string(v);
      if (e > 1) factors += "^" + std::to_string(e);
    });
    bool unit = abs_c == 1;
    if (factors.empty()) {
      out += wfblow::to_string(abs_c);
    } else if (unit) {
      out += factors;
    } else {
      std::string coeff = wfblow::to_string(abs_c);
      if (coeff.find('/') != std::string::npos) coeff = "(" + coeff + ")";
      out += coeff + "*" + factors;
    }
  }
  return out;
}

}  // namespace wfblow
