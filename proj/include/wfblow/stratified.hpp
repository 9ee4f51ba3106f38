#pragma once

#include <map>

#include "wfblow/geometry.hpp"
#include "wfblow/rational_function.hpp"

namespace wfblow {

// A family of rational functions indexed by strata, with an optional
// separable time factor: value = e^{lambda*t} * piece(p). Pieces are stored
// in eliminated coordinates, i.e. the dependent simplex coordinate never
// appears as a variable.
class StratifiedFunction {
 public:
  StratifiedFunction() = default;
  explicit StratifiedFunction(Rational time_factor)
      : time_factor_(std::move(time_factor)) {}

  const Rational& time_factor() const { return time_factor_; }
  void set_time_factor(Rational lambda) { time_factor_ = std::move(lambda); }

  void add_piece(const Stratum& stratum, RationalFunction piece);
  // Adds into an existing piece (superposition) or inserts a new one.
  void accumulate_piece(const Stratum& stratum, const RationalFunction& piece);

  bool has_piece(const Stratum& stratum) const;
  const RationalFunction& piece(const Stratum& stratum) const;
  const std::map<Stratum, RationalFunction>& pieces() const { return pieces_; }

  double evaluate(const Stratum& stratum,
                  const std::map<int, double>& coords) const;
  double evaluate_at_time(const Stratum& stratum,
                          const std::map<int, double>& coords, double t) const;

  std::string to_json() const;
  static StratifiedFunction from_json(const std::string& json_text);

 private:
  std::map<Stratum, RationalFunction> pieces_;
  Rational time_factor_ = Rational(0);
};

}  // namespace wfblow
