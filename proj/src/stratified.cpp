#include "wfblow/stratified.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace wfblow {

void StratifiedFunction::add_piece(const Stratum& stratum, RationalFunction piece) {
  auto allowed = stratum.all_variables();
  for (int v : piece.variables())
    if (!std::binary_search(allowed.begin(), allowed.end(), v))
      throw AlgebraError("piece on " + stratum.label() +
                         " mentions non-free coordinate p" + std::to_string(v));
  pieces_[stratum] = std::move(piece);
}

void StratifiedFunction::accumulate_piece(const Stratum& stratum,
                                          const RationalFunction& piece) {
  auto it = pieces_.find(stratum);
  if (it == pieces_.end())
    add_piece(stratum, piece);
  else
    it->second = it->second + piece;
}

bool StratifiedFunction::has_piece(const Stratum& stratum) const {
  return pieces_.count(stratum) > 0;
}

const RationalFunction& StratifiedFunction::piece(const Stratum& stratum) const {
  auto it = pieces_.find(stratum);
  if (it == pieces_.end())
    throw GeometryError("no piece on stratum " + stratum.label());
  return it->second;
}

double StratifiedFunction::evaluate(const Stratum& stratum,
                                    const std::map<int, double>& coords) const {
  return piece(stratum).evaluate(coords);
}

double StratifiedFunction::evaluate_at_time(const Stratum& stratum,
                                            const std::map<int, double>& coords,
                                            double t) const {
  return std::exp(to_double(time_factor_) * t) * evaluate(stratum, coords);
}

std::string StratifiedFunction::to_json() const {
  nlohmann::json j;
  j["lambda"] = to_string(time_factor_);
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& [stratum, rf] : pieces_) {
    nlohmann::json entry;
    entry["stratum"] = nlohmann::json::parse(stratum.to_json());
    entry["expr"] = rf.to_string();
    pieces.push_back(std::move(entry));
  }
  j["pieces"] = std::move(pieces);
  return j.dump(2);
}

StratifiedFunction StratifiedFunction::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  StratifiedFunction f(parse_rational(j.at("lambda").get<std::string>()));
  for (const auto& entry : j.at("pieces")) {
    Stratum stratum = Stratum::from_json(entry.at("stratum").dump());
    f.add_piece(stratum, parse_expression(entry.at("expr").get<std::string>()));
  }
  return f;
}

}  // namespace wfblow
