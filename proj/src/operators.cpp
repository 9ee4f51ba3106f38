#include "wfblow/operators.hpp"

#include <algorithm>

namespace wfblow {

namespace {

bool is_free_variable(const OperatorSpec& spec, int v) {
  auto vars = spec.variables();
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

// Path positions k+1..n of a transformed spec with per-position bookkeeping.
struct PositionInfo {
  int position;
  int coordinate;
  bool free;
  bool flipped;
};

std::vector<PositionInfo> cube_positions(const OperatorSpec& spec) {
  const OrderedPath& path = *spec.path;
  int k = path.base_dim();
  std::vector<PositionInfo> out;
  for (int j = k + 1; j <= spec.n; ++j) {
    int c = path.index_at(j);
    out.push_back({j, c, !spec.stratum.is_fixed(c), spec.flipped_at_position(j)});
  }
  return out;
}

// Denominator factor contributed by a position: p, or (1-p) when the step
// that produced the coordinate was flipped.
Polynomial position_factor(const PositionInfo& info) {
  Polynomial p = Polynomial::variable(info.coordinate);
  if (info.flipped) return Polynomial::constant(1) - p;
  return p;
}

struct Summand {
  int a, b;
  Polynomial weight;     // coefficient numerator, including pair multiplicity
  Polynomial to_common;  // lifts the term onto the common denominator
};

// Builds the summand list together with the common coefficient denominator.
std::pair<std::vector<Summand>, Polynomial> operator_summands(
    const OperatorSpec& spec) {
  std::vector<Summand> summands;
  Polynomial one = Polynomial::constant(1);

  auto add_wf_block = [&](const std::vector<int>& vars) {
    for (std::size_t x = 0; x < vars.size(); ++x) {
      int a = vars[x];
      Polynomial pa = Polynomial::variable(a);
      summands.push_back({a, a, pa * (one - pa), one});
      for (std::size_t y = x + 1; y < vars.size(); ++y) {
        // Both index orders contribute -p^a p^b.
        summands.push_back(
            {a, vars[y], Rational(-2) * (pa * Polynomial::variable(vars[y])), one});
      }
    }
  };

  if (spec.kind != OperatorKind::TransformedBackward) {
    add_wf_block(spec.variables());
    return {std::move(summands), one};
  }

  int k = spec.path->base_dim();
  if (k >= 1 && spec.max_deleted_position <= k)
    add_wf_block(spec.stratum.simplex_variables());

  // Diagonal cube terms have nested denominators: the factor list grows along
  // the path, and each term divides by the prefix below its own position.
  std::vector<Polynomial> factors;
  struct PendingTerm {
    int coordinate;
    std::size_t prefix;  // number of factors below this term
  };
  std::vector<PendingTerm> terms;
  for (const auto& info : cube_positions(spec)) {
    bool survives = info.position > spec.max_deleted_position;
    bool own_term = survives && info.free && (k == 0 || info.position >= k + 2);
    if (own_term) terms.push_back({info.coordinate, factors.size()});
    if (survives && info.free) factors.push_back(position_factor(info));
  }

  Polynomial common = one;
  std::size_t deepest = terms.empty() ? 0 : terms.back().prefix;
  for (std::size_t i = 0; i < deepest; ++i) common = common * factors[i];

  for (const auto& term : terms) {
    Polynomial p = Polynomial::variable(term.coordinate);
    Polynomial lift = one;
    for (std::size_t i = term.prefix; i < deepest; ++i) lift = lift * factors[i];
    summands.push_back({term.coordinate, term.coordinate, p * (one - p),
                        std::move(lift)});
  }
  return {std::move(summands), std::move(common)};
}

}  // namespace

std::vector<int> OperatorSpec::variables() const {
  if (kind == OperatorKind::SymmetricBackward) {
    std::vector<int> vars(n + 1);
    for (int i = 0; i <= n; ++i) vars[i] = i;
    return vars;
  }
  if (kind == OperatorKind::SimplexBackward) return stratum.simplex_variables();
  std::vector<int> vars = stratum.simplex_variables();
  for (int c : stratum.free_cube.members()) vars.push_back(c);
  std::sort(vars.begin(), vars.end());
  return vars;
}

bool OperatorSpec::flipped_at_position(int j) const {
  if (!path || orientation_flips.empty()) return false;
  // Step m transforms rho_m = i_{n-m+1}, so position j belongs to step n-j+1.
  int m = n - j + 1;
  if (m < 1 || m > static_cast<int>(orientation_flips.size())) return false;
  return orientation_flips[m - 1];
}

OperatorSpec simplex_operator(int n, const Stratum& face) {
  if (face.free_simplex.empty())
    throw std::domain_error("simplex operator needs a simplex face");
  OperatorSpec spec;
  spec.kind = OperatorKind::SimplexBackward;
  spec.n = n;
  spec.stratum = face;
  return spec;
}

OperatorSpec simplex_operator(int n) {
  std::vector<int> all;
  for (int i = 0; i <= n; ++i) all.push_back(i);
  return simplex_operator(n, Stratum::simplex_face(IndexSet(all)));
}

OperatorSpec symmetric_operator(int n) {
  OperatorSpec spec;
  spec.kind = OperatorKind::SymmetricBackward;
  spec.n = n;
  std::vector<int> all;
  for (int i = 0; i <= n; ++i) all.push_back(i);
  spec.stratum = Stratum::simplex_face(IndexSet(all));
  return spec;
}

OperatorSpec transformed_operator(const OrderedPath& path, int n,
                                  std::vector<bool> orientation_flips) {
  if (path.ambient_dim() != n)
    throw std::domain_error("path does not match ambient dimension");
  int k = path.base_dim();
  if (n - k < 1)
    throw std::domain_error("transformed operator needs at least one path step");
  for (int j = k + 1; j <= n; ++j)
    if (path.index_at(j) == 0)
      throw std::domain_error("blow-up path may not move coordinate 0");

  OperatorSpec spec;
  spec.kind = OperatorKind::TransformedBackward;
  spec.n = n;
  spec.path = path;
  spec.orientation_flips = std::move(orientation_flips);
  spec.max_deleted_position = k;

  if (k == 0) {
    // Fully blown-up target: the whole domain is a cube over the path tail.
    std::vector<int> free;
    for (int j = 1; j <= n; ++j) free.push_back(path.index_at(j));
    spec.stratum = Stratum::cube_face(IndexSet(std::move(free), true), {});
  } else {
    Stratum s;
    s.kind = StratumKind::Product;
    s.free_simplex = path.index_set(k + 1);
    std::vector<int> free;
    for (int j = k + 2; j <= n; ++j) free.push_back(path.index_at(j));
    s.free_cube = IndexSet(std::move(free), true);
    s.validate();
    spec.stratum = s;
  }
  return spec;
}

RationalFunction coefficient(const OperatorSpec& spec, int i, int j) {
  if (!is_free_variable(spec, i) || !is_free_variable(spec, j))
    throw std::domain_error("coefficient index not free on the operator stratum");

  auto wf_entry = [](int a, int b) {
    Polynomial pa = Polynomial::variable(a);
    if (a == b)
      return RationalFunction(pa * (Polynomial::constant(1) - pa));
    return RationalFunction(-(pa * Polynomial::variable(b)));
  };

  if (spec.kind != OperatorKind::TransformedBackward) return wf_entry(i, j);

  const OrderedPath& path = *spec.path;
  int k = path.base_dim();
  auto position_of = [&](int c) -> std::optional<int> {
    for (int pos = k + 1; pos <= spec.n; ++pos)
      if (path.index_at(pos) == c) return pos;
    return std::nullopt;
  };
  std::optional<int> pi = position_of(i);
  std::optional<int> pj = position_of(j);
  bool cube_i = pi && (k == 0 || *pi >= k + 2);
  bool cube_j = pj && (k == 0 || *pj >= k + 2);

  if (!cube_i && !cube_j) return wf_entry(i, j);  // simplex block
  if (i != j) return RationalFunction(Polynomial());

  int pos = *pi;
  if (pos <= spec.max_deleted_position) return RationalFunction(Polynomial());
  Polynomial p = Polynomial::variable(i);
  Polynomial num = p * (Polynomial::constant(1) - p);
  Polynomial den = Polynomial::constant(1);
  for (const auto& info : cube_positions(spec)) {
    if (info.position >= pos) break;
    if (info.position <= spec.max_deleted_position || !info.free) continue;
    den = den * position_factor(info);
  }
  return RationalFunction(std::move(num), std::move(den));
}

std::vector<std::pair<int, int>> summand_indices(const OperatorSpec& spec) {
  auto [summands, common] = operator_summands(spec);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& s : summands)
    pairs.push_back({std::min(s.a, s.b), std::max(s.a, s.b)});
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

RationalFunction apply_operator(const OperatorSpec& spec,
                                const RationalFunction& f) {
  auto vars = spec.variables();
  for (int v : f.variables())
    if (std::find(vars.begin(), vars.end(), v) == vars.end())
      throw std::domain_error("operand mentions non-free coordinate p" +
                              std::to_string(v));

  auto [summands, common] = operator_summands(spec);
  if (summands.empty()) return RationalFunction(Polynomial());

  const Polynomial& num = f.numerator();
  const Polynomial& den = f.denominator();

  if (f.is_polynomial()) {
    Rational den_scale = den.constant_value();
    Polynomial total;
    for (const auto& s : summands) {
      Polynomial second = num.differentiate(s.a).differentiate(s.b);
      if (second.is_zero()) continue;
      total += s.weight * s.to_common * second;
    }
    return RationalFunction(std::move(total), common.scaled(den_scale * 2));
  }

  // f = N/D: d2_ab f = T_ab / D^3 with
  // T_ab = d2N D^2 - (daN dbD + dbN daD + N d2D) D + 2 N daD dbD.
  std::map<int, Polynomial> dnum, dden;
  for (int v : vars) {
    dnum[v] = num.differentiate(v);
    dden[v] = den.differentiate(v);
  }
  Polynomial den2 = den * den;
  Polynomial total;
  for (const auto& s : summands) {
    Polynomial d2n = dnum[s.a].differentiate(s.b);
    Polynomial cross =
        dnum[s.a] * dden[s.b] + dnum[s.b] * dden[s.a] +
        num * dden[s.a].differentiate(s.b);
    Polynomial t = d2n * den2 - cross * den +
                   Rational(2) * (num * (dden[s.a] * dden[s.b]));
    if (t.is_zero()) continue;
    total += s.weight * s.to_common * t;
  }
  return RationalFunction(std::move(total),
                          (den2 * den) * common.scaled(Rational(2)));
}

OperatorSpec restrict_operator(const OperatorSpec& spec, const Stratum& face) {
  if (spec.kind == OperatorKind::SimplexBackward) {
    if (face.free_simplex.empty())
      throw std::domain_error("restriction target must be a simplex face");
    for (int i : face.free_simplex.members())
      if (!spec.stratum.free_simplex.contains(i))
        throw std::domain_error("face is not in the closure of the operator stratum");
    OperatorSpec out = spec;
    out.stratum = face;
    return out;
  }
  if (spec.kind != OperatorKind::TransformedBackward)
    throw std::domain_error("symmetric operator has no face restrictions");

  const OrderedPath& path = *spec.path;
  int k = path.base_dim();

  for (int j = k + 1; j <= spec.n; ++j) {
    int c = path.index_at(j);
    if (!face.free_cube.contains(c) && !face.is_fixed(c) &&
        !face.free_simplex.contains(c))
      throw std::domain_error("face does not cover path coordinate p" +
                              std::to_string(c));
  }
  if (k >= 1) {
    int gate = path.index_at(k + 1);
    bool same = face.free_simplex == spec.stratum.free_simplex;
    bool dropped_gate =
        face.is_fixed(gate) &&
        face.free_simplex == spec.stratum.free_simplex.without(gate);
    if (!same && !dropped_gate)
      throw std::domain_error(
          "only cube-side coordinates (and the first path coordinate) may be fixed");
  }

  OperatorSpec out = spec;
  out.stratum = face;
  out.max_deleted_position = k;
  for (int j = k + 1; j <= spec.n; ++j) {
    int c = path.index_at(j);
    if (!face.is_fixed(c)) continue;
    int degenerate_value = spec.flipped_at_position(j) ? 1 : 0;
    if (face.fixed_value(c) == degenerate_value)
      out.max_deleted_position = std::max(out.max_deleted_position, j);
  }
  return out;
}

RationalFunction kbe_residual(const OperatorSpec& spec,
                              const RationalFunction& piece,
                              const Rational& lambda) {
  RationalFunction lhs = apply_operator(spec, piece);
  if (lambda == 0) return lhs;
  return lhs + lambda * piece;
}

}  // namespace wfblow
