#include "wfblow/extension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace wfblow {

Stratum simplex_face_of(const IndexSet& free, int n) {
  std::map<int, int> fixed;
  for (int i = 0; i <= n; ++i)
    if (!free.contains(i)) fixed[i] = 0;
  return Stratum::simplex_face(free, std::move(fixed));
}

RationalFunction face_coordinate(const Stratum& face, int index) {
  if (face.is_fixed(index))
    return RationalFunction::constant(face.fixed_value(index));
  if (face.free_cube.contains(index)) return RationalFunction::variable(index);
  if (!face.free_simplex.contains(index))
    throw GeometryError("coordinate p" + std::to_string(index) +
                        " is not part of " + face.label());
  if (index != face.simplex_dependent_index())
    return RationalFunction::variable(index);
  Polynomial sum = Polynomial::constant(1);
  for (int v : face.simplex_variables()) sum -= Polynomial::variable(v);
  return RationalFunction(std::move(sum));
}

BaseSolution::BaseSolution(int n_, Stratum stratum_, RationalFunction piece_,
                           Rational time_factor_)
    : stratum(std::move(stratum_)),
      piece(std::move(piece_)),
      time_factor(std::move(time_factor_)),
      n(n_) {
  if (stratum.free_simplex.size() == 1 && !piece.variables().empty())
    throw AlgebraError("a vertex base solution must be constant");
  OperatorSpec op = simplex_operator(n, stratum);
  if (!is_identically_zero(kbe_residual(op, piece, time_factor)))
    throw AlgebraError("base does not solve the backward equation on " +
                       stratum.label());
}

BaseSolution vertex_constant(int n, int vertex_index, const Rational& c) {
  Stratum vertex = simplex_face_of(IndexSet{vertex_index}, n);
  return BaseSolution(n, vertex, RationalFunction::constant(c), Rational(0));
}

BaseSolution affine_solution(int n, const Stratum& face, const Rational& alpha,
                             const std::map<int, Rational>& betas) {
  RationalFunction piece = RationalFunction::constant(alpha);
  for (const auto& [v, beta] : betas)
    piece = piece + beta * RationalFunction::variable(v);
  return BaseSolution(n, face, std::move(piece), Rational(0));
}

BaseSolution product_eigen_solution(int n, int i, int j) {
  if (i == j) throw AlgebraError("eigen product needs distinct indices");
  std::vector<int> all;
  for (int v = 0; v <= n; ++v) all.push_back(v);
  Stratum full = simplex_face_of(IndexSet(all), n);
  RationalFunction piece = face_coordinate(full, i) * face_coordinate(full, j);
  return BaseSolution(n, full, std::move(piece), Rational(1));
}

Stratum ExtensionResult::stratum_at(int d) const {
  return simplex_face_of(path.index_set(d), path.ambient_dim());
}

const RationalFunction& ExtensionResult::piece_at(int d) const {
  return pieces.piece(stratum_at(d));
}

std::map<int, RationalFunction> project_pi(const OrderedPath& path, int d) {
  int k = path.base_dim();
  int n = path.ambient_dim();
  if (d < k || d > n) throw GeometryError("projection level out of range");
  Stratum target = simplex_face_of(path.index_set(d), n);

  std::map<int, RationalFunction> bindings;
  RationalFunction sum = RationalFunction::constant(0);
  for (int pos = k; pos <= d; ++pos)
    sum = sum + face_coordinate(target, path.index_at(pos));
  bindings[path.index_at(k)] = std::move(sum);
  for (int pos = k + 1; pos <= d; ++pos)
    bindings[path.index_at(pos)] = RationalFunction::constant(0);
  return bindings;
}

namespace {

// base(pi(p)) * prod_{j=k..d-1} p^{i_j} / (p^{i_j} + ... + p^{i_d}),
// expressed in the level-d face's variables.
RationalFunction extension_piece(const RationalFunction& base_piece,
                                 const OrderedPath& path, int d) {
  int k = path.base_dim();
  int n = path.ambient_dim();
  Stratum target = simplex_face_of(path.index_set(d), n);

  RationalFunction value = base_piece.substitute(project_pi(path, d));
  RationalFunction tail = face_coordinate(target, path.index_at(d));
  for (int j = d - 1; j >= k; --j) {
    RationalFunction numerator = face_coordinate(target, path.index_at(j));
    tail = numerator + tail;
    value = value * (numerator / tail);
  }
  return value;
}

StratifiedFunction extend_pieces(const RationalFunction& base_piece,
                                 const OrderedPath& path,
                                 const Rational& lambda) {
  int k = path.base_dim();
  int n = path.ambient_dim();
  StratifiedFunction out(lambda);
  out.add_piece(simplex_face_of(path.index_set(k), n), base_piece);
  for (int d = k + 1; d <= n; ++d)
    out.add_piece(simplex_face_of(path.index_set(d), n),
                  extension_piece(base_piece, path, d));
  return out;
}

}  // namespace

ExtensionResult extend_along_path(const BaseSolution& base,
                                  const OrderedPath& path) {
  int k = path.base_dim();
  if (path.ambient_dim() != base.n)
    throw GeometryError("path and base live in different ambient dimensions");
  Stratum expected = simplex_face_of(path.index_set(k), base.n);
  if (expected != base.stratum)
    throw GeometryError("base stratum " + base.stratum.label() +
                        " does not match the path's base face " +
                        expected.label());
  return ExtensionResult{path,
                         extend_pieces(base.piece, path, base.time_factor)};
}

StratifiedFunction extend_final_condition(const RationalFunction& f_base,
                                          const OrderedPath& path) {
  return extend_pieces(f_base, path, Rational(0));
}

bool ExtensionReport::residuals_pass() const {
  return std::all_of(residuals.begin(), residuals.end(),
                     [](const ResidualEntry& e) { return e.exact_zero; });
}

bool ExtensionReport::boundaries_pass() const {
  return std::all_of(boundaries.begin(), boundaries.end(),
                     [](const BoundaryEntry& e) { return e.pass; });
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Random interior point of a simplex face, as full barycentric values for
// every free member (they sum to one).
std::map<int, double> random_face_point(const Stratum& face,
                                        std::mt19937_64& rng) {
  const auto& members = face.free_simplex.members();
  std::vector<double> weights(members.size());
  double total = 0.0;
  for (auto& w : weights) {
    w = 0.05 + 0.95 * uniform01(rng);
    total += w;
  }
  std::map<int, double> point;
  for (std::size_t i = 0; i < members.size(); ++i)
    point[members[i]] = weights[i] / total;
  return point;
}

// Extrapolated limit along t -> 0 from geometric offsets, plus the largest
// disagreement between successive extrapolations as a consistency measure.
std::pair<double, double> radial_limit(
    const std::function<double(double)>& sample) {
  const double offsets[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double previous = 0.0, extrapolated = 0.0, spread = 0.0;
  for (int i = 1; i < 5; ++i) {
    double f_coarse = sample(offsets[i - 1]);
    double f_fine = sample(offsets[i]);
    double value = f_fine - (f_coarse - f_fine) / 9.0;
    if (i > 1) spread = std::max(spread, std::abs(value - previous));
    previous = value;
    extrapolated = value;
  }
  return {extrapolated, spread};
}

// Evaluates a piece at full barycentric coordinates, passing only the
// stratum's own variables through.
double evaluate_on_face(const RationalFunction& piece, const Stratum& face,
                        const std::map<int, double>& full_coords) {
  std::map<int, double> point;
  for (int v : face.simplex_variables()) {
    auto it = full_coords.find(v);
    point[v] = it == full_coords.end() ? 0.0 : it->second;
  }
  return piece.evaluate(point);
}

}  // namespace

ExtensionReport check_extension_constraints(const StratifiedFunction& candidate,
                                            const OrderedPath& path,
                                            int samples, unsigned seed) {
  int k = path.base_dim();
  int n = path.ambient_dim();
  ExtensionReport report;
  std::mt19937_64 rng(seed);

  for (int d = k; d <= n; ++d) {
    Stratum face = simplex_face_of(path.index_set(d), n);
    OperatorSpec op = simplex_operator(n, face);
    bool zero = is_identically_zero(
        kbe_residual(op, candidate.piece(face), candidate.time_factor()));
    report.residuals.push_back({d, zero});
  }

  for (int d = k + 1; d <= n; ++d) {
    Stratum face = simplex_face_of(path.index_set(d), n);
    const RationalFunction& piece = candidate.piece(face);
    Stratum predecessor = simplex_face_of(path.index_set(d - 1), n);

    for (int missing : face.free_simplex.members()) {
      Stratum facet = simplex_face_of(face.free_simplex.without(missing), n);
      bool toward_predecessor = facet == predecessor;
      double max_error = 0.0, max_spread = 0.0;
      for (int s = 0; s < samples; ++s) {
        std::map<int, double> q = random_face_point(facet, rng);
        auto sample = [&](double t) {
          // Shift weight t onto the missing coordinate, staying on the
          // simplex exactly.
          std::map<int, double> coords;
          for (const auto& [v, x] : q) coords[v] = (1.0 - t) * x;
          coords[missing] = t;
          return evaluate_on_face(piece, face, coords);
        };
        auto [limit, spread] = radial_limit(sample);
        double expected =
            toward_predecessor
                ? evaluate_on_face(candidate.piece(predecessor), predecessor, q)
                : 0.0;
        max_error = std::max(max_error, std::abs(limit - expected));
        max_spread = std::max(max_spread, spread);
      }
      report.boundaries.push_back({d, facet, toward_predecessor, max_error,
                                   max_spread, max_error <= kBoundaryEpsilon});
    }
  }

  // Codimension-2 probes: approach Delta_{d-2} with the last two path
  // coordinates in two different ratios.
  for (int d = k + 2; d <= n; ++d) {
    Stratum face = simplex_face_of(path.index_set(d), n);
    const RationalFunction& piece = candidate.piece(face);
    Stratum locus = simplex_face_of(path.index_set(d - 2), n);
    std::map<int, double> q = random_face_point(locus, rng);
    int a = path.index_at(d - 1), b = path.index_at(d);
    auto limit_for = [&](double wa, double wb) {
      auto sample = [&](double t) {
        std::map<int, double> coords;
        for (const auto& [v, x] : q) coords[v] = (1.0 - t) * x;
        coords[a] = wa * t;
        coords[b] = wb * t;
        return evaluate_on_face(piece, face, coords);
      };
      return radial_limit(sample).first;
    };
    double low = limit_for(0.75, 0.25);
    double high = limit_for(0.25, 0.75);
    report.loci.push_back(
        {d, locus, low, high, std::abs(low - high) > kBoundaryEpsilon});
  }

  return report;
}

StratifiedFunction assemble_superposition(
    const std::vector<ExtensionResult>& extensions) {
  if (extensions.empty()) return {};
  StratifiedFunction out(extensions.front().pieces.time_factor());
  for (const auto& ext : extensions) {
    if (ext.pieces.time_factor() != out.time_factor())
      throw AlgebraError("superposition requires a common time factor");
    for (const auto& [stratum, piece] : ext.pieces.pieces())
      out.accumulate_piece(stratum, piece);
  }
  return out;
}

}  // namespace wfblow
