#include "wfblow/harness.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <unordered_map>

namespace wfblow {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Rational function precompiled against a fixed dimension order for fast
// repeated evaluation on grids. A vanishing denominator yields NaN.
class CompiledRational {
 public:
  CompiledRational() = default;
  CompiledRational(const RationalFunction& f, const std::vector<int>& dims) {
    compile(f.numerator(), dims, num_);
    compile(f.denominator(), dims, den_);
  }

  double operator()(const std::vector<double>& x) const {
    double den = evaluate(den_, x);
    if (std::abs(den) < kDenominatorEpsilon)
      return std::numeric_limits<double>::quiet_NaN();
    return evaluate(num_, x) / den;
  }

 private:
  struct Term {
    double coeff;
    std::vector<int> exps;
  };

  static void compile(const Polynomial& p, const std::vector<int>& dims,
                      std::vector<Term>& out) {
    for (const auto& [m, c] : p.terms()) {
      Term term{to_double(c), std::vector<int>(dims.size(), 0)};
      int unmatched = 0;
      m.for_each_variable([&](int v, int e) {
        auto it = std::find(dims.begin(), dims.end(), v);
        if (it == dims.end())
          ++unmatched;
        else
          term.exps[static_cast<std::size_t>(it - dims.begin())] = e;
      });
      if (unmatched > 0)
        throw AlgebraError("expression mentions a coordinate outside the grid");
      out.push_back(std::move(term));
    }
  }

  static double evaluate(const std::vector<Term>& terms,
                         const std::vector<double>& x) {
    double total = 0.0;
    for (const auto& term : terms) {
      double value = term.coeff;
      for (std::size_t i = 0; i < x.size(); ++i)
        for (int e = 0; e < term.exps[i]; ++e) value *= x[i];
      total += value;
    }
    return total;
  }

  std::vector<Term> num_, den_;
};

std::uint64_t pack_key(const std::vector<int>& multi) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < multi.size(); ++i)
    key |= static_cast<std::uint64_t>(multi[i]) << (9 * i);
  return key;
}

// Axes of the grid that carry simplex coordinates (their index sum is
// capped by N).
std::vector<char> simplex_axis_flags(const GridSpec& grid) {
  std::vector<char> flags(grid.dims.size(), 0);
  auto simplex_vars = grid.stratum.simplex_variables();
  for (std::size_t i = 0; i < grid.dims.size(); ++i)
    flags[i] = std::binary_search(simplex_vars.begin(), simplex_vars.end(),
                                  grid.dims[i])
                   ? 1
                   : 0;
  return flags;
}

// Walks the grid nodes of a stratum; simplex axes only reach nodes with
// coordinate sum <= N.
void for_each_node(const GridSpec& grid, const std::vector<char>& simplex_axes,
                   const std::function<void(const std::vector<int>&)>& fn) {
  int d = static_cast<int>(grid.dims.size());
  int n_sub = grid.subdivisions;
  std::vector<int> multi(d, 0);
  std::function<void(int, int)> rec = [&](int axis, int used) {
    if (axis == d) {
      fn(multi);
      return;
    }
    bool bound = axis < static_cast<int>(simplex_axes.size()) &&
                 simplex_axes[axis];
    int cap = bound ? n_sub - used : n_sub;
    for (int i = 0; i <= cap; ++i) {
      multi[axis] = i;
      rec(axis + 1, used + (bound ? i : 0));
    }
  };
  rec(0, 0);
}

void for_each_node(const GridSpec& grid, bool simplex_bound,
                   const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<char> flags(grid.dims.size(), simplex_bound ? 1 : 0);
  for_each_node(grid, flags, fn);
}

}  // namespace

GridSpec GridSpec::over(const Stratum& stratum, int subdivisions) {
  if (subdivisions < 4) throw SolverError("grid needs at least 4 subdivisions");
  if (subdivisions > 500) throw SolverError("grid too fine");
  GridSpec grid;
  grid.dims = stratum.all_variables();
  grid.subdivisions = subdivisions;
  grid.stratum = stratum;
  return grid;
}

FdResult fd_residual(const StratifiedFunction& u, const OperatorSpec& spec,
                     const GridSpec& grid, std::ostream* csv) {
  const RationalFunction& piece = u.piece(grid.stratum);
  std::vector<char> simplex_axes = simplex_axis_flags(grid);
  bool any_simplex =
      std::any_of(simplex_axes.begin(), simplex_axes.end(),
                  [](char f) { return f != 0; });
  int n_sub = grid.subdivisions;
  double h = grid.spacing();
  int d = static_cast<int>(grid.dims.size());
  CompiledRational value(piece, grid.dims);

  // Cache values on all nodes (NaN marks evaluation poles).
  std::unordered_map<std::uint64_t, double> cache;
  std::vector<double> x(d);
  for_each_node(grid, simplex_axes, [&](const std::vector<int>& multi) {
    for (int i = 0; i < d; ++i) x[i] = static_cast<double>(multi[i]) / n_sub;
    cache[pack_key(multi)] = value(x);
  });

  auto pairs = summand_indices(spec);
  std::vector<CompiledRational> coeffs;
  coeffs.reserve(pairs.size());
  for (auto [a, b] : pairs)
    coeffs.emplace_back(coefficient(spec, a, b), grid.dims);
  std::vector<int> axis_a(pairs.size()), axis_b(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto find_axis = [&](int c) {
      auto it = std::find(grid.dims.begin(), grid.dims.end(), c);
      if (it == grid.dims.end())
        throw SolverError("operator variable not on the grid");
      return static_cast<int>(it - grid.dims.begin());
    };
    axis_a[i] = find_axis(pairs[i].first);
    axis_b[i] = find_axis(pairs[i].second);
  }

  double lambda = to_double(u.time_factor());
  bool has_mixed = false;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first != pairs[i].second) has_mixed = true;

  FdResult result;
  std::vector<int> neighbor(d);
  for_each_node(grid, simplex_axes, [&](const std::vector<int>& multi) {
    int simplex_sum = 0;
    for (int i = 0; i < d; ++i)
      if (simplex_axes[i]) simplex_sum += multi[i];
    bool interior = true;
    for (int i = 0; i < d; ++i)
      if (multi[i] < 1 || multi[i] > n_sub - 1) interior = false;
    if (any_simplex && simplex_sum > n_sub - (has_mixed ? 2 : 1))
      interior = false;
    if (!interior) return;

    auto lookup = [&](const std::vector<int>& m) {
      auto it = cache.find(pack_key(m));
      return it == cache.end() ? std::numeric_limits<double>::quiet_NaN()
                               : it->second;
    };

    double center = lookup(multi);
    for (int i = 0; i < d; ++i)
      x[i] = static_cast<double>(multi[i]) / n_sub;
    double residual = lambda * center;
    bool skipped = std::isnan(center);
    for (std::size_t s = 0; s < pairs.size() && !skipped; ++s) {
      double c = coeffs[s](x);
      if (std::isnan(c)) {
        skipped = true;
        break;
      }
      double second;
      if (axis_a[s] == axis_b[s]) {
        neighbor = multi;
        neighbor[axis_a[s]] += 1;
        double up = lookup(neighbor);
        neighbor[axis_a[s]] -= 2;
        double down = lookup(neighbor);
        second = (up - 2.0 * center + down) / (h * h);
      } else {
        double quad[4];
        int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
        for (int q = 0; q < 4; ++q) {
          neighbor = multi;
          neighbor[axis_a[s]] += signs[q][0];
          neighbor[axis_b[s]] += signs[q][1];
          quad[q] = lookup(neighbor);
        }
        second = (quad[0] - quad[1] - quad[2] + quad[3]) / (4.0 * h * h);
      }
      if (std::isnan(second)) {
        skipped = true;
        break;
      }
      // summand_indices weights off-diagonal pairs once; the coefficient is
      // counted for both index orders.
      double weight = axis_a[s] == axis_b[s] ? 0.5 : 1.0;
      residual += weight * c * second;
    }

    if (skipped) {
      ++result.skipped_nodes;
      return;
    }
    ++result.interior_nodes;
    double magnitude = std::abs(residual);
    result.max_residual = std::max(result.max_residual, magnitude);
    if (csv) {
      for (int i = 0; i < d; ++i) *csv << x[i] << ",";
      *csv << magnitude << "\n";
    }
  });
  return result;
}

double FaceRestrictionReport::max_residual() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.residual);
  return worst;
}

bool FaceRestrictionReport::deletion_rule_ok() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const FaceRestrictionEntry& e) { return e.deletion_rule_ok; });
}

bool validate_deletion_rule(const OperatorSpec& full_spec, const Stratum& face,
                            unsigned seed) {
  OperatorSpec restricted = restrict_operator(full_spec, face);
  const OrderedPath& path = *full_spec.path;
  int k = path.base_dim(), n = full_spec.n;
  std::mt19937_64 rng(seed);

  std::vector<int> free_coords, zero_fixed, one_fixed;
  for (int j = k + 1; j <= n; ++j) {
    int c = path.index_at(j);
    int degenerate = full_spec.flipped_at_position(j) ? 1 : 0;
    if (!face.is_fixed(c))
      free_coords.push_back(c);
    else if (face.fixed_value(c) == degenerate)
      zero_fixed.push_back(c);
    else
      one_fixed.push_back(c);
  }
  if (free_coords.empty()) return true;

  std::set<int> expected;
  for (auto [a, b] : summand_indices(restricted))
    if (a == b) expected.insert(a);

  auto factor_value = [&](int j, double x) {
    return full_spec.flipped_at_position(j) ? 1.0 - x : x;
  };
  auto position_of = [&](int c) {
    for (int j = k + 1; j <= n; ++j)
      if (path.index_at(j) == c) return j;
    throw GeometryError("coordinate not on the path");
  };

  for (int trial = 0; trial < 3; ++trial) {
    std::map<int, double> q;
    for (int c : free_coords) q[c] = 0.2 + 0.6 * uniform01(rng);

    auto offset_point = [&](double eps) {
      std::map<int, double> point = q;
      for (int c : zero_fixed) {
        int j = position_of(c);
        point[c] = full_spec.flipped_at_position(j) ? 1.0 - eps : eps;
      }
      for (int c : one_fixed) {
        int j = position_of(c);
        point[c] = full_spec.flipped_at_position(j) ? eps : 1.0 - eps;
      }
      return point;
    };

    // gamma: the positive factor the face equation is normalised by.
    double gamma = 1.0;
    int maxpos = restricted.max_deleted_position;
    for (int c : free_coords) {
      int j = position_of(c);
      if (j <= maxpos) gamma *= factor_value(j, q.at(c));
    }

    for (int c : free_coords) {
      auto brute = [&](double eps) {
        std::map<int, double> point = offset_point(eps);
        double m = 1.0;
        for (int z : zero_fixed)
          m *= factor_value(position_of(z), point.at(z));
        return m * coefficient(full_spec, c, c).evaluate(point);
      };
      double coarse = brute(1e-4), mid = brute(1e-5), fine = brute(1e-6);
      double extrapolated = fine - (mid - fine) / 9.0;
      bool survives_numerically =
          std::abs(fine) > 1e-9 && std::abs(fine / (std::abs(mid) + 1e-300)) > 0.5;
      bool survives_rule = expected.count(c) > 0;
      if (survives_numerically != survives_rule) return false;
      if (!survives_rule) continue;
      double lemma = coefficient(restricted, c, c).evaluate(q);
      if (std::abs(extrapolated * gamma - lemma) >
          1e-5 * (std::abs(lemma) + 1e-12))
        return false;
      (void)coarse;
    }
  }
  return true;
}

FaceRestrictionReport check_face_restrictions(const StratifiedFunction& u,
                                              const OrderedPath& path, int n,
                                              int subdivisions, double tol) {
  if (path.base_dim() != 0)
    throw SolverError("face restriction checks run on the fully blown-up family");
  OperatorSpec full = transformed_operator(path, n);
  const Stratum& cube = full.stratum;
  const RationalFunction& whole = u.piece(cube);

  FaceRestrictionReport report;
  for (int d = 1; d <= n - 1; ++d) {
    for (const Stratum& face : enumerate_faces(n, d, DomainKind::Cube)) {
      OperatorSpec restricted = restrict_operator(full, face);
      std::map<int, RationalFunction> pin;
      for (const auto& [c, b] : face.fixed)
        pin[c] = RationalFunction::constant(b);
      StratifiedFunction trace(u.time_factor());
      trace.add_piece(face, whole.substitute(pin));

      GridSpec grid = GridSpec::over(face, subdivisions);
      FdResult fd = fd_residual(trace, restricted, grid);
      bool rule_ok = validate_deletion_rule(full, face);
      report.entries.push_back({face, restricted.max_deleted_position,
                                fd.max_residual, fd.skipped_nodes, rule_ok});
      (void)tol;
    }
  }
  return report;
}

std::size_t SolveResult::node_index(const std::vector<int>& multi) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < multi.size(); ++i)
    index = index * (grid.subdivisions + 1) + multi[i];
  return index;
}

double SolveResult::value_at(const std::vector<int>& multi) const {
  return values[node_index(multi)];
}

void SolveResult::write_csv(std::ostream& out) const {
  int d = static_cast<int>(grid.dims.size());
  for (int i = 0; i < d; ++i) out << "p" << grid.dims[i] << ",";
  out << "value\n";
  GridSpec g = grid;
  for_each_node(g, false, [&](const std::vector<int>& multi) {
    for (int i = 0; i < d; ++i)
      out << static_cast<double>(multi[i]) / grid.subdivisions << ",";
    out << values[node_index(multi)] << "\n";
  });
}

namespace {

// Face coefficient used by the hierarchical solve: every free direction is
// kept elliptic, with fixed coordinates simply leaving the products. On
// faces without degenerately-fixed coordinates this coincides with the
// restricted operator's coefficients.
RationalFunction solver_coefficient(const OperatorSpec& op, const Stratum& face,
                                    int coord) {
  const OrderedPath& path = *op.path;
  int k = path.base_dim(), n = op.n;
  int pos = -1;
  for (int j = k + 1; j <= n; ++j)
    if (path.index_at(j) == coord) pos = j;
  if (pos < 0) throw SolverError("coordinate not on the operator path");

  Polynomial p = Polynomial::variable(coord);
  Polynomial num = p * (Polynomial::constant(1) - p);
  Polynomial den = Polynomial::constant(1);
  for (int j = k + 1; j < pos; ++j) {
    int c = path.index_at(j);
    if (face.is_fixed(c)) continue;
    Polynomial q = Polynomial::variable(c);
    den = den * (op.flipped_at_position(j) ? Polynomial::constant(1) - q : q);
  }
  return RationalFunction(std::move(num), std::move(den));
}

struct FaceNodes {
  std::vector<std::vector<int>> interior;  // full-grid multi-indices
};

}  // namespace

SolveResult solve_dirichlet_cube(const DirichletProblem& problem,
                                 const GridSpec& grid) {
  const OperatorSpec& op = problem.op;
  if (op.kind != OperatorKind::TransformedBackward ||
      op.path->base_dim() != 0)
    throw SolverError("the hierarchical solve runs on the cube family");
  if (grid.stratum != op.stratum)
    throw SolverError("grid does not match the operator domain");

  int n_sub = grid.subdivisions;
  double h = grid.spacing();
  int d = static_cast<int>(grid.dims.size());
  int n = op.n;

  SolveResult result;
  result.grid = grid;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n_sub + 1);
  result.values.assign(total, 0.0);
  std::vector<char> set_flags(total, 0);

  auto node_index = [&](const std::vector<int>& multi) {
    std::size_t index = 0;
    for (int i = 0; i < d; ++i)
      index = index * (n_sub + 1) + multi[i];
    return index;
  };

  auto face_axes = [&](const Stratum& face) {
    std::vector<int> axes;
    for (int i = 0; i < d; ++i)
      if (face.free_cube.contains(grid.dims[i])) axes.push_back(i);
    return axes;
  };

  auto base_multi = [&](const Stratum& face) {
    std::vector<int> multi(d, 0);
    for (int i = 0; i < d; ++i)
      if (face.is_fixed(grid.dims[i]))
        multi[i] = face.fixed_value(grid.dims[i]) == 1 ? n_sub : 0;
    return multi;
  };

  // Walk the closed face: free axes over 0..N.
  auto for_face_nodes = [&](const Stratum& face, bool interior_only,
                            const std::function<void(const std::vector<int>&)>& fn) {
    auto axes = face_axes(face);
    std::vector<int> multi = base_multi(face);
    int lo = interior_only ? 1 : 0;
    int hi = interior_only ? n_sub - 1 : n_sub;
    std::function<void(std::size_t)> rec = [&](std::size_t a) {
      if (a == axes.size()) {
        fn(multi);
        return;
      }
      for (int i = lo; i <= hi; ++i) {
        multi[axes[a]] = i;
        rec(a + 1);
      }
    };
    rec(0);
  };

  // Supplied data first, consistency-checked at shared nodes.
  std::vector<std::pair<Stratum, const RationalFunction*>> data_faces;
  for (const auto& [stratum, rf] : problem.boundary_data)
    data_faces.push_back({stratum, &rf});
  std::stable_sort(data_faces.begin(), data_faces.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.dimension() < b.first.dimension();
                   });
  for (const auto& [face, rf] : data_faces) {
    CompiledRational value(*rf, grid.dims);
    std::vector<double> x(d);
    for_face_nodes(face, false, [&](const std::vector<int>& multi) {
      for (int i = 0; i < d; ++i) x[i] = static_cast<double>(multi[i]) / n_sub;
      double v = value(x);
      if (std::isnan(v)) throw SolverError("boundary data pole on " + face.label());
      std::size_t idx = node_index(multi);
      if (set_flags[idx]) {
        if (std::abs(result.values[idx] - v) > 1e-12)
          throw SolverError("inconsistent boundary data at a shared node of " +
                            face.label());
      } else {
        result.values[idx] = v;
        set_flags[idx] = 1;
      }
    });
  }

  std::optional<CompiledRational> forcing;
  if (problem.forcing) forcing.emplace(*problem.forcing, grid.dims);

  for (int level = 1; level <= n; ++level) {
    for (const Stratum& face : enumerate_faces(n, level, DomainKind::Cube)) {
      // Skip faces already covered by supplied data.
      bool fully_set = true;
      for_face_nodes(face, false, [&](const std::vector<int>& multi) {
        if (!set_flags[node_index(multi)]) fully_set = false;
      });
      if (fully_set) continue;

      // Boundary of the face must be known.
      for_face_nodes(face, false, [&](const std::vector<int>& multi) {
        bool interior = true;
        for (int i : face_axes(face))
          if (multi[i] < 1 || multi[i] > n_sub - 1) interior = false;
        if (!interior && !set_flags[node_index(multi)])
          throw SolverError("missing boundary data below " + face.label());
      });

      auto axes = face_axes(face);
      std::vector<CompiledRational> coeffs;
      for (int i : axes)
        coeffs.emplace_back(solver_coefficient(op, face, grid.dims[i]),
                            grid.dims);

      // Enumerate unknowns deterministically.
      std::vector<std::vector<int>> interior_nodes;
      std::unordered_map<std::uint64_t, int> unknown_of;
      for_face_nodes(face, true, [&](const std::vector<int>& multi) {
        unknown_of[pack_key(multi)] = static_cast<int>(interior_nodes.size());
        interior_nodes.push_back(multi);
      });
      if (interior_nodes.empty()) continue;

      int unknowns = static_cast<int>(interior_nodes.size());
      Eigen::SparseMatrix<double> a(unknowns, unknowns);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns);
      std::vector<Eigen::Triplet<double>> triplets;
      triplets.reserve(static_cast<std::size_t>(unknowns) * (2 * axes.size() + 1));

      std::vector<double> x(d);
      std::vector<int> neighbor(d);
      for (int row = 0; row < unknowns; ++row) {
        const auto& multi = interior_nodes[row];
        for (int i = 0; i < d; ++i)
          x[i] = static_cast<double>(multi[i]) / n_sub;
        std::vector<double> c(axes.size());
        double scale = 0.0;
        for (std::size_t s = 0; s < axes.size(); ++s) {
          c[s] = coeffs[s](x);
          if (std::isnan(c[s]) || c[s] < 0)
            throw SolverError("degenerate face coefficient inside " +
                              face.label());
          scale += c[s];
        }
        if (scale <= 0.0)
          throw SolverError("face operator vanishes inside " + face.label());

        double diag = 0.0;
        double rhs = forcing ? (*forcing)(x) : 0.0;
        if (std::isnan(rhs))
          throw SolverError("forcing pole inside " + face.label());
        rhs = -rhs / scale;  // rows are negated for a positive diagonal
        for (std::size_t s = 0; s < axes.size(); ++s) {
          double w = c[s] / (2.0 * h * h * scale);
          diag += 2.0 * w;
          for (int dir : {-1, +1}) {
            neighbor = multi;
            neighbor[axes[s]] += dir;
            auto it = unknown_of.find(pack_key(neighbor));
            if (it != unknown_of.end()) {
              triplets.emplace_back(row, it->second, -w);
            } else {
              rhs += w * result.values[node_index(neighbor)];
            }
          }
        }
        triplets.emplace_back(row, row, diag);
        b[row] = rhs;
      }
      a.setFromTriplets(triplets.begin(), triplets.end());

      Eigen::VectorXd solution;
      if (unknowns <= 40000) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
        solver.compute(a);
        if (solver.info() != Eigen::Success)
          throw SolverError("factorisation failed on " + face.label());
        solution = solver.solve(b);
      } else {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                        Eigen::IncompleteLUT<double>> solver;
        solver.setTolerance(1e-14);
        solver.setMaxIterations(20000);
        solver.compute(a);
        solution = solver.solve(b);
      }
      double residual = (a * solution - b).cwiseAbs().maxCoeff();
      result.max_linear_residual = std::max(result.max_linear_residual, residual);
      if (residual > 1e-11)
        throw SolverError("linear solve reached only residual " +
                          std::to_string(residual) + " on " + face.label());

      for (int row = 0; row < unknowns; ++row) {
        std::size_t idx = node_index(interior_nodes[row]);
        result.values[idx] = solution[row];
        set_flags[idx] = 1;
      }
    }
  }

  for (std::size_t i = 0; i < total; ++i)
    if (!set_flags[i]) throw SolverError("solve left unset nodes");
  return result;
}

std::map<Stratum, RationalFunction> origin_vertex_data(const OrderedPath& path,
                                                       int n,
                                                       const Rational& c) {
  (void)path;
  std::map<Stratum, RationalFunction> data;
  for (const Stratum& vertex : enumerate_faces(n, 0, DomainKind::Cube)) {
    bool origin = true;
    for (const auto& [i, b] : vertex.fixed)
      if (b != 0) origin = false;
    data[vertex] =
        RationalFunction::constant(origin ? c : Rational(0));
  }
  return data;
}

UniquenessReport uniqueness_experiment(double base_value,
                                       const OrderedPath& path, int n,
                                       const std::vector<int>& grid_sizes) {
  OperatorSpec op = transformed_operator(path, n);
  Rational c(base_value);

  // Closed-form product solution with the same vertex values.
  Polynomial closed = Polynomial::constant(c);
  for (int j = 1; j <= n; ++j)
    closed = closed *
             (Polynomial::constant(1) - Polynomial::variable(path.index_at(j)));
  RationalFunction closed_rf{closed};

  UniquenessReport report;
  for (int n_sub : grid_sizes) {
    GridSpec grid = GridSpec::over(op.stratum, n_sub);
    DirichletProblem problem{op, origin_vertex_data(path, n, c), std::nullopt};
    SolveResult solved = solve_dirichlet_cube(problem, grid);

    CompiledRational exact(closed_rf, grid.dims);
    double worst = 0.0;
    std::vector<double> x(grid.dims.size());
    for_each_node(grid, false, [&](const std::vector<int>& multi) {
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<double>(multi[i]) / n_sub;
      worst = std::max(worst,
                       std::abs(solved.value_at(multi) - exact(x)));
    });
    report.grids.push_back({n_sub, worst, solved.max_linear_residual});
  }

  std::vector<std::pair<int, double>> pairs;
  for (const auto& g : report.grids) pairs.push_back({g.subdivisions, g.max_deviation});
  report.fitted_order = fit_convergence_order(pairs);
  return report;
}

double max_principle_overshoot(const OrderedPath& path, int n,
                               int subdivisions, int trials, unsigned seed) {
  OperatorSpec op = transformed_operator(path, n);
  GridSpec grid = GridSpec::over(op.stratum, subdivisions);
  std::mt19937_64 rng(seed);

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::map<Stratum, RationalFunction> data;
    double lo = 1.0, hi = 0.0;
    for (const Stratum& vertex : enumerate_faces(n, 0, DomainKind::Cube)) {
      double v = uniform01(rng);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      data[vertex] = RationalFunction::constant(Rational(v));
    }
    DirichletProblem problem{op, std::move(data), std::nullopt};
    SolveResult solved = solve_dirichlet_cube(problem, grid);
    for (double v : solved.values)
      worst = std::max(worst, std::max(lo - v, v - hi));
  }
  return std::max(worst, 0.0);
}

ConvergenceReport manufactured_convergence(const OrderedPath& path, int n,
                                           const std::vector<int>& grid_sizes) {
  if (n < 2) throw SolverError("the manufactured study needs n >= 2");
  OperatorSpec op = transformed_operator(path, n);
  int a = path.index_at(1), b = path.index_at(2);

  // Quartic in the first coordinate plus a mixed term that every other axis
  // differencing reproduces exactly: the truncation error stays bounded even
  // where the later coefficients blow up.
  Polynomial pa = Polynomial::variable(a);
  Polynomial manufactured_poly =
      pa.pow(4) + pa.pow(2) * Polynomial::variable(b);
  RationalFunction manufactured{manufactured_poly};
  RationalFunction forcing = apply_operator(op, manufactured);

  std::map<Stratum, RationalFunction> data;
  for (const Stratum& facet : enumerate_faces(n, n - 1, DomainKind::Cube)) {
    std::map<int, RationalFunction> pin;
    for (const auto& [i, v] : facet.fixed)
      pin[i] = RationalFunction::constant(v);
    data[facet] = manufactured.substitute(pin);
  }

  ConvergenceReport report;
  for (int n_sub : grid_sizes) {
    GridSpec grid = GridSpec::over(op.stratum, n_sub);
    DirichletProblem problem{op, data, forcing};
    SolveResult solved = solve_dirichlet_cube(problem, grid);

    CompiledRational exact(manufactured, grid.dims);
    double worst = 0.0;
    std::vector<double> x(grid.dims.size());
    for_each_node(grid, false, [&](const std::vector<int>& multi) {
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<double>(multi[i]) / n_sub;
      worst = std::max(worst, std::abs(solved.value_at(multi) - exact(x)));
    });
    report.deviations.push_back({n_sub, worst});
  }
  report.fitted_order = fit_convergence_order(report.deviations);
  return report;
}

IncompatibilityProfile incompatibility_profile(double c, int samples_per_axis) {
  // Two-step extension of a vertex constant on the triangle; its top piece
  // has direction-dependent limits at the origin vertex.
  OrderedPath path({0, 1, 2}, 0);
  BaseSolution base = vertex_constant(2, 0, Rational(c));
  ExtensionResult ext = extend_along_path(base, path);
  const RationalFunction& top = ext.piece_at(2);

  IncompatibilityProfile profile;
  const double dirs[3][2] = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  for (const auto& dir : dirs) {
    const double offsets[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double previous = 0.0, limit = 0.0;
    for (int i = 1; i < 5; ++i) {
      auto eval = [&](double t) {
        return top.evaluate({{1, dir[0] * t}, {2, dir[1] * t}});
      };
      double coarse = eval(offsets[i - 1]), fine = eval(offsets[i]);
      limit = fine - (coarse - fine) / 9.0;
      previous = limit;
    }
    (void)previous;
    profile.rays.push_back({dir[0], dir[1], limit});
    profile.csv_rows.push_back("ray," + std::to_string(dir[0]) + "," +
                               std::to_string(dir[1]) + "," +
                               std::to_string(limit));
  }

  // The transformed solution is globally continuous on the closed square.
  BlowupChain chain = make_chain(path, 2);
  StratifiedFunction transformed = transform_solution(ext, chain);
  Stratum cube = transformed_stratum_at(chain, 2);
  const RationalFunction& tilde = transformed.piece(cube);

  int m = samples_per_axis;
  double spacing = 1.0 / m;
  double lipschitz = std::abs(c);
  std::vector<std::vector<double>> grid_values(
      m + 1, std::vector<double>(m + 1, 0.0));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      grid_values[i][j] = tilde.evaluate(
          {{1, static_cast<double>(i) / m}, {2, static_cast<double>(j) / m}});
  double max_jump = 0.0;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      if (i < m)
        max_jump = std::max(max_jump,
                            std::abs(grid_values[i + 1][j] - grid_values[i][j]));
      if (j < m)
        max_jump = std::max(max_jump,
                            std::abs(grid_values[i][j + 1] - grid_values[i][j]));
    }
  profile.cube_max_jump = max_jump;
  profile.cube_jump_bound = 2.0 * lipschitz * spacing;
  profile.csv_rows.push_back("cube_jump," + std::to_string(max_jump) + "," +
                             std::to_string(profile.cube_jump_bound) + ",");
  return profile;
}

double fit_convergence_order(const std::vector<std::pair<int, double>>& data) {
  if (data.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = static_cast<double>(data.size());
  for (const auto& [n_sub, dev] : data) {
    double lx = std::log(1.0 / n_sub);
    double ly = std::log(std::max(dev, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace wfblow
