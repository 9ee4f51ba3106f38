#include "wfblow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "wfblow/blowup.hpp"
#include "wfblow/harness.hpp"

namespace wfblow {

bool VerifyReport::all_pass() const {
  return std::all_of(cases.begin(), cases.end(),
                     [](const VerifyCase& c) { return c.pass; });
}

std::string VerifyReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : cases) {
    nlohmann::json entry;
    entry["name"] = c.name;
    entry["status"] = c.pass ? "pass" : "fail";
    entry["metric"] = c.metric;
    entry["tol"] = c.tol;
    list.push_back(std::move(entry));
  }
  j["cases"] = std::move(list);
  return j.dump(2);
}

void VerifyReport::append(const VerifyReport& other) {
  for (const auto& c : other.cases)
    cases.push_back({other.suite + "/" + c.name, c.pass, c.metric, c.tol});
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Random interior simplex point as values of p^1..p^n.
std::map<int, double> random_simplex_point(int n, std::mt19937_64& rng) {
  std::vector<double> w(n + 1);
  double total = 0.0;
  for (auto& v : w) {
    v = 0.05 + 0.95 * uniform01(rng);
    total += v;
  }
  std::map<int, double> p;
  for (int i = 1; i <= n; ++i) p[i] = w[i] / total;
  return p;
}

void add_case(VerifyReport& report, const std::string& name, double metric,
              double tol) {
  report.cases.push_back({name, metric <= tol, metric, tol});
}

void add_flag(VerifyReport& report, const std::string& name, bool ok) {
  report.cases.push_back({name, ok, ok ? 0.0 : 1.0, 0.0});
}

std::vector<Polynomial> monomials_up_to(int n, int max_degree) {
  std::vector<Polynomial> out;
  std::vector<int> exps(n, 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == n) {
      Monomial m;
      for (int i = 0; i < n; ++i)
        m = m.times(Monomial::variable(i + 1, exps[i]));
      out.push_back(Polynomial::from_sorted_terms({{m, Rational(1)}}));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      exps[axis] = e;
      rec(axis + 1, left - e);
    }
  };
  rec(0, max_degree);
  return out;
}

}  // namespace

VerifyReport verify_roundtrip(const OrderedPath& path, unsigned seed) {
  VerifyReport report{"roundtrip", {}};
  int n = path.ambient_dim();
  BlowupChain chain = make_chain(path, n);

  bool symbolic = true;
  for (int j = path.base_dim() + 1; j <= n; ++j) {
    int c = path.index_at(j);
    RationalFunction roundtrip =
        chain.inverse.at(c).substitute(chain.forward);
    if (!roundtrip.equals(RationalFunction::variable(c))) symbolic = false;
  }
  add_flag(report, "inverse-compose-forward-identity", symbolic);

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::map<int, double> p = random_simplex_point(n, rng);
    std::map<int, double> q = chain.map_point(p);
    std::map<int, double> back = chain.map_point_inverse(q);
    for (const auto& [i, v] : p)
      worst = std::max(worst, std::abs(back.at(i) - v));
  }
  add_case(report, "numeric-roundtrip-10k-points", worst, 1e-12);
  return report;
}

VerifyReport verify_operator_transform(const OrderedPath& path) {
  VerifyReport report{"operator-transform", {}};
  int n = path.ambient_dim();
  BlowupChain chain = make_chain(path, n);
  OperatorSpec before = simplex_operator(n);
  OperatorSpec after = transform_operator(chain, n);

  int failures = 0, count = 0;
  for (const Polynomial& mono : monomials_up_to(n, 3)) {
    RationalFunction f{mono};
    RationalFunction lhs =
        apply_operator(before, f).substitute(chain.inverse);
    RationalFunction rhs =
        apply_operator(after, f.substitute(chain.inverse));
    if (!lhs.equals(rhs)) ++failures;
    ++count;
  }
  add_case(report, "pullback-identity-monomials-deg3(" +
                       std::to_string(count) + ")",
           failures, 0.0);

  // No first-order terms appear: the coefficients of the new coordinate's
  // nonlinear map are annihilated by the stage operator.
  bool cancelled = true;
  for (std::size_t m = 0; m < chain.steps.size(); ++m) {
    const BlowupChart& step = chain.steps[m];
    OperatorSpec stage =
        m == 0 ? simplex_operator(n)
               : transformed_operator(
                     OrderedPath(std::vector<int>(
                                     path.indices().end() - (m + 1),
                                     path.indices().end()),
                                 n - static_cast<int>(m)),
                     n);
    RationalFunction image = apply_operator(stage, step.forward.at(step.rho));
    if (!is_identically_zero(image)) cancelled = false;
  }
  add_flag(report, "first-order-cancellation-per-step", cancelled);
  return report;
}

VerifyReport verify_extension(const OrderedPath& path, unsigned seed) {
  VerifyReport report{"extension", {}};
  int n = path.ambient_dim();
  if (path.base_dim() != 0)
    throw GeometryError("verify extension expects a vertex path");

  BaseSolution base = vertex_constant(n, 0, Rational(1));
  ExtensionResult ext = extend_along_path(base, path);
  ExtensionReport checks = check_extension_constraints(ext.pieces, path, 5, seed);

  add_flag(report, "equation-residuals-exact-zero", checks.residuals_pass());
  double worst_boundary = 0.0;
  for (const auto& b : checks.boundaries)
    worst_boundary = std::max(worst_boundary, b.max_error);
  add_case(report, "boundary-limits", worst_boundary, kBoundaryEpsilon);
  bool loci_flagged = std::all_of(
      checks.loci.begin(), checks.loci.end(),
      [](const ExtensionReport::LocusEntry& e) { return e.incompatible; });
  add_flag(report, "codim2-incompatibilities-flagged",
           checks.loci.empty() || loci_flagged);

  StratifiedFunction final_slice =
      extend_final_condition(base.piece, path);
  add_flag(report, "final-condition-matches-extension",
           final_slice.piece(ext.stratum_at(n)).equals(ext.piece_at(n)));

  GridSpec grid = GridSpec::over(ext.stratum_at(std::min(n, 3)), 16);
  OperatorSpec op = simplex_operator(n, ext.stratum_at(std::min(n, 3)));
  FdResult fd = fd_residual(ext.pieces, op, grid);
  add_case(report, "fd-oracle-residual", fd.max_residual, 1e-8);
  return report;
}

VerifyReport verify_transform_solution(const OrderedPath& path, unsigned seed) {
  VerifyReport report{"transform-solution", {}};
  int n = path.ambient_dim();
  BlowupChain chain = make_chain(path, n);
  BaseSolution base = vertex_constant(n, 0, Rational(1));
  ExtensionResult ext = extend_along_path(base, path);

  bool pushforward_ok = true;
  StratifiedFunction transformed;
  try {
    transformed = transform_solution(ext, chain);  // certifies internally
  } catch (const AlgebraError&) {
    pushforward_ok = false;
  }
  add_flag(report, "pushforward-coherence", pushforward_ok);

  if (pushforward_ok) {
    Polynomial closed = Polynomial::constant(1);
    for (int j = 1; j <= n; ++j)
      closed = closed * (Polynomial::constant(1) -
                         Polynomial::variable(path.index_at(j)));
    Stratum cube = transformed_stratum_at(chain, n);
    add_flag(report, "closed-form-product",
             transformed.piece(cube).equals(RationalFunction{closed}));

    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::map<int, double> p = random_simplex_point(n, rng);
      std::map<int, double> q = chain.map_point(p);
      double before = ext.pieces.evaluate(ext.stratum_at(n), p);
      double after = transformed.evaluate(cube, q);
      worst = std::max(worst, std::abs(before - after));
    }
    add_case(report, "value-transport", worst, 1e-12);
  }
  return report;
}

VerifyReport verify_face_dictionary(const OrderedPath& path, unsigned seed) {
  VerifyReport report{"face-dictionary", {}};
  int n = path.ambient_dim();
  BlowupChain chain = make_chain(path, n);

  int mapped = 0, mismatched = 0;
  for (int k = 0; k <= n; ++k) {
    for (const Stratum& face : enumerate_faces(n, k, DomainKind::Simplex)) {
      FaceImage image = map_face(chain, face);
      if (!image.image) continue;
      FaceImage back = map_face_inverse(chain, *image.image);
      ++mapped;
      if (!back.image || *back.image != face) ++mismatched;
    }
  }
  add_case(report, "dictionary-roundtrip(" + std::to_string(mapped) + ")",
           mismatched, 0.0);

  // Points on {p~^{i_j} = 1} pull back to p^{i_{j-1}} = 0.
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int j = 2; j <= n; ++j) {
    for (int trial = 0; trial < 50; ++trial) {
      std::map<int, double> q;
      for (int l = 1; l <= n; ++l)
        q[path.index_at(l)] = 0.1 + 0.8 * uniform01(rng);
      q[path.index_at(j)] = 1.0;
      std::map<int, double> p = chain.map_point_inverse(q);
      worst = std::max(worst, std::abs(p.at(path.index_at(j - 1))));
    }
  }
  add_case(report, "unit-faces-pull-back-to-zero", worst, 1e-12);
  return report;
}

VerifyReport verify_face_restrictions(const OrderedPath& path) {
  VerifyReport report{"face-restrictions", {}};
  int n = path.ambient_dim();
  BlowupChain chain = make_chain(path, n);
  BaseSolution base = vertex_constant(n, 0, Rational(1));
  StratifiedFunction transformed =
      transform_solution(extend_along_path(base, path), chain);

  FaceRestrictionReport faces =
      check_face_restrictions(transformed, path, n, 12, 1e-9);
  add_case(report, "restricted-residuals", faces.max_residual(), 1e-9);
  add_flag(report, "index-deletion-rule", faces.deletion_rule_ok());
  return report;
}

VerifyReport verify_solver(const OrderedPath& path) {
  VerifyReport report{"solver", {}};
  int n = path.ambient_dim();

  std::vector<int> sizes = n >= 3 ? std::vector<int>{8, 16}
                                  : std::vector<int>{16, 32};
  UniquenessReport unique = uniqueness_experiment(1.0, path, n, sizes);
  double worst = 0.0;
  for (const auto& g : unique.grids) worst = std::max(worst, g.max_deviation);
  add_case(report, "vertex-data-reproduces-product-solution", worst, 1e-8);

  double overshoot = max_principle_overshoot(path, n, 8, 3, 11);
  add_case(report, "discrete-maximum-principle", overshoot, 1e-12);

  if (n >= 2) {
    ConvergenceReport conv =
        manufactured_convergence(path, n, n >= 3 ? std::vector<int>{8, 16, 32}
                                                 : std::vector<int>{16, 32, 64});
    add_case(report, "manufactured-convergence-order",
             conv.fitted_order >= 1.8 ? 0.0 : 1.8 - conv.fitted_order, 0.0);
  }
  return report;
}

VerifyReport verify_incompatibility() {
  VerifyReport report{"incompatibility", {}};
  IncompatibilityProfile profile = incompatibility_profile(1.0, 64);
  double expected[3] = {1.0, 0.0, 0.5};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    worst = std::max(worst, std::abs(profile.rays[i].limit - expected[i]));
  add_case(report, "direction-dependent-limits", worst, 1e-8);
  add_case(report, "transformed-solution-continuity", profile.cube_max_jump,
           profile.cube_jump_bound);
  return report;
}

std::vector<std::string> verify_suite_names() {
  return {"roundtrip",    "operator-transform", "extension",
          "transform",    "face-dictionary",    "face-restrictions",
          "solver",       "incompatibility"};
}

VerifyReport verify_suite(const std::string& name, const OrderedPath& path,
                          unsigned seed) {
  if (name == "roundtrip") return verify_roundtrip(path, seed);
  if (name == "operator-transform") return verify_operator_transform(path);
  if (name == "extension") return verify_extension(path, seed);
  if (name == "transform") return verify_transform_solution(path, seed);
  if (name == "face-dictionary") return verify_face_dictionary(path, seed);
  if (name == "face-restrictions") return verify_face_restrictions(path);
  if (name == "solver") return verify_solver(path);
  if (name == "incompatibility") return verify_incompatibility();
  throw std::domain_error("unknown verification suite: " + name);
}

VerifyReport verify_all(const OrderedPath& path, unsigned seed) {
  VerifyReport report{"all", {}};
  for (const std::string& name : verify_suite_names())
    report.append(verify_suite(name, path, seed));
  return report;
}

}  // namespace wfblow
