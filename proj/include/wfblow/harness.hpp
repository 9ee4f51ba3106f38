#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wfblow/blowup.hpp"
#include "wfblow/operators.hpp"
#include "wfblow/stratified.hpp"

namespace wfblow {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform tensor grid over a stratum's free coordinates, spacing 1/N,
// boundary nodes included.
struct GridSpec {
  std::vector<int> dims;  // ascending free coordinate indices
  int subdivisions;       // N >= 4
  Stratum stratum;

  static GridSpec over(const Stratum& stratum, int subdivisions);
  double spacing() const { return 1.0 / subdivisions; }
};

struct FdResult {
  double max_residual = 0.0;
  long interior_nodes = 0;
  long skipped_nodes = 0;  // stencil hit an evaluation pole
};

// Max over interior nodes of |1/2 sum coeff * D2 u + lambda u| using centered
// second differences. Optionally streams per-node rows as CSV.
FdResult fd_residual(const StratifiedFunction& u, const OperatorSpec& spec,
                     const GridSpec& grid, std::ostream* csv = nullptr);

struct FaceRestrictionEntry {
  Stratum face;
  int max_deleted_position;
  double residual;
  long skipped;
  bool deletion_rule_ok;  // brute-force limit derivation agrees
};

struct FaceRestrictionReport {
  std::vector<FaceRestrictionEntry> entries;
  double max_residual() const;
  bool deletion_rule_ok() const;
};

// Restricted-equation residuals of `u` on every face of every dimension
// 1..n-1 of the transformed domain, with the index-deletion rule validated
// against a numeric multiply-and-limit derivation on each face.
FaceRestrictionReport check_face_restrictions(const StratifiedFunction& u,
                                              const OrderedPath& path, int n,
                                              int subdivisions, double tol);

// Numeric derivation of the surviving summands on a face: multiply the
// interior operator by the vanishing coordinates and follow the limit at
// offsets 1e-3..1e-6. Returns false if the surviving set or the coefficient
// values disagree with restrict_operator.
bool validate_deletion_rule(const OperatorSpec& full_spec, const Stratum& face,
                            unsigned seed = 1);

// Stationary Dirichlet problem on the transformed cube: boundary data per
// stratum (vertices upward), optional manufactured forcing.
struct DirichletProblem {
  OperatorSpec op;
  std::map<Stratum, RationalFunction> boundary_data;
  std::optional<RationalFunction> forcing;
};

struct SolveResult {
  GridSpec grid;
  std::vector<double> values;  // row-major over grid.dims
  double max_linear_residual = 0.0;

  std::size_t node_index(const std::vector<int>& multi) const;
  double value_at(const std::vector<int>& multi) const;
  void write_csv(std::ostream& out) const;
};

// Level-by-level solve: vertices from data, then each face as a Dirichlet
// problem for the face operator with the previously computed trace. Faces
// carrying supplied data are filled directly (consistency-checked at shared
// nodes). Linear systems are solved to residual 1e-11, deterministically.
SolveResult solve_dirichlet_cube(const DirichletProblem& problem,
                                 const GridSpec& grid);

// Vertex data for the uniqueness experiment: `c` at the origin vertex of the
// path's cube, zero at every other vertex.
std::map<Stratum, RationalFunction> origin_vertex_data(const OrderedPath& path,
                                                       int n,
                                                       const Rational& c);

struct UniquenessReport {
  struct GridEntry {
    int subdivisions;
    double max_deviation;
    double linear_residual;
  };
  std::vector<GridEntry> grids;
  double fitted_order = 0.0;  // least-squares slope of log dev vs log h
};

// Solves from origin-vertex data alone and compares with the closed-form
// product solution on each grid.
UniquenessReport uniqueness_experiment(double base_value,
                                       const OrderedPath& path, int n,
                                       const std::vector<int>& grid_sizes);

// Hierarchical solve from random vertex data; checks min/max attainment on
// the data (discrete maximum principle). Returns the worst overshoot.
double max_principle_overshoot(const OrderedPath& path, int n,
                               int subdivisions, int trials, unsigned seed);

struct ConvergenceReport {
  std::vector<std::pair<int, double>> deviations;  // (N, max deviation)
  double fitted_order = 0.0;
};

// Manufactured-solution convergence study: forcing from an exact quartic,
// facet data from its traces, deviations across the given grids.
ConvergenceReport manufactured_convergence(const OrderedPath& path, int n,
                                           const std::vector<int>& grid_sizes);

struct IncompatibilityProfile {
  struct Ray {
    double dx, dy;
    double limit;  // extrapolated value along the ray into the origin vertex
  };
  std::vector<Ray> rays;
  double cube_max_jump = 0.0;      // max adjacent-sample jump of the transform
  double cube_jump_bound = 0.0;    // 2 * Lipschitz * spacing
  std::vector<std::string> csv_rows;
};

// Direction-dependent limits of the two-step vertex extension at the origin
// of the triangle versus the continuity of its transform on the square.
IncompatibilityProfile incompatibility_profile(double c, int samples_per_axis);

// Least-squares slope of log(deviation) against log(h).
double fit_convergence_order(const std::vector<std::pair<int, double>>& data);

}  // namespace wfblow
