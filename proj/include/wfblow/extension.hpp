#pragma once

#include <vector>

#include "wfblow/operators.hpp"
#include "wfblow/stratified.hpp"

namespace wfblow {

// A proper solution of the backward equation on a simplex face, of the
// separable form e^{lambda t} * piece(p). Construction certifies
// L* piece + lambda piece = 0 exactly.
struct BaseSolution {
  Stratum stratum;
  RationalFunction piece;
  Rational time_factor;
  int n;

  BaseSolution(int n, Stratum stratum, RationalFunction piece,
               Rational time_factor);
};

// Catalog of closed-form bases used throughout the tests.
BaseSolution vertex_constant(int n, int vertex_index, const Rational& c);
BaseSolution affine_solution(int n, const Stratum& face, const Rational& alpha,
                             const std::map<int, Rational>& betas);
// e^t p^i p^j (distinct indices, either may be 0).
BaseSolution product_eigen_solution(int n, int i, int j);

struct ExtensionResult {
  OrderedPath path;
  StratifiedFunction pieces;

  // The stratum carrying the level-d piece.
  Stratum stratum_at(int d) const;
  const RationalFunction& piece_at(int d) const;
};

// Substitution bindings realising the projection onto the base face:
// i_k -> sum_{l=k..d} p^{i_l}, the moved coordinates -> 0, rest unchanged.
// All right-hand sides are expressed in the level-d face's own variables.
std::map<int, RationalFunction> project_pi(const OrderedPath& path, int d);

// The pathwise extension: on each higher face the base value at the
// projected point times the telescoping allele-ratio product.
ExtensionResult extend_along_path(const BaseSolution& base,
                                  const OrderedPath& path);

// Same formula applied to a final-condition slice (no equation is assumed
// of f_base; the time factor is ignored).
StratifiedFunction extend_final_condition(const RationalFunction& f_base,
                                          const OrderedPath& path);

struct ExtensionReport {
  struct ResidualEntry {
    int d;
    bool exact_zero;
  };
  struct BoundaryEntry {
    int d;
    Stratum facet;
    bool toward_predecessor;
    double max_error;
    double extrapolation_spread;
    bool pass;
  };
  struct LocusEntry {
    int d;
    Stratum locus;
    double limit_low;   // limit along a direction weighted toward i_{d-1}
    double limit_high;  // limit along a direction weighted toward i_d
    bool incompatible;
  };

  std::vector<ResidualEntry> residuals;
  std::vector<BoundaryEntry> boundaries;
  std::vector<LocusEntry> loci;

  bool residuals_pass() const;
  bool boundaries_pass() const;
};

inline constexpr double kBoundaryEpsilon = 1e-7;

// Checks the two extension constraints on each level: the exact equation
// residual, and the numeric boundary behaviour (matches the predecessor
// trace, vanishes on the remaining facets). Also probes the codimension-2
// loci for direction-dependent limits.
ExtensionReport check_extension_constraints(const StratifiedFunction& candidate,
                                            const OrderedPath& path,
                                            int samples, unsigned seed = 1);

// Plain superposition of several pathwise extensions; overlapping strata
// accumulate by addition. All inputs must share one time factor.
StratifiedFunction assemble_superposition(
    const std::vector<ExtensionResult>& extensions);

// The canonical simplex face Delta_d^{(I_d)} as a stratum of the ambient
// n-simplex (explicit fixed zeros).
Stratum simplex_face_of(const IndexSet& free, int n);

// p^i on a face, as a rational function of the face's variables (the
// dependent coordinate expands to 1 - sum of the others).
RationalFunction face_coordinate(const Stratum& face, int index);

}  // namespace wfblow
