#pragma once

#include <optional>
#include <vector>

#include "wfblow/geometry.hpp"
#include "wfblow/rational_function.hpp"

namespace wfblow {

enum class OperatorKind {
  SimplexBackward,     // L*: (1/2) sum p^i(delta - p^j) d2/dp^i dp^j
  SymmetricBackward,   // same form over x^0..x^n, all independent
  TransformedBackward  // simplex block + diagonal cube terms along a path
};

// A second-order operator bound to the stratum it acts on. Transformed
// operators carry the blow-up path and per-step orientation flags; restricted
// instances additionally remember the largest path position whose coordinate
// is fixed at its degenerate end (the index-deletion rule for faces).
struct OperatorSpec {
  OperatorKind kind = OperatorKind::SimplexBackward;
  int n = 0;
  Stratum stratum;
  std::optional<OrderedPath> path;
  std::vector<bool> orientation_flips;  // step m flips coordinate i_{n-m+1}
  int max_deleted_position = 0;         // positions <= this carry no summand

  // Variables the operator differentiates with respect to.
  std::vector<int> variables() const;

  // True when the blow-up step ending at path position j was flipped.
  bool flipped_at_position(int j) const;
};

// L* on a simplex face (sum over the face's independent coordinates).
OperatorSpec simplex_operator(int n, const Stratum& face);
OperatorSpec simplex_operator(int n);

// The symmetric form over x^0..x^n with all n+1 coordinates independent.
OperatorSpec symmetric_operator(int n);

// The transformed operator produced by the iterated blow-up along `path`
// (declared here; constructed by blowup.cpp as well).
OperatorSpec transformed_operator(const OrderedPath& path, int n,
                                  std::vector<bool> orientation_flips = {});

// Bare second-order coefficient a^{ij} (the 1/2 factor lives in
// apply_operator). Throws if i or j is not free on the spec's stratum.
RationalFunction coefficient(const OperatorSpec& spec, int i, int j);

// (1/2) sum coefficient * d2 f, exact. f's variables must be free on the
// spec's stratum.
RationalFunction apply_operator(const OperatorSpec& spec,
                                const RationalFunction& f);

// The unordered index pairs (a <= b) carrying a structurally nonzero
// summand of the spec.
std::vector<std::pair<int, int>> summand_indices(const OperatorSpec& spec);

// Restriction to a face of the spec's stratum. Simplex operators restrict to
// sub-simplices; transformed operators restrict to cube faces via the
// index-deletion rule (the largest position fixed at its degenerate end
// removes every summand at or below it, fixed-at-one coordinates drop their
// own summand and leave the products).
OperatorSpec restrict_operator(const OperatorSpec& spec, const Stratum& face);

// L* piece + lambda * piece; identically zero iff e^{lambda t} piece solves
// the backward equation on the spec's stratum.
RationalFunction kbe_residual(const OperatorSpec& spec,
                              const RationalFunction& piece,
                              const Rational& lambda);

}  // namespace wfblow
