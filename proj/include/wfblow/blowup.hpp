#pragma once

#include <optional>
#include <vector>

#include "wfblow/extension.hpp"
#include "wfblow/operators.hpp"
#include "wfblow/stratified.hpp"

namespace wfblow {

// One blow-up step: sends (p^sigma, p^rho) to (p^sigma + p^rho,
// p^rho / (p^sigma + p^rho)); the flipped variant uses the complementary
// second coordinate. The value 0 at p^sigma + p^rho = 0 is a boundary rule
// handled by strata bookkeeping, not by the rational maps.
struct BlowupChart {
  int sigma;
  int rho;
  bool flipped;
  std::map<int, RationalFunction> forward;  // new coords in terms of old
  std::map<int, RationalFunction> inverse;  // old coords in terms of new
};

BlowupChart make_chart(int sigma, int rho, bool flipped = false);

// The iterated chain along an extension path: step m uses sigma = i_{n-m},
// rho = i_{n-m+1}. Composite bindings are validated against the closed-form
// telescoping maps at construction.
struct BlowupChain {
  OrderedPath path;
  std::vector<BlowupChart> steps;
  std::map<int, RationalFunction> forward;
  std::map<int, RationalFunction> inverse;

  int ambient_dim() const { return path.ambient_dim(); }
  int base_dim() const { return path.base_dim(); }

  // Numeric image of a point given as values of the nonzero coordinates.
  std::map<int, double> map_point(const std::map<int, double>& p) const;
  std::map<int, double> map_point_inverse(const std::map<int, double>& q) const;
};

BlowupChain make_chain(const OrderedPath& path, int n,
                       std::vector<bool> flips = {});

// Image of a face under a single chart or a full chain, following the
// face dictionary. Faces meeting the blown-up locus have no smooth image.
struct FaceImage {
  std::optional<Stratum> image;
  std::string note;  // set when no smooth image exists
};

FaceImage map_face(const BlowupChart& chart, const Stratum& face);
FaceImage map_face(const BlowupChain& chain, const Stratum& face);

// Reverse dictionary: recovers the source stratum of an image face.
FaceImage map_face_inverse(const BlowupChart& chart, const Stratum& face);
FaceImage map_face_inverse(const BlowupChain& chain, const Stratum& face);

// Pushes a pathwise extension through the chain. Pieces land on the
// product strata; for a vertex base the whole closed cube carries the single
// closed-form product. Exact agreement with the pushforward
// substitute(piece, inverse) is certified stratum by stratum.
StratifiedFunction transform_solution(const ExtensionResult& ext,
                                      const BlowupChain& chain);

// The transformed operator family attached to the chain's target domain.
OperatorSpec transform_operator(const BlowupChain& chain, int n);

// Target stratum carrying the level-d piece of a transformed solution.
Stratum transformed_stratum_at(const BlowupChain& chain, int d);

}  // namespace wfblow
