#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfblow/rational.hpp"

namespace wfblow {

// Boundary snapping tolerance for point classification. Roundoff from the
// rational maps stays below 1e-13 for n <= 8, so 1e-12 is safe.
inline constexpr double kGeomEpsilon = 1e-12;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sorted set of allele indices. Primed sets follow the cube convention and
// never contain index 0.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<int> members, bool primed = false);
  explicit IndexSet(std::vector<int> members, bool primed = false);

  const std::vector<int>& members() const { return members_; }
  bool primed() const { return primed_; }
  bool contains(int index) const;
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  IndexSet with(int index) const;
  IndexSet without(int index) const;

  auto operator<=>(const IndexSet&) const = default;

 private:
  std::vector<int> members_;
  bool primed_ = false;
};

// Ordered extension path (i_k, ..., i_n). The ambient dimension n is
// base_dim + length - 1. For base_dim 0 the first entry must be 0.
class OrderedPath {
 public:
  OrderedPath(std::vector<int> indices, int base_dim);

  const std::vector<int>& indices() const { return indices_; }
  int base_dim() const { return base_dim_; }
  int ambient_dim() const { return base_dim_ + static_cast<int>(indices_.size()) - 1; }

  // Path entry i_position for base_dim <= position <= ambient_dim.
  int index_at(int position) const;

  // I_d = I_n \ {i_{d+1}, ..., i_n}; contains every index not on the tail.
  IndexSet index_set(int d) const;

  auto operator<=>(const OrderedPath&) const = default;

 private:
  std::vector<int> indices_;
  int base_dim_;
};

enum class StratumKind { SimplexFace, CubeFace, Product, AdditionalFace };

std::string to_string(StratumKind kind);

// One stratum of the simplex, the cube, or a mixed product domain. Stored
// canonically (sorted index lists, normalised fixed map) so that equality is
// structural and strata can key maps.
struct Stratum {
  StratumKind kind = StratumKind::SimplexFace;
  IndexSet free_simplex;                 // simplex-side free indices, may contain 0
  IndexSet free_cube;                    // cube-side free indices, never 0
  std::map<int, int> fixed;              // index -> 0 or 1
  std::optional<IndexSet> boxtimes;      // jointly-not-all-zero block

  static Stratum simplex_face(IndexSet free, std::map<int, int> fixed = {});
  static Stratum cube_face(IndexSet free, std::map<int, int> fixed);

  int dimension() const;
  bool is_fixed(int index) const { return fixed.count(index) > 0; }
  int fixed_value(int index) const;

  // The coordinate eliminated on the simplex side (0 when present, else the
  // smallest free simplex index); p^dep = 1 - sum of the other free ones.
  int simplex_dependent_index() const;
  // Free simplex indices minus the dependent one, i.e. the actual variables.
  std::vector<int> simplex_variables() const;
  // All variables a piece on this stratum may mention.
  std::vector<int> all_variables() const;

  void validate() const;

  auto operator<=>(const Stratum&) const = default;

  std::string to_json() const;
  static Stratum from_json(const std::string& json_text);
  std::string label() const;  // compact human-readable form
};

enum class DomainKind { Simplex, Cube };

// All k-dimensional faces of the n-simplex (C(n+1,k+1) of them) or the
// n-cube (C(n,k)*2^(n-k)), canonically ordered.
std::vector<Stratum> enumerate_faces(int n, int k, DomainKind domain);

// The unique open stratum containing p, snapping coordinates within
// kGeomEpsilon of 0 (and of 1 on the cube side). Simplex points carry
// coordinates p^1..p^n; p^0 is derived. Throws GeometryError if p lies
// outside the closed domain by more than the tolerance.
Stratum classify_point(const std::vector<double>& p, int n, DomainKind domain);

// The additional faces N_{k+1}, ..., N_{n-1} created by the iterated
// blow-up along `path`, in the disjoint formulation. Empty when n-k < 2.
std::vector<Stratum> additional_faces(const OrderedPath& path, int n);

// Membership test against a stratum in the blow-up target coordinates
// (cube/product side), honouring fixed values, open ranges and the
// boxtimes block. Used by sampling-based tests.
bool stratum_contains(const Stratum& stratum, const std::map<int, double>& coords,
                      double eps = kGeomEpsilon);

}  // namespace wfblow
