#include "wfblow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wfblow {

IndexSet::IndexSet(std::initializer_list<int> members, bool primed)
    : IndexSet(std::vector<int>(members), primed) {}

IndexSet::IndexSet(std::vector<int> members, bool primed)
    : members_(std::move(members)), primed_(primed) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
    throw GeometryError("index set with duplicate members");
  for (int m : members_) {
    if (m < 0) throw GeometryError("negative index in index set");
    if (primed_ && m == 0)
      throw GeometryError("primed index set must not contain index 0");
  }
}

bool IndexSet::contains(int index) const {
  return std::binary_search(members_.begin(), members_.end(), index);
}

IndexSet IndexSet::with(int index) const {
  if (contains(index)) return *this;
  std::vector<int> m = members_;
  m.push_back(index);
  return IndexSet(std::move(m), primed_);
}

IndexSet IndexSet::without(int index) const {
  std::vector<int> m;
  m.reserve(members_.size());
  for (int v : members_)
    if (v != index) m.push_back(v);
  return IndexSet(std::move(m), primed_);
}

OrderedPath::OrderedPath(std::vector<int> indices, int base_dim)
    : indices_(std::move(indices)), base_dim_(base_dim) {
  if (indices_.empty()) throw GeometryError("empty extension path");
  if (base_dim_ < 0) throw GeometryError("negative base dimension");
  std::set<int> seen(indices_.begin(), indices_.end());
  if (seen.size() != indices_.size())
    throw GeometryError("extension path with repeated indices");
  int n = ambient_dim();
  for (int i : indices_)
    if (i < 0 || i > n)
      throw GeometryError("path index out of range 0.." + std::to_string(n));
  if (base_dim_ == 0 && indices_.front() != 0)
    throw GeometryError("a path from a vertex must start at index 0");
}

int OrderedPath::index_at(int position) const {
  if (position < base_dim_ || position > ambient_dim())
    throw GeometryError("path position out of range");
  return indices_[position - base_dim_];
}

IndexSet OrderedPath::index_set(int d) const {
  int n = ambient_dim();
  if (d < base_dim_ || d > n) throw GeometryError("index set level out of range");
  std::set<int> tail;
  for (int pos = d + 1; pos <= n; ++pos) tail.insert(index_at(pos));
  std::vector<int> members;
  for (int i = 0; i <= n; ++i)
    if (!tail.count(i)) members.push_back(i);
  return IndexSet(std::move(members));
}

std::string to_string(StratumKind kind) {
  switch (kind) {
    case StratumKind::SimplexFace: return "simplex-face";
    case StratumKind::CubeFace: return "cube-face";
    case StratumKind::Product: return "product";
    case StratumKind::AdditionalFace: return "additional-face";
  }
  return "?";
}

Stratum Stratum::simplex_face(IndexSet free, std::map<int, int> fixed) {
  Stratum s;
  s.kind = StratumKind::SimplexFace;
  s.free_simplex = std::move(free);
  s.fixed = std::move(fixed);
  s.validate();
  return s;
}

Stratum Stratum::cube_face(IndexSet free, std::map<int, int> fixed) {
  Stratum s;
  s.kind = StratumKind::CubeFace;
  s.free_cube = std::move(free);
  s.fixed = std::move(fixed);
  s.validate();
  return s;
}

int Stratum::dimension() const {
  int d = static_cast<int>(free_cube.size());
  if (!free_simplex.empty()) d += static_cast<int>(free_simplex.size()) - 1;
  return d;
}

int Stratum::fixed_value(int index) const {
  auto it = fixed.find(index);
  if (it == fixed.end())
    throw GeometryError("index " + std::to_string(index) + " is not fixed");
  return it->second;
}

int Stratum::simplex_dependent_index() const {
  if (free_simplex.empty())
    throw GeometryError("stratum has no simplex part");
  if (free_simplex.contains(0)) return 0;
  return free_simplex.members().front();
}

std::vector<int> Stratum::simplex_variables() const {
  if (free_simplex.empty()) return {};
  int dep = simplex_dependent_index();
  std::vector<int> vars;
  for (int i : free_simplex.members())
    if (i != dep) vars.push_back(i);
  return vars;
}

std::vector<int> Stratum::all_variables() const {
  std::vector<int> vars = simplex_variables();
  for (int i : free_cube.members()) vars.push_back(i);
  std::sort(vars.begin(), vars.end());
  return vars;
}

void Stratum::validate() const {
  for (const auto& [i, b] : fixed) {
    if (b != 0 && b != 1) throw GeometryError("fixed value must be 0 or 1");
    if (free_simplex.contains(i) || free_cube.contains(i))
      throw GeometryError("index both free and fixed: " + std::to_string(i));
  }
  for (int i : free_cube.members())
    if (free_simplex.contains(i))
      throw GeometryError("index in both simplex and cube parts");
  if (kind == StratumKind::AdditionalFace &&
      (!boxtimes || boxtimes->empty()))
    throw GeometryError("additional face requires a nonempty boxtimes block");
}

std::string Stratum::label() const {
  std::ostringstream out;
  out << to_string(kind) << "{";
  bool first = true;
  auto item = [&](const std::string& text) {
    if (!first) out << " ";
    out << text;
    first = false;
  };
  if (!free_simplex.empty()) {
    std::string s = "D(";
    for (std::size_t i = 0; i < free_simplex.members().size(); ++i)
      s += (i ? "," : "") + std::to_string(free_simplex.members()[i]);
    item(s + ")");
  }
  if (!free_cube.empty()) {
    std::string s = "Q(";
    for (std::size_t i = 0; i < free_cube.members().size(); ++i)
      s += (i ? "," : "") + std::to_string(free_cube.members()[i]);
    item(s + ")");
  }
  for (const auto& [i, b] : fixed)
    item("p" + std::to_string(i) + "=" + std::to_string(b));
  if (boxtimes) {
    std::string s = "X(";
    for (std::size_t i = 0; i < boxtimes->members().size(); ++i)
      s += (i ? "," : "") + std::to_string(boxtimes->members()[i]);
    item(s + ")");
  }
  out << "}";
  return out.str();
}

std::string Stratum::to_json() const {
  nlohmann::json j;
  j["kind"] = wfblow::to_string(kind);
  if (kind == StratumKind::SimplexFace) {
    j["free"] = free_simplex.members();
  } else if (kind == StratumKind::CubeFace) {
    j["free"] = free_cube.members();
  } else {
    j["free_simplex"] = free_simplex.members();
    j["free_cube"] = free_cube.members();
  }
  nlohmann::json fixed_json = nlohmann::json::object();
  for (const auto& [i, b] : fixed) fixed_json[std::to_string(i)] = b;
  j["fixed"] = fixed_json;
  if (boxtimes) j["boxtimes"] = boxtimes->members();
  return j.dump();
}

Stratum Stratum::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  Stratum s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "simplex-face") s.kind = StratumKind::SimplexFace;
  else if (kind == "cube-face") s.kind = StratumKind::CubeFace;
  else if (kind == "product") s.kind = StratumKind::Product;
  else if (kind == "additional-face") s.kind = StratumKind::AdditionalFace;
  else throw GeometryError("unknown stratum kind: " + kind);

  auto read_set = [&](const char* key, bool primed) {
    std::vector<int> members;
    if (j.contains(key)) members = j.at(key).get<std::vector<int>>();
    return IndexSet(std::move(members), primed);
  };
  if (s.kind == StratumKind::SimplexFace) {
    s.free_simplex = read_set("free", false);
  } else if (s.kind == StratumKind::CubeFace) {
    s.free_cube = read_set("free", true);
  } else {
    s.free_simplex = read_set("free_simplex", false);
    s.free_cube = read_set("free_cube", true);
  }
  if (j.contains("fixed"))
    for (const auto& [key, value] : j.at("fixed").items())
      s.fixed[std::stoi(key)] = value.get<int>();
  if (j.contains("boxtimes")) s.boxtimes = read_set("boxtimes", true);
  s.validate();
  return s;
}

namespace {

void enumerate_subsets(int universe_min, int universe_max, int size,
                       std::vector<int>& current,
                       const std::function<void(const std::vector<int>&)>& emit) {
  if (static_cast<int>(current.size()) == size) {
    emit(current);
    return;
  }
  int start = current.empty() ? universe_min : current.back() + 1;
  for (int i = start; i <= universe_max; ++i) {
    current.push_back(i);
    enumerate_subsets(universe_min, universe_max, size, current, emit);
    current.pop_back();
  }
}

}  // namespace

std::vector<Stratum> enumerate_faces(int n, int k, DomainKind domain) {
  if (n < 1) throw GeometryError("dimension must be positive");
  if (k < 0 || k > n)
    throw GeometryError("face dimension out of range 0.." + std::to_string(n));
  std::vector<Stratum> faces;
  std::vector<int> current;
  if (domain == DomainKind::Simplex) {
    enumerate_subsets(0, n, k + 1, current, [&](const std::vector<int>& free) {
      std::map<int, int> fixed;
      for (int i = 0; i <= n; ++i)
        if (!std::binary_search(free.begin(), free.end(), i)) fixed[i] = 0;
      faces.push_back(Stratum::simplex_face(IndexSet(free), std::move(fixed)));
    });
  } else {
    enumerate_subsets(1, n, k, current, [&](const std::vector<int>& free) {
      std::vector<int> rest;
      for (int i = 1; i <= n; ++i)
        if (!std::binary_search(free.begin(), free.end(), i)) rest.push_back(i);
      int patterns = 1 << rest.size();
      for (int bits = 0; bits < patterns; ++bits) {
        std::map<int, int> fixed;
        for (std::size_t r = 0; r < rest.size(); ++r)
          fixed[rest[r]] = (bits >> r) & 1;
        faces.push_back(Stratum::cube_face(IndexSet(free, true), std::move(fixed)));
      }
    });
  }
  std::sort(faces.begin(), faces.end());
  return faces;
}

Stratum classify_point(const std::vector<double>& p, int n, DomainKind domain) {
  if (static_cast<int>(p.size()) != n)
    throw GeometryError("point has wrong number of coordinates");
  for (double x : p)
    if (!std::isfinite(x)) throw GeometryError("non-finite coordinate");

  auto snap = [](double x) {
    if (std::abs(x) <= kGeomEpsilon) return 0.0;
    if (std::abs(x - 1.0) <= kGeomEpsilon) return 1.0;
    return x;
  };

  if (domain == DomainKind::Simplex) {
    double sum = 0.0;
    std::vector<double> snapped(n + 1);
    for (int i = 1; i <= n; ++i) {
      snapped[i] = snap(p[i - 1]);
      if (snapped[i] < 0.0 || snapped[i] > 1.0)
        throw GeometryError("point outside the closed simplex");
      sum += snapped[i];
    }
    snapped[0] = snap(1.0 - sum);
    if (snapped[0] < 0.0)
      throw GeometryError("point outside the closed simplex (sum > 1)");
    std::vector<int> free;
    std::map<int, int> fixed;
    for (int i = 0; i <= n; ++i) {
      if (snapped[i] > 0.0)
        free.push_back(i);
      else
        fixed[i] = 0;
    }
    return Stratum::simplex_face(IndexSet(std::move(free)), std::move(fixed));
  }

  std::vector<int> free;
  std::map<int, int> fixed;
  for (int i = 1; i <= n; ++i) {
    double x = snap(p[i - 1]);
    if (x < 0.0 || x > 1.0)
      throw GeometryError("point outside the closed cube");
    if (x == 0.0)
      fixed[i] = 0;
    else if (x == 1.0)
      fixed[i] = 1;
    else
      free.push_back(i);
  }
  return Stratum::cube_face(IndexSet(std::move(free), true), std::move(fixed));
}

std::vector<Stratum> additional_faces(const OrderedPath& path, int n) {
  if (path.ambient_dim() != n)
    throw GeometryError("path does not match the ambient dimension");
  int k = path.base_dim();
  if (n - k < 2) return {};

  std::vector<Stratum> faces;
  for (int j = k + 1; j <= n - 1; ++j) {
    Stratum s;
    s.kind = StratumKind::AdditionalFace;
    std::vector<int> box;
    for (int pos = j + 1; pos <= n; ++pos) box.push_back(path.index_at(pos));
    s.boxtimes = IndexSet(std::move(box), true);
    s.fixed[path.index_at(j)] = 0;
    if (k == 0) {
      // Fully blown-up target: the simplex part is absorbed into the cube.
      std::vector<int> free;
      for (int pos = 1; pos <= j - 1; ++pos) free.push_back(path.index_at(pos));
      s.free_cube = IndexSet(std::move(free), true);
    } else if (j == k + 1) {
      s.free_simplex = path.index_set(k);
    } else {
      s.free_simplex = path.index_set(k + 1);
      std::vector<int> free;
      for (int pos = k + 2; pos <= j - 1; ++pos) free.push_back(path.index_at(pos));
      s.free_cube = IndexSet(std::move(free), true);
    }
    s.validate();
    faces.push_back(std::move(s));
  }
  return faces;
}

bool stratum_contains(const Stratum& stratum, const std::map<int, double>& coords,
                      double eps) {
  auto value = [&](int i) {
    auto it = coords.find(i);
    if (it == coords.end())
      throw GeometryError("coordinate p" + std::to_string(i) + " missing");
    return it->second;
  };
  for (const auto& [i, b] : stratum.fixed)
    if (std::abs(value(i) - b) > eps) return false;
  for (int i : stratum.free_cube.members()) {
    double x = value(i);
    if (x <= eps || x >= 1.0 - eps) return false;
  }
  if (!stratum.free_simplex.empty()) {
    double sum = 0.0;
    for (int i : stratum.free_simplex.members())
      if (i != 0) {
        double x = value(i);
        if (x <= eps) return false;
        sum += x;
      }
    if (stratum.free_simplex.contains(0)) {
      if (1.0 - sum <= eps) return false;  // derived p^0 must stay positive
    } else if (std::abs(sum - 1.0) > eps) {
      return false;
    }
  }
  if (stratum.boxtimes) {
    double sum = 0.0;
    bool in_range = true;
    for (int i : stratum.boxtimes->members()) {
      double x = value(i);
      if (x < -eps || x > 1.0 + eps) in_range = false;
      sum += std::abs(x);
    }
    if (!in_range || sum <= eps) return false;
  }
  return true;
}

}  // namespace wfblow
