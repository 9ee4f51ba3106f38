#include "wfblow/blowup.hpp"

#include <algorithm>
#include <cmath>

namespace wfblow {

namespace {

RationalFunction var(int i) { return RationalFunction::variable(i); }

void certify_chart_roundtrip(const BlowupChart& chart) {
  for (int c : {chart.sigma, chart.rho}) {
    RationalFunction roundtrip = chart.inverse.at(c).substitute(chart.forward);
    if (!roundtrip.equals(var(c)))
      throw AlgebraError("blow-up chart fails the roundtrip identity");
  }
}

}  // namespace

BlowupChart make_chart(int sigma, int rho, bool flipped) {
  if (sigma == rho) throw std::domain_error("blow-up needs distinct indices");
  if (sigma == 0 || rho == 0)
    throw std::domain_error("blow-up may not move coordinate 0");

  BlowupChart chart;
  chart.sigma = sigma;
  chart.rho = rho;
  chart.flipped = flipped;

  RationalFunction sum = var(sigma) + var(rho);
  chart.forward[sigma] = sum;
  chart.forward[rho] = flipped ? var(sigma) / sum : var(rho) / sum;
  if (flipped) {
    chart.inverse[sigma] = var(sigma) * var(rho);
    chart.inverse[rho] = var(sigma) * (RationalFunction::constant(1) - var(rho));
  } else {
    chart.inverse[sigma] =
        var(sigma) * (RationalFunction::constant(1) - var(rho));
    chart.inverse[rho] = var(sigma) * var(rho);
  }
  certify_chart_roundtrip(chart);
  return chart;
}

namespace {

// Closed-form composite maps: telescoping sums forward, cumulative products
// backward, with flipped coordinates entering through their complement.
std::map<int, RationalFunction> closed_form_forward(const BlowupChain& chain) {
  const OrderedPath& path = chain.path;
  int k = path.base_dim(), n = path.ambient_dim();
  auto flipped = [&](int j) {
    int m = n - j + 1;
    return m >= 1 && m <= static_cast<int>(chain.steps.size()) &&
           chain.steps[m - 1].flipped;
  };
  auto tail_sum = [&](int from) {
    RationalFunction s = RationalFunction::constant(0);
    for (int l = from; l <= n; ++l) s = s + var(path.index_at(l));
    return s;
  };
  std::map<int, RationalFunction> out;
  out[path.index_at(k + 1)] = tail_sum(k + 1);
  for (int j = k + 2; j <= n; ++j) {
    RationalFunction value = tail_sum(j) / tail_sum(j - 1);
    if (flipped(j)) value = RationalFunction::constant(1) - value;
    out[path.index_at(j)] = value;
  }
  return out;
}

std::map<int, RationalFunction> closed_form_inverse(const BlowupChain& chain) {
  const OrderedPath& path = chain.path;
  int k = path.base_dim(), n = path.ambient_dim();
  auto flipped = [&](int j) {
    int m = n - j + 1;
    return m >= 1 && m <= static_cast<int>(chain.steps.size()) &&
           chain.steps[m - 1].flipped;
  };
  auto factor = [&](int j) {
    RationalFunction p = var(path.index_at(j));
    return flipped(j) ? RationalFunction::constant(1) - p : p;
  };
  std::map<int, RationalFunction> out;
  RationalFunction prefix = RationalFunction::constant(1);
  for (int j = k + 1; j <= n; ++j) {
    prefix = prefix * factor(j);
    if (j < n)
      out[path.index_at(j)] =
          prefix * (RationalFunction::constant(1) - factor(j + 1));
    else
      out[path.index_at(j)] = prefix;
  }
  return out;
}

}  // namespace

BlowupChain make_chain(const OrderedPath& path, int n,
                       std::vector<bool> flips) {
  if (path.ambient_dim() != n)
    throw std::domain_error("path does not match ambient dimension");
  int k = path.base_dim();
  int length = n - k - 1;
  if (length < 1)
    throw std::domain_error("blow-up chain needs n - k >= 2");
  if (!flips.empty() && static_cast<int>(flips.size()) != length)
    throw std::domain_error("orientation flags must match the step count");
  for (int j = k + 1; j <= n; ++j)
    if (path.index_at(j) == 0)
      throw std::domain_error("blow-up path may not move coordinate 0");

  BlowupChain chain{path, {}, {}, {}};
  for (int m = 1; m <= length; ++m) {
    bool flip = !flips.empty() && flips[m - 1];
    chain.steps.push_back(
        make_chart(path.index_at(n - m), path.index_at(n - m + 1), flip));
  }

  // Composite forward: fold step bindings over the accumulating map.
  for (int j = k + 1; j <= n; ++j) {
    int c = path.index_at(j);
    chain.forward[c] = var(c);
  }
  for (const auto& step : chain.steps) {
    std::map<int, RationalFunction> next = chain.forward;
    next[step.sigma] = step.forward.at(step.sigma).substitute(chain.forward);
    next[step.rho] = step.forward.at(step.rho).substitute(chain.forward);
    chain.forward = std::move(next);
  }

  // Composite inverse: fold from the last step backwards.
  std::map<int, RationalFunction> back;
  for (int j = k + 1; j <= n; ++j) {
    int c = path.index_at(j);
    back[c] = var(c);
  }
  for (auto it = chain.steps.rbegin(); it != chain.steps.rend(); ++it) {
    std::map<int, RationalFunction> next = back;
    next[it->sigma] = it->inverse.at(it->sigma).substitute(back);
    next[it->rho] = it->inverse.at(it->rho).substitute(back);
    back = std::move(next);
  }
  chain.inverse = std::move(back);

  // Index bookkeeping is the main hazard here; cross-check the composition
  // against the closed telescoping forms before accepting the chain.
  auto closed_fwd = closed_form_forward(chain);
  auto closed_inv = closed_form_inverse(chain);
  for (int j = k + 1; j <= n; ++j) {
    int c = path.index_at(j);
    if (!chain.forward.at(c).equals(closed_fwd.at(c)))
      throw AlgebraError("composed forward map disagrees with closed form at p" +
                         std::to_string(c));
    if (!chain.inverse.at(c).equals(closed_inv.at(c)))
      throw AlgebraError("composed inverse map disagrees with closed form at p" +
                         std::to_string(c));
  }
  return chain;
}

std::map<int, double> BlowupChain::map_point(
    const std::map<int, double>& p) const {
  std::map<int, double> current = p;
  for (const auto& step : steps) {
    double ps = current.at(step.sigma);
    double pr = current.at(step.rho);
    double sum = ps + pr;
    current[step.sigma] = sum;
    if (std::abs(sum) < kGeomEpsilon) {
      // Boundary rule at the blown-up locus.
      current[step.rho] = step.flipped ? 1.0 : 0.0;
    } else {
      current[step.rho] = (step.flipped ? ps : pr) / sum;
    }
  }
  return current;
}

std::map<int, double> BlowupChain::map_point_inverse(
    const std::map<int, double>& q) const {
  std::map<int, double> current = q;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    double s = current.at(it->sigma);
    double r = current.at(it->rho);
    if (it->flipped) {
      current[it->sigma] = s * r;
      current[it->rho] = s * (1.0 - r);
    } else {
      current[it->sigma] = s * (1.0 - r);
      current[it->rho] = s * r;
    }
  }
  return current;
}

FaceImage map_face(const BlowupChart& chart, const Stratum& face) {
  bool sigma_free = face.free_simplex.contains(chart.sigma);
  bool rho_free = face.free_simplex.contains(chart.rho);
  bool sigma_zero = face.is_fixed(chart.sigma) && face.fixed_value(chart.sigma) == 0;
  bool rho_zero = face.is_fixed(chart.rho) && face.fixed_value(chart.rho) == 0;

  if (!(sigma_free || sigma_zero) || !(rho_free || rho_zero))
    return {std::nullopt, "face does not carry the chart coordinates"};
  if (!sigma_free && !rho_free)
    return {std::nullopt,
            "no smooth image: face lies in the blown-up locus p" +
                std::to_string(chart.sigma) + "+p" + std::to_string(chart.rho) +
                "=0"};

  Stratum image = face;
  image.kind = StratumKind::Product;
  if (sigma_free && rho_free) {
    image.free_simplex = image.free_simplex.without(chart.rho);
    image.free_cube = image.free_cube.with(chart.rho);
  } else if (sigma_free) {  // rho fixed at 0
    image.fixed[chart.rho] = chart.flipped ? 1 : 0;
  } else {  // sigma fixed at 0, rho free
    image.free_simplex =
        image.free_simplex.without(chart.rho).with(chart.sigma);
    image.fixed.erase(chart.sigma);
    image.fixed[chart.rho] = chart.flipped ? 0 : 1;
  }
  image.validate();
  return {image, ""};
}

FaceImage map_face_inverse(const BlowupChart& chart, const Stratum& face) {
  if (!face.free_simplex.contains(chart.sigma))
    return {std::nullopt, "not an image stratum: p" +
                              std::to_string(chart.sigma) + " is not free"};
  Stratum source = face;
  int zero_value = chart.flipped ? 1 : 0;
  if (face.free_cube.contains(chart.rho)) {
    source.free_cube = source.free_cube.without(chart.rho);
    source.free_simplex = source.free_simplex.with(chart.rho);
  } else if (face.is_fixed(chart.rho) &&
             face.fixed_value(chart.rho) == zero_value) {
    source.fixed[chart.rho] = 0;
  } else if (face.is_fixed(chart.rho)) {
    source.free_simplex =
        source.free_simplex.without(chart.sigma).with(chart.rho);
    source.fixed.erase(chart.rho);
    source.fixed[chart.sigma] = 0;
  } else {
    return {std::nullopt, "not an image stratum: p" + std::to_string(chart.rho) +
                              " is neither free on the cube side nor fixed"};
  }
  source.validate();
  return {source, ""};
}

namespace {

// For a fully blown-up chain the simplex remnant Delta_1^{(0, i_1)} is the
// first cube coordinate; convert between the two representations.
Stratum to_cube_form(const BlowupChain& chain, Stratum s) {
  int first = chain.path.index_at(1);
  if (s.free_simplex.contains(0) && s.free_simplex.contains(first)) {
    s.free_simplex = IndexSet{};
    s.free_cube = s.free_cube.with(first);
    s.fixed.erase(0);
  } else if (s.free_simplex.contains(0)) {
    s.free_simplex = IndexSet{};
    s.fixed.erase(0);
    s.fixed[first] = 0;
  } else if (s.free_simplex.contains(first)) {
    s.free_simplex = IndexSet{};
    s.fixed[first] = 1;
    s.fixed.erase(0);
  }
  s.kind = StratumKind::CubeFace;
  std::map<int, int> fixed;
  for (const auto& [i, b] : s.fixed)
    if (i != 0) fixed[i] = b;
  s.fixed = std::move(fixed);
  s.validate();
  return s;
}

Stratum from_cube_form(const BlowupChain& chain, Stratum s, int n) {
  int first = chain.path.index_at(1);
  if (s.free_cube.contains(first)) {
    s.free_cube = s.free_cube.without(first);
    s.free_simplex = IndexSet{0, first};
  } else if (s.is_fixed(first) && s.fixed_value(first) == 0) {
    s.free_simplex = IndexSet{0};
    s.fixed.erase(first);
  } else {
    s.free_simplex = IndexSet{first};
    s.fixed.erase(first);
    s.fixed[0] = 0;
  }
  s.kind = StratumKind::Product;
  (void)n;
  s.validate();
  return s;
}

}  // namespace

FaceImage map_face(const BlowupChain& chain, const Stratum& face) {
  Stratum current = face;
  for (const auto& step : chain.steps) {
    FaceImage next = map_face(step, current);
    if (!next.image) return next;
    current = *next.image;
  }
  if (chain.base_dim() == 0) current = to_cube_form(chain, current);
  return {current, ""};
}

FaceImage map_face_inverse(const BlowupChain& chain, const Stratum& face) {
  Stratum current = face;
  if (chain.base_dim() == 0)
    current = from_cube_form(chain, current, chain.ambient_dim());
  for (auto it = chain.steps.rbegin(); it != chain.steps.rend(); ++it) {
    FaceImage next = map_face_inverse(*it, current);
    if (!next.image) return next;
    current = *next.image;
  }
  current.kind = StratumKind::SimplexFace;
  if (!current.free_cube.empty())
    return {std::nullopt, "face did not fold back onto the simplex"};
  current.validate();
  return {current, ""};
}

Stratum transformed_stratum_at(const BlowupChain& chain, int d) {
  const OrderedPath& path = chain.path;
  int k = path.base_dim(), n = path.ambient_dim();
  if (d < k || d > n) throw GeometryError("level out of range");

  auto rule_value = [&](int j) {
    int m = n - j + 1;
    bool flipped = m >= 1 && m <= static_cast<int>(chain.steps.size()) &&
                   chain.steps[m - 1].flipped;
    return flipped ? 1 : 0;
  };

  Stratum s;
  std::map<int, int> fixed;
  for (int j = d + 1; j <= n; ++j) fixed[path.index_at(j)] = rule_value(j);

  if (k == 0) {
    std::vector<int> free;
    for (int j = 1; j <= d; ++j) free.push_back(path.index_at(j));
    s = Stratum::cube_face(IndexSet(std::move(free), true), std::move(fixed));
    return s;
  }

  s.kind = StratumKind::Product;
  if (d == k) {
    s.free_simplex = path.index_set(k);
  } else {
    s.free_simplex = path.index_set(k + 1);
    std::vector<int> free;
    for (int j = k + 2; j <= d; ++j) free.push_back(path.index_at(j));
    s.free_cube = IndexSet(std::move(free), true);
  }
  s.fixed = std::move(fixed);
  s.validate();
  return s;
}

StratifiedFunction transform_solution(const ExtensionResult& ext,
                                      const BlowupChain& chain) {
  if (ext.path != chain.path)
    throw std::domain_error("extension path does not match the chain");
  const OrderedPath& path = chain.path;
  int k = path.base_dim(), n = path.ambient_dim();

  auto flipped = [&](int j) {
    int m = n - j + 1;
    return m >= 1 && m <= static_cast<int>(chain.steps.size()) &&
           chain.steps[m - 1].flipped;
  };
  auto vanishing_factor = [&](int j) {
    RationalFunction p = var(path.index_at(j));
    return flipped(j) ? p : RationalFunction::constant(1) - p;
  };

  StratifiedFunction out(ext.pieces.time_factor());

  // Product-form pieces: the level-(k+1) extension times one factor per
  // further cube coordinate.
  const RationalFunction& gate_piece = ext.piece_at(k + 1);
  auto piece_at_level = [&](int d) {
    RationalFunction value = gate_piece;
    for (int j = k + 2; j <= d; ++j) value = value * vanishing_factor(j);
    return value;
  };

  // Certify the product form against the pushforward through the inverse
  // maps, restricted to each level.
  for (int d = k + 1; d <= n; ++d) {
    std::map<int, RationalFunction> restricted = chain.inverse;
    if (d < n) {
      std::map<int, RationalFunction> later;
      for (int j = d + 1; j <= n; ++j)
        later[path.index_at(j)] =
            RationalFunction::constant(flipped(j) ? 1 : 0);
      for (auto& [c, rf] : restricted) rf = rf.substitute(later);
    }
    RationalFunction pushed = ext.piece_at(d).substitute(restricted);
    if (!pushed.equals(piece_at_level(d)))
      throw AlgebraError(
          "transformed solution disagrees with the pushforward at level " +
          std::to_string(d));
  }

  if (k == 0) {
    // Single closed-form piece on the whole closed cube.
    out.add_piece(transformed_stratum_at(chain, n), piece_at_level(n));
    return out;
  }

  out.add_piece(transformed_stratum_at(chain, k), ext.piece_at(k));
  for (int d = k + 1; d <= n; ++d)
    out.add_piece(transformed_stratum_at(chain, d), piece_at_level(d));
  return out;
}

OperatorSpec transform_operator(const BlowupChain& chain, int n) {
  std::vector<bool> flips;
  for (const auto& step : chain.steps) flips.push_back(step.flipped);
  return transformed_operator(chain.path, n, std::move(flips));
}

}  // namespace wfblow
