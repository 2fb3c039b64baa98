#pragma once

// Mixed-copy vectors Z_alpha (Y on H_alpha, X elsewhere), the PQD comparison
// of U = (f_alpha(Z_alpha)) against V = (f_alpha(X)), stochastic order of
// their maxima, and the disjoint-product relation between X and (X, Y).

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bkrlab/field.hpp"
#include "bkrlab/report.hpp"

namespace bkr {

enum class Direction { increasing, decreasing };

inline const char* direction_name(Direction d) { return d == Direction::increasing ? "increasing" : "decreasing"; }

inline constexpr std::size_t kMaxPqdGrid = 100000;
inline constexpr std::size_t kMaxPqdComponents = 3;

struct MixedCopySpec {
  std::vector<CoordSet> H;
  std::vector<TabulatedFunction> functions;
  Direction direction = Direction::increasing;
  bool require_monotone = true;  // false skips the hypothesis check
};

/// Points differing in one coordinate are ordered by label; f must follow
/// that order (or reverse it when decreasing). Labels are strictly increasing
/// by construction, so neighbouring labels suffice.
inline bool monotone_check(const TabulatedFunction& f, Direction dir) {
  const auto& sp = f.space();
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t i = 0; i < sp.coords(); ++i) {
      if (sp.digit(x, i) + 1 >= sp.size(i)) continue;
      const double lo = f[x], hi = f[x + sp.stride(i)];
      if (dir == Direction::increasing ? lo > hi : lo < hi) return false;
    }
  return true;
}

/// Same function on the space whose label orders are all reversed (labels
/// negated and listed backwards). A decreasing f becomes increasing.
inline TabulatedFunction reverse_label_order(const TabulatedFunction& f) {
  const auto& sp = f.space();
  std::vector<std::vector<double>> labels, marg;
  for (std::size_t i = 0; i < sp.coords(); ++i) {
    std::vector<double> l(sp.labels(i).rbegin(), sp.labels(i).rend());
    for (auto& v : l) v = -v;
    labels.push_back(std::move(l));
    marg.emplace_back(sp.marginal(i).rbegin(), sp.marginal(i).rend());
  }
  auto rs = share(ProductSpace(sp.sizes(), std::move(labels), std::move(marg)));
  std::vector<double> v(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    std::size_t y = 0;
    for (std::size_t i = 0; i < sp.coords(); ++i) y += (sp.size(i) - 1 - sp.digit(x, i)) * sp.stride(i);
    v[y] = f[x];
  }
  return TabulatedFunction(std::move(rs), std::move(v));
}

/// Step distribution: sorted distinct values with their probabilities.
using Distribution = std::vector<std::pair<double, double>>;

inline Distribution make_distribution(std::map<double, double> mass) { return {mass.begin(), mass.end()}; }

inline double expectation(const Distribution& d) {
  double s = 0.0;
  for (const auto& [v, p] : d) s += v * p;
  return s;
}

/// small <=_ST big: P(big <= c) <= P(small <= c) at every atom of either law.
/// Both CDFs are step functions jumping only at atoms, so this grid is exhaustive.
inline InequalityReport st_compare(std::string name, const Distribution& small, const Distribution& big) {
  std::vector<double> grid;
  for (const auto& a : small) grid.push_back(a.first);
  for (const auto& a : big) grid.push_back(a.first);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double worst_slack = 0.0, worst_lhs = 0.0, worst_rhs = 0.0, worst_c = 0.0;
  bool first = true;
  std::size_t is = 0, ib = 0;
  double cs = 0.0, cb = 0.0;
  for (double c : grid) {
    while (is < small.size() && small[is].first <= c) cs += small[is++].second;
    while (ib < big.size() && big[ib].first <= c) cb += big[ib++].second;
    if (first || cs - cb < worst_slack) {
      worst_slack = cs - cb;
      worst_lhs = cb;
      worst_rhs = cs;
      worst_c = c;
      first = false;
    }
  }
  return make_report(std::move(name), worst_lhs, worst_rhs, "c=" + fmt_short(worst_c));
}

namespace detail {

inline void require_pair_budget(const ProductSpace& sp, const char* what) {
  require_exact(sp, what);
  const std::size_t N = sp.point_count();
  if (N > kExactPointBudget / N) throw InvalidInput(std::string(what) + ": doubled space exceeds the exact budget");
}

/// Linear index of the mixed point z = (y on H, x elsewhere) is xpart[x] + ypart[y].
struct MixTable {
  std::vector<std::size_t> xpart, ypart;
};

inline MixTable mix_table(const ProductSpace& sp, CoordSet H) {
  MixTable t{std::vector<std::size_t>(sp.point_count(), 0), std::vector<std::size_t>(sp.point_count(), 0)};
  for (std::size_t x = 0; x < sp.point_count(); ++x)
    for (std::size_t i = 0; i < sp.coords(); ++i) {
      const std::size_t part = sp.digit(x, i) * sp.stride(i);
      (H.contains(i) ? t.ypart[x] : t.xpart[x]) += part;
    }
  return t;
}

inline void validate_spec(const MixedCopySpec& spec, const char* what) {
  if (spec.functions.empty()) throw InvalidInput(std::string(what) + ": need at least one function");
  if (spec.H.size() != spec.functions.size())
    throw InvalidInput(std::string(what) + ": H has " + std::to_string(spec.H.size()) + " entries for " +
                       std::to_string(spec.functions.size()) + " functions");
  const auto& sp = spec.functions[0].space();
  for (std::size_t a = 0; a < spec.functions.size(); ++a) {
    require_same_space(spec.functions[a].space(), sp, what);
    if (!spec.H[a].subset_of(sp.full_set()))
      throw InvalidInput(std::string(what) + ": H[" + std::to_string(a) + "] out of range");
    if (spec.require_monotone && !monotone_check(spec.functions[a], spec.direction))
      throw InvalidInput(std::string(what) + ": function " + std::to_string(a) + " is not " +
                         direction_name(spec.direction));
  }
  require_pair_budget(sp, what);
}

/// Visits (x, y, weight) over P x P, skipping null points.
template <class Visit>
void for_each_pair(const ProductSpace& sp, Visit&& visit) {
  const auto p = point_probabilities(sp);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    for (std::size_t y = 0; y < p.size(); ++y)
      if (p[y] != 0.0) visit(x, y, p[x] * p[y]);
  }
}

}  // namespace detail

struct PqdResult {
  InequalityReport upper;  // P(U >= c) <= P(V >= c)
  InequalityReport lower;  // P(U <= c) <= P(V <= c)
  std::size_t grid_points = 0;
  /// Largest |P(U in tail) - P(V in tail)| over the grid, both tails.
  double max_abs_difference = 0.0;
};

/// Checks both orthant inequalities at every c in the product of the images.
inline PqdResult pqd_check(const MixedCopySpec& spec) {
  detail::validate_spec(spec, "pqd_check");
  const std::size_t m = spec.functions.size();
  if (m > kMaxPqdComponents) throw InvalidInput("pqd_check: at most 3 functions in exact mode");
  const auto& sp = spec.functions[0].space();

  // Per-component images and the value -> grid index maps.
  std::vector<std::vector<double>> image(m);
  std::vector<std::vector<std::size_t>> level(m, std::vector<std::size_t>(sp.point_count()));
  std::size_t G = 1;
  std::vector<std::size_t> gstride(m);
  for (std::size_t a = m; a-- > 0;) {
    const auto& f = spec.functions[a];
    image[a].assign(f.values().begin(), f.values().end());
    std::sort(image[a].begin(), image[a].end());
    image[a].erase(std::unique(image[a].begin(), image[a].end()), image[a].end());
    for (std::size_t x = 0; x < f.size(); ++x)
      level[a][x] = static_cast<std::size_t>(std::lower_bound(image[a].begin(), image[a].end(), f[x]) -
                                             image[a].begin());
    gstride[a] = G;
    G *= image[a].size();
    if (G > kMaxPqdGrid) throw InvalidInput("pqd_check: value grid exceeds 100000 points");
  }

  std::vector<double> pu(G, 0.0), pv(G, 0.0);
  const auto p = point_probabilities(sp);
  for (std::size_t x = 0; x < p.size(); ++x) {
    std::size_t g = 0;
    for (std::size_t a = 0; a < m; ++a) g += level[a][x] * gstride[a];
    pv[g] += p[x];
  }
  std::vector<detail::MixTable> mix;
  for (auto H : spec.H) mix.push_back(detail::mix_table(sp, H));
  detail::for_each_pair(sp, [&](std::size_t x, std::size_t y, double w) {
    std::size_t g = 0;
    for (std::size_t a = 0; a < m; ++a) g += level[a][mix[a].xpart[x] + mix[a].ypart[y]] * gstride[a];
    pu[g] += w;
  });

  // Orthant sums, one axis at a time: prefix sums give P(. <= c), suffix
  // sums give P(. >= c).
  auto cumulate = [&](std::vector<double> t, bool upper) {
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t k = image[a].size(), s = gstride[a];
      if (upper) {
        for (std::size_t g = G; g-- > 0;)
          if ((g / s) % k + 1 < k) t[g] += t[g + s];
      } else {
        for (std::size_t g = 0; g < G; ++g)
          if ((g / s) % k > 0) t[g] += t[g - s];
      }
    }
    return t;
  };

  PqdResult r;
  r.grid_points = G;
  auto worst = [&](const char* name, const std::vector<double>& u, const std::vector<double>& v, const char* rel) {
    std::size_t arg = 0;
    for (std::size_t g = 0; g < G; ++g) {
      r.max_abs_difference = std::max(r.max_abs_difference, std::abs(u[g] - v[g]));
      if (v[g] - u[g] < v[arg] - u[arg]) arg = g;
    }
    std::string c = "c=(";
    for (std::size_t a = 0; a < m; ++a) c += (a ? "," : "") + fmt_short(image[a][(arg / gstride[a]) % image[a].size()]);
    return make_report(name, u[arg], v[arg], c + ") tail " + rel);
  };
  const auto ug = cumulate(pu, true), vg = cumulate(pv, true);
  const auto ul = cumulate(pu, false), vl = cumulate(pv, false);
  r.upper = worst("pqd_upper", ug, vg, ">=");
  r.lower = worst("pqd_lower", ul, vl, "<=");
  return r;
}

struct StResult {
  InequalityReport dominance;    // P(max f(Z) <= c) <= P(max f(X) <= c), worst c
  InequalityReport expectation;  // E max f(X) <= E max f(Z)
  Distribution mixed;            // law of max_alpha f_alpha(Z_alpha)
  Distribution plain;            // law of max_alpha f_alpha(X)
};

inline StResult st_max_check(const MixedCopySpec& spec) {
  detail::validate_spec(spec, "st_max_check");
  const auto& sp = spec.functions[0].space();
  const auto p = point_probabilities(sp);
  std::map<double, double> plain, mixed;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    double v = 0.0;
    for (const auto& f : spec.functions) v = std::max(v, f[x]);
    plain[v] += p[x];
  }
  std::vector<detail::MixTable> mix;
  for (auto H : spec.H) mix.push_back(detail::mix_table(sp, H));
  detail::for_each_pair(sp, [&](std::size_t x, std::size_t y, double w) {
    double v = 0.0;
    for (std::size_t a = 0; a < spec.functions.size(); ++a)
      v = std::max(v, spec.functions[a][mix[a].xpart[x] + mix[a].ypart[y]]);
    mixed[v] += w;
  });
  StResult r;
  r.plain = make_distribution(std::move(plain));
  r.mixed = make_distribution(std::move(mixed));
  r.dominance = st_compare("st_max", r.plain, r.mixed);
  r.expectation = make_report("st_max_mean", expectation(r.plain), expectation(r.mixed));
  return r;
}

struct LoResult {
  InequalityReport dominance;    // max f(X)g(X) <=_ST max f(X)g(Y) over disjoint pairs
  InequalityReport expectation;  // E of the left <= E of the right
  InequalityReport bkr_bound;    // E of the right <= E max f * E max g
  Distribution same_copy;
  Distribution two_copy;
};

/// Both families must be monotone in the common direction `dir`.
inline LoResult lo_check(const FunctionFamily& F, const FunctionFamily& G, Direction dir = Direction::increasing) {
  require_same_space(F.space(), G.space(), "lo_check");
  for (const auto* fam : {&F, &G})
    for (std::size_t a = 0; a < fam->size(); ++a)
      if (!monotone_check((*fam)[a].fn, dir))
        throw InvalidInput("lo_check: member " + std::to_string(a) + " is not " + direction_name(dir));
  const auto& sp = F.space();
  detail::require_pair_budget(sp, "lo_check");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < F.size(); ++a)
    for (std::size_t b = 0; b < G.size(); ++b)
      if (F[a].dep.disjoint(G[b].dep)) pairs.emplace_back(a, b);

  const auto p = point_probabilities(sp);
  std::map<double, double> same, two;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    double v = 0.0;
    for (auto [a, b] : pairs) v = std::max(v, F[a].fn[x] * G[b].fn[x]);
    same[v] += p[x];
  }
  detail::for_each_pair(sp, [&](std::size_t x, std::size_t y, double w) {
    double v = 0.0;
    for (auto [a, b] : pairs) v = std::max(v, F[a].fn[x] * G[b].fn[y]);
    two[v] += w;
  });
  LoResult r;
  r.same_copy = make_distribution(std::move(same));
  r.two_copy = make_distribution(std::move(two));
  r.dominance = st_compare("lo", r.same_copy, r.two_copy);
  r.expectation = make_report("lo_mean", expectation(r.same_copy), expectation(r.two_copy));
  r.bkr_bound = make_report("lo_bkr", expectation(r.two_copy),
                            bkr::expectation(family_sup(F)) * bkr::expectation(family_sup(G)));
  return r;
}

}  // namespace bkr
