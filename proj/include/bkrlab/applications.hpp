#pragma once

// Ready-made families: order statistics (products, sums, exponentials), the
// X(1 - Y) two-copy family, worker allocation counts and trail counts on
// random graphs.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bkrlab/inequalities.hpp"
#include "bkrlab/stochastic_order.hpp"

namespace bkr {

/// All k-subsets of {0..n-1}, in increasing mask order.
inline std::vector<CoordSet> k_subsets(std::size_t n, std::size_t k) {
  std::vector<CoordSet> out;
  for (auto K : all_subsets(n))
    if (K.size() == k) out.push_back(K);
  return out;
}

/// f_alpha(x) = fn(labels of x restricted to alpha) for each alpha in `subsets`.
inline FunctionFamily subset_family(const SpacePtr& sp, const std::vector<CoordSet>& subsets,
                                    const std::function<double(const std::vector<double>&)>& fn) {
  std::vector<FamilyMember> mem;
  for (auto A : subsets) {
    auto f = TabulatedFunction::from_labels(sp, [&](std::span<const double> x) {
      std::vector<double> xa;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (A.contains(i)) xa.push_back(x[i]);
      return fn(xa);
    });
    mem.push_back({std::move(f), A});
  }
  return FunctionFamily(std::move(mem));
}

inline double product_of(const std::vector<double>& v) {
  double p = 1.0;
  for (double x : v) p *= x;
  return p;
}

inline double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline bool labels_nonnegative(const ProductSpace& sp) {
  for (const auto& l : sp.all_labels())
    for (double v : l)
      if (v < 0.0) return false;
  return true;
}

/// Expectation of h(sorted labels, largest first) under P.
inline double order_stat_expectation(const ProductSpace& sp, const std::function<double(const std::vector<double>&)>& h) {
  const auto p = point_probabilities(sp);
  double s = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    std::vector<double> v(sp.coords());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sp.labels(i)[sp.digit(x, i)];
    std::sort(v.begin(), v.end(), std::greater<>());
    s += p[x] * h(v);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Order statistics.

struct OrderStatOptions {
  std::size_t k = 1;
  std::size_t l = 1;
  std::vector<double> t{0.5, 1.0, 2.0};
  EvalOptions eval;
};

inline InequalityReport renamed(InequalityReport r, std::string name) {
  r.name = std::move(name);
  return r;
}

inline std::string fmt_t(double t) { return fmt_short(t); }

/// The chain E X[1] E X[2] <= E X[1]X[2] <= (E X[1])^2 <= E X[1]^2 (X[1] the
/// largest), the k,l product and sum families, and the exponential families.
/// The leftmost link comes from association, not from the disjoint-occurrence
/// bound, and is reported as an observation. With negative labels only the
/// exponential families apply.
inline std::vector<InequalityReport> order_stat_suite(const SpacePtr& sp, const OrderStatOptions& o = {}) {
  const std::size_t n = sp->coords();
  if (n < 2) throw InvalidInput("order statistics need at least two coordinates");
  if (o.k < 1 || o.l < 1 || o.k > n || o.l > n) throw InvalidInput("order statistics: k and l must be in [1, n]");
  std::vector<InequalityReport> out;
  const auto singles = k_subsets(n, 1);

  if (labels_nonnegative(*sp)) {
    const double e1 = order_stat_expectation(*sp, [](const auto& v) { return v[0]; });
    const double e2 = order_stat_expectation(*sp, [](const auto& v) { return v[1]; });
    const double e12 = order_stat_expectation(*sp, [](const auto& v) { return v[0] * v[1]; });
    const double e1sq = order_stat_expectation(*sp, [](const auto& v) { return v[0] * v[0]; });
    out.push_back(as_observation(make_report("chain_association", e1 * e2, e12, "E X[1] E X[2] <= E X[1]X[2]")));
    const auto F = subset_family(sp, singles, product_of);
    out.push_back(renamed(eval_a(F, F, o.eval), "chain_bkr"));
    out.push_back(make_report("chain_jensen", e1 * e1, e1sq, "(E X[1])^2 <= E X[1]^2"));

    const auto P = subset_family(sp, k_subsets(n, o.k), product_of);
    const auto Q = subset_family(sp, k_subsets(n, o.l), product_of);
    out.push_back(renamed(eval_a(P, Q, o.eval), "product_k" + std::to_string(o.k) + "_l" + std::to_string(o.l)));
    const auto S = subset_family(sp, k_subsets(n, o.k), sum_of);
    const auto T = subset_family(sp, k_subsets(n, o.l), sum_of);
    out.push_back(renamed(eval_a(S, T, o.eval), "sum_k" + std::to_string(o.k) + "_l" + std::to_string(o.l)));
  }

  for (double t : o.t) {
    if (!(t > 0.0)) throw InvalidInput("order statistics: t must be positive");
    const auto M = subset_family(sp, singles, [t](const auto& v) { return std::exp(t * v[0]); });
    out.push_back(renamed(eval_a(M, M, o.eval), "mgf_t" + fmt_t(t)));
    const auto L = subset_family(sp, singles, [t](const auto& v) { return std::exp(-t * v[0]); });
    out.push_back(renamed(eval_a(L, L, o.eval), "laplace_t" + fmt_t(t)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// X(1 - Y).

struct DualXyOptions {
  std::size_t k = 1;
  std::size_t l = 1;
  EvalOptions eval;
};

/// Two-copy bound for f_alpha = prod x_j (|alpha| = k), g_beta = prod (1 - x_j)
/// (|beta| = l). Dropping the disjointness restriction reverses the
/// inequality; that reversed link is reported as an observation.
inline std::vector<InequalityReport> dual_xy_suite(const SpacePtr& sp, const DualXyOptions& o = {}) {
  for (const auto& labels : sp->all_labels())
    for (double v : labels)
      if (v < 0.0 || v > 1.0) throw InvalidInput("dual-xy: labels must lie in [0, 1]");
  const std::size_t n = sp->coords();
  if (o.k < 1 || o.l < 1 || o.k > n || o.l > n) throw InvalidInput("dual-xy: k and l must be in [1, n]");
  const auto F = subset_family(sp, k_subsets(n, o.k), product_of);
  const auto G = subset_family(sp, k_subsets(n, o.l), [](const auto& v) {
    double p = 1.0;
    for (double x : v) p *= 1.0 - x;
    return p;
  });
  std::vector<InequalityReport> out;
  auto d = eval_a_dual(F, G, o.eval);
  const double same_copy = d.rhs;
  out.push_back(renamed(std::move(d), "dual_xy"));
  out.push_back(as_observation(make_report("dual_xy_unrestricted", same_copy,
                                           expectation(family_sup(F)) * expectation(family_sup(G)),
                                           "E sup f(X) g(X) <= E sup f(X) g(Y)")));
  return out;
}

// ---------------------------------------------------------------------------
// Worker allocation.

inline constexpr std::size_t kMaxTasks = 16;

/// Worker i's coordinate label v indexes states[i][v]: the task sets that
/// worker can fill in that state (task sets as bit masks over the task list).
struct AllocationScenario {
  std::vector<std::vector<std::vector<std::uint32_t>>> states;
  std::vector<std::vector<double>> marginals;

  SpacePtr space() const {
    std::vector<std::size_t> sizes;
    for (const auto& s : states) sizes.push_back(s.size());
    return share(ProductSpace(sizes, {}, marginals));
  }
};

/// Ways workers in `alpha` can complete `tasks`: each worker stays idle or
/// takes one of its qualified sets, the taken sets are disjoint and cover
/// `tasks` exactly.
inline std::uint64_t allocation_count(const AllocationScenario& sc, const Point& state, CoordSet alpha,
                                      std::uint32_t tasks) {
  std::vector<std::pair<std::uint32_t, std::uint64_t>> ways{{0u, 1u}};
  for (std::size_t i = 0; i < sc.states.size(); ++i) {
    if (!alpha.contains(i)) continue;
    auto next = ways;  // idle
    for (auto [m, c] : ways)
      for (auto q : sc.states[i][state[i]]) {
        if (q == 0 || (q & ~tasks) || (q & m)) continue;
        bool found = false;
        for (auto& e : next)
          if (e.first == (m | q)) {
            e.second += c;
            found = true;
          }
        if (!found) next.emplace_back(m | q, c);
      }
    ways = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto [m, c] : ways)
    if (m == tasks) total += c;
  return total;
}

inline FunctionFamily allocation_family(const AllocationScenario& sc, std::uint32_t tasks) {
  const auto sp = sc.space();
  if (sp->coords() > kMaxPairEnumerationCoords) throw InvalidInput("allocation: at most 10 workers");
  std::vector<FamilyMember> mem;
  for (auto A : all_subsets(sp->coords())) {
    std::vector<double> v(sp->point_count());
    for (std::size_t x = 0; x < v.size(); ++x)
      v[x] = static_cast<double>(allocation_count(sc, sp->point_at(x), A, tasks));
    mem.push_back({TabulatedFunction(sp, std::move(v)), A});
  }
  return FunctionFamily(std::move(mem));
}

// ---------------------------------------------------------------------------
// Graphs.

enum class GraphMode { undirected, directed_signed };

inline constexpr std::size_t kMaxVertices = 6;
inline constexpr std::size_t kMaxFamilyEdges = 12;

/// One coordinate per vertex pair i < j, in lexicographic order. Undirected
/// labels {0, 1} mark edge presence; directed labels {-1, 0, 1} mean j -> i,
/// none, i -> j.
struct GraphScenario {
  std::size_t vertices = 3;
  GraphMode mode = GraphMode::undirected;
  std::vector<std::vector<double>> edge_marginals;

  static GraphScenario uniform(std::size_t v, GraphMode mode, double p) {
    GraphScenario g;
    g.vertices = v;
    g.mode = mode;
    const std::size_t e = v * (v - 1) / 2;
    g.edge_marginals.assign(e, mode == GraphMode::undirected ? std::vector<double>{1 - p, p}
                                                              : std::vector<double>{p / 2, 1 - p, p / 2});
    return g;
  }

  std::size_t edges() const { return vertices * (vertices - 1) / 2; }

  std::size_t edge_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    if (i == j || j >= vertices) throw InvalidInput("edge endpoints out of range");
    // Pairs before row i, then offset within the row.
    return i * vertices - i * (i + 1) / 2 + (j - i - 1);
  }

  std::pair<std::size_t, std::size_t> endpoints(std::size_t e) const {
    for (std::size_t i = 0; i < vertices; ++i)
      for (std::size_t j = i + 1; j < vertices; ++j)
        if (edge_index(i, j) == e) return {i, j};
    throw InvalidInput("edge index out of range");
  }

  SpacePtr space() const {
    if (vertices < 2 || vertices > kMaxVertices) throw InvalidInput("graph: vertex count must be in [2, 6]");
    if (edge_marginals.size() != edges())
      throw InvalidInput("graph: expected " + std::to_string(edges()) + " edge marginals");
    const std::vector<double> labels = mode == GraphMode::undirected ? std::vector<double>{0, 1}
                                                                     : std::vector<double>{-1, 0, 1};
    return share(ProductSpace(std::vector<std::size_t>(edges(), labels.size()),
                              std::vector<std::vector<double>>(edges(), labels), edge_marginals));
  }
};

/// Counting variants: plain, or a mandated edge that, when allowed and
/// present, must appear on every counted trail.
struct TrailRule {
  std::optional<std::size_t> mandated_edge;
};

/// Number of edge-distinct trails from `from` to `to` over present edges in
/// `allowed`. Vertices may repeat; from == to counts the empty trail.
inline std::uint64_t trail_count(const GraphScenario& g, const Point& state, CoordSet allowed, std::size_t from,
                                 std::size_t to, TrailRule rule = {}) {
  if (from >= g.vertices || to >= g.vertices) throw InvalidInput("trail endpoints out of range");
  const std::size_t E = g.edges();
  // Directed adjacency (u, v, edge) lists over allowed, present edges.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(g.vertices);
  for (std::size_t e = 0; e < E; ++e) {
    if (!allowed.contains(e)) continue;
    const auto [i, j] = g.endpoints(e);
    if (g.mode == GraphMode::undirected) {
      if (state[e] == 1) {
        adj[i].emplace_back(j, e);
        adj[j].emplace_back(i, e);
      }
    } else {
      if (state[e] == 2) adj[i].emplace_back(j, e);
      if (state[e] == 0) adj[j].emplace_back(i, e);
    }
  }
  bool must_use = false;
  std::size_t mandated = 0;
  if (rule.mandated_edge) {
    mandated = *rule.mandated_edge;
    if (mandated >= E) throw InvalidInput("mandated edge out of range");
    // Label index 1 is "absent" in directed mode and "present" in undirected mode.
    const bool present = g.mode == GraphMode::undirected ? state[mandated] == 1 : state[mandated] != 1;
    must_use = allowed.contains(mandated) && present;
  }
  std::uint64_t count = 0;
  std::uint32_t used = 0;
  auto dfs = [&](auto&& self, std::size_t u) -> void {
    if (u == to && (!must_use || (used >> mandated & 1u))) ++count;
    for (auto [v, e] : adj[u]) {
      if (used >> e & 1u) continue;
      used |= 1u << e;
      self(self, v);
      used &= ~(1u << e);
    }
  };
  dfs(dfs, from);
  return count;
}

/// f_alpha(x) = trail_count(x, alpha, from, to) for every edge subset alpha
/// (or the listed subsets when given).
inline FunctionFamily path_family(const GraphScenario& g, std::size_t from, std::size_t to, TrailRule rule = {},
                                  std::optional<std::vector<CoordSet>> subsets = std::nullopt) {
  const auto sp = g.space();
  if (!subsets) {
    if (g.edges() > kMaxFamilyEdges)
      throw InvalidInput("path_family: more than 12 potential edges; list the edge subsets explicitly");
    subsets = all_subsets(g.edges());
  }
  std::vector<FamilyMember> mem;
  for (auto A : *subsets) {
    if (!A.subset_of(sp->full_set())) throw InvalidInput("path_family: subset " + A.str() + " out of range");
    std::vector<double> v(sp->point_count());
    for (std::size_t x = 0; x < v.size(); ++x)
      v[x] = static_cast<double>(trail_count(g, sp->point_at(x), A, from, to, rule));
    mem.push_back({TabulatedFunction(sp, std::move(v)), A});
  }
  return FunctionFamily(std::move(mem));
}

struct GraphSuiteOptions {
  std::size_t u = 0, v = 1, w = 2;
  std::optional<std::size_t> mandated_edge;
  EvalOptions eval;
};

/// Trails u -> v and v -> w on disjoint edge sets. In directed mode also the
/// round trip u -> v on X edges and back on Y edges.
inline std::vector<InequalityReport> graph_suite(const GraphScenario& g, const GraphSuiteOptions& o = {}) {
  std::vector<InequalityReport> out;
  const auto F = path_family(g, o.u, o.v);
  const auto G = path_family(g, o.v, o.w);
  out.push_back(renamed(eval_a(F, G, o.eval), "graph_paths"));
  if (o.mandated_edge) {
    const auto Fm = path_family(g, o.u, o.v, TrailRule{o.mandated_edge});
    out.push_back(renamed(eval_a(Fm, G, o.eval), "graph_paths_mandated"));
  }
  if (g.mode == GraphMode::directed_signed) {
    const auto back = path_family(g, o.v, o.u);
    out.push_back(renamed(eval_a_dual(F, back, o.eval), "graph_round_trip"));
  }
  return out;
}

}  // namespace bkr
