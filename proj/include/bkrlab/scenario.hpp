#pragma once

// Scenario files: JSON documents naming a space, a seed, an integration mode
// and a list of evaluator entries. Loading validates everything up front and
// reports problems with the offending field path (or line and column for
// syntax errors).

#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bkrlab/applications.hpp"
#include "bkrlab/events.hpp"
#include "bkrlab/inequalities.hpp"
#include "bkrlab/report_io.hpp"
#include "bkrlab/stochastic_order.hpp"
#include "bkrlab/worker_pool.hpp"

namespace bkr {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace cfg {

/// A JSON value together with its path from the document root.
struct Node {
  const json* j;
  std::string path;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError((path.empty() ? "top level" : path) + ": " + msg);
  }

  bool has(const std::string& key) const { return j->is_object() && j->contains(key); }

  Node at(const std::string& key) const {
    if (!j->is_object()) fail("expected an object");
    if (!j->contains(key)) fail("missing field '" + key + "'");
    return {&(*j)[key], path.empty() ? key : path + "." + key};
  }
  Node at(std::size_t i) const {
    if (!j->is_array() || i >= j->size()) fail("missing element " + std::to_string(i));
    return {&(*j)[i], path + "[" + std::to_string(i) + "]"};
  }
  std::size_t size() const {
    if (!j->is_array()) fail("expected an array");
    return j->size();
  }

  double number() const {
    if (!j->is_number()) fail("expected a number");
    return j->get<double>();
  }
  std::uint64_t uint() const {
    if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0))
      fail("expected a non-negative integer");
    return j->get<std::uint64_t>();
  }
  std::string str() const {
    if (!j->is_string()) fail("expected a string");
    return j->get<std::string>();
  }
  bool boolean() const {
    if (!j->is_boolean()) fail("expected true or false");
    return j->get<bool>();
  }
  std::vector<double> numbers() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).number());
    return v;
  }
  std::vector<std::size_t> uints() const {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).uint());
    return v;
  }

  double number_or(const std::string& key, double d) const { return has(key) ? at(key).number() : d; }
  std::uint64_t uint_or(const std::string& key, std::uint64_t d) const { return has(key) ? at(key).uint() : d; }
  std::string str_or(const std::string& key, std::string d) const { return has(key) ? at(key).str() : d; }
};

inline CoordSet coordset(const Node& n, std::size_t coords) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto c = n.at(i).uint();
    if (c >= coords) n.at(i).fail("coordinate " + std::to_string(c) + " out of range");
    m |= 1u << c;
  }
  return CoordSet(m);
}

inline std::vector<CoordSet> collection(const Node& n, std::size_t coords) {
  if (n.j->is_string()) {
    if (n.str() != "all") n.fail("expected \"all\" or a list of coordinate lists");
    return all_subsets(coords);
  }
  std::vector<CoordSet> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(coordset(n.at(i), coords));
  return out;
}

inline SpacePtr space(const Node& n) {
  if (n.has("iid")) {
    const auto count = n.at("iid").uint();
    auto labels = n.at("labels").numbers();
    auto marg = n.has("marginal") ? n.at("marginal").numbers()
                                  : std::vector<double>(labels.size(), 1.0 / static_cast<double>(labels.size()));
    return share(ProductSpace::iid(count, std::move(labels), std::move(marg)));
  }
  const auto coords = n.at("coords");
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> labels, marg;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto c = coords.at(i);
    std::vector<double> l;
    if (c.has("labels")) {
      l = c.at("labels").numbers();
    } else {
      const auto k = c.at("size").uint();
      for (std::size_t v = 0; v < k; ++v) l.push_back(static_cast<double>(v));
    }
    marg.push_back(c.has("marginal") ? c.at("marginal").numbers()
                                     : std::vector<double>(l.size(), 1.0 / static_cast<double>(l.size())));
    sizes.push_back(l.size());
    labels.push_back(std::move(l));
  }
  return share(ProductSpace(std::move(sizes), std::move(labels), std::move(marg)));
}

inline Point point(const Node& n, const ProductSpace& sp) {
  Point x = n.uints();
  if (!sp.valid_point(x)) n.fail("not a point of the space");
  return x;
}

inline Event event(const Node& n, const SpacePtr& sp) {
  if (n.j->is_string()) {
    const auto s = n.str();
    if (s == "all") return Event::all(sp);
    if (s == "none") return Event::none(sp);
    n.fail("unknown event '" + s + "'");
  }
  if (n.has("indices")) {
    std::vector<std::size_t> idx = n.at("indices").uints();
    for (auto i : idx)
      if (i >= sp->point_count()) n.at("indices").fail("point index " + std::to_string(i) + " out of range");
    return Event::from_indices(sp, idx);
  }
  if (n.has("points")) {
    const auto pts = n.at("points");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pts.size(); ++i) idx.push_back(sp->index_of(point(pts.at(i), *sp)));
    return Event::from_indices(sp, idx);
  }
  // Clauses [coord, label index] for *_equal, [coord, threshold] for *_at_least.
  static const std::vector<std::string> forms{"any_equal", "all_equal", "any_at_least", "all_at_least"};
  std::string form;
  for (const auto& f : forms)
    if (n.has(f)) form = f;
  if (form.empty()) n.fail("event needs one of indices, points, any_equal, all_equal, any_at_least, all_at_least");
  const bool any = form.rfind("any", 0) == 0;
  const bool threshold = form.find("at_least") != std::string::npos;
  const auto clauses = n.at(form);
  std::vector<std::pair<std::size_t, double>> cl;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const auto c = clauses.at(i);
    const auto coord = c.at(0).uint();
    if (coord >= sp->coords()) c.at(0).fail("coordinate out of range");
    if (threshold) {
      cl.emplace_back(coord, c.at(1).number());
    } else {
      const auto label = c.at(1).uint();
      if (label >= sp->size(coord)) c.at(1).fail("label index out of range");
      cl.emplace_back(coord, static_cast<double>(label));
    }
  }
  return Event::from_predicate(sp, [&](const Point& x) {
    bool out = !any;
    for (auto [c, v] : cl) {
      const bool hit = threshold ? sp->labels(c)[x[c]] >= v : static_cast<double>(x[c]) == v;
      out = any ? (out || hit) : (out && hit);
    }
    return out;
  });
}

inline TabulatedFunction function(const Node& n, const SpacePtr& sp) {
  if (n.has("table")) {
    const auto t = n.at("table");
    if (t.size() != sp->point_count())
      t.fail("table has " + std::to_string(t.size()) + " entries, expected " + std::to_string(sp->point_count()));
    try {
      return TabulatedFunction(sp, t.numbers());
    } catch (const InvalidInput& e) {
      t.fail(e.what());
    }
  }
  if (n.has("constant")) return TabulatedFunction::constant(sp, n.at("constant").number());
  if (n.has("indicator")) return event(n.at("indicator"), sp).indicator();
  if (n.has("coordinate")) {
    const auto c = n.at("coordinate").uint();
    if (c >= sp->coords()) n.at("coordinate").fail("out of range");
    return TabulatedFunction::from_labels(sp, [c](auto x) { return x[c]; });
  }
  if (n.has("expr")) {
    const auto op = n.at("expr").str();
    const auto K = coordset(n.at("coords"), sp->coords());
    if (op != "sum" && op != "product" && op != "max" && op != "min")
      n.at("expr").fail("unknown expression '" + op + "'");
    try {
      return TabulatedFunction::from_labels(sp, [&](std::span<const double> x) {
        std::vector<double> v;
        for (std::size_t i = 0; i < x.size(); ++i)
          if (K.contains(i)) v.push_back(x[i]);
        if (op == "sum") return sum_of(v);
        if (op == "product") return product_of(v);
        if (v.empty()) return 0.0;
        return op == "max" ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
      });
    } catch (const InvalidInput& e) {
      n.fail(e.what());
    }
  }
  n.fail("function needs one of table, constant, indicator, coordinate, expr");
}

inline FunctionFamily family(const Node& n, const SpacePtr& sp) {
  if (n.has("builtin")) {
    const auto b = n.at("builtin").str();
    const std::size_t k = n.uint_or("k", 1);
    if (k < 1 || k > sp->coords()) n.fail("k must be in [1, n]");
    const auto subsets = k_subsets(sp->coords(), k);
    if (b == "coordinate-singletons") return subset_family(sp, k_subsets(sp->coords(), 1), product_of);
    if (b == "order-stat-products") return subset_family(sp, subsets, product_of);
    if (b == "order-stat-sums") return subset_family(sp, subsets, sum_of);
    if (b == "one-minus-products")
      return subset_family(sp, subsets, [](const auto& v) {
        double p = 1.0;
        for (double x : v) p *= 1.0 - x;
        return p;
      });
    n.at("builtin").fail("unknown family '" + b + "'");
  }
  const auto mem = n.at("members");
  std::vector<FamilyMember> out;
  for (std::size_t i = 0; i < mem.size(); ++i)
    out.push_back({function(mem.at(i), sp), coordset(mem.at(i).at("dep"), sp->coords())});
  try {
    return FunctionFamily(std::move(out));
  } catch (const InvalidInput& e) {
    mem.fail(e.what());
  }
}

inline Direction direction(const Node& n) {
  const auto s = n.str_or("direction", "increasing");
  if (s == "increasing") return Direction::increasing;
  if (s == "decreasing") return Direction::decreasing;
  n.at("direction").fail("expected increasing or decreasing");
}

inline std::uint32_t task_mask(const Node& n) {
  std::uint32_t m = 0;
  for (auto t : n.uints()) {
    if (t >= kMaxTasks) n.fail("task ids must be < 16");
    m |= 1u << t;
  }
  return m;
}

}  // namespace cfg

using ReportList = std::vector<InequalityReport>;

/// One validated evaluator entry, ready to run.
struct ScenarioEntry {
  std::string type;
  std::string path;
  std::function<ReportList()> run;
};

struct Scenario {
  std::uint64_t seed = 0;
  std::vector<ScenarioEntry> entries;
  std::string csv_path;
  std::string markdown_path;
};

namespace detail {

inline ReportList one(InequalityReport r) { return {std::move(r)}; }

inline ReportList labelled(ReportList rs, const std::string& label) {
  if (!label.empty())
    for (auto& r : rs) r.name = rs.size() == 1 ? label : label + "." + r.name;
  return rs;
}

inline EvalOptions entry_options(const cfg::Node& e, const EvalOptions& base, std::uint64_t seed) {
  EvalOptions o = base;
  o.seed = seed;
  if (e.has("mode")) {
    const auto m = e.at("mode").str();
    if (m == "exact") o.integration = Integration::exact;
    else if (m == "mc") o.integration = Integration::monte_carlo;
    else if (m == "auto") o.integration = Integration::automatic;
    else e.at("mode").fail("expected exact, mc or auto");
  }
  o.samples = e.uint_or("samples", o.samples);
  if (e.has("enumeration")) {
    const auto s = e.at("enumeration").str();
    if (s == "complement") o.enumeration = PairEnumeration::complement;
    else if (s == "all-disjoint") o.enumeration = PairEnumeration::all_disjoint;
    else e.at("enumeration").fail("expected complement or all-disjoint");
  }
  if (o.integration != Integration::exact && o.samples < kMinMcSamples) e.fail("samples must be at least 1000");
  return o;
}

inline Selector selector_single_copy(const cfg::Node& e, const std::function<Selector()>& argmax, std::size_t points,
                                     std::size_t coords) {
  if (!e.has("selector") || (e.at("selector").j->is_string() && e.at("selector").str() == "argmax")) return argmax();
  const auto s = e.at("selector");
  const auto c = s.at("constant");
  try {
    return Selector::constant_pair(points, {cfg::coordset(c.at(0), coords), cfg::coordset(c.at(1), coords)});
  } catch (const InvalidInput& ex) {
    c.fail(ex.what());
  }
}

}  // namespace detail

/// Builds one entry. `sp` may be null when the scenario has no top-level space.
inline ScenarioEntry build_entry(const cfg::Node& e, const SpacePtr& sp, const EvalOptions& base,
                                 std::uint64_t seed) {
  const auto type = e.at("type").str();
  const auto opts = detail::entry_options(e, base, seed);
  auto need_space = [&]() -> const SpacePtr& {
    if (!sp) e.fail("evaluator '" + type + "' needs a top-level space");
    return sp;
  };
  const std::string label = e.str_or("label", "");
  auto wrap = [&](std::function<ReportList()> f) {
    return ScenarioEntry{type, e.path, [f = std::move(f), label]() { return detail::labelled(f(), label); }};
  };

  if (type == "bkr" || type == "kss" || type == "was5-gap") {
    const auto& s = need_space();
    auto A = cfg::event(e.at("A"), s), B = cfg::event(e.at("B"), s);
    if (type == "kss" && doubled(*s).mc_only()) e.fail("kss: doubled space exceeds the exact budget");
    if (type == "bkr") return wrap([A, B] { return detail::one(bkr_check(A, B)); });
    if (type == "kss") return wrap([A, B] { return detail::one(kss_check(A, B)); });
    return wrap([A, B, opts] {
      const double pbox = box(A, B).probability();
      const double pmaj = essinf_majorant(A, B).probability();
      ReportList out;
      out.push_back(
          make_report("box_vs_majorant", pbox, pmaj, "P(box)=" + fmt_short(pbox) + " P(majorant)=" + fmt_short(pmaj)));
      auto b = eval_b(A.indicator(), B.indicator(), opts);
      b.name = "majorant_bkr";
      out.push_back(std::move(b));
      return out;
    });
  }
  if (type == "a" || type == "c" || type == "a_dual" || type == "c_dual" || type == "d" || type == "d_dual" ||
      type == "lo") {
    const auto& s = need_space();
    auto F = cfg::family(e.at("F"), s), G = cfg::family(e.at("G"), s);
    if (type == "a") return wrap([F, G, opts] { return detail::one(eval_a(F, G, opts)); });
    if (type == "a_dual") return wrap([F, G, opts] { return detail::one(eval_a_dual(F, G, opts)); });
    if (type == "lo") {
      const auto dir = cfg::direction(e);
      return wrap([F, G, dir] {
        auto r = lo_check(F, G, dir);
        return ReportList{r.dominance, r.expectation, r.bkr_bound};
      });
    }
    const auto K = e.has("K") ? cfg::collection(e.at("K"), s->coords()) : all_subsets(s->coords());
    const auto L = e.has("L") ? cfg::collection(e.at("L"), s->coords()) : all_subsets(s->coords());
    if (type == "c") return wrap([F, G, K, L, opts] { return detail::one(eval_c(F, G, K, L, opts)); });
    if (type == "c_dual") return wrap([F, G, K, L, opts] { return detail::one(eval_c_dual(F, G, K, L, opts)); });
    if (type == "d") {
      auto sel = detail::selector_single_copy(e, [&] { return tilde_argmax_selector(F, G, K, L); },
                                              s->point_count(), s->coords());
      return wrap([F, G, sel, opts] { return detail::one(eval_d(F, G, sel, opts)); });
    }
    if (e.has("selector") && !(e.at("selector").j->is_string() && e.at("selector").str() == "argmax")) {
      auto c = e.at("selector").at("constant");
      auto sel = Selector::constant_pair(s->point_count() * s->point_count(),
                                         {cfg::coordset(c.at(0), s->coords()), cfg::coordset(c.at(1), s->coords())});
      return wrap([F, G, sel, opts] { return detail::one(eval_d_dual(F, G, sel, opts)); });
    }
    if (doubled(*s).mc_only()) e.fail("d_dual: argmax selector needs an enumerable doubled space");
    auto sel = tilde_argmax_selector_dual(F, G, K, L);
    return wrap([F, G, sel, opts] { return detail::one(eval_d_dual(F, G, sel, opts)); });
  }
  if (type == "b" || type == "b_dual" || type == "e" || type == "e_dual") {
    const auto& s = need_space();
    auto f = cfg::function(e.at("f"), s), g = cfg::function(e.at("g"), s);
    const auto K = e.has("K") ? cfg::collection(e.at("K"), s->coords()) : all_subsets(s->coords());
    const auto L = e.has("L") ? cfg::collection(e.at("L"), s->coords()) : all_subsets(s->coords());
    if (type == "b") return wrap([f, g, K, L, opts] { return detail::one(eval_b(f, g, K, L, opts)); });
    if (type == "b_dual") return wrap([f, g, K, L, opts] { return detail::one(eval_b_dual(f, g, K, L, opts)); });
    if (type == "e") {
      auto sel = detail::selector_single_copy(e, [&] { return ess_inf_argmax_selector(f, g, K, L); },
                                              s->point_count(), s->coords());
      return wrap([f, g, sel, opts] { return detail::one(eval_e(f, g, sel, opts)); });
    }
    if (e.has("selector") && !(e.at("selector").j->is_string() && e.at("selector").str() == "argmax")) {
      auto c = e.at("selector").at("constant");
      auto sel = Selector::constant_pair(s->point_count() * s->point_count(),
                                         {cfg::coordset(c.at(0), s->coords()), cfg::coordset(c.at(1), s->coords())});
      return wrap([f, g, sel, opts] { return detail::one(eval_e_dual(f, g, sel, opts)); });
    }
    if (doubled(*s).mc_only()) e.fail("e_dual: argmax selector needs an enumerable doubled space");
    auto sel = ess_inf_argmax_selector_dual(f, g, K, L);
    return wrap([f, g, sel, opts] { return detail::one(eval_e_dual(f, g, sel, opts)); });
  }
  if (type == "mfold") {
    const auto& s = need_space();
    const auto fams = e.at("families");
    std::vector<FunctionFamily> list;
    for (std::size_t i = 0; i < fams.size(); ++i) list.push_back(cfg::family(fams.at(i), s));
    if (list.size() < 2) fams.fail("need at least two families");
    return wrap([list, opts] { return detail::one(eval_mfold(list, opts)); });
  }
  if (type == "pqd" || type == "st-max") {
    const auto& s = need_space();
    MixedCopySpec spec;
    spec.direction = cfg::direction(e);
    // Dropping the monotonicity hypothesis is allowed for exploring counterexamples.
    if (e.has("require_monotone")) spec.require_monotone = e.at("require_monotone").boolean();
    const auto H = e.at("H"), fns = e.at("functions");
    for (std::size_t i = 0; i < H.size(); ++i) spec.H.push_back(cfg::coordset(H.at(i), s->coords()));
    for (std::size_t i = 0; i < fns.size(); ++i) {
      spec.functions.push_back(cfg::function(fns.at(i), s));
      if (spec.require_monotone && !monotone_check(spec.functions.back(), spec.direction))
        fns.at(i).fail(std::string("function is not ") + direction_name(spec.direction));
    }
    if (spec.H.size() != spec.functions.size()) e.fail("H and functions must have the same length");
    if (type == "pqd") {
      if (spec.functions.size() > kMaxPqdComponents) e.at("functions").fail("at most 3 functions");
      return wrap([spec] {
        auto r = pqd_check(spec);
        return ReportList{r.upper, r.lower};
      });
    }
    return wrap([spec] {
      auto r = st_max_check(spec);
      return ReportList{r.dominance, r.expectation};
    });
  }
  if (type == "order-stats") {
    const auto& s = need_space();
    OrderStatOptions o;
    o.k = e.uint_or("k", 1);
    o.l = e.uint_or("l", 1);
    if (e.has("t")) o.t = e.at("t").numbers();
    o.eval = opts;
    if (s->coords() < 2 || o.k < 1 || o.l < 1 || o.k > s->coords() || o.l > s->coords())
      e.fail("need n >= 2 and k, l in [1, n]");
    for (double t : o.t)
      if (!(t > 0.0)) e.at("t").fail("t values must be positive");
    return wrap([s, o] { return order_stat_suite(s, o); });
  }
  if (type == "dual-xy") {
    const auto& s = need_space();
    DualXyOptions o;
    o.k = e.uint_or("k", 1);
    o.l = e.uint_or("l", 1);
    o.eval = opts;
    for (const auto& labels : s->all_labels())
      for (double v : labels)
        if (v < 0.0 || v > 1.0) e.fail("dual-xy needs labels in [0, 1]");
    if (o.k < 1 || o.l < 1 || o.k > s->coords() || o.l > s->coords()) e.fail("k and l must be in [1, n]");
    return wrap([s, o] { return dual_xy_suite(s, o); });
  }
  if (type == "graph-paths") {
    GraphScenario g;
    g.vertices = e.at("vertices").uint();
    const auto kind = e.str_or("graph", "undirected");
    if (kind == "undirected") g.mode = GraphMode::undirected;
    else if (kind == "directed-signed") g.mode = GraphMode::directed_signed;
    else e.at("graph").fail("expected undirected or directed-signed");
    if (g.vertices < 2 || g.vertices > kMaxVertices) e.at("vertices").fail("must be in [2, 6]");
    if (e.has("edge_marginals")) {
      const auto m = e.at("edge_marginals");
      for (std::size_t i = 0; i < m.size(); ++i) g.edge_marginals.push_back(m.at(i).numbers());
    } else {
      g = GraphScenario::uniform(g.vertices, g.mode, e.number_or("p", 0.5));
    }
    try {
      g.space();
    } catch (const InvalidInput& ex) {
      e.fail(ex.what());
    }
    if (g.edges() > kMaxFamilyEdges) e.at("vertices").fail("at most 12 potential edges (5 vertices)");
    GraphSuiteOptions o;
    o.u = e.uint_or("u", 0);
    o.v = e.uint_or("v", 1);
    o.w = e.uint_or("w", 2);
    for (auto x : {o.u, o.v, o.w})
      if (x >= g.vertices) e.fail("terminal vertex out of range");
    if (e.has("mandated")) {
      const auto m = e.at("mandated").uints();
      if (m.size() != 2 || m[0] == m[1] || m[0] >= g.vertices || m[1] >= g.vertices)
        e.at("mandated").fail("expected two distinct vertices");
      o.mandated_edge = g.edge_index(m[0], m[1]);
    }
    o.eval = opts;
    return wrap([g, o] { return graph_suite(g, o); });
  }
  if (type == "allocation") {
    AllocationScenario sc;
    const auto workers = e.at("workers");
    for (std::size_t w = 0; w < workers.size(); ++w) {
      const auto states = workers.at(w).at("states");
      std::vector<std::vector<std::uint32_t>> st;
      for (std::size_t s = 0; s < states.size(); ++s) {
        std::vector<std::uint32_t> sets;
        for (std::size_t q = 0; q < states.at(s).size(); ++q) sets.push_back(cfg::task_mask(states.at(s).at(q)));
        st.push_back(std::move(sets));
      }
      sc.marginals.push_back(workers.at(w).has("marginal")
                                 ? workers.at(w).at("marginal").numbers()
                                 : std::vector<double>(st.size(), 1.0 / static_cast<double>(st.size())));
      sc.states.push_back(std::move(st));
    }
    try {
      sc.space();
    } catch (const InvalidInput& ex) {
      workers.fail(ex.what());
    }
    if (sc.states.size() > kMaxPairEnumerationCoords) workers.fail("at most 10 workers");
    const auto A = cfg::task_mask(e.at("A")), B = cfg::task_mask(e.at("B"));
    return wrap([sc, A, B, opts] {
      return detail::one(renamed(eval_a(allocation_family(sc, A), allocation_family(sc, B), opts), "allocation"));
    });
  }
  e.at("type").fail("unknown evaluator type '" + type + "'");
}

/// Line and column of a byte offset, for syntax diagnostics.
inline std::string line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto cut = what.find(" - ");
    if (cut != std::string::npos) what = what.substr(cut + 3);
    throw ConfigError(source + ": syntax error at " + line_col(text, e.byte ? e.byte - 1 : 0) + ": " + what);
  }
}

namespace detail {

inline Scenario load_scenario_body(const json& doc) {
  const cfg::Node root{&doc, ""};
  if (!doc.is_object()) root.fail("expected a JSON object at top level");
  static const std::vector<std::string> known{"seed",       "mode",   "samples",    "space",
                                              "evaluators", "output", "description"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) root.fail("unknown field '" + it.key() + "'");
  Scenario sc;
  sc.seed = root.uint_or("seed", 0);
  EvalOptions base;
  const auto mode = root.str_or("mode", "auto");
  if (mode == "exact") base.integration = Integration::exact;
  else if (mode == "mc") base.integration = Integration::monte_carlo;
  else if (mode != "auto") root.at("mode").fail("expected exact, mc or auto");
  base.samples = root.uint_or("samples", base.samples);

  SpacePtr sp;
  if (root.has("space")) {
    try {
      sp = cfg::space(root.at("space"));
    } catch (const InvalidInput& e) {
      root.at("space").fail(e.what());
    }
  }
  const auto evs = root.at("evaluators");
  if (evs.size() == 0) evs.fail("no evaluators listed");
  for (std::size_t i = 0; i < evs.size(); ++i) {
    try {
      sc.entries.push_back(build_entry(evs.at(i), sp, base, mix_seed(sc.seed, i)));
    } catch (const InvalidInput& e) {
      throw ConfigError(evs.at(i).path + ": " + e.what());
    }
  }
  if (root.has("output")) {
    const auto out = root.at("output");
    sc.csv_path = out.str_or("csv", "");
    sc.markdown_path = out.str_or("markdown", "");
  }
  return sc;
}

}  // namespace detail

/// Validates a parsed document and builds every entry. Diagnostics read
/// "<source>: <field path>: <problem>".
inline Scenario load_scenario(const json& doc, const std::string& source = "scenario") {
  try {
    return detail::load_scenario_body(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

/// Runs the entries on the worker pool and concatenates reports in entry order.
inline ReportList run_entries(const Scenario& sc) {
  auto parts = parallel_map<ReportList>(sc.entries.size(), [&](std::size_t i) {
    try {
      return sc.entries[i].run();
    } catch (const InvalidInput& e) {
      throw ConfigError(sc.entries[i].path + ": " + e.what());
    }
  });
  ReportList all;
  for (auto& p : parts)
    for (auto& r : p) all.push_back(std::move(r));
  return all;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads and runs a scenario file.
inline ReportList run_scenario_file(const std::string& path, Scenario* loaded = nullptr) {
  const json doc = parse_config_text(read_file(path), path);
  Scenario sc = load_scenario(doc, path);
  auto reports = run_entries(sc);
  if (loaded) *loaded = std::move(sc);
  return reports;
}

}  // namespace bkr
