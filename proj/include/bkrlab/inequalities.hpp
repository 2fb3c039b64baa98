#pragma once

// Evaluators for both sides of the functional disjoint-occurrence inequalities
// (family form, cylinder-infimum form, selector forms, their two-copy duals and
// the m-fold version). Every evaluator builds one pointwise maximand and hands
// it to a shared driver that integrates it exactly or by Monte Carlo.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bkrlab/events.hpp"
#include "bkrlab/field.hpp"
#include "bkrlab/monte_carlo.hpp"
#include "bkrlab/report.hpp"

namespace bkr {

enum class Integration { automatic, exact, monte_carlo };

struct EvalOptions {
  Integration integration = Integration::automatic;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  /// Used only when both collections are the full power set.
  PairEnumeration enumeration = PairEnumeration::complement;
};

inline constexpr std::size_t kNoTag = std::numeric_limits<std::size_t>::max();

/// Value of a pointwise maximand and which candidate attained it.
struct Best {
  double value = 0.0;
  std::size_t tag = kNoTag;
};

namespace detail {

inline bool doubled_fits(const ProductSpace& sp) {
  const std::size_t N = sp.point_count();
  return N <= kExactPointBudget / N;
}

/// Integrates `maximand` over P (or P x P when `dual`) and pairs it with
/// RHS = product over j of E[rhs_factors[j](X)].
template <class Maximand, class Describe>
InequalityReport integrate(std::string name, const ProductSpace& sp, bool dual, bool banks_ok, const EvalOptions& opts,
                           Maximand&& maximand, const std::vector<std::span<const double>>& rhs_factors,
                           Describe&& describe) {
  const bool exact_ok = banks_ok && (!dual || doubled_fits(sp));
  bool exact = false;
  switch (opts.integration) {
    case Integration::exact:
      if (!exact_ok) throw InvalidInput(name + ": instance exceeds the exact-enumeration budget");
      exact = true;
      break;
    case Integration::automatic:
      exact = exact_ok;
      break;
    case Integration::monte_carlo:
      exact = false;
      break;
  }

  auto witness_of = [&](std::size_t ix, std::size_t iy, std::size_t tag) {
    std::string w = dual ? "x=" + point_str(sp.point_at(ix)) + " y=" + point_str(sp.point_at(iy))
                         : "x=" + point_str(sp.point_at(ix));
    if (tag != kNoTag) w += " " + describe(tag, ix, iy);
    return w;
  };

  if (exact) {
    const auto p = point_probabilities(sp);
    const std::size_t N = p.size();
    double lhs = 0.0;
    double best_contrib = -1.0;
    std::size_t wx = 0, wy = 0, wtag = kNoTag;
    auto visit = [&](std::size_t ix, std::size_t iy, double w) {
      const Best b = maximand(ix, iy);
      const double c = w * b.value;
      lhs += c;
      if (c > best_contrib) {
        best_contrib = c;
        wx = ix;
        wy = iy;
        wtag = b.tag;
      }
    };
    for (std::size_t ix = 0; ix < N; ++ix) {
      if (p[ix] == 0.0) continue;
      if (!dual) {
        visit(ix, ix, p[ix]);
        continue;
      }
      for (std::size_t iy = 0; iy < N; ++iy)
        if (p[iy] != 0.0) visit(ix, iy, p[ix] * p[iy]);
    }
    double rhs = 1.0;
    for (auto fac : rhs_factors) {
      double e = 0.0;
      for (std::size_t i = 0; i < N; ++i) e += p[i] * fac[i];
      rhs *= e;
    }
    return make_report(std::move(name), lhs, rhs, best_contrib >= 0.0 ? witness_of(wx, wy, wtag) : "");
  }

  require_samples(opts.samples);
  PointSampler sampler(sp);
  std::mt19937_64 rng(opts.seed);
  MomentAccumulator acc(1 + rhs_factors.size());
  std::vector<double> row(1 + rhs_factors.size());
  double best_val = -1.0;
  std::size_t wx = 0, wy = 0, wtag = kNoTag;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    const std::size_t ix = sampler.sample(rng);
    const std::size_t iy = dual ? sampler.sample(rng) : ix;
    const Best b = maximand(ix, iy);
    row[0] = b.value;
    for (std::size_t j = 0; j < rhs_factors.size(); ++j) row[j + 1] = rhs_factors[j][ix];
    acc.add(row);
    if (b.value > best_val) {
      best_val = b.value;
      wx = ix;
      wy = iy;
      wtag = b.tag;
    }
  }
  const McEstimate lhs = acc.estimate(0);
  const McEstimate rhs = acc.product(1, 1 + rhs_factors.size());
  return make_mc_report(std::move(name), lhs.mean, rhs.mean, McInterval{opts.samples, lhs.half_width, rhs.half_width},
                        witness_of(wx, wy, wtag));
}

/// Per-K tables either precomputed for all K or evaluated lazily per point.
class CylinderSource {
 public:
  enum class Kind { ess_inf, tilde };

  static CylinderSource ess_inf(const TabulatedFunction& f) {
    CylinderSource s(Kind::ess_inf, &f, nullptr);
    if (f.space().coords() <= kMaxPairEnumerationCoords) s.bank_.emplace(inf_bank(f, true));
    return s;
  }
  static CylinderSource tilde(const FunctionFamily& fam) {
    CylinderSource s(Kind::tilde, nullptr, &fam);
    if (fam.space().coords() <= kMaxPairEnumerationCoords) s.bank_.emplace(tilde_bank(fam));
    return s;
  }

  bool banked() const { return bank_.has_value(); }

  double operator()(CoordSet K, std::size_t x) const {
    if (bank_) return (*bank_)[K][x];
    return kind_ == Kind::tilde ? lazy_tilde(K, x) : lazy_ess_inf(K, x);
  }

 private:
  CylinderSource(Kind k, const TabulatedFunction* f, const FunctionFamily* fam) : kind_(k), f_(f), fam_(fam) {}

  double lazy_tilde(CoordSet K, std::size_t x) const {
    double m = 0.0;
    for (const auto& mem : fam_->members())
      if (mem.dep.subset_of(K)) m = std::max(m, mem.fn[x]);
    return m;
  }

  double lazy_ess_inf(CoordSet K, std::size_t x) const {
    const auto& sp = f_->space();
    std::size_t base = 0;
    for (std::size_t i = 0; i < sp.coords(); ++i)
      if (K.contains(i)) base += sp.digit(x, i) * sp.stride(i);
    const std::uint64_t key = (std::uint64_t{K.mask()} << 32) | base;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    double m = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx{base};
    for (std::size_t i = 0; i < sp.coords(); ++i) {
      if (K.contains(i)) continue;
      std::vector<std::size_t> next;
      for (auto b : idx)
        for (std::size_t v = 0; v < sp.size(i); ++v)
          if (sp.marginal(i)[v] > 0.0) next.push_back(b + v * sp.stride(i));
      idx = std::move(next);
    }
    for (auto y : idx) m = std::min(m, (*f_)[y]);
    cache_.emplace(key, m);
    return m;
  }

  Kind kind_;
  const TabulatedFunction* f_;
  const FunctionFamily* fam_;
  std::optional<TransformBank> bank_;
  mutable std::unordered_map<std::uint64_t, double> cache_;
};

inline bool is_power_set(const std::vector<CoordSet>& coll, std::size_t n) {
  if (coll.size() != (std::size_t{1} << n)) return false;
  std::vector<bool> seen(coll.size(), false);
  for (auto K : coll) {
    if (K.mask() >= seen.size() || seen[K.mask()]) return false;
    seen[K.mask()] = true;
  }
  return true;
}

/// Disjoint pairs to scan for collections Kcoll x Lcoll; the 2^n complement
/// pairs when both are the full power set and that reduction is requested.
inline std::vector<CoordPair> scan_pairs(const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll,
                                         std::size_t n, PairEnumeration how) {
  for (auto K : Kcoll)
    if (!K.subset_of(CoordSet::full(n))) throw InvalidInput("collection member " + K.str() + " out of range");
  for (auto L : Lcoll)
    if (!L.subset_of(CoordSet::full(n))) throw InvalidInput("collection member " + L.str() + " out of range");
  if (how == PairEnumeration::complement && is_power_set(Kcoll, n) && is_power_set(Lcoll, n)) {
    std::vector<CoordPair> out;
    for (std::uint32_t K = 0; K < (std::uint32_t{1} << n); ++K)
      out.push_back({CoordSet(K), CoordSet(K).complement(n)});
    return out;
  }
  return disjoint_pairs(Kcoll, Lcoll);
}

/// Member index pairs (alpha, beta) with disjoint dependence sets.
inline std::vector<std::pair<std::size_t, std::size_t>> disjoint_member_pairs(const FunctionFamily& F,
                                                                              const FunctionFamily& G) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < F.size(); ++a)
    for (std::size_t b = 0; b < G.size(); ++b)
      if (F[a].dep.disjoint(G[b].dep)) out.emplace_back(a, b);
  return out;
}

inline std::string describe_members(const FunctionFamily& F, const FunctionFamily& G, std::size_t a,
                                    std::size_t b) {
  return "alpha=" + std::to_string(a) + F[a].dep.str() + " beta=" + std::to_string(b) + G[b].dep.str();
}

inline std::vector<double> pointwise_product(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline void require_pair_selector(const Selector& sel, std::size_t points, const char* what) {
  if (!sel.is_pair()) throw InvalidInput(std::string(what) + ": selector must choose disjoint (K, L) pairs");
  if (sel.size() != points)
    throw InvalidInput(std::string(what) + ": selector has " + std::to_string(sel.size()) + " entries, expected " +
                       std::to_string(points));
}

/// Shared (K, L) pair scan: max over pairs of left(K, ix) * right(L, iy).
template <class Source>
Best scan_max(const std::vector<CoordPair>& pairs, const Source& left, const Source& right, std::size_t ix,
              std::size_t iy) {
  Best b;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double v = left(pairs[p].first, ix) * right(pairs[p].second, iy);
    if (b.tag == kNoTag || v > b.value) b = {v, p};
  }
  return b;
}

inline Best scan_members(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const FunctionFamily& F,
                         const FunctionFamily& G, std::size_t ix, std::size_t iy) {
  Best b;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double v = F[pairs[p].first].fn[ix] * G[pairs[p].second].fn[iy];
    if (b.tag == kNoTag || v > b.value) b = {v, p};
  }
  return b;
}

inline std::string describe_pair(const CoordPair& p) { return "K=" + p.first.str() + " L=" + p.second.str(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Single-copy evaluators.

/// E sup_{disjoint alpha, beta} f_alpha g_beta  <=  E sup f_alpha * E sup g_beta.
inline InequalityReport eval_a(const FunctionFamily& F, const FunctionFamily& G, const EvalOptions& opts = {}) {
  require_same_space(F.space(), G.space(), "eval_a");
  const auto pairs = detail::disjoint_member_pairs(F, G);
  const auto fs = family_sup(F), gs = family_sup(G);
  return detail::integrate(
      "a", F.space(), false, true, opts,
      [&](std::size_t ix, std::size_t iy) { return detail::scan_members(pairs, F, G, ix, iy); },
      {fs.values(), gs.values()},
      [&](std::size_t t, std::size_t, std::size_t) {
        return detail::describe_members(F, G, pairs[t].first, pairs[t].second);
      });
}

/// E max_{K in Kcoll, L in Lcoll, disjoint} essinf_K f * essinf_L g  <=  E f * E g.
inline InequalityReport eval_b(const TabulatedFunction& f, const TabulatedFunction& g, const std::vector<CoordSet>& Kcoll,
                               const std::vector<CoordSet>& Lcoll, const EvalOptions& opts = {}) {
  require_same_space(f.space(), g.space(), "eval_b");
  const auto& sp = f.space();
  const auto pairs = detail::scan_pairs(Kcoll, Lcoll, sp.coords(), opts.enumeration);
  const auto fe = detail::CylinderSource::ess_inf(f);
  const auto ge = detail::CylinderSource::ess_inf(g);
  return detail::integrate(
      "b", sp, false, fe.banked(), opts,
      [&](std::size_t ix, std::size_t iy) { return detail::scan_max(pairs, fe, ge, ix, iy); }, {f.values(), g.values()},
      [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(pairs[t]); });
}

inline InequalityReport eval_b(const TabulatedFunction& f, const TabulatedFunction& g, const EvalOptions& opts = {}) {
  const auto all = all_subsets(f.space().coords());
  return eval_b(f, g, all, all, opts);
}

/// E max_{disjoint K, L} tilde f_K * tilde g_L  <=  E sup f_alpha * E sup g_beta.
inline InequalityReport eval_c(const FunctionFamily& F, const FunctionFamily& G, const std::vector<CoordSet>& Kcoll,
                               const std::vector<CoordSet>& Lcoll, const EvalOptions& opts = {}) {
  require_same_space(F.space(), G.space(), "eval_c");
  const auto& sp = F.space();
  const auto pairs = detail::scan_pairs(Kcoll, Lcoll, sp.coords(), opts.enumeration);
  const auto ft = detail::CylinderSource::tilde(F);
  const auto gt = detail::CylinderSource::tilde(G);
  const auto fs = family_sup(F), gs = family_sup(G);
  return detail::integrate(
      "c", sp, false, true, opts,
      [&](std::size_t ix, std::size_t iy) { return detail::scan_max(pairs, ft, gt, ix, iy); },
      {fs.values(), gs.values()},
      [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(pairs[t]); });
}

inline InequalityReport eval_c(const FunctionFamily& F, const FunctionFamily& G, const EvalOptions& opts = {}) {
  const auto all = all_subsets(F.space().coords());
  return eval_c(F, G, all, all, opts);
}

/// E tilde f_{K(X)}(X) tilde g_{L(X)}(X)  <=  E sup f_alpha * E sup g_beta.
inline InequalityReport eval_d(const FunctionFamily& F, const FunctionFamily& G, const Selector& sel,
                               const EvalOptions& opts = {}) {
  require_same_space(F.space(), G.space(), "eval_d");
  detail::require_pair_selector(sel, F.space().point_count(), "eval_d");
  const auto ft = detail::CylinderSource::tilde(F);
  const auto gt = detail::CylinderSource::tilde(G);
  const auto fs = family_sup(F), gs = family_sup(G);
  return detail::integrate(
      "d", F.space(), false, true, opts,
      [&](std::size_t ix, std::size_t) {
        const auto p = sel.pair_at(ix);
        return Best{ft(p.first, ix) * gt(p.second, ix), ix};
      },
      {fs.values(), gs.values()},
      [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(sel.pair_at(t)); });
}

/// E essinf_{K(X)} f(X) essinf_{L(X)} g(X)  <=  E f * E g.
inline InequalityReport eval_e(const TabulatedFunction& f, const TabulatedFunction& g, const Selector& sel,
                               const EvalOptions& opts = {}) {
  require_same_space(f.space(), g.space(), "eval_e");
  detail::require_pair_selector(sel, f.space().point_count(), "eval_e");
  const auto fe = detail::CylinderSource::ess_inf(f);
  const auto ge = detail::CylinderSource::ess_inf(g);
  return detail::integrate(
      "e", f.space(), false, fe.banked(), opts,
      [&](std::size_t ix, std::size_t) {
        const auto p = sel.pair_at(ix);
        return Best{fe(p.first, ix) * ge(p.second, ix), ix};
      },
      {f.values(), g.values()},
      [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(sel.pair_at(t)); });
}

/// Selector picking, at every point, the canonical-first disjoint pair that
/// maximizes essinf_K f * essinf_L g over Kcoll x Lcoll.
inline Selector ess_inf_argmax_selector(const TabulatedFunction& f, const TabulatedFunction& g,
                                        const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll) {
  TableMap ft, gt;
  for (auto K : Kcoll) ft.emplace(K, ess_inf_transform(f, K));
  for (auto L : Lcoll) gt.emplace(L, ess_inf_transform(g, L));
  return argmax_selector(ft, gt, disjoint_pairs(Kcoll, Lcoll));
}

/// Same for the tilde transforms of two families.
inline Selector tilde_argmax_selector(const FunctionFamily& F, const FunctionFamily& G,
                                      const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll) {
  TableMap ft, gt;
  for (auto K : Kcoll) ft.emplace(K, tilde_transform(F, K));
  for (auto L : Lcoll) gt.emplace(L, tilde_transform(G, L));
  return argmax_selector(ft, gt, disjoint_pairs(Kcoll, Lcoll));
}

// ---------------------------------------------------------------------------
// Two-copy (dual) evaluators: g is read on an independent copy Y of X.

/// E sup_{disjoint} f_alpha(X) g_beta(Y)  <=  E sup_{alpha, beta} f_alpha(X) g_beta(X).
inline InequalityReport eval_a_dual(const FunctionFamily& F, const FunctionFamily& G, const EvalOptions& opts = {}) {
  require_same_space(F.space(), G.space(), "eval_a_dual");
  const auto pairs = detail::disjoint_member_pairs(F, G);
  const auto fs = family_sup(F), gs = family_sup(G);
  const auto same_copy = detail::pointwise_product(fs.values(), gs.values());
  return detail::integrate(
      "a_dual", F.space(), true, true, opts,
      [&](std::size_t ix, std::size_t iy) { return detail::scan_members(pairs, F, G, ix, iy); }, {same_copy},
      [&](std::size_t t, std::size_t, std::size_t) {
        return detail::describe_members(F, G, pairs[t].first, pairs[t].second);
      });
}

/// E max_{disjoint K, L} essinf_K f(X) essinf_L g(Y)  <=  E f(X) g(X).
inline InequalityReport eval_b_dual(const TabulatedFunction& f, const TabulatedFunction& g,
                                    const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll,
                                    const EvalOptions& opts = {}) {
  require_same_space(f.space(), g.space(), "eval_b_dual");
  const auto& sp = f.space();
  const auto pairs = detail::scan_pairs(Kcoll, Lcoll, sp.coords(), opts.enumeration);
  const auto fe = detail::CylinderSource::ess_inf(f);
  const auto ge = detail::CylinderSource::ess_inf(g);
  const auto fg = detail::pointwise_product(f.values(), g.values());
  return detail::integrate(
      "b_dual", sp, true, fe.banked(), opts,
      [&](std::size_t ix, std::size_t iy) { return detail::scan_max(pairs, fe, ge, ix, iy); }, {fg},
      [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(pairs[t]); });
}

inline InequalityReport eval_b_dual(const TabulatedFunction& f, const TabulatedFunction& g,
                                    const EvalOptions& opts = {}) {
  const auto all = all_subsets(f.space().coords());
  return eval_b_dual(f, g, all, all, opts);
}

/// E max_{disjoint K, L} tilde f_K(X) tilde g_L(Y)  <=  E sup_{alpha, beta} f_alpha(X) g_beta(X).
inline InequalityReport eval_c_dual(const FunctionFamily& F, const FunctionFamily& G,
                                    const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll,
                                    const EvalOptions& opts = {}) {
  require_same_space(F.space(), G.space(), "eval_c_dual");
  const auto& sp = F.space();
  const auto pairs = detail::scan_pairs(Kcoll, Lcoll, sp.coords(), opts.enumeration);
  const auto ft = detail::CylinderSource::tilde(F);
  const auto gt = detail::CylinderSource::tilde(G);
  const auto fs = family_sup(F), gs = family_sup(G);
  const auto same_copy = detail::pointwise_product(fs.values(), gs.values());
  return detail::integrate(
      "c_dual", sp, true, true, opts,
      [&](std::size_t ix, std::size_t iy) { return detail::scan_max(pairs, ft, gt, ix, iy); }, {same_copy},
      [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(pairs[t]); });
}

inline InequalityReport eval_c_dual(const FunctionFamily& F, const FunctionFamily& G, const EvalOptions& opts = {}) {
  const auto all = all_subsets(F.space().coords());
  return eval_c_dual(F, G, all, all, opts);
}

/// Selector over S x S, indexed by pair_index(x, y).
inline InequalityReport eval_d_dual(const FunctionFamily& F, const FunctionFamily& G, const Selector& sel,
                                    const EvalOptions& opts = {}) {
  require_same_space(F.space(), G.space(), "eval_d_dual");
  const std::size_t N = F.space().point_count();
  detail::require_pair_selector(sel, N * N, "eval_d_dual");
  const auto ft = detail::CylinderSource::tilde(F);
  const auto gt = detail::CylinderSource::tilde(G);
  const auto fs = family_sup(F), gs = family_sup(G);
  const auto same_copy = detail::pointwise_product(fs.values(), gs.values());
  return detail::integrate(
      "d_dual", F.space(), true, true, opts,
      [&](std::size_t ix, std::size_t iy) {
        const std::size_t k = ix * N + iy;
        const auto p = sel.pair_at(k);
        return Best{ft(p.first, ix) * gt(p.second, iy), k};
      },
      {same_copy}, [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(sel.pair_at(t)); });
}

inline InequalityReport eval_e_dual(const TabulatedFunction& f, const TabulatedFunction& g, const Selector& sel,
                                    const EvalOptions& opts = {}) {
  require_same_space(f.space(), g.space(), "eval_e_dual");
  const std::size_t N = f.space().point_count();
  detail::require_pair_selector(sel, N * N, "eval_e_dual");
  const auto fe = detail::CylinderSource::ess_inf(f);
  const auto ge = detail::CylinderSource::ess_inf(g);
  const auto fg = detail::pointwise_product(f.values(), g.values());
  return detail::integrate(
      "e_dual", f.space(), true, fe.banked(), opts,
      [&](std::size_t ix, std::size_t iy) {
        const std::size_t k = ix * N + iy;
        const auto p = sel.pair_at(k);
        return Best{fe(p.first, ix) * ge(p.second, iy), k};
      },
      {fg}, [&](std::size_t t, std::size_t, std::size_t) { return detail::describe_pair(sel.pair_at(t)); });
}

/// Argmax selector on S x S for essinf_K f(x) * essinf_L g(y).
inline Selector ess_inf_argmax_selector_dual(const TabulatedFunction& f, const TabulatedFunction& g,
                                             const std::vector<CoordSet>& Kcoll,
                                             const std::vector<CoordSet>& Lcoll) {
  auto ds = share(doubled(f.space()));
  TableMap ft, gt;
  for (auto K : Kcoll) ft.emplace(K, lift_x(ess_inf_transform(f, K), ds));
  for (auto L : Lcoll) gt.emplace(L, lift_y(ess_inf_transform(g, L), ds));
  return argmax_selector(ft, gt, disjoint_pairs(Kcoll, Lcoll));
}

inline Selector tilde_argmax_selector_dual(const FunctionFamily& F, const FunctionFamily& G,
                                           const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll) {
  auto ds = share(doubled(F.space()));
  TableMap ft, gt;
  for (auto K : Kcoll) ft.emplace(K, lift_x(tilde_transform(F, K), ds));
  for (auto L : Lcoll) gt.emplace(L, lift_y(tilde_transform(G, L), ds));
  return argmax_selector(ft, gt, disjoint_pairs(Kcoll, Lcoll));
}

// ---------------------------------------------------------------------------
// m-fold version.

inline constexpr std::size_t kMaxExactFolds = 4;

/// Member-index tuples (one per family) with pairwise disjoint dependence
/// sets, in lexicographic order.
inline std::vector<std::vector<std::size_t>> disjoint_tuples(const std::vector<FunctionFamily>& fams) {
  const std::size_t m = fams.size();
  // Members tried largest-dependence first so conflicts prune early.
  std::vector<std::vector<std::size_t>> order(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < fams[i].size(); ++a) order[i].push_back(a);
    std::stable_sort(order[i].begin(), order[i].end(),
                     [&](std::size_t a, std::size_t b) { return fams[i][a].dep.size() > fams[i][b].dep.size(); });
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(m);
  auto rec = [&](auto&& self, std::size_t level, std::uint32_t used) -> void {
    if (level == m) {
      out.push_back(cur);
      return;
    }
    for (auto a : order[level]) {
      const std::uint32_t d = fams[level][a].dep.mask();
      if (d & used) continue;
      cur[level] = a;
      self(self, level + 1, used | d);
    }
  };
  rec(rec, 0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// E max over pairwise-disjoint tuples of prod_i f_{i, alpha_i}  <=  prod_i E sup f_{i, .}.
inline InequalityReport eval_mfold(const std::vector<FunctionFamily>& fams, const EvalOptions& opts = {}) {
  if (fams.size() < 2) throw InvalidInput("eval_mfold: need at least two families");
  for (const auto& f : fams) require_same_space(f.space(), fams[0].space(), "eval_mfold");
  const bool exact_ok = fams.size() <= kMaxExactFolds;
  const auto tuples = disjoint_tuples(fams);
  std::vector<TabulatedFunction> sups;
  for (const auto& f : fams) sups.push_back(family_sup(f));
  std::vector<std::span<const double>> factors;
  for (const auto& s : sups) factors.push_back(s.values());
  return detail::integrate(
      "mfold", fams[0].space(), false, exact_ok, opts,
      [&](std::size_t ix, std::size_t) {
        Best b;
        for (std::size_t t = 0; t < tuples.size(); ++t) {
          double v = 1.0;
          for (std::size_t i = 0; i < fams.size(); ++i) v *= fams[i][tuples[t][i]].fn[ix];
          if (b.tag == kNoTag || v > b.value) b = {v, t};
        }
        return b;
      },
      factors,
      [&](std::size_t t, std::size_t, std::size_t) {
        std::string s = "tuple=";
        for (std::size_t i = 0; i < fams.size(); ++i)
          s += (i ? "," : "") + std::to_string(tuples[t][i]) + fams[i][tuples[t][i]].dep.str();
        return s;
      });
}

// ---------------------------------------------------------------------------
// Framework conversion.

/// (sup_alpha f_alpha, [K_alpha]): feeding two bridged families to eval_b
/// bounds eval_a's LHS from above and shares its RHS, because each f_alpha is
/// at most the essential cylinder infimum of the supremum over its own K_alpha.
inline std::pair<TabulatedFunction, std::vector<CoordSet>> framework_bridge(const FunctionFamily& F) {
  std::vector<CoordSet> deps;
  for (const auto& m : F.members()) deps.push_back(m.dep);
  return {family_sup(F), std::move(deps)};
}

}  // namespace bkr
