#pragma once

// Tabulated non-negative functions on a product space, the cylinder infimum
// transforms, tilde (family supremum) transforms and point-dependent selectors.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bkrlab/space.hpp"

namespace bkr {

/// Dense table of non-negative finite reals indexed by linear point index.
class TabulatedFunction {
 public:
  TabulatedFunction(SpacePtr space, std::vector<double> values) : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw InvalidInput("TabulatedFunction: null space");
    require_exact(*space_, "TabulatedFunction");
    if (values_.size() != space_->point_count())
      throw InvalidInput("TabulatedFunction: table length " + std::to_string(values_.size()) +
                         " != point count " + std::to_string(space_->point_count()));
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
        throw InvalidInput("TabulatedFunction: value at index " + std::to_string(i) + " is negative or non-finite");
  }

  static TabulatedFunction constant(SpacePtr space, double c) {
    const auto n = space->point_count();
    return TabulatedFunction(std::move(space), std::vector<double>(n, c));
  }

  /// Tabulate fn(labels of x) over every point.
  static TabulatedFunction from_labels(SpacePtr space, const std::function<double(std::span<const double>)>& fn) {
    require_exact(*space, "from_labels");
    std::vector<double> vals(space->point_count());
    std::vector<double> lab(space->coords());
    for (std::size_t idx = 0; idx < vals.size(); ++idx) {
      for (std::size_t i = 0; i < space->coords(); ++i) lab[i] = space->labels(i)[space->digit(idx, i)];
      vals[idx] = fn(lab);
    }
    return TabulatedFunction(std::move(space), std::move(vals));
  }

  const ProductSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::span<const double> values() const& { return values_; }
  std::span<const double> values() const&& = delete;
  double operator[](std::size_t idx) const { return values_[idx]; }
  double at(const Point& x) const { return values_[space_->index_of(x)]; }
  std::size_t size() const { return values_.size(); }

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

inline void require_same_space(const ProductSpace& a, const ProductSpace& b, const char* what) {
  if (&a != &b && !(a == b)) throw InvalidInput(std::string(what) + ": operands live on different spaces");
}

/// Expectation under the product measure.
inline double expectation(const TabulatedFunction& f) {
  const auto p = point_probabilities(f.space());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * f[i];
  return s;
}

/// True iff f is constant along every line in each coordinate outside K,
/// which is equivalent to f being constant on every cylinder [x]_K.
inline bool depends_on(const TabulatedFunction& f, CoordSet K) {
  const auto& sp = f.space();
  for (std::size_t i = 0; i < sp.coords(); ++i) {
    if (K.contains(i) || sp.size(i) == 1) continue;
    const std::size_t s = sp.stride(i);
    const std::size_t block = s * sp.size(i);
    for (std::size_t base = 0; base < f.size(); base += block)
      for (std::size_t off = 0; off < s; ++off)
        for (std::size_t v = 1; v < sp.size(i); ++v)
          if (f[base + off + v * s] != f[base + off]) return false;
  }
  return true;
}

namespace detail {

/// One min sweep along coordinate i: every entry becomes the minimum over its
/// coordinate-i line, skipping zero-mass values when `essential`.
inline void min_sweep(const ProductSpace& sp, std::span<const double> in, std::span<double> out, std::size_t i,
                      bool essential) {
  const std::size_t s = sp.stride(i);
  const std::size_t k = sp.size(i);
  const auto& marg = sp.marginal(i);
  const std::size_t block = s * k;
  for (std::size_t base = 0; base < in.size(); base += block) {
    for (std::size_t off = 0; off < s; ++off) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < k; ++v) {
        if (essential && marg[v] == 0.0) continue;
        m = std::min(m, in[base + off + v * s]);
      }
      assert(std::isfinite(m) && "marginal with no positive mass");
      for (std::size_t v = 0; v < k; ++v) out[base + off + v * s] = m;
    }
  }
}

inline TabulatedFunction cylinder_min(const TabulatedFunction& f, CoordSet K, bool essential) {
  const auto& sp = f.space();
  std::vector<double> cur(f.values().begin(), f.values().end());
  std::vector<double> next(cur.size());
  for (std::size_t i = 0; i < sp.coords(); ++i) {
    if (K.contains(i)) continue;
    min_sweep(sp, cur, next, i, essential);
    cur.swap(next);
  }
  return TabulatedFunction(f.space_ptr(), std::move(cur));
}

}  // namespace detail

/// x -> min of f over [x]_K.
inline TabulatedFunction inf_transform(const TabulatedFunction& f, CoordSet K) {
  return detail::cylinder_min(f, K, false);
}

/// x -> ess inf of f over [x]_K with respect to P on the coordinates of K^c:
/// the min over cylinder points whose K^c part has positive mass.
inline TabulatedFunction ess_inf_transform(const TabulatedFunction& f, CoordSet K) {
  return detail::cylinder_min(f, K, true);
}

/// One table per subset K of the coordinates (indexed by K's mask), all over
/// the same space. Memory is 2^n * |S| doubles.
class TransformBank {
 public:
  TransformBank(std::size_t coords, std::size_t points)
      : coords_(coords), points_(points), data_((std::size_t{1} << coords) * points, 0.0) {}

  std::size_t coords() const { return coords_; }
  std::size_t points() const { return points_; }
  std::span<const double> operator[](CoordSet K) const { return {data_.data() + K.mask() * points_, points_}; }
  std::span<double> mut(CoordSet K) { return {data_.data() + K.mask() * points_, points_}; }

 private:
  std::size_t coords_;
  std::size_t points_;
  std::vector<double> data_;
};

inline void require_bank_size(const ProductSpace& sp, const char* what) {
  if (sp.coords() > kMaxPairEnumerationCoords)
    throw InvalidInput(std::string(what) + ": all-subset tables need n <= " +
                       std::to_string(kMaxPairEnumerationCoords));
}

/// Infimum (or essential infimum) transform for every K at once. Each K is
/// derived from K + {i} by one sweep, with i the lowest coordinate missing
/// from K, so the whole bank costs 2^n sweeps.
inline TransformBank inf_bank(const TabulatedFunction& f, bool essential) {
  const auto& sp = f.space();
  require_bank_size(sp, "inf_bank");
  const std::size_t n = sp.coords();
  TransformBank bank(n, f.size());
  const CoordSet full = sp.full_set();
  std::copy(f.values().begin(), f.values().end(), bank.mut(full).begin());
  for (std::uint32_t m = full.mask(); m-- > 0;) {
    const auto i = static_cast<std::size_t>(std::countr_one(m));
    const CoordSet parent(m | (std::uint32_t{1} << i));
    detail::min_sweep(sp, bank[parent], bank.mut(CoordSet(m)), i, essential);
  }
  return bank;
}

/// A Framework-I collection: non-negative functions with declared dependence sets.
struct FamilyMember {
  TabulatedFunction fn;
  CoordSet dep;
};

class FunctionFamily {
 public:
  explicit FunctionFamily(std::vector<FamilyMember> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidInput("FunctionFamily: empty member list");
    for (std::size_t a = 0; a < members_.size(); ++a) {
      require_same_space(members_[a].fn.space(), members_[0].fn.space(), "FunctionFamily");
      if (!members_[a].dep.subset_of(members_[0].fn.space().full_set()))
        throw InvalidInput("FunctionFamily: member " + std::to_string(a) + " dependence set out of range");
      if (!depends_on(members_[a].fn, members_[a].dep))
        throw InvalidInput("FunctionFamily: member " + std::to_string(a) + " does not depend only on " +
                           members_[a].dep.str());
    }
  }

  const ProductSpace& space() const { return members_.front().fn.space(); }
  const SpacePtr& space_ptr() const { return members_.front().fn.space_ptr(); }
  const std::vector<FamilyMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  const FamilyMember& operator[](std::size_t a) const { return members_[a]; }

 private:
  std::vector<FamilyMember> members_;
};

/// Pointwise supremum of all members.
inline TabulatedFunction family_sup(const FunctionFamily& fam) {
  std::vector<double> out(fam.space().point_count(), 0.0);
  for (const auto& m : fam.members())
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], m.fn[i]);
  return TabulatedFunction(fam.space_ptr(), std::move(out));
}

/// Pointwise sup of the members whose dependence set lies inside K; the empty
/// supremum is the zero function.
inline TabulatedFunction tilde_transform(const FunctionFamily& fam, CoordSet K) {
  std::vector<double> out(fam.space().point_count(), 0.0);
  for (const auto& m : fam.members()) {
    if (!m.dep.subset_of(K)) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], m.fn[i]);
  }
  return TabulatedFunction(fam.space_ptr(), std::move(out));
}

/// tilde_transform for every K: exact-dependence maxima, then a superset-max
/// (zeta) pass over the subset lattice.
inline TransformBank tilde_bank(const FunctionFamily& fam) {
  const auto& sp = fam.space();
  require_bank_size(sp, "tilde_bank");
  const std::size_t n = sp.coords();
  TransformBank bank(n, sp.point_count());
  for (const auto& m : fam.members()) {
    auto dst = bank.mut(m.dep);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], m.fn[i]);
  }
  for (std::size_t c = 0; c < n; ++c) {
    const std::uint32_t bit = std::uint32_t{1} << c;
    for (std::uint32_t m = 0; m < (std::uint32_t{1} << n); ++m) {
      if (!(m & bit)) continue;
      auto dst = bank.mut(CoordSet(m));
      auto src = bank[CoordSet(m ^ bit)];
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
    }
  }
  return bank;
}

/// Point-dependent choice of a CoordSet, or of a disjoint (K, L) pair.
class Selector {
 public:
  static Selector single(std::vector<CoordSet> sets) {
    Selector s;
    s.first_ = std::move(sets);
    return s;
  }

  static Selector pairs(const std::vector<CoordPair>& pairs) {
    Selector s;
    s.first_.reserve(pairs.size());
    s.second_.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!pairs[i].first.disjoint(pairs[i].second))
        throw InvalidInput("Selector: pair at point " + std::to_string(i) + " is not disjoint (" +
                           pairs[i].first.str() + ", " + pairs[i].second.str() + ")");
      s.first_.push_back(pairs[i].first);
      s.second_.push_back(pairs[i].second);
    }
    s.is_pair_ = true;
    return s;
  }

  static Selector constant_pair(std::size_t points, CoordPair p) {
    return pairs(std::vector<CoordPair>(points, p));
  }

  bool is_pair() const { return is_pair_; }
  std::size_t size() const { return first_.size(); }
  CoordSet operator[](std::size_t idx) const { return first_[idx]; }
  CoordPair pair_at(std::size_t idx) const { return {first_[idx], is_pair_ ? second_[idx] : CoordSet{}}; }

  Selector first() const { return single(first_); }
  Selector second() const {
    if (!is_pair_) throw InvalidInput("Selector::second on a single-set selector");
    return single(second_);
  }

 private:
  std::vector<CoordSet> first_;
  std::vector<CoordSet> second_;
  bool is_pair_ = false;
};

using TableMap = std::map<CoordSet, TabulatedFunction>;

/// x -> tables[sel(x)](x).
inline TabulatedFunction apply_selector(const TableMap& tables, const Selector& sel) {
  if (tables.empty()) throw InvalidInput("apply_selector: no tables");
  const auto& first = tables.begin()->second;
  if (sel.size() != first.size()) throw InvalidInput("apply_selector: selector size != point count");
  std::vector<double> out(first.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto it = tables.find(sel[i]);
    if (it == tables.end()) throw InvalidInput("apply_selector: no table for " + sel[i].str());
    out[i] = it->second[i];
  }
  return TabulatedFunction(first.space_ptr(), std::move(out));
}

/// Canonically ordered disjoint pairs from Kcoll x Lcoll.
inline std::vector<CoordPair> disjoint_pairs(const std::vector<CoordSet>& Kcoll, const std::vector<CoordSet>& Lcoll) {
  std::vector<CoordPair> out;
  for (auto K : Kcoll)
    for (auto L : Lcoll)
      if (K.disjoint(L)) out.push_back({K, L});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// At each point, the first pair in canonical order that maximizes
/// fTables[K](x) * gTables[L](x).
inline Selector argmax_selector(const TableMap& fTables, const TableMap& gTables, std::vector<CoordPair> pairs) {
  if (pairs.empty()) throw InvalidInput("argmax_selector: empty pair list");
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::pair<const TabulatedFunction*, const TabulatedFunction*>> tabs;
  for (const auto& p : pairs) {
    if (!p.first.disjoint(p.second)) throw InvalidInput("argmax_selector: non-disjoint pair");
    auto fi = fTables.find(p.first);
    auto gi = gTables.find(p.second);
    if (fi == fTables.end() || gi == gTables.end())
      throw InvalidInput("argmax_selector: missing table for pair (" + p.first.str() + ", " + p.second.str() + ")");
    tabs.emplace_back(&fi->second, &gi->second);
  }
  const std::size_t N = tabs.front().first->size();
  std::vector<CoordPair> chosen(N);
  for (std::size_t x = 0; x < N; ++x) {
    double best = -1.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double v = (*tabs[p].first)[x] * (*tabs[p].second)[x];
      if (v > best) {
        best = v;
        chosen[x] = pairs[p];
      }
    }
  }
  return Selector::pairs(chosen);
}

/// Lift f on S to (x, y) -> f(x) on S x S.
inline TabulatedFunction lift_x(const TabulatedFunction& f, SpacePtr doubled_space) {
  const std::size_t N = f.size();
  std::vector<double> out(N * N);
  for (std::size_t ix = 0; ix < N; ++ix) std::fill_n(out.begin() + ix * N, N, f[ix]);
  return TabulatedFunction(std::move(doubled_space), std::move(out));
}

/// Lift g on S to (x, y) -> g(y) on S x S.
inline TabulatedFunction lift_y(const TabulatedFunction& g, SpacePtr doubled_space) {
  const std::size_t N = g.size();
  std::vector<double> out(N * N);
  for (std::size_t ix = 0; ix < N; ++ix) std::copy(g.values().begin(), g.values().end(), out.begin() + ix * N);
  return TabulatedFunction(std::move(doubled_space), std::move(out));
}

}  // namespace bkr
