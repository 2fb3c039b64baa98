#pragma once

// Events as point sets, disjoint occurrence (box), its two-copy version
// (diamond) and the essential-infimum majorant of the box.

#include <functional>
#include <string>
#include <vector>

#include "bkrlab/field.hpp"
#include "bkrlab/report.hpp"

namespace bkr {

class Event {
 public:
  Event(SpacePtr space, std::vector<bool> members) : space_(std::move(space)), members_(std::move(members)) {
    require_exact(*space_, "Event");
    if (members_.size() != space_->point_count()) throw InvalidInput("Event: bitset length != point count");
  }

  static Event none(SpacePtr space) {
    const auto n = space->point_count();
    return Event(std::move(space), std::vector<bool>(n, false));
  }
  static Event all(SpacePtr space) {
    const auto n = space->point_count();
    return Event(std::move(space), std::vector<bool>(n, true));
  }
  static Event from_indices(SpacePtr space, const std::vector<std::size_t>& indices) {
    auto e = none(space);
    for (auto i : indices) {
      if (i >= e.members_.size()) throw InvalidInput("Event: point index " + std::to_string(i) + " out of range");
      e.members_[i] = true;
    }
    return e;
  }
  static Event from_predicate(SpacePtr space, const std::function<bool(const Point&)>& pred) {
    auto e = none(space);
    for (std::size_t i = 0; i < e.members_.size(); ++i) e.members_[i] = pred(e.space_->point_at(i));
    return e;
  }

  const ProductSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  bool contains(std::size_t idx) const { return members_[idx]; }
  bool contains(const Point& x) const { return members_[space_->index_of(x)]; }
  const std::vector<bool>& members() const { return members_; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(members_.begin(), members_.end(), true)); }

  double probability() const {
    const auto p = point_probabilities(*space_);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (members_[i]) s += p[i];
    return s;
  }

  TabulatedFunction indicator() const {
    std::vector<double> v(members_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = members_[i] ? 1.0 : 0.0;
    return TabulatedFunction(space_, std::move(v));
  }

  bool subset_of(const Event& o) const {
    for (std::size_t i = 0; i < members_.size(); ++i)
      if (members_[i] && !o.members_[i]) return false;
    return true;
  }

  bool operator==(const Event& o) const { return members_ == o.members_; }

 private:
  SpacePtr space_;
  std::vector<bool> members_;
};

inline Event intersection(const Event& A, const Event& B) {
  require_same_space(A.space(), B.space(), "intersection");
  std::vector<bool> m(A.members().size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = A.contains(i) && B.contains(i);
  return Event(A.space_ptr(), std::move(m));
}

/// Which disjoint (K, L) pairs are scanned. Because the cylinder transforms
/// are nondecreasing in K, widening L to K^c never lowers a product, so the
/// 2^n complement pairs reach the same maximum as all 3^n disjoint pairs.
/// The ess-inf transform is monotone only at points of positive mass, so the
/// majorant falls back to the full scan when some label has zero mass.
enum class PairEnumeration { complement, all_disjoint };

namespace detail {

template <class Accept>
void for_each_certificate_pair(std::size_t n, PairEnumeration how, Accept&& accept) {
  const std::uint32_t full = CoordSet::full(n).mask();
  for (std::uint32_t K = 0; K <= full; ++K) {
    if (how == PairEnumeration::complement) {
      if (accept(CoordSet(K), CoordSet(full & ~K))) return;
    } else {
      const std::uint32_t rest = full & ~K;
      // Subsets of rest in increasing order.
      for (std::uint32_t L = 0;; L = (L - rest) & rest) {
        if (accept(CoordSet(K), CoordSet(L))) return;
        if (L == rest) break;
      }
    }
  }
}

inline Event certified_set(const Event& A, const Event& B, bool essential, PairEnumeration how) {
  require_same_space(A.space(), B.space(), "box");
  if (essential) {
    for (std::size_t i = 0; i < A.space().coords(); ++i)
      for (double p : A.space().marginal(i))
        if (p == 0.0) how = PairEnumeration::all_disjoint;
  }
  const auto fa = inf_bank(A.indicator(), essential);
  const auto fb = inf_bank(B.indicator(), essential);
  const std::size_t N = A.space().point_count();
  std::vector<bool> out(N, false);
  for (std::size_t x = 0; x < N; ++x) {
    for_each_certificate_pair(A.space().coords(), how, [&](CoordSet K, CoordSet L) {
      if (fa[K][x] * fb[L][x] == 1.0) out[x] = true;
      return out[x];
    });
  }
  return Event(A.space_ptr(), std::move(out));
}

}  // namespace detail

/// A box B: points x with disjoint K, L such that [x]_K lies in A and [x]_L in B.
inline Event box(const Event& A, const Event& B, PairEnumeration how = PairEnumeration::complement) {
  return detail::certified_set(A, B, false, how);
}

/// The set where max over disjoint K, L of ess-inf(1_A, K) * ess-inf(1_B, L)
/// equals 1. Contains box(A, B); equal to it when every marginal is positive.
inline Event essinf_majorant(const Event& A, const Event& B, PairEnumeration how = PairEnumeration::complement) {
  return detail::certified_set(A, B, true, how);
}

/// A diamond B on S x S: pairs (x, y) with disjoint K, L such that [x]_K lies
/// in A and [y]_L in B.
inline Event diamond(const Event& A, const Event& B, PairEnumeration how = PairEnumeration::complement) {
  require_same_space(A.space(), B.space(), "diamond");
  auto dspace = share(doubled(A.space()));
  if (dspace->mc_only()) throw InvalidInput("diamond: doubled space exceeds the exact-enumeration budget");
  const auto fa = inf_bank(A.indicator(), false);
  const auto fb = inf_bank(B.indicator(), false);
  const std::size_t N = A.space().point_count();
  const std::size_t n = A.space().coords();
  std::vector<bool> out(N * N, false);
  std::vector<CoordPair> pairs;
  detail::for_each_certificate_pair(n, how, [&](CoordSet K, CoordSet L) {
    pairs.push_back({K, L});
    return false;
  });
  for (std::size_t x = 0; x < N; ++x) {
    for (const auto& p : pairs) {
      if (fa[p.first][x] != 1.0) continue;
      const auto gl = fb[p.second];
      for (std::size_t y = 0; y < N; ++y)
        if (gl[y] == 1.0) out[x * N + y] = true;
    }
  }
  return Event(std::move(dspace), std::move(out));
}

inline InequalityReport bkr_check(const Event& A, const Event& B) {
  const auto bx = box(A, B);
  const double pa = A.probability();
  const double pb = B.probability();
  return make_report("bkr", bx.probability(), pa * pb,
                     "P(A)=" + fmt_short(pa) + " P(B)=" + fmt_short(pb) +
                         " |box|=" + std::to_string(bx.count()));
}

/// (P x P)(A diamond B) <= P(A and B).
inline InequalityReport kss_check(const Event& A, const Event& B) {
  const auto dm = diamond(A, B);
  const auto ab = intersection(A, B);
  return make_report("kss", dm.probability(), ab.probability(), "|diamond|=" + std::to_string(dm.count()));
}

}  // namespace bkr
