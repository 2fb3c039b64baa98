#pragma once

// Finite product spaces S = S_1 x ... x S_n with a product measure, points in
// mixed-radix order, coordinate subsets as bitmasks, and the doubled space S x S.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bkr {

inline constexpr std::size_t kMaxCoords = 16;
inline constexpr std::size_t kMaxDoubledCoords = 2 * kMaxCoords;
inline constexpr std::size_t kExactPointBudget = std::size_t{1} << 24;
inline constexpr std::size_t kMaxPairEnumerationCoords = 10;
inline constexpr double kMarginalSumTolerance = 1e-12;

/// Raised for inputs that violate a documented precondition (bad sizes,
/// invalid marginals, mismatched spaces, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A subset of coordinate indices {0, ..., n-1}.
class CoordSet {
 public:
  constexpr CoordSet() = default;
  constexpr explicit CoordSet(std::uint32_t mask) : mask_(mask) {}

  static CoordSet of(std::initializer_list<std::size_t> coords) {
    std::uint32_t m = 0;
    for (auto c : coords) m |= std::uint32_t{1} << c;
    return CoordSet(m);
  }
  static constexpr CoordSet full(std::size_t n) {
    return CoordSet(n >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1);
  }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool contains(std::size_t i) const { return (mask_ >> i) & 1u; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
  constexpr bool subset_of(CoordSet other) const { return (mask_ & ~other.mask_) == 0; }
  constexpr bool disjoint(CoordSet other) const { return (mask_ & other.mask_) == 0; }
  constexpr CoordSet complement(std::size_t n) const { return CoordSet(~mask_ & full(n).mask_); }

  constexpr CoordSet operator|(CoordSet o) const { return CoordSet(mask_ | o.mask_); }
  constexpr CoordSet operator&(CoordSet o) const { return CoordSet(mask_ & o.mask_); }
  constexpr auto operator<=>(const CoordSet&) const = default;

  std::string str() const {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < 32; ++i) {
      if (!contains(i)) continue;
      if (!first) s += ',';
      s += std::to_string(i);
      first = false;
    }
    return s + "}";
  }

 private:
  std::uint32_t mask_ = 0;
};

/// Disjoint (K, L) pair. Canonical order is lexicographic on the masks.
struct CoordPair {
  CoordSet first;
  CoordSet second;
  constexpr auto operator<=>(const CoordPair&) const = default;
};

/// All 2^n subsets of {0..n-1} in increasing mask order.
inline std::vector<CoordSet> all_subsets(std::size_t n) {
  std::vector<CoordSet> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint32_t m = 0; m < (std::uint32_t{1} << n); ++m) out.emplace_back(m);
  return out;
}

using Point = std::vector<std::size_t>;

inline std::string point_str(const Point& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(x[i]);
  }
  return s + ")";
}

class ProductSpace {
 public:
  /// Labels default to 0, 1, ..., |S_i|-1 when `labels` is empty.
  ProductSpace(std::vector<std::size_t> sizes, std::vector<std::vector<double>> labels,
               std::vector<std::vector<double>> marginals)
      : ProductSpace(std::move(sizes), std::move(labels), std::move(marginals), kMaxCoords) {}

  /// Uniform marginals on every coordinate.
  static ProductSpace uniform(std::vector<std::size_t> sizes) {
    std::vector<std::vector<double>> marg;
    for (auto k : sizes) marg.emplace_back(k, 1.0 / static_cast<double>(k));
    return ProductSpace(std::move(sizes), {}, std::move(marg));
  }

  /// n i.i.d. coordinates sharing one label set and one marginal.
  static ProductSpace iid(std::size_t n, std::vector<double> labels, std::vector<double> marginal) {
    std::vector<std::size_t> sizes(n, labels.size());
    return ProductSpace(std::move(sizes), std::vector(n, labels), std::vector(n, marginal));
  }

  std::size_t coords() const { return sizes_.size(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t size(std::size_t i) const { return sizes_[i]; }
  const std::vector<double>& labels(std::size_t i) const { return labels_[i]; }
  const std::vector<double>& marginal(std::size_t i) const { return marginals_[i]; }
  const std::vector<std::vector<double>>& all_labels() const { return labels_; }
  const std::vector<std::vector<double>>& all_marginals() const { return marginals_; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }
  CoordSet full_set() const { return CoordSet::full(coords()); }

  /// Total number of points; only meaningful when !mc_only().
  std::size_t point_count() const { return point_count_; }
  /// True when the point count exceeds the exact-enumeration budget.
  bool mc_only() const { return mc_only_; }

  std::size_t index_of(const Point& x) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < coords(); ++i) idx += x[i] * strides_[i];
    return idx;
  }
  Point point_at(std::size_t idx) const {
    Point x(coords());
    for (std::size_t i = 0; i < coords(); ++i) x[i] = (idx / strides_[i]) % sizes_[i];
    return x;
  }
  std::size_t digit(std::size_t idx, std::size_t i) const { return (idx / strides_[i]) % sizes_[i]; }

  bool valid_point(const Point& x) const {
    if (x.size() != coords()) return false;
    for (std::size_t i = 0; i < coords(); ++i)
      if (x[i] >= sizes_[i]) return false;
    return true;
  }

  bool operator==(const ProductSpace& o) const {
    return sizes_ == o.sizes_ && labels_ == o.labels_ && marginals_ == o.marginals_;
  }

 private:
  friend ProductSpace doubled(const ProductSpace& space);

  ProductSpace(std::vector<std::size_t> sizes, std::vector<std::vector<double>> labels,
               std::vector<std::vector<double>> marginals, std::size_t max_coords)
      : sizes_(std::move(sizes)), labels_(std::move(labels)), marginals_(std::move(marginals)) {
    const std::size_t n = sizes_.size();
    if (n < 1 || n > max_coords)
      throw InvalidInput("coordinate count must be in [1, " + std::to_string(max_coords) + "], got " +
                         std::to_string(n));
    if (labels_.empty()) {
      for (auto k : sizes_) {
        std::vector<double> l(k);
        for (std::size_t v = 0; v < k; ++v) l[v] = static_cast<double>(v);
        labels_.push_back(std::move(l));
      }
    }
    if (labels_.size() != n || marginals_.size() != n)
      throw InvalidInput("labels/marginals must have one entry per coordinate");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string where = "coordinate " + std::to_string(i) + ": ";
      if (sizes_[i] < 1) throw InvalidInput(where + "cardinality must be >= 1");
      if (labels_[i].size() != sizes_[i] || marginals_[i].size() != sizes_[i])
        throw InvalidInput(where + "labels/marginal length must equal cardinality");
      for (std::size_t v = 1; v < sizes_[i]; ++v)
        if (!(labels_[i][v - 1] < labels_[i][v])) throw InvalidInput(where + "labels must be strictly increasing");
      double sum = 0.0;
      for (double p : marginals_[i]) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput(where + "probabilities must be finite and >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kMarginalSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << where << "marginal sums to " << sum << ", expected 1";
        throw InvalidInput(os.str());
      }
    }
    strides_.assign(n, 1);
    // Saturating product; anything past the budget is MC-only anyway.
    std::size_t count = 1;
    for (std::size_t i = n; i-- > 0;) {
      strides_[i] = count;
      if (count > kExactPointBudget || sizes_[i] > kExactPointBudget) {
        count = kExactPointBudget + 1;
      } else {
        count *= sizes_[i];
      }
    }
    mc_only_ = count > kExactPointBudget;
    point_count_ = mc_only_ ? 0 : count;
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::vector<double>> labels_;
  std::vector<std::vector<double>> marginals_;
  std::vector<std::size_t> strides_;
  std::size_t point_count_ = 0;
  bool mc_only_ = false;
};

using SpacePtr = std::shared_ptr<const ProductSpace>;

inline SpacePtr share(ProductSpace space) { return std::make_shared<const ProductSpace>(std::move(space)); }

inline void require_exact(const ProductSpace& space, const char* what) {
  if (space.mc_only())
    throw InvalidInput(std::string(what) + ": space exceeds the exact-enumeration budget");
}

/// Forward range over all points of a space in mixed-radix order (last
/// coordinate varies fastest).
class PointRange {
 public:
  class iterator {
   public:
    using value_type = Point;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::input_iterator_tag;
    using pointer = const Point*;
    using reference = const Point&;

    iterator() = default;
    iterator(const ProductSpace* space, bool end) : space_(space), done_(end) {
      if (!end) current_.assign(space->coords(), 0);
    }
    const Point& operator*() const { return current_; }
    const Point* operator->() const { return &current_; }
    iterator& operator++() {
      for (std::size_t i = current_.size(); i-- > 0;) {
        if (++current_[i] < space_->size(i)) return *this;
        current_[i] = 0;
      }
      done_ = true;
      return *this;
    }
    iterator operator++(int) {
      auto old = *this;
      ++*this;
      return old;
    }
    bool operator==(const iterator& o) const { return done_ == o.done_ && (done_ || current_ == o.current_); }

   private:
    const ProductSpace* space_ = nullptr;
    Point current_;
    bool done_ = true;
  };

  explicit PointRange(const ProductSpace& space) : space_(&space) { require_exact(space, "point_iter"); }
  iterator begin() const { return iterator(space_, false); }
  iterator end() const { return iterator(space_, true); }

 private:
  const ProductSpace* space_;
};

inline PointRange point_iter(const ProductSpace& space) { return PointRange(space); }

inline double prob(const ProductSpace& space, const Point& x) {
  double p = 1.0;
  for (std::size_t i = 0; i < space.coords(); ++i) p *= space.marginal(i)[x[i]];
  return p;
}

/// P_K mass of x_K: product of the marginals over coordinates in K.
inline double marginal_prob(const ProductSpace& space, const Point& x, CoordSet K) {
  double p = 1.0;
  for (std::size_t i = 0; i < space.coords(); ++i)
    if (K.contains(i)) p *= space.marginal(i)[x[i]];
  return p;
}

/// Point probabilities for every linear index.
inline std::vector<double> point_probabilities(const ProductSpace& space) {
  require_exact(space, "point_probabilities");
  std::vector<double> p(space.point_count(), 1.0);
  for (std::size_t i = 0; i < space.coords(); ++i) {
    const auto& m = space.marginal(i);
    const std::size_t s = space.stride(i);
    for (std::size_t idx = 0; idx < p.size(); ++idx) p[idx] *= m[(idx / s) % space.size(i)];
  }
  return p;
}

/// Linear indices of [x]_K = {y : y_K = x_K}, in increasing order.
inline std::vector<std::size_t> cylinder_indices(const ProductSpace& space, const Point& x, CoordSet K) {
  require_exact(space, "cylinder");
  std::size_t base = 0;
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < space.coords(); ++i) {
    if (K.contains(i)) {
      base += x[i] * space.stride(i);
    } else {
      free.push_back(i);
    }
  }
  std::vector<std::size_t> out{base};
  for (auto i : free) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * space.size(i));
    for (auto b : out)
      for (std::size_t v = 0; v < space.size(i); ++v) next.push_back(b + v * space.stride(i));
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Point> cylinder(const ProductSpace& space, const Point& x, CoordSet K) {
  std::vector<Point> out;
  for (auto idx : cylinder_indices(space, x, K)) out.push_back(space.point_at(idx));
  return out;
}

/// S x S with measure P x P. Coordinates [0, n) are the X copy and [n, 2n)
/// the Y copy, so the linear index of (x, y) is index(x) * |S| + index(y).
inline ProductSpace doubled(const ProductSpace& space) {
  auto sizes = space.sizes();
  auto labels = space.all_labels();
  auto marg = space.all_marginals();
  sizes.insert(sizes.end(), space.sizes().begin(), space.sizes().end());
  labels.insert(labels.end(), space.all_labels().begin(), space.all_labels().end());
  marg.insert(marg.end(), space.all_marginals().begin(), space.all_marginals().end());
  return ProductSpace(std::move(sizes), std::move(labels), std::move(marg), kMaxDoubledCoords);
}

/// Linear index in the doubled space of the pair (x, y).
inline std::size_t pair_index(const ProductSpace& base, std::size_t ix, std::size_t iy) {
  return ix * base.point_count() + iy;
}

}  // namespace bkr
