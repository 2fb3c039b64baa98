#pragma once

// Seeded Monte Carlo integration over P or P x P with normal-approximation
// 99% confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bkrlab/space.hpp"

namespace bkr {

inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile
inline constexpr std::size_t kMinMcSamples = 1000;

/// splitmix64 step; used to derive independent stream seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits; platform independent.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Draws points of a product space by per-coordinate inverse CDF.
class PointSampler {
 public:
  explicit PointSampler(const ProductSpace& space) : space_(&space) {
    require_exact(space, "PointSampler");
    for (std::size_t i = 0; i < space.coords(); ++i) {
      std::vector<double> cum;
      double acc = 0.0;
      std::size_t last_pos = 0;
      for (std::size_t v = 0; v < space.size(i); ++v) {
        acc += space.marginal(i)[v];
        cum.push_back(acc);
        if (space.marginal(i)[v] > 0.0) last_pos = v;
      }
      cdf_.push_back(std::move(cum));
      last_positive_.push_back(last_pos);
    }
  }

  std::size_t sample(std::mt19937_64& rng) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
      const double u = unit_uniform(rng);
      std::size_t v = 0;
      const auto& c = cdf_[i];
      while (v < last_positive_[i] && !(u < c[v])) ++v;
      idx += v * space_->stride(i);
    }
    return idx;
  }

 private:
  const ProductSpace* space_;
  std::vector<std::vector<double>> cdf_;
  std::vector<std::size_t> last_positive_;
};

struct McEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t samples = 0;
};

/// Running means and covariances of jointly sampled quantities.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t k) : mean_(k, 0.0), delta_(k, 0.0), comoment_(k * k, 0.0) {}

  void add(std::span<const double> v) {
    const std::size_t k = mean_.size();
    ++n_;
    for (std::size_t a = 0; a < k; ++a) {
      delta_[a] = v[a] - mean_[a];
      mean_[a] += delta_[a] / static_cast<double>(n_);
    }
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) comoment_[a * k + b] += delta_[a] * (v[b] - mean_[b]);
  }
  void add(std::initializer_list<double> v) { add(std::span<const double>(v.begin(), v.size())); }

  std::size_t count() const { return n_; }
  double mean(std::size_t a) const { return mean_[a]; }
  /// Covariance of the sample means.
  double mean_cov(std::size_t a, std::size_t b) const {
    if (n_ < 2) return 0.0;
    return comoment_[a * mean_.size() + b] / static_cast<double>(n_ - 1) / static_cast<double>(n_);
  }
  McEstimate estimate(std::size_t a) const { return {mean_[a], kZ99 * std::sqrt(std::max(0.0, mean_cov(a, a))), n_}; }

  /// Product of the means of quantities [first, last) with a delta-method interval.
  McEstimate product(std::size_t first, std::size_t last) const {
    double prod = 1.0;
    for (std::size_t a = first; a < last; ++a) prod *= mean_[a];
    // Partial derivative of the product w.r.t. mean a.
    auto partial = [&](std::size_t a) {
      double p = 1.0;
      for (std::size_t b = first; b < last; ++b)
        if (b != a) p *= mean_[b];
      return p;
    };
    double var = 0.0;
    for (std::size_t a = first; a < last; ++a)
      for (std::size_t b = first; b < last; ++b) var += partial(a) * partial(b) * mean_cov(a, b);
    return {prod, kZ99 * std::sqrt(std::max(0.0, var)), n_};
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> delta_;
  std::vector<double> comoment_;
};

inline void require_samples(std::size_t samples) {
  if (samples < kMinMcSamples) throw InvalidInput("Monte Carlo needs at least 1000 samples");
}

/// Sample mean of maximand(x) for x ~ P. Deterministic given the seed.
template <class Maximand>
McEstimate mc_integrate(const ProductSpace& space, std::size_t samples, std::uint64_t seed, Maximand&& maximand) {
  require_samples(samples);
  PointSampler sampler(space);
  std::mt19937_64 rng(seed);
  MomentAccumulator acc(1);
  for (std::size_t s = 0; s < samples; ++s) acc.add({maximand(sampler.sample(rng))});
  return acc.estimate(0);
}

/// Sample mean of maximand(x, y) for (x, y) ~ P x P; X and Y are drawn
/// independently per sample.
template <class Maximand>
McEstimate mc_integrate_pairs(const ProductSpace& space, std::size_t samples, std::uint64_t seed,
                              Maximand&& maximand) {
  require_samples(samples);
  PointSampler sampler(space);
  std::mt19937_64 rng(seed);
  MomentAccumulator acc(1);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t ix = sampler.sample(rng);
    const std::size_t iy = sampler.sample(rng);
    acc.add({maximand(ix, iy)});
  }
  return acc.estimate(0);
}

}  // namespace bkr
