#pragma once

// Counter-based random numbers shared by every randomized routine.
//
// Output i of a stream with key k is splitmix64(k + (i + 1) * 0x9E3779B97F4A7C15),
// i.e. SplitMix64 evaluated at an explicit counter, so each draw is a pure
// function of (key, counter). Sub-streams are derived with split(id), which
// re-keys through the same finalizer. Integer draws use Lemire's
// multiply-shift with rejection; doubles take the top 53 bits. Nothing here
// depends on the standard library's distribution objects, so sequences are
// reproducible across platforms and languages.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace sofic {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    ++counter_;
    return splitmix64(key_ + counter_ * kGoldenGamma);
  }

  /// Independent stream for sub-task `id`; does not advance this stream.
  constexpr CounterRng split(std::uint64_t id) const {
    return CounterRng(splitmix64(key_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL)));
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Index drawn from a probability vector by inverse CDF.
template <typename Weights>
std::size_t draw_index(CounterRng& rng, const Weights& weights) {
  const double u = rng.uniform();
  double acc = 0.0;
  const auto n = static_cast<std::size_t>(weights.size());
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Rounding left u above the total; fall back to the last positive entry.
  for (std::size_t i = n; i-- > 0;)
    if (weights[i] > 0) return i;
  return n - 1;
}

/// Fisher-Yates shuffle of the identity on {0..n-1}.
template <typename Index = std::uint32_t>
std::vector<Index> random_permutation(std::size_t n, CounterRng rng) {
  std::vector<Index> p(n);
  std::iota(p.begin(), p.end(), Index{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace sofic
