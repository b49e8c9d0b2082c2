#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace edulevel {

/// splitmix64: the pinned generator behind every seeded operation in this
/// toolkit. Chosen because it is trivially portable: the whole state is one
/// 64-bit word and the update is three xor-shift-multiplies, so any other
/// implementation can reproduce our shuffles and splits bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, bound). Plain modulo, pinned: the bias is far below
  /// anything observable at our sample sizes and the rule is easy to restate.
  std::uint64_t next_below(std::uint64_t bound) {
    return bound == 0 ? 0 : next() % bound;
  }

  /// Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (first component only; stateless pairs
  /// would break the one-draw-per-call bookkeeping tests rely on).
  double next_gaussian();

 private:
  std::uint64_t state_;
};

inline double SplitMix64::next_gaussian() {
  // next_unit() can return 0; nudge away from log(0).
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 < 1e-300) u1 = 1e-300;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Fan one root seed out to independent streams: each role string gets its
/// own derived seed, so one number reproduces a whole experiment.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view role) {
  return SplitMix64(root ^ fnv1a64(role)).next();
}

/// Fisher-Yates, descending index, draws via next_below. Pinned as the one
/// shuffle used everywhere (dataset balancing, splits, bootstrap).
template <class T>
void seeded_shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace edulevel
