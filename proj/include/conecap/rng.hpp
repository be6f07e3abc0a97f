#pragma once

#include <cmath>
#include <cstdint>

namespace conecap {

// Every randomized routine in the library draws from a counter-derived
// substream keyed by (master seed, purpose tag, item index). Work items
// own disjoint streams, so results do not depend on how items are split
// across worker threads.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// 64-bit avalanche finalizer (the splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives the state key of substream (tag, index) under a master seed.
inline std::uint64_t stream_key(std::uint64_t master, std::uint64_t tag,
                                std::uint64_t index) {
  std::uint64_t k = mix64(master + kGolden);
  k = mix64(k + kGolden * (tag + 1));
  k = mix64(k + kGolden * (index + 1));
  return k;
}

/// Purpose tags used to separate the library's random streams. Values are
/// part of the reproducibility contract: changing them changes all outputs.
namespace stream_tag {
inline constexpr std::uint64_t kSpherePoint = 1;   // one stream per sphere sample
inline constexpr std::uint64_t kCapPoint = 2;      // one stream per cone-cap sample
inline constexpr std::uint64_t kStart = 3;         // one stream per optimizer start
inline constexpr std::uint64_t kInstance = 4;      // one stream per experiment trial
inline constexpr std::uint64_t kRuleSeed = 5;      // per-trial seed handed to rules
inline constexpr std::uint64_t kMargin = 6;        // interior-margin restarts
inline constexpr std::uint64_t kRotation = 7;      // random rotation draws
inline constexpr std::uint64_t kCheck = 8;         // verification suite cases
}  // namespace stream_tag

/// Counter-based generator: splitmix64 over a derived state key.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}
  RngStream(std::uint64_t master, std::uint64_t tag, std::uint64_t index)
      : state_(stream_key(master, tag, index)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform01_open_low() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; draws come in cached pairs.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace conecap
