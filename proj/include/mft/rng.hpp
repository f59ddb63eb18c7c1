#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace mft {

// Fixed, portable pseudo-random generator used for all synthetic fixtures.
// The algorithm (SplitMix64) and the derived distributions are documented in
// the README so fixtures can be regenerated byte-identically elsewhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 mantissa bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; never zero, safe as a log argument.
  double next_unit_open() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller pair of independent standard normal deviates.
  std::pair<double, double> next_gaussian_pair() {
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  std::uint64_t state_;
};

// Derives an independent stream key from a seed and up to three indices by
// chaining SplitMix64 steps. Used to give every (frame pair, plane) its own
// deterministic stream regardless of generation order.
inline std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t a,
                                       std::uint64_t b = 0, std::uint64_t c = 0) {
  SplitMix64 mixer(seed);
  std::uint64_t key = mixer.next() ^ (a * 0xA24BAED4963EE407ull);
  SplitMix64 mixer2(key);
  key = mixer2.next() ^ (b * 0x9FB21C651E98DF25ull);
  SplitMix64 mixer3(key);
  return mixer3.next() ^ (c * 0xD6E8FEB86659FD93ull);
}

}  // namespace mft
