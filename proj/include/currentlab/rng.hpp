#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace currentlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Bernoulli(p) as a comparison of a raw 64-bit draw against a fixed cut,
/// so results do not depend on floating-point distribution code.
class Bernoulli {
 public:
  Bernoulli() = default;
  explicit Bernoulli(double p) {
    if (p <= 0.0) {
      cut_ = 0;
    } else if (p >= 1.0) {
      always_ = true;
    } else {
      cut_ = static_cast<std::uint64_t>(std::ldexp(p, 64));
    }
  }
  template <class Engine>
  bool operator()(Engine& eng) const {
    return always_ || eng() < cut_;
  }

 private:
  std::uint64_t cut_ = 0;
  bool always_ = false;
};

using Engine = std::mt19937_64;

inline int random_sign(Engine& eng) { return (eng() >> 63) ? 1 : -1; }

}  // namespace currentlab
