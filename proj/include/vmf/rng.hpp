#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vmf {

// splitmix64: used to derive independent sub-seeds from (base seed, role).
// Mixing the role string in keeps e.g. weight init and batch shuffling
// decoupled, so changing one consumer never shifts another's stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view role) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the role name
  for (unsigned char c : role) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(base ^ splitmix64(h));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view role,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(base, role) ^ splitmix64(index + 1));
}

// mt19937_64 wrapper with pinned draw algorithms. std::uniform_* and
// std::normal_distribution are implementation-defined, so everything that
// must reproduce across standard libraries is spelled out here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // 53-bit mantissa trick, uniform on [0, 1).
  double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; the second value of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();  // avoid log(0)
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Unbiased integer in [0, n) by rejection; n must be > 0.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Gamma(alpha, 1). Delegates to the standard library; only the movMF-style
  // Beta envelope uses it, and that reproducibility is promised per-build.
  double gamma(double alpha) {
    std::gamma_distribution<double> dist(alpha, 1.0);
    return dist(engine_);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {  // Fisher-Yates, back to front
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace vmf
