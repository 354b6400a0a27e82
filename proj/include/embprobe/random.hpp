#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>
#include <type_traits>
#include <utility>

namespace embprobe {

// splitmix64 finalizer. Used to expand one root seed into independent
// per-component streams:
//   derive_seed(root, a, b, ...) = mix(...mix(mix(root ^ K) ^ a) ^ b ...)
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, for turning component names into seed material.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t root) { return splitmix64(root ^ 0x5eedULL); }

namespace detail {

inline std::uint64_t seed_word(std::string_view component) { return fnv1a(component); }
inline std::uint64_t seed_word(const char* component) { return fnv1a(component); }
template <typename T>
  requires std::is_integral_v<T>
std::uint64_t seed_word(T v) {
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

// Each part may be an integer or a component name.
template <typename First, typename... Rest>
std::uint64_t derive_seed(std::uint64_t root, First first, Rest... rest) {
  return derive_seed(splitmix64(derive_seed(root) ^ detail::seed_word(first)), rest...);
}

// Thin wrapper over mt19937_64. The distributions are written out here
// instead of using <random>'s so streams are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (no cached second value).
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Seeded pseudo-random permutation of [0, n) evaluated pointwise, so large
// index sets can be visited in shuffled order without materializing them.
// Balanced 4-round Feistel network on the smallest even bit width covering
// n, with cycle walking for values >= n.
class IndexPermutation {
 public:
  IndexPermutation(std::uint64_t n, std::uint64_t seed) : n_(n) {
    unsigned bits = 2;
    while (bits < 64 && (std::uint64_t{1} << bits) < n) bits += 2;
    half_ = bits / 2;
    mask_ = (std::uint64_t{1} << half_) - 1;
    for (std::size_t r = 0; r < keys_.size(); ++r) keys_[r] = derive_seed(seed, "feistel", r);
  }

  std::uint64_t size() const noexcept { return n_; }

  std::uint64_t operator()(std::uint64_t i) const {
    std::uint64_t x = i;
    do {
      x = encrypt(x);
    } while (x >= n_);
    return x;
  }

 private:
  std::uint64_t encrypt(std::uint64_t x) const {
    std::uint64_t left = x >> half_, right = x & mask_;
    for (std::uint64_t key : keys_) {
      const std::uint64_t next = left ^ (splitmix64(key ^ right) & mask_);
      left = right;
      right = next;
    }
    return (left << half_) | right;
  }

  std::uint64_t n_;
  unsigned half_ = 1;
  std::uint64_t mask_ = 1;
  std::array<std::uint64_t, 4> keys_{};
};

}  // namespace embprobe
