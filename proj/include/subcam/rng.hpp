#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace subcam {

// splitmix64 finalizer, used to mix seeds and tags into substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a base seed plus named/numeric tags.
// Every source of randomness in the project is a substream of one run seed.
inline std::uint64_t substream(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, Rest... rest);
template <typename... Rest>
std::uint64_t substream(std::uint64_t seed, std::string_view tag, Rest... rest);

template <typename... Rest>
std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, Rest... rest) {
  return substream(mix64(seed ^ mix64(tag + 0x9e3779b97f4a7c15ULL)), rest...);
}

template <typename... Rest>
std::uint64_t substream(std::uint64_t seed, std::string_view tag, Rest... rest) {
  return substream(seed, hash_string(tag), rest...);
}

// mt19937_64 output is specified bit-for-bit by the standard. The helpers
// below replace std::uniform_*_distribution, whose results vary between
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform in {0, ..., n-1}, unbiased
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = gen_() & mask;
      if (v < n) return v;
    }
  }

  // uniform in {lo, ..., hi} inclusive
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    return lo + static_cast<int>(uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace subcam
