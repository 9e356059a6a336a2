#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace essaykit {

// SplitMix64 step (Steele, Lea, Flood 2014). Fully specified arithmetic,
// identical output on every platform and compiler.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seedable generator used for every random decision in the toolkit.
// std::uniform_int_distribution is implementation-defined, so bounded
// draws are done here with an unbiased rejection reduction instead.
class StableRng {
 public:
  explicit StableRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64_next(state_); }

  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed and a path of
// integers (e.g. rubric, score class, ordinal). Outputs are stable, so
// per-item streams are identical whether items are produced serially or
// in parallel.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = base;
  for (std::uint64_t p : path) {
    std::uint64_t t = s ^ (p + 0x9e3779b97f4a7c15ULL);
    s = splitmix64_next(t);
  }
  return s;
}

// Fisher-Yates, driven by StableRng so the permutation is platform-stable.
template <class T>
void stable_shuffle(std::vector<T>& v, StableRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

}  // namespace essaykit
