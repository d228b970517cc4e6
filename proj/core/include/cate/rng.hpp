#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace cate {

// Seeded generator with platform-independent samplers. The standard
// <random> distributions are implementation-defined, so only the raw
// mt19937_64 stream is used and every sampler is written out here. Two Rng
// objects with equal seeds produce identical sequences on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Marsaglia polar method).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  int binomial(int trials, double p);
  // Uniform integer on [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Order-sensitive fold of `parts` through mix64. Stable across versions;
// seeds derived this way appear in emitted files.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

// FNV-1a, for folding string tags into derive_seed.
std::uint64_t hash_tag(std::string_view tag) noexcept;

}  // namespace cate
