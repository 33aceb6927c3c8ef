#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace flatneat {

namespace detail {

// Philox4x32-10 block cipher (Salmon et al., "Parallel Random Numbers: As
// Easy as 1, 2, 3"). Counter-based: one 128-bit block of output per
// (counter, key) pair, no sequential state.
struct PhiloxBlock {
  std::array<std::uint32_t, 4> w;
};

inline PhiloxBlock philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                 std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return PhiloxBlock{ctr};
}

}  // namespace detail

// Immutable 128-bit random key. Keys form a tree: split(i) derives the i-th
// child, and distinct indices give distinct children (Philox is a bijection
// over counters for a fixed key). A key is never "consumed"; the same key
// always yields the same stream, which is what makes population-parallel
// mutation reproducible regardless of scheduling.
class RngKey {
 public:
  RngKey() : RngKey(0) {}

  explicit RngKey(std::uint64_t seed) {
    // Expand the seed through one block so trivial seeds (0, 1, 2, ...)
    // land far apart in key space.
    const auto b = detail::philox4x32_10(
        {std::uint32_t(seed), std::uint32_t(seed >> 32), 0x464C4154u,
         0x4E454154u},
        {0x243F6A88u, 0x85A308D3u});
    words_ = b.w;
  }

  RngKey split(std::uint64_t index) const {
    const auto b = detail::philox4x32_10(
        {std::uint32_t(index), std::uint32_t(index >> 32), words_[2],
         words_[3]},
        {words_[0], words_[1]});
    RngKey child;
    child.words_ = b.w;
    return child;
  }

  const std::array<std::uint32_t, 4>& words() const { return words_; }

 private:
  std::array<std::uint32_t, 4> words_{};
};

// Sequential draws over one key. Cheap value type; copying snapshots the
// position. Normal deviates always consume exactly two uniforms (no cached
// spare), so the draw count per operation is fixed and platform-independent.
class RngStream {
 public:
  explicit RngStream(const RngKey& key) : key_(key) {}

  std::uint64_t next_u64() {
    if (avail_ == 0) refill();
    avail_ -= 2;
    const std::uint64_t lo = buf_[avail_];
    const std::uint64_t hi = buf_[avail_ + 1];
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin(double p_true) { return uniform() < p_true; }

  // Unbiased integer on [0, n). n must be nonzero.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % n +
                                 1) % n;
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % n;
  }

  int index(int n) { return int(below(std::uint64_t(n))); }

  // Box-Muller without the spare value.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  void refill() {
    const auto& w = key_.words();
    const auto b = detail::philox4x32_10(
        {std::uint32_t(block_), std::uint32_t(block_ >> 32), w[2] ^ 0x9E3779B9u,
         w[3]},
        {w[0], w[1]});
    ++block_;
    buf_ = b.w;
    avail_ = 4;
  }

  RngKey key_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int avail_ = 0;
};

}  // namespace flatneat
