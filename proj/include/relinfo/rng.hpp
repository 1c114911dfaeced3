#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace relinfo {

// Philox4x32-10 block function (Salmon et al., Random123).
// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

inline constexpr const char* kGeneratorId = "philox4x32-10/stream(seed,draw)";
inline constexpr std::uint64_t kDefaultSeed = 20090615ULL;

// splitmix64 finalizer, used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Counter-based substream keyed by (seed, stream index).
///
/// Two streams never share a counter, so the bits a draw sees depend only on
/// the pair it was constructed with. Satisfies UniformRandomBitGenerator.
class DrawRng {
 public:
  using result_type = std::uint64_t;

  DrawRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
};

// Distributions are written out here rather than taken from <random> so that a
// seed reproduces the same draws on every standard library.

double sample_exponential(DrawRng& rng, double rate);

/// Exponential(rate) conditioned to lie in [0, width); width may be +inf.
double sample_truncated_exponential(DrawRng& rng, double rate, double width);

/// Exact Binomial(n, p) by inversion over the support ordered outward from the mode.
std::uint64_t sample_binomial(DrawRng& rng, std::uint64_t n, double p);

bool sample_bernoulli(DrawRng& rng, double p);

}  // namespace relinfo
