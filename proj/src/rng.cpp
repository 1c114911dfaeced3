#include "relinfo/rng.hpp"

#include <cmath>

#include "relinfo/error.hpp"

namespace relinfo {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DrawRng::result_type DrawRng::operator()() noexcept {
  if (used_ + 2 > 4) {
    buffer_ = philox4x32({static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                          static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
                         key_);
    ++block_;
    used_ = 0;
  }
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double sample_exponential(DrawRng& rng, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    fail(ErrorCode::domain, "exponential rate must be positive and finite");
  }
  return -std::log(rng.uniform()) / rate;
}

double sample_truncated_exponential(DrawRng& rng, double rate, double width) {
  if (!(width > 0.0)) {
    fail(ErrorCode::domain, "truncation width must be positive");
  }
  if (std::isinf(width)) return sample_exponential(rng, rate);
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    fail(ErrorCode::domain, "exponential rate must be positive and finite");
  }
  // Inverse CDF of the truncated law: F(x) = (1 - e^{-rx}) / (1 - e^{-rw}).
  const double mass = -std::expm1(-rate * width);
  const double value = -std::log1p(-rng.uniform() * mass) / rate;
  return value < width ? value : std::nextafter(width, 0.0);
}

bool sample_bernoulli(DrawRng& rng, double p) { return rng.uniform() < p; }

std::uint64_t sample_binomial(DrawRng& rng, std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::domain, "binomial probability must lie in [0, 1]");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;

  const double dn = static_cast<double>(n);
  const auto mode = static_cast<std::uint64_t>(std::floor((dn + 1.0) * p));
  const std::uint64_t m = mode > n ? n : mode;
  const double dm = static_cast<double>(m);
  const double log_pmf_mode = std::lgamma(dn + 1.0) - std::lgamma(dm + 1.0) - std::lgamma(dn - dm + 1.0) +
                              dm * std::log(p) + (dn - dm) * std::log1p(-p);
  const double odds = p / (1.0 - p);

  const double u = rng.uniform();
  double cumulative = std::exp(log_pmf_mode);
  if (u <= cumulative) return m;

  // Walk the support as m, m+1, m-1, m+2, m-2, ...; any fixed ordering of the
  // support yields an exact inversion sampler.
  std::uint64_t up = m, down = m;
  double pmf_up = cumulative, pmf_down = cumulative;
  bool up_open = m < n, down_open = m > 0;
  std::uint64_t last = m;
  while (up_open || down_open) {
    if (up_open) {
      pmf_up *= static_cast<double>(n - up) / static_cast<double>(up + 1) * odds;
      ++up;
      cumulative += pmf_up;
      last = up;
      if (u <= cumulative) return up;
      up_open = up < n && pmf_up > 0.0;
    }
    if (down_open) {
      pmf_down *= static_cast<double>(down) / static_cast<double>(n - down + 1) / odds;
      --down;
      cumulative += pmf_down;
      last = down;
      if (u <= cumulative) return down;
      down_open = down > 0 && pmf_down > 0.0;
    }
  }
  // Only reachable when rounding leaves the accumulated mass short of u.
  return last;
}

}  // namespace relinfo
