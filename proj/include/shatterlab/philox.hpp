#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and the
// stream layout used for every random draw in the library.
//
// Stream contract "shatterlab-philox/1" (see docs/prng.md):
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (block, row, trial, domain)
//   each block yields four u32 words, consumed in order x0, x1, x2, x3.
//   uniform()  = ((hi:lo >> 11) + 0.5) * 2^-53 with hi the first word drawn
//   gaussian() = sqrt(-log u1) * (cos 2 pi u2, sin 2 pi u2)

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace shatterlab::rng {

inline constexpr const char* kStreamContract = "shatterlab-philox/1";

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

constexpr Counter philox4x32_10(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Independent random domains sharing one seed.
enum class Domain : std::uint32_t {
  Noise = 0,        // Bernoulli-Gaussian perturbation entries
  GaussVector = 1,  // start vectors (spectral radius estimator)
  Levy = 2,         // small-ball Monte-Carlo trials
  Family = 3,       // random test matrices (Ginibre family)
  Auxiliary = 4,    // test-only and miscellaneous draws
};

/// Sequential view of one counter-based stream.
class Stream {
 public:
  Stream(std::uint64_t seed, Domain domain, std::uint32_t trial, std::uint32_t row)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0u, row, trial, static_cast<std::uint32_t>(domain)} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = philox4x32_10(ctr_, key_);
      ++ctr_[0];
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard complex Gaussian, E|g|^2 = 1 (each part has variance 1/2).
  std::complex<double> complex_gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  Key key_;
  Counter ctr_;
  Counter buf_{};
  int pos_ = 4;
};

}  // namespace shatterlab::rng
