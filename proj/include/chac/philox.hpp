#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace chac {

/// philox4x64-10 counter-based block cipher (Salmon et al. constants, the
/// variant numpy ships).  Stateless: every 256-bit counter / 128-bit key pair
/// maps to four independent 64-bit words, so streams can be indexed by
/// (seed, path, step, block) and drawn in any order.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * ctr[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * ctr[2];
    const std::uint64_t hi0 = std::uint64_t(p0 >> 64), lo0 = std::uint64_t(p0);
    const std::uint64_t hi1 = std::uint64_t(p1 >> 64), lo1 = std::uint64_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

/// Deterministic N(0,1) stream addressed by (seed, stream, path, step).
/// Each philox block yields two Box-Muller pairs; uniforms are built from
/// 64-bit words so draws are identical across platforms.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                 std::uint64_t step)
      : key_{seed, stream}, base_{path, step} {}

  double next() {
    if (have_ == 0) refill();
    return buf_[--have_];
  }

 private:
  void refill() {
    const auto w = philox4x64({base_[0], base_[1], block_++, 0}, key_);
    const double u1 = to_open01(w[0]);
    const double u2 = to_unit(w[1]);
    const double u3 = to_open01(w[2]);
    const double u4 = to_unit(w[3]);
    const double r1 = std::sqrt(-2.0 * std::log(u1));
    const double r2 = std::sqrt(-2.0 * std::log(u3));
    const double tau = 2.0 * std::numbers::pi;
    buf_[0] = r1 * std::cos(tau * u2);
    buf_[1] = r1 * std::sin(tau * u2);
    buf_[2] = r2 * std::cos(tau * u4);
    buf_[3] = r2 * std::sin(tau * u4);
    have_ = 4;
  }

  // (0, 1]: log() stays finite
  static double to_open01(std::uint64_t w) {
    return (double(w >> 11) + 1.0) * 0x1.0p-53;
  }
  // [0, 1)
  static double to_unit(std::uint64_t w) { return double(w >> 11) * 0x1.0p-53; }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 2> base_;
  std::uint64_t block_ = 0;
  double buf_[4];
  int have_ = 0;
};

}  // namespace chac
