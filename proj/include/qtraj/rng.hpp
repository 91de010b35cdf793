#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qtraj {

// Philox4x32-10 counter-based generator. Each (seed, stream) pair is an
// independent stream whose output depends only on those two values and the
// draw index, so parallel trajectories are reproducible regardless of
// scheduling or thread count.
class PhiloxRng {
 public:
  PhiloxRng(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  }

  std::uint32_t next_u32() {
    if (avail_ == 0) refill();
    return buf_[4 - avail_--];
  }

  // uniform on (0, 1]
  double uniform() {
    return (static_cast<double>(next_u32()) + 1.0) * 0x1p-32;
  }

  // standard normal via Box-Muller; second value cached
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = (static_cast<double>(next_u32())) * 0x1p-32;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double gaussian(double stddev) { return stddev * gaussian(); }

 private:
  static constexpr std::uint32_t kMult0 = 0xD2511F53u;
  static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static void round(std::array<std::uint32_t, 4>& x, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * x[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
  }

  void refill() {
    buf_ = ctr_;
    std::array<std::uint32_t, 2> k = key_;
    for (int r = 0; r < 10; ++r) {
      round(buf_, k);
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    if (++ctr_[0] == 0u && ++ctr_[1] == 0u) ++ctr_[2];
    avail_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int avail_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace qtraj
