#include "fracwave/rng.hpp"

#include <cmath>
#include <numbers>

namespace fracwave {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 24..53-bit uniform strictly inside (0, 1).
double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

std::array<double, 4> NormalStream::uniforms(std::uint64_t mode) const {
  const PhiloxCounter r = philox4x32(
      {step_, path_, static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(mode >> 32)}, key_);
  std::array<double, 4> u{};
  for (int i = 0; i < 4; ++i) u[i] = (static_cast<double>(r[i]) + 0.5) * 0x1p-32;
  return u;
}

std::array<double, 2> NormalStream::normals(std::uint64_t mode) const {
  const PhiloxCounter r = philox4x32(
      {step_, path_, static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(mode >> 32)}, key_);
  const double u1 = to_open_unit(r[0], r[1]);
  const double u2 = to_open_unit(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace fracwave
