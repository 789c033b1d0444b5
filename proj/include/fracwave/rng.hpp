#pragma once

#include <array>
#include <cstdint>

namespace fracwave {

/// Philox4x32-10 counter-based generator. Streams are addressed by
/// (key, counter), so any increment can be regenerated independently.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

/// Deterministic standard normals for one (seed, step, path, mode) address.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t step, std::uint32_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, step_(step), path_(path) {}

  /// Two independent N(0,1) values for `mode`, via Box-Muller.
  std::array<double, 2> normals(std::uint64_t mode) const;
  /// Four uniforms in (0, 1) for `mode`.
  std::array<double, 4> uniforms(std::uint64_t mode) const;

 private:
  PhiloxKey key_;
  std::uint32_t step_;
  std::uint32_t path_;
};

}  // namespace fracwave
