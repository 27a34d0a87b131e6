#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace omtk {

/// Philox4x32-10 (Salmon et al.). Stateless: output is a pure function of
/// counter and key, which keeps parallel draws independent of scheduling.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Stream tags separate unrelated uses of one seed.
enum class Stream : std::uint32_t {
  brownian = 1,
  initial = 2,
  directions = 3,
  property = 4,
};

/// Standard normals addressed by (seed, stream, path, step). Draw j of a
/// given address is always the same number.
inline void normals(std::uint64_t seed, Stream stream, std::uint64_t path,
                    std::uint64_t step, std::span<double> out) {
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto block = philox4x32(
        {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path),
         static_cast<std::uint32_t>(path >> 32),
         (static_cast<std::uint32_t>(stream) << 24) ^ static_cast<std::uint32_t>(j / 2) ^
             (static_cast<std::uint32_t>(step >> 32) << 12)},
        key);
    const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[j] = r * std::cos(angle);
    if (j + 1 < out.size()) out[j + 1] = r * std::sin(angle);
  }
}

/// Uniform on (0, 1) at the same kind of address.
inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t path,
                      std::uint64_t step) {
  const auto block = philox4x32(
      {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path),
       static_cast<std::uint32_t>(path >> 32), static_cast<std::uint32_t>(stream) << 24},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  return (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace omtk
