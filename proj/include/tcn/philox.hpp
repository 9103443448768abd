// Copyright 2026 The telecnot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace tcn {

// Philox4x32-10 counter-based generator. Every draw is a pure function of
// (key, counter), which is what makes window-parallel simulation bit-exact
// regardless of evaluation order.
struct Philox4x32 {
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::uint32_t k0, std::uint32_t k1,
                                            std::uint32_t c0, std::uint32_t c1,
                                            std::uint32_t c2,
                                            std::uint32_t c3) {
    std::uint32_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * x0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * x2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t y0 = hi1 ^ x1 ^ k0;
      const std::uint32_t y1 = lo1;
      const std::uint32_t y2 = hi0 ^ x3 ^ k1;
      const std::uint32_t y3 = lo0;
      x0 = y0;
      x1 = y1;
      x2 = y2;
      x3 = y3;
      k0 += kW0;
      k1 += kW1;
    }
    return {x0, x1, x2, x3};
  }
};

/// Two 64-bit words from one Philox block addressed by (key, window, slot).
inline std::array<std::uint64_t, 2> philox_u64x2(std::uint64_t key,
                                                 std::uint64_t window,
                                                 std::uint32_t slot) {
  const auto b = Philox4x32::block(
      static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
      static_cast<std::uint32_t>(window),
      static_cast<std::uint32_t>(window >> 32), slot, 0u);
  return {static_cast<std::uint64_t>(b[0]) | (static_cast<std::uint64_t>(b[1]) << 32),
          static_cast<std::uint64_t>(b[2]) | (static_cast<std::uint64_t>(b[3]) << 32)};
}

/// SplitMix64 step, used to derive independent stream keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Sequential convenience stream over Philox blocks (tests, samplers).
class PhiloxStream {
 public:
  explicit PhiloxStream(std::uint64_t key, std::uint64_t window = 0)
      : key_(key), window_(window) {}

  std::uint64_t next_u64() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const auto w = philox_u64x2(key_, window_, slot_++);
    spare_ = w[1];
    have_ = true;
    return w[0];
  }

  double next_double() {  // uniform in [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t window_;
  std::uint32_t slot_ = 0;
  std::uint64_t spare_ = 0;
  bool have_ = false;
};

}  // namespace tcn
