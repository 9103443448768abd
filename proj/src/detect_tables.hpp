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

// Internal per-setting sampling tables for the window kernels. Every random
// decision is an unsigned-64 comparison against a precomputed threshold, so
// the scalar and SIMD kernels agree bit for bit.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tcn/fock.hpp"
#include "tcn/philox.hpp"

namespace tcn {
struct SourceModel;
struct DetectorModel;
}  // namespace tcn

namespace tcn::detail {

inline constexpr int kMaxPairs = 12;     // distribution tail truncated here
inline constexpr int kMaxArrivals = 24;  // per-detector photon cap

inline std::uint64_t to_threshold(long double p) {
  if (p <= 0.0L) return 0;
  if (p >= 1.0L) return UINT64_MAX;
  const long double v = p * 18446744073709551616.0L;  // 2^64
  if (v >= 18446744073709551615.0L) return UINT64_MAX;
  return static_cast<std::uint64_t>(v);
}

// Dense (k1, k2) probability grid with overflow folded into the cap bin.
struct ArrivalGrid {
  std::array<std::array<long double, kMaxArrivals + 1>, kMaxArrivals + 1> p{};

  static ArrivalGrid point() {
    ArrivalGrid g;
    g.p[0][0] = 1.0L;
    return g;
  }
  void add(int k1, int k2, long double v) {
    p[std::min(k1, kMaxArrivals)][std::min(k2, kMaxArrivals)] += v;
  }
  ArrivalGrid convolve(const ArrivalGrid& o) const {
    ArrivalGrid out;
    for (int a = 0; a <= kMaxArrivals; ++a)
      for (int b = 0; b <= kMaxArrivals; ++b) {
        if (p[a][b] == 0.0L) continue;
        for (int c = 0; c <= kMaxArrivals; ++c)
          for (int d = 0; d <= kMaxArrivals; ++d) {
            if (o.p[c][d] == 0.0L) continue;
            out.add(a + c, b + d, p[a][b] * o.p[c][d]);
          }
      }
    return out;
  }
};

// Distribution over joint detector-channel arrival counts (k1, k2).
struct ArrivalTable {
  std::vector<std::uint64_t> cdf;
  std::vector<std::uint8_t> k1;
  std::vector<std::uint8_t> k2;
};

struct SettingTables {
  // pair_cdf[k] = P(n <= k) scaled to 2^64; n = first k with u < pair_cdf[k].
  std::array<std::uint64_t, kMaxPairs + 1> pair_cdf{};
  // Single-pair arrivals in fixed order (0,0) (1,0) (0,1) (1,1) (2,0) (0,2);
  // this fixed shape is what the SIMD fast path uses.
  std::array<std::uint64_t, 6> single_cdf{};
  std::array<std::uint8_t, 6> single_k1{{0, 1, 0, 1, 2, 0}};
  std::array<std::uint8_t, 6> single_k2{{0, 0, 1, 1, 0, 2}};
  // Arrival tables for n = 2..kMaxPairs windows (index n-2).
  std::vector<ArrivalTable> multi;
  // fire[k] = P(detector fires | k signal photons arrived), including dark
  // counts and the unpolarized Raman chance.
  std::array<std::uint64_t, kMaxArrivals + 1> fire1{};
  std::array<std::uint64_t, kMaxArrivals + 1> fire2{};
};

struct KernelCounts {
  std::uint64_t total = 0;
  std::uint64_t accidental = 0;
  std::uint64_t singles1 = 0;
  std::uint64_t singles2 = 0;

  KernelCounts& operator+=(const KernelCounts& o) {
    total += o.total;
    accidental += o.accidental;
    singles1 += o.singles1;
    singles2 += o.singles2;
    return *this;
  }
};

struct WindowOutcome {
  bool f1 = false;
  bool f2 = false;
};

// Fixed Philox slot layout per window:
//   slot 0 -> (pair-count draw, arrival-outcome draw)
//   slot 1 -> (herald fire draw, gated fire draw)
inline WindowOutcome eval_window(const SettingTables& t, std::uint64_t key,
                                 std::uint64_t w) {
  const auto s0 = philox_u64x2(key, w, 0);
  const auto s1 = philox_u64x2(key, w, 1);
  int n = 0;
  while (n < kMaxPairs && s0[0] >= t.pair_cdf[n]) ++n;
  int k1 = 0, k2 = 0;
  if (n == 1) {
    int idx = 0;
    while (idx < 5 && s0[1] >= t.single_cdf[idx]) ++idx;
    k1 = t.single_k1[idx];
    k2 = t.single_k2[idx];
  } else if (n >= 2) {
    const ArrivalTable& a = t.multi[n - 2];
    int idx = 0;
    const int last = static_cast<int>(a.cdf.size()) - 1;
    while (idx < last && s0[1] >= a.cdf[idx]) ++idx;
    k1 = a.k1[idx];
    k2 = a.k2[idx];
  }
  return {s1[0] < t.fire1[k1], s1[1] < t.fire2[k2]};
}

// P(n) for n = 0..kMaxPairs, tail mass folded into the last bin.
std::vector<long double> pair_pmf(const SourceModel& s);

// P(detector fires | k signal photons), including darks and the unpolarized
// Raman chance.
long double fire_prob(const DetectorModel& d, double raman_prob, int k);

ArrivalTable grid_to_table(const ArrivalGrid& g);

// Groups |amplitude|^2 of a final Fock state by the photon counts in the two
// detector channels.
ArrivalGrid exact_arrivals(const PureState& final_state,
                           const std::vector<int>& det1_modes,
                           const std::vector<int>& det2_modes);

// Tallies windows [begin, end); the accidental pairing for window w uses the
// gated outcome of window w-1 (false before window 0).
void run_windows_scalar(const SettingTables& t, std::uint64_t key,
                        std::uint64_t begin, std::uint64_t end,
                        KernelCounts& out);

#if defined(TCN_HAVE_AVX2_BUILD)
void run_windows_avx2(const SettingTables& t, std::uint64_t key,
                      std::uint64_t begin, std::uint64_t end,
                      KernelCounts& out);
#endif

}  // namespace tcn::detail
