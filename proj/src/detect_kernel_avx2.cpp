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

// AVX2 window kernel: 8 windows per iteration. All decisions are the same
// u64 threshold comparisons the scalar kernel makes, so counts match it bit
// for bit. Lanes that draw two or more pairs are rare and re-evaluated with
// the scalar path.

#include "detect_tables.hpp"

#if defined(TCN_HAVE_AVX2_BUILD)

#include <immintrin.h>

namespace tcn::detail {

namespace {

inline __m256i cmplt_u64(__m256i a, __m256i b) {  // a < b, unsigned
  const __m256i sign = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ull));
  return _mm256_cmpgt_epi64(_mm256_xor_si256(b, sign), _mm256_xor_si256(a, sign));
}

// 8-lane Philox4x32-10. Counter words per lane; keys broadcast.
inline void philox8(__m256i c0, __m256i c1, __m256i c2, __m256i c3,
                    std::uint32_t key0, std::uint32_t key1, __m256i& x0,
                    __m256i& x1, __m256i& x2, __m256i& x3) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kM1));
  const __m256i w0 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kW0));
  const __m256i w1 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kW1));
  __m256i k0 = _mm256_set1_epi32(static_cast<int>(key0));
  __m256i k1 = _mm256_set1_epi32(static_cast<int>(key1));
  x0 = c0;
  x1 = c1;
  x2 = c2;
  x3 = c3;
  for (int r = 0; r < 10; ++r) {
    const __m256i p0e = _mm256_mul_epu32(x0, m0);
    const __m256i p0o = _mm256_mul_epu32(_mm256_srli_epi64(x0, 32), m0);
    const __m256i lo0 = _mm256_blend_epi32(p0e, _mm256_slli_epi64(p0o, 32), 0xAA);
    const __m256i hi0 = _mm256_blend_epi32(_mm256_srli_epi64(p0e, 32), p0o, 0xAA);
    const __m256i p1e = _mm256_mul_epu32(x2, m1);
    const __m256i p1o = _mm256_mul_epu32(_mm256_srli_epi64(x2, 32), m1);
    const __m256i lo1 = _mm256_blend_epi32(p1e, _mm256_slli_epi64(p1o, 32), 0xAA);
    const __m256i hi1 = _mm256_blend_epi32(_mm256_srli_epi64(p1e, 32), p1o, 0xAA);
    const __m256i y0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), k0);
    const __m256i y2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), k1);
    x1 = lo1;
    x3 = lo0;
    x0 = y0;
    x2 = y2;
    k0 = _mm256_add_epi32(k0, w0);
    k1 = _mm256_add_epi32(k1, w1);
  }
}

struct U64Group {
  __m256i a;  // windows base+{0,1,4,5}
  __m256i b;  // windows base+{2,3,6,7}
};

struct SlotWords {
  U64Group first;   // word 0 of each window's block
  U64Group second;  // word 1
};

inline SlotWords philox8_slot(std::uint64_t key, std::uint64_t base,
                              std::uint32_t slot) {
  alignas(32) std::uint32_t lo[8], hi[8];
  for (int i = 0; i < 8; ++i) {
    const std::uint64_t w = base + static_cast<std::uint64_t>(i);
    lo[i] = static_cast<std::uint32_t>(w);
    hi[i] = static_cast<std::uint32_t>(w >> 32);
  }
  const __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo));
  const __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi));
  const __m256i c2 = _mm256_set1_epi32(static_cast<int>(slot));
  const __m256i c3 = _mm256_setzero_si256();
  __m256i x0, x1, x2, x3;
  philox8(c0, c1, c2, c3, static_cast<std::uint32_t>(key),
          static_cast<std::uint32_t>(key >> 32), x0, x1, x2, x3);
  SlotWords out;
  out.first.a = _mm256_unpacklo_epi32(x0, x1);
  out.first.b = _mm256_unpackhi_epi32(x0, x1);
  out.second.a = _mm256_unpacklo_epi32(x2, x3);
  out.second.b = _mm256_unpackhi_epi32(x2, x3);
  return out;
}

// Window order of the mask bits produced below: a-group bits 0..3 are
// windows {0,1,4,5}, b-group bits are {2,3,6,7}.
inline int mask4(__m256i m) {
  return _mm256_movemask_pd(_mm256_castsi256_pd(m));
}

struct LaneMasks {
  int f1 = 0;
  int f2 = 0;
  int multi = 0;
};

inline std::uint64_t nibble_lut(const std::array<std::uint8_t, 6>& t) {
  std::uint64_t v = 0;
  for (int j = 0; j < 6; ++j) v |= static_cast<std::uint64_t>(t[j]) << (4 * j);
  return v;
}

}  // namespace

void run_windows_avx2(const SettingTables& t, std::uint64_t key,
                      std::uint64_t begin, std::uint64_t end,
                      KernelCounts& out) {
  if (begin >= end) return;
  bool prev_f2 = begin == 0 ? false : eval_window(t, key, begin - 1).f2;

  const __m256i cdf0 = _mm256_set1_epi64x(static_cast<long long>(t.pair_cdf[0]));
  const __m256i cdf1 = _mm256_set1_epi64x(static_cast<long long>(t.pair_cdf[1]));
  __m256i scdf[5];
  for (int j = 0; j < 5; ++j)
    scdf[j] = _mm256_set1_epi64x(static_cast<long long>(t.single_cdf[j]));
  const __m256i lut1 = _mm256_set1_epi64x(static_cast<long long>(nibble_lut(t.single_k1)));
  const __m256i lut2 = _mm256_set1_epi64x(static_cast<long long>(nibble_lut(t.single_k2)));
  const __m256i nib = _mm256_set1_epi64x(0xF);
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  __m256i fire1_k[3], fire2_k[3];
  for (int k = 0; k < 3; ++k) {
    fire1_k[k] = _mm256_set1_epi64x(static_cast<long long>(t.fire1[k]));
    fire2_k[k] = _mm256_set1_epi64x(static_cast<long long>(t.fire2[k]));
  }

  auto classify = [&](__m256i ua, __m256i ub, __m256i uc, __m256i ud,
                      int& f1_bits, int& f2_bits, int& multi_bits) {
    const __m256i lt1 = cmplt_u64(ua, cdf1);
    const __m256i is0 = cmplt_u64(ua, cdf0);
    const __m256i is1 = _mm256_andnot_si256(is0, lt1);
    const __m256i multi = _mm256_xor_si256(lt1, _mm256_set1_epi64x(-1));
    __m256i idx = _mm256_setzero_si256();
    for (int j = 0; j < 5; ++j)
      idx = _mm256_sub_epi64(idx, _mm256_xor_si256(cmplt_u64(ub, scdf[j]),
                                                   _mm256_set1_epi64x(-1)));
    const __m256i shift = _mm256_slli_epi64(idx, 2);
    const __m256i k1s = _mm256_and_si256(_mm256_srlv_epi64(lut1, shift), nib);
    const __m256i k2s = _mm256_and_si256(_mm256_srlv_epi64(lut2, shift), nib);
    const __m256i k1 = _mm256_and_si256(is1, k1s);
    const __m256i k2 = _mm256_and_si256(is1, k2s);
    __m256i th1 = fire1_k[0];
    th1 = _mm256_blendv_epi8(th1, fire1_k[1], _mm256_cmpeq_epi64(k1, one));
    th1 = _mm256_blendv_epi8(th1, fire1_k[2], _mm256_cmpeq_epi64(k1, two));
    __m256i th2 = fire2_k[0];
    th2 = _mm256_blendv_epi8(th2, fire2_k[1], _mm256_cmpeq_epi64(k2, one));
    th2 = _mm256_blendv_epi8(th2, fire2_k[2], _mm256_cmpeq_epi64(k2, two));
    f1_bits = mask4(cmplt_u64(uc, th1));
    f2_bits = mask4(cmplt_u64(ud, th2));
    multi_bits = mask4(multi);
  };

  std::uint64_t w = begin;
  for (; w + 8 <= end; w += 8) {
    const SlotWords s0 = philox8_slot(key, w, 0);
    const SlotWords s1 = philox8_slot(key, w, 1);
    int f1a, f2a, ma, f1b, f2b, mb;
    classify(s0.first.a, s0.second.a, s1.first.a, s1.second.a, f1a, f2a, ma);
    classify(s0.first.b, s0.second.b, s1.first.b, s1.second.b, f1b, f2b, mb);
    // Reassemble per-window flags: a-group -> {0,1,4,5}, b-group -> {2,3,6,7}.
    static constexpr int kLaneOfWindow[8] = {0, 1, 8 + 0, 8 + 1, 2, 3, 8 + 2, 8 + 3};
    for (int i = 0; i < 8; ++i) {
      const int lane = kLaneOfWindow[i];
      const int bit = lane & 7;
      const bool from_b = lane >= 8;
      bool f1 = ((from_b ? f1b : f1a) >> bit) & 1;
      bool f2 = ((from_b ? f2b : f2a) >> bit) & 1;
      const bool multi = ((from_b ? mb : ma) >> bit) & 1;
      if (multi) {
        const WindowOutcome o = eval_window(t, key, w + i);
        f1 = o.f1;
        f2 = o.f2;
      }
      out.total += (f1 && f2) ? 1 : 0;
      out.accidental += (f1 && prev_f2) ? 1 : 0;
      out.singles1 += f1 ? 1 : 0;
      out.singles2 += f2 ? 1 : 0;
      prev_f2 = f2;
    }
  }
  for (; w < end; ++w) {
    const WindowOutcome o = eval_window(t, key, w);
    out.total += (o.f1 && o.f2) ? 1 : 0;
    out.accidental += (o.f1 && prev_f2) ? 1 : 0;
    out.singles1 += o.f1 ? 1 : 0;
    out.singles2 += o.f2 ? 1 : 0;
    prev_f2 = o.f2;
  }
}

}  // namespace tcn::detail

#endif  // TCN_HAVE_AVX2_BUILD
