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

#include <cstdint>
#include <string>
#include <vector>

#include "tcn/analyzer.hpp"
#include "tcn/gates.hpp"
#include "tcn/philox.hpp"

namespace tcn {

/// Threshold single-photon detector: efficiency per incident photon and a
/// dark-count probability per gate window.
struct DetectorModel {
  std::string name;  // e.g. "SSPD", "APD"
  double efficiency = 1.0;
  double dark_prob = 0.0;
};

enum class PairDistribution {
  Thermal,       // P(n) = mu^n / (1+mu)^(n+1)
  Poisson,       // P(n) = e^-mu mu^n / n!
  SingleAlways,  // exactly one pair per window (noise-off reference mode)
};

struct SourceModel {
  double mean_pairs = 0.0;
  double gamma_ind = 1.0;
  double raman_prob = 0.0;  // unpolarized spurious photon, per detector/gate
  PairDistribution distribution = PairDistribution::Thermal;
};

enum class MultiPairMode { Incoherent, Exact };
enum class SimdMode { Auto, Scalar, Avx2 };

struct RunConfig {
  std::uint64_t n_gates = 0;
  std::uint64_t seed = 0;
  double gate_period_ns = 20.0;
  std::vector<AnalyzerSetting> settings;
  MultiPairMode multi_pair_mode = MultiPairMode::Incoherent;
  SimdMode simd = SimdMode::Auto;
  int workers = 0;  // 0 = auto
};

/// Per-setting tallies. The accidental counter pairs the herald with the
/// gated detector's outcome from the previous window (tau0 - 20 ns trick),
/// so it is statistically independent of the same-window total.
struct CountRecord {
  std::string setting_id;
  std::uint64_t total = 0;
  std::uint64_t accidental = 0;
  std::uint64_t singles1 = 0;  // herald
  std::uint64_t singles2 = 0;  // gated
  std::uint64_t windows = 0;
};

/// Draws a pairs-per-gate count from the source's distribution.
int sample_pair_count(const SourceModel& source, PhiloxStream& stream);

/// Monte Carlo heralded coincidence counting over cfg.n_gates windows per
/// analyzer setting. Single-pair windows sample from the exact two-photon
/// arrival distribution of the gate; multi-pair windows route photons
/// incoherently (or exactly for two pairs when configured). Deterministic in
/// (config, seed) regardless of worker count or SIMD path.
std::vector<CountRecord> simulate_counts(const CnotCircuit& circuit,
                                         const TwoQubitState& input,
                                         const SourceModel& source,
                                         const DetectorModel& herald,
                                         const DetectorModel& gated,
                                         const RunConfig& cfg);

/// total - accidental; may be negative and is preserved as such.
double subtract_accidentals(const CountRecord& record);

/// True when the AVX2 kernel is compiled in and the CPU supports it.
bool avx2_available();

}  // namespace tcn
