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

#include "tcn/detect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "detect_tables.hpp"

namespace tcn {

namespace detail {

// P(n) for n = 0..kMaxPairs, tail mass folded into the last bin.
std::vector<long double> pair_pmf(const SourceModel& s) {
  std::vector<long double> p(kMaxPairs + 1, 0.0L);
  const long double mu = s.mean_pairs;
  switch (s.distribution) {
    case PairDistribution::SingleAlways:
      p[1] = 1.0L;
      return p;
    case PairDistribution::Thermal: {
      const long double q = mu / (1.0L + mu);
      long double cur = 1.0L / (1.0L + mu);
      for (int n = 0; n < kMaxPairs; ++n) {
        p[n] = cur;
        cur *= q;
      }
      break;
    }
    case PairDistribution::Poisson: {
      long double cur = std::exp(-static_cast<long double>(mu));
      for (int n = 0; n < kMaxPairs; ++n) {
        p[n] = cur;
        cur *= mu / (n + 1);
      }
      break;
    }
  }
  long double head = 0.0L;
  for (int n = 0; n < kMaxPairs; ++n) head += p[n];
  p[kMaxPairs] = std::max(0.0L, 1.0L - head);
  return p;
}

long double fire_prob(const DetectorModel& d, double raman_prob, int k) {
  const long double miss_signal =
      std::pow(1.0L - static_cast<long double>(d.efficiency), k);
  const long double miss_dark = 1.0L - static_cast<long double>(d.dark_prob);
  const long double miss_raman =
      1.0L - 0.5L * static_cast<long double>(raman_prob) * d.efficiency;
  return 1.0L - miss_signal * miss_dark * miss_raman;
}

namespace {

void fill_pair_cdf(const SourceModel& s, SettingTables& t) {
  const auto pmf = pair_pmf(s);
  long double acc = 0.0L;
  for (int n = 0; n <= kMaxPairs; ++n) {
    acc += pmf[n];
    t.pair_cdf[n] = to_threshold(acc);
  }
  t.pair_cdf[kMaxPairs] = UINT64_MAX;
}

}  // namespace

ArrivalTable grid_to_table(const ArrivalGrid& g) {
  ArrivalTable t;
  long double acc = 0.0L;
  // (0,0) first so near-certain "nothing arrives" terminates the scan early.
  t.k1.push_back(0);
  t.k2.push_back(0);
  acc += g.p[0][0];
  t.cdf.push_back(to_threshold(acc));
  for (int a = 0; a <= kMaxArrivals; ++a)
    for (int b = 0; b <= kMaxArrivals; ++b) {
      if ((a == 0 && b == 0) || g.p[a][b] == 0.0L) continue;
      t.k1.push_back(static_cast<std::uint8_t>(a));
      t.k2.push_back(static_cast<std::uint8_t>(b));
      acc += g.p[a][b];
      t.cdf.push_back(to_threshold(acc));
    }
  t.cdf.back() = UINT64_MAX;
  return t;
}

// Arrival-count distribution of an exact Fock evolution: groups |amp|^2 by
// (photons in detector-1 channel, photons in detector-2 channel).
ArrivalGrid exact_arrivals(const PureState& final_state,
                           const std::vector<int>& det1_modes,
                           const std::vector<int>& det2_modes) {
  ArrivalGrid g;
  long double rest = 0.0L;
  for (const auto& [occ, amp] : final_state.terms()) {
    int k1 = 0, k2 = 0;
    for (int m : det1_modes) k1 += occ[m];
    for (int m : det2_modes) k2 += occ[m];
    if (k1 == 0 && k2 == 0) continue;
    const long double v = std::norm(amp);
    g.add(k1, k2, v);
    rest += v;
  }
  g.p[0][0] = std::max(0.0L, 1.0L - rest);
  return g;
}

SettingTables build_setting_tables(const CnotCircuit& circuit,
                                   const TwoQubitState& input,
                                   const SourceModel& source,
                                   const DetectorModel& herald,
                                   const DetectorModel& gated,
                                   const AnalyzerSetting& setting,
                                   MultiPairMode mode) {
  SettingTables t;
  fill_pair_cdf(source, t);
  for (int k = 0; k <= kMaxArrivals; ++k) {
    t.fire1[k] = to_threshold(fire_prob(herald, source.raman_prob, k));
    t.fire2[k] = to_threshold(fire_prob(gated, source.raman_prob, k));
  }

  const ModeSetPtr& ms = circuit.mode_set;
  // Analyzer plates act on the output rails; the PBS transmission (H) modes
  // feed the detectors.
  const Eigen::Matrix2cd arm1 =
      waveplate(WaveplateKind::QWP, setting.qwp1).matrix *
      waveplate(WaveplateKind::HWP, setting.hwp1).matrix;
  const Eigen::Matrix2cd arm2 =
      waveplate(WaveplateKind::QWP, setting.qwp2).matrix *
      waveplate(WaveplateKind::HWP, setting.hwp2).matrix;
  ModeTransfer full =
      compose(circuit.transfer, jones_on_port(ms, kControlPort, arm1));
  full = compose(full, jones_on_port(ms, kTargetPort, arm2));

  const std::vector<int> det1 = {ms->index_of(kControlPort, Pol::H, 0),
                                 ms->index_of(kControlPort, Pol::H, 1)};
  const std::vector<int> det2 = {ms->index_of(kTargetPort, Pol::H, 0),
                                 ms->index_of(kTargetPort, Pol::H, 1)};

  // Single-pair arrivals from the exact two-photon evolution.
  {
    PureState in = cnot_input_state(input, source.gamma_ind, ms);
    const ArrivalGrid g = exact_arrivals(apply_transfer(in, full), det1, det2);
    long double acc = 0.0L;
    for (int j = 0; j < 6; ++j) {
      acc += g.p[t.single_k1[j]][t.single_k2[j]];
      t.single_cdf[j] = to_threshold(acc);
    }
    t.single_cdf[5] = UINT64_MAX;
  }

  // One incoherent pair: each photon routed through the composed matrix with
  // classical probabilities (coherent within the photon, no interference
  // between photons).
  ArrivalGrid pair_grid;
  {
    auto route = [&](const Eigen::Matrix2cd& rho_pol, const char* port,
                     long double& q1, long double& q2) {
      const Pol pols[2] = {Pol::V, Pol::H};
      q1 = q2 = 0.0L;
      for (int p = 0; p < 2; ++p)
        for (int pp = 0; pp < 2; ++pp) {
          const cxd w = rho_pol(p, pp);
          if (std::abs(w) < 1e-18) continue;
          const int ci = ms->index_of(port, pols[p], 0);
          const int cj = ms->index_of(port, pols[pp], 0);
          for (int m : det1)
            q1 += (w * full.matrix(m, ci) * std::conj(full.matrix(m, cj))).real();
          for (int m : det2)
            q2 += (w * full.matrix(m, ci) * std::conj(full.matrix(m, cj))).real();
        }
      q1 = std::clamp(q1, 0.0L, 1.0L);
      q2 = std::clamp(q2, 0.0L, 1.0L);
    };
    Eigen::Matrix2cd rho_c = Eigen::Matrix2cd::Zero();
    Eigen::Matrix2cd rho_t = Eigen::Matrix2cd::Zero();
    for (int c = 0; c < 2; ++c)
      for (int cc = 0; cc < 2; ++cc)
        for (int x = 0; x < 2; ++x) {
          rho_c(c, cc) += input.amps(2 * c + x) * std::conj(input.amps(2 * cc + x));
          rho_t(c, cc) += input.amps(2 * x + c) * std::conj(input.amps(2 * x + cc));
        }
    long double c1, c2, t1, t2;
    route(rho_c, kControlPort, c1, c2);
    route(rho_t, kTargetPort, t1, t2);
    ArrivalGrid gc, gt;
    gc.p[0][0] = std::max(0.0L, 1.0L - c1 - c2);
    gc.add(1, 0, c1);
    gc.add(0, 1, c2);
    gt.p[0][0] = std::max(0.0L, 1.0L - t1 - t2);
    gt.add(1, 0, t1);
    gt.add(0, 1, t2);
    pair_grid = gc.convolve(gt);
  }

  // Exact two-pair arrivals (4-photon evolution) when requested.
  ArrivalGrid twopair_grid;
  if (mode == MultiPairMode::Exact) {
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(
        Eigen::Map<const Eigen::Matrix2cd>(input.amps.data()).transpose(),
        Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(1) > 1e-9)
      throw std::invalid_argument(
          "simulate_counts: exact multi-pair mode needs a product input state");
    const Eigen::Vector2cd psi_c = svd.matrixU().col(0) * svd.singularValues()(0);
    const Eigen::Vector2cd psi_t = svd.matrixV().col(0).conjugate();
    const double g = std::clamp(source.gamma_ind, 0.0, 1.0);
    const double gp = std::sqrt(std::max(0.0, 1.0 - g * g));
    const Pol pols[2] = {Pol::V, Pol::H};
    std::vector<std::pair<int, cxd>> ctrl, tgt;
    for (int p = 0; p < 2; ++p) {
      if (std::abs(psi_c(p)) > 1e-15)
        ctrl.push_back({ms->index_of(kControlPort, pols[p], 0), psi_c(p)});
      if (std::abs(psi_t(p)) > 1e-15) {
        if (g > 0.0)
          tgt.push_back({ms->index_of(kTargetPort, pols[p], 0), psi_t(p) * g});
        if (gp > 0.0)
          tgt.push_back({ms->index_of(kTargetPort, pols[p], 1), psi_t(p) * gp});
      }
    }
    // (control creator)^2 (target creator)^2 |0>, normalized.
    std::map<Occ, cxd> poly{{occ_zero(), cxd(1.0, 0.0)}};
    for (const auto* vec : {&ctrl, &ctrl, &tgt, &tgt}) {
      std::map<Occ, cxd> next;
      for (const auto& [occ, c] : poly)
        for (const auto& [m, a] : *vec) {
          Occ o = occ;
          ++o[m];
          next[o] += c * a;
        }
      poly.swap(next);
    }
    PureState four(ms, 4);
    for (const auto& [occ, c] : poly) {
      double f = 1.0;
      for (int i = 0; i < ms->size(); ++i)
        for (int r = 2; r <= occ[i]; ++r) f *= r;
      four.add_term(occ, c * std::sqrt(f));
    }
    four = four.normalized();
    twopair_grid = exact_arrivals(apply_transfer(four, full), det1, det2);
  }

  // Windows with n >= 2 pairs: exact mode uses the 4-photon distribution for
  // two of the pairs and adds the rest incoherently; incoherent mode
  // convolves independent pairs throughout.
  t.multi.reserve(kMaxPairs - 1);
  ArrivalGrid acc_grid =
      (mode == MultiPairMode::Exact) ? twopair_grid : pair_grid.convolve(pair_grid);
  t.multi.push_back(grid_to_table(acc_grid));
  for (int n = 3; n <= kMaxPairs; ++n) {
    acc_grid = acc_grid.convolve(pair_grid);
    t.multi.push_back(grid_to_table(acc_grid));
  }
  return t;
}

}  // namespace detail

int sample_pair_count(const SourceModel& source, PhiloxStream& stream) {
  if (source.mean_pairs < 0.0)
    throw std::invalid_argument("sample_pair_count: negative mean pairs");
  detail::SettingTables t;
  detail::fill_pair_cdf(source, t);
  const std::uint64_t u = stream.next_u64();
  int n = 0;
  while (n < detail::kMaxPairs && u >= t.pair_cdf[n]) ++n;
  return n;
}

bool avx2_available() {
#if defined(TCN_HAVE_AVX2_BUILD)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

using KernelFn = void (*)(const detail::SettingTables&, std::uint64_t,
                          std::uint64_t, std::uint64_t, detail::KernelCounts&);

KernelFn select_kernel(SimdMode mode) {
  switch (mode) {
    case SimdMode::Scalar:
      return &detail::run_windows_scalar;
    case SimdMode::Avx2:
#if defined(TCN_HAVE_AVX2_BUILD)
      if (avx2_available()) return &detail::run_windows_avx2;
#endif
      throw std::runtime_error("simulate_counts: AVX2 kernel unavailable");
    case SimdMode::Auto:
    default:
#if defined(TCN_HAVE_AVX2_BUILD)
      if (avx2_available()) return &detail::run_windows_avx2;
#endif
      return &detail::run_windows_scalar;
  }
}

void validate(const SourceModel& source, const DetectorModel& herald,
              const DetectorModel& gated, const RunConfig& cfg) {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (source.mean_pairs < 0.0)
    throw std::invalid_argument("simulate_counts: mean_pairs < 0");
  if (!in01(source.raman_prob))
    throw std::invalid_argument("simulate_counts: raman_prob outside [0,1]");
  if (!in01(herald.efficiency) || !in01(gated.efficiency) ||
      !in01(herald.dark_prob) || !in01(gated.dark_prob))
    throw std::invalid_argument(
        "simulate_counts: detector probability outside [0,1]");
  if (cfg.n_gates < 1) throw std::invalid_argument("simulate_counts: n_gates < 1");
  if (cfg.n_gates >= (1ull << 62))
    throw std::invalid_argument("simulate_counts: n_gates would overflow counts");
  if (cfg.settings.empty())
    throw std::invalid_argument("simulate_counts: no analyzer settings");
  std::set<std::string> ids;
  for (const auto& s : cfg.settings)
    if (!ids.insert(s.id).second)
      throw std::invalid_argument("simulate_counts: duplicate setting id " + s.id);
}

}  // namespace

std::vector<CountRecord> simulate_counts(const CnotCircuit& circuit,
                                         const TwoQubitState& input,
                                         const SourceModel& source,
                                         const DetectorModel& herald,
                                         const DetectorModel& gated,
                                         const RunConfig& cfg) {
  validate(source, herald, gated, cfg);
  if (!input.is_normalized())
    throw std::invalid_argument("simulate_counts: input state not normalized");

  const KernelFn kernel = select_kernel(cfg.simd);
  int workers = cfg.workers;
  if (workers <= 0)
    workers = std::min(4u, std::max(1u, std::thread::hardware_concurrency()));

  std::vector<CountRecord> records;
  records.reserve(cfg.settings.size());
  for (std::size_t si = 0; si < cfg.settings.size(); ++si) {
    const AnalyzerSetting& setting = cfg.settings[si];
    const detail::SettingTables tables = detail::build_setting_tables(
        circuit, input, source, herald, gated, setting, cfg.multi_pair_mode);
    const std::uint64_t key = splitmix64(cfg.seed ^ splitmix64(0x74636e00ull + si));

    // Fixed-size chunks summed in window order: totals are independent of
    // the worker count by construction.
    const std::uint64_t chunk = 1ull << 20;
    const std::uint64_t n_chunks = (cfg.n_gates + chunk - 1) / chunk;
    std::vector<detail::KernelCounts> partial(n_chunks);
    if (workers == 1 || n_chunks == 1) {
      for (std::uint64_t c = 0; c < n_chunks; ++c)
        kernel(tables, key, c * chunk, std::min(cfg.n_gates, (c + 1) * chunk),
               partial[c]);
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::uint64_t> next{0};
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
          for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            kernel(tables, key, c * chunk,
                   std::min(cfg.n_gates, (c + 1) * chunk), partial[c]);
          }
        });
      for (auto& th : pool) th.join();
    }
    detail::KernelCounts sum;
    for (const auto& p : partial) sum += p;

    CountRecord rec;
    rec.setting_id = setting.id;
    rec.total = sum.total;
    rec.accidental = sum.accidental;
    rec.singles1 = sum.singles1;
    rec.singles2 = sum.singles2;
    rec.windows = cfg.n_gates;
    records.push_back(std::move(rec));
  }
  return records;
}

double subtract_accidentals(const CountRecord& record) {
  return static_cast<double>(record.total) -
         static_cast<double>(record.accidental);
}

}  // namespace tcn
