#include <cstdio>
#include "tcn/detect.hpp"
using namespace tcn;
static const char* kIn[4] = {"VV","VH","HV","HH"};

// swap_arms: herald on target arm instead of control arm -> emulate by
// swapping detector models (det1 is always the control-arm detector).
static void landscape(const CnotCircuit& circ, uint64_t n, uint64_t seed0, bool swap_arms) {
  DetectorModel sspd{"SSPD", 0.01, 3e-6};
  DetectorModel apd{"APD", 0.20, 3e-3};
  DetectorModel d1 = swap_arms ? apd : sspd;
  DetectorModel d2 = swap_arms ? sspd : apd;
  SourceModel src{0.15, std::sqrt(0.94), 0.0, PairDistribution::Thermal};
  double avg = 0; double diag[4];
  for (int in = 0; in < 4; ++in) {
    TwoQubitState s; s.amps(in) = 1.0;
    RunConfig cfg; cfg.n_gates = n; cfg.seed = seed0 + in;
    cfg.settings = logical_settings_4(); cfg.multi_pair_mode = MultiPairMode::Exact;
    auto recs = simulate_counts(circ, s, src, d1, d2, cfg);
    double row[4], sum = 0;
    for (int o = 0; o < 4; ++o) { row[o] = subtract_accidentals(recs[o]); sum += row[o]; }
    int correct = (in < 2) ? in : (in == 2 ? 3 : 2);
    diag[in] = row[correct]/sum; avg += diag[in]/4;
  }
  printf("n=%llu seed0=%llu swap=%d  diag: %.4f %.4f %.4f %.4f  avg=%.4f\n",
         (unsigned long long)n, (unsigned long long)seed0, (int)swap_arms,
         diag[0], diag[1], diag[2], diag[3], avg);
}

int main() {
  CnotCircuit circ = build_cnot_circuit();
  printf("-- herald(SSPD) on control arm --\n");
  landscape(circ, 100000000ull, 1, false);
  printf("-- herald(SSPD) on target arm (swapped) --\n");
  landscape(circ, 100000000ull, 1, true);
  printf("-- seed spread at 1e7, no swap --\n");
  for (uint64_t s : {100ull, 200ull, 300ull}) landscape(circ, 10000000ull, s, false);
  printf("-- seed spread at 1e7, swapped --\n");
  for (uint64_t s : {100ull, 200ull, 300ull}) landscape(circ, 10000000ull, s, true);
  return 0;
}
