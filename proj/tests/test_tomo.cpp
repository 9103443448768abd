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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tcn/tomo.hpp"

using namespace tcn;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Deterministic Poisson sampler for test data.
long poisson_draw(double lambda, PhiloxStream& rng) {
  if (lambda <= 0.0) return 0;
  if (lambda > 50.0) {
    // normal approximation, adequate for synthetic count data
    const double u1 = std::max(1e-12, rng.next_double());
    const double u2 = rng.next_double();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    return std::max(0L, std::lround(lambda + z * std::sqrt(lambda)));
  }
  const double limit = std::exp(-lambda);
  long k = 0;
  double prod = rng.next_double();
  while (prod > limit) {
    ++k;
    prod *= rng.next_double();
  }
  return k;
}

TomoDataset dataset_from_state(const Eigen::Matrix4cd& rho, double n_per_setting,
                               PhiloxStream* noise) {
  TomoDataset d;
  d.input_id = "test";
  for (const AnalyzerSetting& s : canonical_settings_16()) {
    TomoPoint p;
    p.setting = s;
    const double lambda = n_per_setting * (rho * analyzer_projector(s)).trace().real();
    p.corrected = noise ? static_cast<double>(poisson_draw(lambda, *noise)) : lambda;
    p.total = p.corrected;
    p.accidental = 0.0;
    p.n_norm = n_per_setting;
    d.points.push_back(p);
  }
  return d;
}

double trace_distance(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Eigen::Vector4cd random_pure(PhiloxStream& rng) {
  Eigen::Vector4cd v;
  for (int i = 0; i < 4; ++i)
    v(i) = cxd(rng.next_double() - 0.5, rng.next_double() - 0.5);
  v.normalize();
  return v;
}

}  // namespace

TEST_CASE("analyzer projectors for named settings") {
  // null waveplates project onto |HH|
  AnalyzerSetting hh{"HH", 0, 0, 0, 0};
  const Eigen::Matrix4cd p = analyzer_projector(hh);
  CHECK(std::abs(p(3, 3).real() - 1.0) < 1e-12);
  CHECK(p.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));

  // HWP at 22.5 deg picks the diagonal arm state
  const Eigen::Vector2cd d = analyzer_arm_ket(0.0, kPi / 8);
  CHECK(std::abs(std::abs(d(0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(d(0) - d(1)) < 1e-12);

  // projector has unit trace for every canonical setting
  for (const auto& s : canonical_settings_16())
    CHECK(analyzer_projector(s).trace().real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("canonical 16 settings span the operator space") {
  auto gram_rank = [](const std::vector<AnalyzerSetting>& set) {
    Eigen::MatrixXd a(static_cast<int>(set.size()), 16);
    for (std::size_t i = 0; i < set.size(); ++i) {
      const Eigen::Matrix4cd p = analyzer_projector(set[i]);
      int k = 0;
      for (int r = 0; r < 4; ++r) a(i, k++) = p(r, r).real();
      for (int r = 0; r < 4; ++r)
        for (int c = r + 1; c < 4; ++c) {
          a(i, k++) = p(r, c).real();
          a(i, k++) = p(r, c).imag();
        }
    }
    return Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(a).rank();
  };
  CHECK(gram_rank(canonical_settings_16()) == 16);
  CHECK(gram_rank(full_settings_36()) == 16);
  CHECK(gram_rank(logical_settings_4()) < 16);
}

TEST_CASE("fidelity basics and phase invariance") {
  DensityMatrix bell;
  const Eigen::Vector4cd psi_m = bell_ket(BellKind::PsiMinus);
  bell.matrix = psi_m * psi_m.adjoint();
  CHECK(fidelity(bell, psi_m) == doctest::Approx(1.0));

  DensityMatrix mixed;
  mixed.matrix = Eigen::Matrix4cd::Identity() / 4.0;
  for (BellKind k : {BellKind::PhiPlus, BellKind::PsiMinus})
    CHECK(fidelity(mixed, bell_ket(k)) == doctest::Approx(0.25));

  const cxd phase = std::exp(cxd(0, 0.7));
  CHECK(fidelity(bell, phase * psi_m) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::Vector4cd unnorm = 2.0 * psi_m;
  CHECK_THROWS_AS(fidelity(bell, unnorm), std::invalid_argument);
}

TEST_CASE("tangle on Bell, product and Werner states") {
  for (BellKind k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus,
                     BellKind::PsiMinus}) {
    DensityMatrix rho;
    const Eigen::Vector4cd v = bell_ket(k);
    rho.matrix = v * v.adjoint();
    CHECK(tangle(rho) == doctest::Approx(1.0).epsilon(1e-10));
  }

  DensityMatrix prod;
  Eigen::Vector4cd p = Eigen::Vector4cd::Zero();
  p(2) = 1.0;  // |HV>
  prod.matrix = p * p.adjoint();
  CHECK(tangle(prod) == doctest::Approx(0.0));

  // Werner state: C = max(0, (3p-1)/2)
  const Eigen::Vector4cd psi_m = bell_ket(BellKind::PsiMinus);
  for (double w : {0.5, 0.2, 0.9}) {
    DensityMatrix rho;
    rho.matrix = w * psi_m * psi_m.adjoint() +
                 (1.0 - w) * Eigen::Matrix4cd::Identity() / 4.0;
    const double c = std::max(0.0, (3.0 * w - 1.0) / 2.0);
    CHECK(tangle(rho) == doctest::Approx(c * c).epsilon(1e-9));
  }
}

TEST_CASE("tangle vanishes on random separable mixtures") {
  PhiloxStream rng(404);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double wsum = 0.0;
    const int terms = 1 + static_cast<int>(rng.next_u64() % 3);
    for (int t = 0; t < terms; ++t) {
      Eigen::Vector2cd a(cxd(rng.next_double() - 0.5, rng.next_double() - 0.5),
                         cxd(rng.next_double() - 0.5, rng.next_double() - 0.5));
      Eigen::Vector2cd b(cxd(rng.next_double() - 0.5, rng.next_double() - 0.5),
                         cxd(rng.next_double() - 0.5, rng.next_double() - 0.5));
      a.normalize();
      b.normalize();
      Eigen::Vector4cd k;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k(2 * i + j) = a(i) * b(j);
      const double w = rng.next_double() + 0.1;
      rho += w * k * k.adjoint();
      wsum += w;
    }
    DensityMatrix d;
    d.matrix = rho / wsum;
    CHECK(tangle(d) < 1e-8);
  }
}

TEST_CASE("pure-state tangle equals 4 det of the reduced state") {
  PhiloxStream rng(405);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Vector4cd v = random_pure(rng);
    DensityMatrix rho;
    rho.matrix = v * v.adjoint();
    Eigen::Matrix2cd red = Eigen::Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int t = 0; t < 2; ++t) red(i, j) += v(2 * i + t) * std::conj(v(2 * j + t));
    CHECK(tangle(rho) == doctest::Approx(4.0 * red.determinant().real()).epsilon(1e-8));
  }
}

TEST_CASE("linear entropy reference points") {
  DensityMatrix pure;
  const Eigen::Vector4cd v = bell_ket(BellKind::PhiPlus);
  pure.matrix = v * v.adjoint();
  CHECK(linear_entropy(pure) == doctest::Approx(0.0).epsilon(1e-12));

  DensityMatrix mixed;
  mixed.matrix = Eigen::Matrix4cd::Identity() / 4.0;
  CHECK(linear_entropy(mixed) == doctest::Approx(1.0).epsilon(1e-12));

  DensityMatrix half;
  Eigen::Vector4cd a = Eigen::Vector4cd::Zero(), b = Eigen::Vector4cd::Zero();
  a(0) = 1.0;
  b(3) = 1.0;
  half.matrix = 0.5 * (a * a.adjoint() + b * b.adjoint());
  CHECK(linear_entropy(half) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("metrics are invariant under a basis permutation of both arguments") {
  PhiloxStream rng(406);
  const Eigen::Vector4cd v = random_pure(rng);
  DensityMatrix rho;
  rho.matrix = v * v.adjoint();
  // swap the two qubits (a symmetry of the basis labels)
  Eigen::Matrix4cd perm = Eigen::Matrix4cd::Zero();
  perm(0, 0) = perm(3, 3) = 1.0;
  perm(1, 2) = perm(2, 1) = 1.0;
  DensityMatrix rho2;
  rho2.matrix = perm * rho.matrix * perm.adjoint();
  const Eigen::Vector4cd v2 = perm * v;
  CHECK(fidelity(rho, v) == doctest::Approx(fidelity(rho2, v2)).epsilon(1e-12));
  CHECK(tangle(rho) == doctest::Approx(tangle(rho2)).epsilon(1e-9));
  CHECK(linear_entropy(rho) ==
        doctest::Approx(linear_entropy(rho2)).epsilon(1e-12));
}

TEST_CASE("mle_state noiseless round trip") {
  const Eigen::Vector4cd v = bell_ket(BellKind::PhiPlus);
  const Eigen::Matrix4cd rho0 = v * v.adjoint();
  const TomoDataset d = dataset_from_state(rho0, 10000.0, nullptr);
  const MleResult r = mle_state(d);
  CHECK(r.meta.converged);
  CHECK(r.rho.is_physical());
  CHECK(trace_distance(r.rho.matrix, rho0) < 1e-3);
}

TEST_CASE("mle_state noisy round trip keeps high fidelity") {
  const Eigen::Vector4cd v = bell_ket(BellKind::PsiMinus);
  const Eigen::Matrix4cd rho0 = v * v.adjoint();
  std::vector<double> fids;
  for (int seed = 0; seed < 5; ++seed) {
    PhiloxStream rng(1000 + seed);
    const TomoDataset d = dataset_from_state(rho0, 10000.0, &rng);
    const MleResult r = mle_state(d);
    CHECK(r.rho.is_physical());
    fids.push_back(fidelity(r.rho, v));
  }
  std::sort(fids.begin(), fids.end());
  CHECK(fids[fids.size() / 2] > 0.99);
}

TEST_CASE("mle_state recovers the maximally mixed state") {
  const Eigen::Matrix4cd rho0 = Eigen::Matrix4cd::Identity() / 4.0;
  PhiloxStream rng(77);
  const TomoDataset d = dataset_from_state(rho0, 10000.0, &rng);
  const MleResult r = mle_state(d);
  DensityMatrix dm = r.rho;
  CHECK(linear_entropy(dm) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mle_state rejects rank-deficient setting sets") {
  TomoDataset d;
  d.input_id = "bad";
  for (const AnalyzerSetting& s : logical_settings_4()) {
    for (int rep = 0; rep < 4; ++rep) {
      TomoPoint p;
      p.setting = s;
      p.setting.id += std::to_string(rep);
      p.n_norm = 100.0;
      d.points.push_back(p);
    }
  }
  CHECK_THROWS_AS(mle_state(d), std::invalid_argument);
}

TEST_CASE("gaussian likelihood handles negative corrected counts") {
  const Eigen::Matrix4cd rho0 = Eigen::Matrix4cd::Identity() / 4.0;
  TomoDataset d = dataset_from_state(rho0, 100.0, nullptr);
  d.points[3].corrected = -4.0;  // as subtraction can produce
  MleOptions opts;
  opts.likelihood = LikelihoodModel::Gaussian;
  const MleResult r = mle_state(d, opts);
  CHECK(r.rho.is_physical());
  CHECK(r.meta.likelihood == "gaussian");
}

TEST_CASE("ideal process matrix reproduces the gate operator") {
  const ProcessMatrix m = ideal_process_matrix();
  CHECK(m.max_column_norm() == doctest::Approx(1.0).epsilon(1e-10));
  const Eigen::Matrix4cd am = post_selected_from_process(m);
  const Eigen::Matrix4cd want = post_selected_operator(build_cnot_circuit());
  CHECK((am - want).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(process_fidelity(m, cnot_matrix()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("operator overlap fidelity trace algebra") {
  const Eigen::Matrix4cd cnot = cnot_matrix();
  // Z on the control commutes through CNOT, so the overlap trace vanishes.
  Eigen::Matrix4cd z_c = Eigen::Matrix4cd::Identity();
  z_c(2, 2) = z_c(3, 3) = -1.0;
  CHECK(operator_overlap_fidelity(cnot, z_c * cnot) ==
        doctest::Approx(0.0).epsilon(1e-12));

  Eigen::Matrix4cd swap = Eigen::Matrix4cd::Zero();
  swap(0, 0) = swap(3, 3) = 1.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  // Tr(CNOT * SWAP) = 1, so the normalized overlap is 1/16.
  CHECK(operator_overlap_fidelity(cnot, swap) ==
        doctest::Approx(1.0 / 16.0).epsilon(1e-12));

  CHECK(operator_overlap_fidelity(cnot, cxd(0.0, 0.37) * cnot) ==
        doctest::Approx(1.0).epsilon(1e-12));  // scalar invariance

  CHECK_THROWS_AS(operator_overlap_fidelity(cnot, Eigen::Matrix4cd::Zero()),
                  std::domain_error);
}

TEST_CASE("fit_pure_process round trip on clean ideal data") {
  // Synthesize noiseless coincidence data from the ideal process prediction.
  const ProcessMatrix truth = ideal_process_matrix();
  const auto inputs = standard_process_inputs();
  std::vector<TomoDataset> sets;
  for (const auto& [id, inpair] : inputs) {
    TomoDataset d;
    d.input_id = id;
    for (const AnalyzerSetting& s : canonical_settings_16()) {
      TomoPoint p;
      p.setting = s;
      const Eigen::Vector2cd a1 = analyzer_arm_ket(s.qwp1, s.hwp1);
      const Eigen::Vector2cd a2 = analyzer_arm_ket(s.qwp2, s.hwp2);
      cxd amp = 0.0;
      {
        Eigen::Vector4cd ec(inpair.first(0), inpair.first(1), 0, 0);
        Eigen::Vector4cd et(0, 0, inpair.second(0), inpair.second(1));
        Eigen::Matrix<cxd, 6, 1> u = truth.m * ec;
        Eigen::Matrix<cxd, 6, 1> v = truth.m * et;
        const cxd a1u = std::conj(a1(0)) * u(0) + std::conj(a1(1)) * u(1);
        const cxd a2v = std::conj(a2(0)) * v(2) + std::conj(a2(1)) * v(3);
        const cxd a1v = std::conj(a1(0)) * v(0) + std::conj(a1(1)) * v(1);
        const cxd a2u = std::conj(a2(0)) * u(2) + std::conj(a2(1)) * u(3);
        amp = a1u * a2v + a1v * a2u;
      }
      p.corrected = 90000.0 * std::norm(amp);
      p.total = p.corrected;
      p.n_norm = 90000.0;
      d.points.push_back(p);
    }
    sets.push_back(std::move(d));
  }
  ProcessFitOptions opts;
  opts.starts = 3;
  const ProcessFitResult r = fit_pure_process(sets, opts);
  CHECK(process_fidelity(r.m, cnot_matrix()) > 0.999);
  CHECK(r.meta.mean_residual_sd < 0.05);
  // predictions reproduce the generator probabilities
  CHECK(r.m.max_column_norm() <= 1.0 + 1e-9);
}

TEST_CASE("multipair_correct leaves data unchanged at mu = 0") {
  const ProcessMatrix m = ideal_process_matrix();
  SourceModel src{0.0, 1.0, 0.0, PairDistribution::Thermal};
  DetectorModel d1{"a", 0.1, 1e-5};
  DetectorModel d2{"b", 0.2, 1e-3};
  TomoDataset d;
  d.input_id = "HV";
  for (const AnalyzerSetting& s : logical_settings_4()) {
    TomoPoint p;
    p.setting = s;
    p.corrected = 123.0;
    p.total = 150.0;
    p.accidental = 27.0;
    p.n_norm = 1e6;
    d.points.push_back(p);
  }
  TwoQubitState hv;
  hv.amps(2) = 1.0;
  const TomoDataset out = multipair_correct(d, m, src, d1, d2, hv);
  for (std::size_t i = 0; i < d.points.size(); ++i)
    CHECK(out.points[i].corrected == d.points[i].corrected);
}

TEST_CASE("multipair_correct reduces the multi-pair excess") {
  // With pairs present the predicted pollution is positive on settings the
  // crossed photons can reach.
  const ProcessMatrix m = ideal_process_matrix();
  SourceModel src{0.15, 1.0, 0.0, PairDistribution::Thermal};
  DetectorModel d1{"a", 0.01, 3e-6};
  DetectorModel d2{"b", 0.20, 3e-3};
  TomoDataset d;
  d.input_id = "HV";
  for (const AnalyzerSetting& s : logical_settings_4()) {
    TomoPoint p;
    p.setting = s;
    p.corrected = 100.0;
    p.total = 130.0;
    p.accidental = 30.0;
    p.n_norm = 1e7;
    d.points.push_back(p);
  }
  TwoQubitState hv;
  hv.amps(2) = 1.0;
  const TomoDataset out = multipair_correct(d, m, src, d1, d2, hv,
                                            MultiPairMode::Exact);
  double shifted = 0.0;
  for (std::size_t i = 0; i < d.points.size(); ++i)
    shifted += d.points[i].corrected - out.points[i].corrected;
  CHECK(shifted > 0.0);
}
