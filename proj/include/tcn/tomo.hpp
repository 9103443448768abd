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

#include <map>
#include <string>
#include <vector>

#include "tcn/analyzer.hpp"
#include "tcn/detect.hpp"
#include "tcn/fock.hpp"
#include "tcn/gates.hpp"

namespace tcn {

/// One tomography measurement: an analyzer setting with its counts and the
/// per-setting normalization (number of gate windows).
struct TomoPoint {
  AnalyzerSetting setting;
  double corrected = 0.0;  // total - accidental, may be negative
  double total = 0.0;
  double accidental = 0.0;
  double n_norm = 0.0;  // gate windows behind this point
};

struct TomoDataset {
  std::string input_id;  // e.g. "HV", "DV"
  std::vector<TomoPoint> points;
};

enum class LikelihoodModel { Poisson, Gaussian };

struct Metrics {
  double fidelity = 0.0;
  double tangle = 0.0;
  double linear_entropy = 0.0;
};

struct FitMetadata {
  std::string likelihood;
  int iterations = 0;
  bool converged = false;
  double final_nll = 0.0;
  std::uint64_t seed = 0;
  double mean_residual_sd = 0.0;
};

struct MleOptions {
  LikelihoodModel likelihood = LikelihoodModel::Poisson;
  int max_iterations = 2000;
  double rel_tolerance = 1e-9;
};

struct MleResult {
  DensityMatrix rho;
  FitMetadata meta;
};

/// Maximum-likelihood state reconstruction over a Cholesky-parameterized
/// density matrix rho = T^dag T / Tr(T^dag T), started from the physical
/// projection of the linear-inversion estimate. Requires a setting set that
/// spans the two-qubit operator space. Non-convergence is reported through
/// the metadata, never silently.
MleResult mle_state(const TomoDataset& data, const MleOptions& opts = {});

/// <target| rho |target> for a normalized target ket.
double fidelity(const DensityMatrix& rho, const Eigen::Vector4cd& target);

/// Wootters concurrence squared.
double tangle(const DensityMatrix& rho);

/// (4/3) (1 - Tr rho^2).
double linear_entropy(const DensityMatrix& rho);

Metrics compute_metrics(const DensityMatrix& rho, const Eigen::Vector4cd& target);

/// Restricted pure-process transfer: four single-photon input modes
/// (control/target x V/H) into the four kept modes plus the two dump ports.
/// Row order (C,V) (C,H) (T,V) (T,H) (D1) (D2); column order the first four.
struct ProcessMatrix {
  Eigen::Matrix<cxd, 6, 4> m = Eigen::Matrix<cxd, 6, 4>::Zero();

  double max_column_norm() const;
};

/// The built gate's own transfer restricted to the six process modes.
ProcessMatrix ideal_process_matrix();

/// Two-photon operator the process induces on the post-selected qubit
/// subspace (basis VV, VH, HV, HH).
Eigen::Matrix4cd post_selected_from_process(const ProcessMatrix& m);

/// |Tr(A^dag B)|^2 / (Tr(A^dag A) Tr(B^dag B)) for two post-selected
/// two-photon operators.
double operator_overlap_fidelity(const Eigen::Matrix4cd& a,
                                 const Eigen::Matrix4cd& b);

/// operator_overlap_fidelity of the ideal operator and the operator the
/// process induces on the post-selected qubit subspace.
double process_fidelity(const ProcessMatrix& m, const Eigen::Matrix4cd& ideal);

struct ProcessFitOptions {
  LikelihoodModel likelihood = LikelihoodModel::Poisson;
  int starts = 5;  // deterministic multi-start
  std::uint64_t seed = 1;
  int max_iterations = 4000;
  /// Input Jones pairs (control, target) by dataset id; defaults cover the
  /// logical and D/A superposition inputs.
  std::map<std::string, std::pair<Eigen::Vector2cd, Eigen::Vector2cd>> inputs;
};

struct ProcessFitResult {
  ProcessMatrix m;
  FitMetadata meta;
  std::vector<double> residuals_sd;  // per point, signed, in sigma units
};

/// Maximum-likelihood fit of the 6x4 process matrix to coincidence datasets
/// over multiple gate inputs, with per-dataset rate scales profiled in.
ProcessFitResult fit_pure_process(const std::vector<TomoDataset>& datasets,
                                  const ProcessFitOptions& opts = {});

/// The default input map used by the pipelines (VV..HH, DV, AV, DH, AH).
std::map<std::string, std::pair<Eigen::Vector2cd, Eigen::Vector2cd>>
standard_process_inputs();

/// Subtracts the predicted multi-pair contribution from corrected counts.
/// The prediction mirrors the simulator's accidental-subtracted window
/// bookkeeping, driven by the fitted process matrix, the source statistics
/// and the detector models. mu = 0 leaves the dataset unchanged.
TomoDataset multipair_correct(const TomoDataset& data, const ProcessMatrix& m,
                              const SourceModel& source,
                              const DetectorModel& herald,
                              const DetectorModel& gated,
                              const TwoQubitState& input,
                              MultiPairMode mode = MultiPairMode::Exact);

}  // namespace tcn
