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

#include <string>
#include <vector>

#include "tcn/fock.hpp"

namespace tcn {

/// One polarization-analyzer configuration: per arm a quarter- and a
/// half-wave plate in front of a polarizing splitter whose transmitted (H)
/// port feeds the detector.
struct AnalyzerSetting {
  std::string id;
  double qwp1 = 0.0;
  double hwp1 = 0.0;
  double qwp2 = 0.0;
  double hwp2 = 0.0;
};

/// Jones matrix of one analyzer arm (light passes the QWP, then the HWP).
Eigen::Matrix2cd analyzer_arm_jones(double qwp_rad, double hwp_rad);

/// The (V, H) components of the state an arm transmits into its detector:
/// the waveplate-back-propagated PBS transmission state.
Eigen::Vector2cd analyzer_arm_ket(double qwp_rad, double hwp_rad);

/// Rank-one two-qubit projector |psi1 psi2><psi1 psi2| in the
/// (VV, VH, HV, HH) basis.
Eigen::Matrix4cd analyzer_projector(const AnalyzerSetting& setting);

/// The canonical 16-setting two-qubit tomography set (arm states drawn from
/// H, V, D, A, R, L).
std::vector<AnalyzerSetting> canonical_settings_16();

/// Overcomplete 36-setting set: all pairs from {H, V, D, A, R, L}.
std::vector<AnalyzerSetting> full_settings_36();

/// The four logical-basis settings (VV, VH, HV, HH), used by truth tables.
std::vector<AnalyzerSetting> logical_settings_4();

}  // namespace tcn
