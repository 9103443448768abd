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
#include <utility>

#include "tcn/fock.hpp"

namespace tcn {

// Port names of the CNOT mode layout.
inline constexpr const char* kControlPort = "control";
inline constexpr const char* kTargetPort = "target";
inline constexpr const char* kDump1Port = "dump1";
inline constexpr const char* kDump2Port = "dump2";

/// Two-qubit polarization state over the ordered basis (VV, VH, HV, HH)
/// with the logic convention 0 = V, 1 = H.
struct TwoQubitState {
  Eigen::Vector4cd amps = Eigen::Vector4cd::Zero();

  double norm2() const { return amps.squaredNorm(); }
  bool is_normalized(double tol = 1e-10) const {
    return std::abs(norm2() - 1.0) <= tol;
  }
  /// Product state from single-qubit Jones vectors (V, H components).
  static TwoQubitState product(const Eigen::Vector2cd& control,
                               const Eigen::Vector2cd& target);
};

/// Quantum-splitter source parameters: relative pump phase delta and the
/// internal-mode overlap of the two emitted photons. The HOM dip visibility
/// equals gamma_ind squared.
struct QsSpec {
  double delta = 0.0;
  double gamma_ind = 1.0;  // clamped to [0, 1]
};

/// The composed three-PPBS gate: full 16-mode transfer plus the
/// one-photon-per-output-port success pattern.
struct CnotCircuit {
  ModeSetPtr mode_set;
  ModeTransfer transfer;
  std::map<std::string, int> success_pattern;
};

/// Two-photon state in ports c, d behind the 50/50 coupler of the quantum
/// splitter, for pair phase delta. The second photon carries the gamma_ind
/// internal-mode weighting.
PureState qs_source_state(const QsSpec& spec);

/// Builds the gate: target-basis half-wave rotations around a central
/// ppbs(1/3, 1) and two swap-sandwiched outer ppbs(1/3, 1) attenuators.
/// Post-selected on the success pattern the gate acts as (1/3) * CNOT
/// (control 0=V, 1=H) and succeeds with probability 1/9.
CnotCircuit build_cnot_circuit();

/// Evolves control (port c type) and target photons through the circuit,
/// post-selects one photon per output rail and reduces to polarization.
/// Returns the output state and the post-selection probability.
std::pair<DensityMatrix, double> run_cnot(const TwoQubitState& input,
                                          const QsSpec& spec);

/// Logical truth table: row = input (VV..HH), column = output; probabilities
/// conditioned on post-selection, each row summing to 1.
Eigen::Matrix4d truth_table(const QsSpec& spec);

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

/// Ideal ket of a Bell state in the (VV, VH, HV, HH) basis.
Eigen::Vector4cd bell_ket(BellKind which);

/// Runs the gate on the separable D/A (x) V/H input that ideally produces the
/// requested Bell state and returns the reduced output.
DensityMatrix bell_prep(BellKind which, const QsSpec& spec);

// ---- Helpers shared with the detection and tomography layers ------------

/// The 16-mode CNOT ModeSet: ports (control, target, dump1, dump2) x
/// polarization x internal index.
ModeSetPtr cnot_mode_set();

/// Identity everywhere except one port's polarization pairs, which get the
/// Jones matrix (applied to every internal index).
ModeTransfer jones_on_port(const ModeSetPtr& ms, const std::string& port,
                           const Eigen::Matrix2cd& jones_hv);

/// Pure relabeling that exchanges two ports' modes.
ModeTransfer port_swap(const ModeSetPtr& ms, const std::string& port_a,
                       const std::string& port_b);

/// Input Fock state for the gate: control photon in internal mode 0, target
/// photon split between internal 0 (amplitude gamma) and 1.
PureState cnot_input_state(const TwoQubitState& input, double gamma_ind,
                           const ModeSetPtr& ms);

/// The 4x4 operator the circuit applies on the post-selected qubit subspace
/// (unnormalized; magnitude 1/3 of a unitary for the ideal gate).
Eigen::Matrix4cd post_selected_operator(const CnotCircuit& circuit);

/// The ideal CNOT permutation in the (VV, VH, HV, HH) basis.
Eigen::Matrix4cd cnot_matrix();

}  // namespace tcn
