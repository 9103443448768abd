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
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tcn {

using cxd = std::complex<double>;

// Hard dimension caps: operations reject anything larger instead of
// silently degrading.
inline constexpr int kMaxModes = 16;
inline constexpr int kMaxPhotons = 4;

enum class Pol : std::uint8_t { H = 0, V = 1 };

/// One optical mode: (spatial port, polarization, internal distinguishability
/// index). The internal index carries temporal/spectral mode mismatch.
struct ModeLabel {
  std::string port;
  Pol pol = Pol::H;
  std::uint8_t internal = 0;

  friend bool operator==(const ModeLabel& a, const ModeLabel& b) {
    return a.port == b.port && a.pol == b.pol && a.internal == b.internal;
  }
  friend bool operator<(const ModeLabel& a, const ModeLabel& b) {
    if (a.port != b.port) return a.port < b.port;
    if (a.pol != b.pol) return a.pol < b.pol;
    return a.internal < b.internal;
  }
};

/// Ordered set of unique mode labels. States and transfers refer to modes by
/// index into one ModeSet.
class ModeSet {
 public:
  explicit ModeSet(std::vector<ModeLabel> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const ModeLabel& label(int i) const { return labels_.at(i); }
  const std::vector<ModeLabel>& labels() const { return labels_; }

  /// Index of a mode, or -1 when absent.
  int index_of(const std::string& port, Pol pol, int internal) const;
  /// All mode indices belonging to a spatial port.
  std::vector<int> port_modes(const std::string& port) const;
  /// Distinct port names in first-appearance order.
  std::vector<std::string> ports() const;

  friend bool operator==(const ModeSet& a, const ModeSet& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<ModeLabel> labels_;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

/// Occupation vector, one photon count per mode. Only the first
/// ModeSet::size() entries are meaningful.
using Occ = std::array<std::uint8_t, kMaxModes>;

inline Occ occ_zero() { return Occ{}; }

/// Superposition of Fock occupation vectors with fixed total photon number.
/// Norm may be below 1 (e.g. the kept part of a post-selection).
class PureState {
 public:
  PureState(ModeSetPtr modes, int photon_number);

  /// Adds amplitude to one occupation term. The occupation must sum to the
  /// state's photon number.
  void add_term(const Occ& occ, cxd amplitude);

  const std::map<Occ, cxd>& terms() const { return terms_; }
  int photon_number() const { return photon_number_; }
  const ModeSetPtr& modes() const { return modes_; }

  double norm2() const;
  PureState normalized() const;
  /// Drops terms with |amplitude| below eps to bound term growth.
  void prune(double eps = 1e-14);

  /// Amplitude of one occupation (0 when absent).
  cxd amplitude(const Occ& occ) const;

 private:
  ModeSetPtr modes_;
  int photon_number_;
  std::map<Occ, cxd> terms_;
};

/// Complex matrix mapping photon creation operators between the modes of one
/// ModeSet: a_i^dag -> sum_j matrix(j, i) b_j^dag.
struct ModeTransfer {
  ModeSetPtr modes;
  Eigen::MatrixXcd matrix;
  bool unitary_flag = false;

  int size() const { return static_cast<int>(matrix.rows()); }
  /// Deviation from unitarity, max |(M^dag M - I)_ij|.
  double unitarity_defect() const;
};

/// Two-qubit polarization density matrix over the ordered basis
/// (|VV>, |VH>, |HV>, |HH>).
struct DensityMatrix {
  Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Zero();

  static const char* basis_label(int i);
  /// Checks Hermiticity (1e-10), eigenvalue floor (-1e-9) and unit trace
  /// (1e-10). Returns true when all hold.
  bool is_physical() const;
  double trace_real() const { return matrix.trace().real(); }
};

/// Basis index of |c t> in the (VV, VH, HV, HH) ordering (V=0, H=1).
inline int qubit_basis_index(Pol control, Pol target) {
  return 2 * (control == Pol::H ? 1 : 0) + (target == Pol::H ? 1 : 0);
}

// ---- Linear-optical elements -------------------------------------------

/// Symmetric beam splitter on two spatial modes, i phase on reflection:
/// [[t, i r], [i r, t]] with r = sqrt(reflectivity). Reflectivity 0 is the
/// identity, 1 is i times a mode swap.
ModeTransfer beam_splitter(double reflectivity);

enum class WaveplateKind { HWP, QWP };

/// Jones unitary of a waveplate at `angle` on one port's (H, V) pair.
/// HWP(theta) = [[cos2t, sin2t], [sin2t, -cos2t]],
/// QWP(theta) = R(t) diag(1, i) R(-t), global retarder phases dropped.
ModeTransfer waveplate(WaveplateKind kind, double angle_rad);

/// Partially polarizing beam splitter over two spatial ports: the H pair
/// sees beam_splitter(r_h), the V pair beam_splitter(r_v).
ModeTransfer ppbs(double r_h, double r_v);

/// Places `element` on the modes listed in `mapping` (element mode i ->
/// total mode mapping[i]); identity elsewhere. Mapping must be injective.
ModeTransfer embed(const ModeTransfer& element, const std::vector<int>& mapping,
                   ModeSetPtr total);

/// "b after a": the transfer of applying a first, then b.
ModeTransfer compose(const ModeTransfer& a, const ModeTransfer& b);

// ---- State evolution ----------------------------------------------------

/// Rewrites every creation operator through the transfer and collects like
/// terms. Preserves photon number exactly and norm when unitary.
PureState apply_transfer(const PureState& state, const ModeTransfer& t);

/// Keeps only terms whose per-port photon sums match `pattern` exactly,
/// for every port named in the pattern. Returns the renormalized kept state
/// and the squared norm of the kept part. States with kept probability
/// below 1e-15 come back empty.
std::pair<PureState, double> post_select(
    const PureState& state, const std::map<std::string, int>& pattern);

/// Reduces a state with exactly one photon in each of two ports (and no
/// photons elsewhere) to a polarization density matrix, tracing out the
/// internal distinguishability indices.
DensityMatrix reduce_to_polarization(const PureState& state,
                                     const std::string& control_port,
                                     const std::string& target_port);

}  // namespace tcn
