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

#include "tcn/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace tcn {

namespace {

constexpr cxd kI{0.0, 1.0};

const double kFactorial[9] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};

int occ_sum(const Occ& occ, int n_modes) {
  int s = 0;
  for (int i = 0; i < n_modes; ++i) s += occ[i];
  return s;
}

double occ_factorial(const Occ& occ, int n_modes) {
  double f = 1.0;
  for (int i = 0; i < n_modes; ++i) f *= kFactorial[occ[i]];
  return f;
}

ModeSetPtr make_modes(std::vector<ModeLabel> labels) {
  return std::make_shared<const ModeSet>(std::move(labels));
}

void require_same_modes(const ModeSetPtr& a, const ModeSetPtr& b,
                        const char* what) {
  if (a == b) return;
  if (a && b && *a == *b) return;
  throw std::invalid_argument(std::string(what) + ": mode set mismatch");
}

}  // namespace

ModeSet::ModeSet(std::vector<ModeLabel> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("ModeSet: no modes");
  if (static_cast<int>(labels_.size()) > kMaxModes)
    throw std::invalid_argument("ModeSet: more than 16 modes");
  std::set<ModeLabel> uniq(labels_.begin(), labels_.end());
  if (uniq.size() != labels_.size())
    throw std::invalid_argument("ModeSet: duplicate mode labels");
}

int ModeSet::index_of(const std::string& port, Pol pol, int internal) const {
  for (int i = 0; i < size(); ++i) {
    const ModeLabel& l = labels_[i];
    if (l.port == port && l.pol == pol && l.internal == internal) return i;
  }
  return -1;
}

std::vector<int> ModeSet::port_modes(const std::string& port) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (labels_[i].port == port) out.push_back(i);
  return out;
}

std::vector<std::string> ModeSet::ports() const {
  std::vector<std::string> out;
  for (const ModeLabel& l : labels_)
    if (std::find(out.begin(), out.end(), l.port) == out.end())
      out.push_back(l.port);
  return out;
}

PureState::PureState(ModeSetPtr modes, int photon_number)
    : modes_(std::move(modes)), photon_number_(photon_number) {
  if (!modes_) throw std::invalid_argument("PureState: null mode set");
  if (photon_number_ < 0 || photon_number_ > kMaxPhotons)
    throw std::invalid_argument("PureState: photon number outside 0..4");
}

void PureState::add_term(const Occ& occ, cxd amplitude) {
  if (occ_sum(occ, modes_->size()) != photon_number_)
    throw std::invalid_argument("PureState: occupation sum != photon number");
  terms_[occ] += amplitude;
}

double PureState::norm2() const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp);
  return s;
}

PureState PureState::normalized() const {
  const double n2 = norm2();
  if (n2 <= 0.0) throw std::domain_error("PureState: cannot normalize zero state");
  PureState out(modes_, photon_number_);
  const double inv = 1.0 / std::sqrt(n2);
  for (const auto& [occ, amp] : terms_) out.terms_[occ] = amp * inv;
  return out;
}

void PureState::prune(double eps) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < eps)
      it = terms_.erase(it);
    else
      ++it;
  }
}

cxd PureState::amplitude(const Occ& occ) const {
  auto it = terms_.find(occ);
  return it == terms_.end() ? cxd{0.0, 0.0} : it->second;
}

double ModeTransfer::unitarity_defect() const {
  Eigen::MatrixXcd d = matrix.adjoint() * matrix -
                       Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols());
  return d.cwiseAbs().maxCoeff();
}

const char* DensityMatrix::basis_label(int i) {
  static const char* kLabels[4] = {"VV", "VH", "HV", "HH"};
  return kLabels[i];
}

bool DensityMatrix::is_physical() const {
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10) return false;
  if (std::abs(matrix.trace().real() - 1.0) > 1e-10) return false;
  if (std::abs(matrix.trace().imag()) > 1e-10) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(matrix);
  return es.eigenvalues().minCoeff() >= -1e-9;
}

ModeTransfer beam_splitter(double reflectivity) {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
    throw std::invalid_argument("beam_splitter: reflectivity outside [0,1]");
  const double r = std::sqrt(reflectivity);
  const double t = std::sqrt(1.0 - reflectivity);
  ModeTransfer out;
  out.modes = make_modes({{"a", Pol::H, 0}, {"b", Pol::H, 0}});
  out.matrix = Eigen::MatrixXcd(2, 2);
  out.matrix << t, kI * r, kI * r, t;
  out.unitary_flag = true;
  return out;
}

ModeTransfer waveplate(WaveplateKind kind, double angle_rad) {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  Eigen::Matrix2cd j;
  if (kind == WaveplateKind::HWP) {
    const double c2 = std::cos(2 * angle_rad), s2 = std::sin(2 * angle_rad);
    j << c2, s2, s2, -c2;
  } else {
    // R(theta) diag(1, i) R(-theta)
    j << c * c + kI * s * s, c * s * (1.0 - kI),  //
        c * s * (1.0 - kI), s * s + kI * c * c;
  }
  ModeTransfer out;
  out.modes = make_modes({{"p", Pol::H, 0}, {"p", Pol::V, 0}});
  out.matrix = j;
  out.unitary_flag = true;
  return out;
}

ModeTransfer ppbs(double r_h, double r_v) {
  if (!(r_h >= 0.0 && r_h <= 1.0) || !(r_v >= 0.0 && r_v <= 1.0))
    throw std::invalid_argument("ppbs: reflectivity outside [0,1]");
  ModeTransfer bh = beam_splitter(r_h);
  ModeTransfer bv = beam_splitter(r_v);
  ModeTransfer out;
  out.modes = make_modes({{"a", Pol::H, 0},
                          {"a", Pol::V, 0},
                          {"b", Pol::H, 0},
                          {"b", Pol::V, 0}});
  out.matrix = Eigen::MatrixXcd::Zero(4, 4);
  // H pair on indices (0, 2), V pair on (1, 3).
  out.matrix(0, 0) = bh.matrix(0, 0);
  out.matrix(0, 2) = bh.matrix(0, 1);
  out.matrix(2, 0) = bh.matrix(1, 0);
  out.matrix(2, 2) = bh.matrix(1, 1);
  out.matrix(1, 1) = bv.matrix(0, 0);
  out.matrix(1, 3) = bv.matrix(0, 1);
  out.matrix(3, 1) = bv.matrix(1, 0);
  out.matrix(3, 3) = bv.matrix(1, 1);
  out.unitary_flag = true;
  return out;
}

ModeTransfer embed(const ModeTransfer& element, const std::vector<int>& mapping,
                   ModeSetPtr total) {
  if (!total) throw std::invalid_argument("embed: null target mode set");
  const int n = total->size();
  const int k = element.size();
  if (static_cast<int>(mapping.size()) != k)
    throw std::invalid_argument("embed: mapping size != element size");
  std::set<int> seen;
  for (int m : mapping) {
    if (m < 0 || m >= n) throw std::invalid_argument("embed: mapping out of range");
    if (!seen.insert(m).second)
      throw std::invalid_argument("embed: mapping not injective");
  }
  ModeTransfer out;
  out.modes = std::move(total);
  out.matrix = Eigen::MatrixXcd::Identity(n, n);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) out.matrix(mapping[r], mapping[c]) = element.matrix(r, c);
  out.unitary_flag = element.unitary_flag;
  return out;
}

ModeTransfer compose(const ModeTransfer& a, const ModeTransfer& b) {
  require_same_modes(a.modes, b.modes, "compose");
  if (a.matrix.rows() != b.matrix.rows())
    throw std::invalid_argument("compose: dimension mismatch");
  ModeTransfer out;
  out.modes = a.modes;
  out.matrix = b.matrix * a.matrix;
  out.unitary_flag = a.unitary_flag && b.unitary_flag;
  return out;
}

PureState apply_transfer(const PureState& state, const ModeTransfer& t) {
  require_same_modes(state.modes(), t.modes, "apply_transfer");
  const int n = state.modes()->size();
  if (n > kMaxModes || state.photon_number() > kMaxPhotons)
    throw std::invalid_argument("apply_transfer: dimension cap exceeded");

  // Column sparsity: a_i^dag -> sum_j t(j,i) b_j^dag.
  std::vector<std::vector<std::pair<int, cxd>>> cols(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cxd v = t.matrix(j, i);
      if (std::abs(v) > 1e-15) cols[i].push_back({j, v});
    }

  PureState out(state.modes(), state.photon_number());
  std::map<Occ, cxd> acc;
  for (const auto& [occ_in, amp_in] : state.terms()) {
    // Expand the creator monomial photon by photon.
    std::map<Occ, cxd> poly;
    poly[occ_zero()] = amp_in / std::sqrt(occ_factorial(occ_in, n));
    for (int i = 0; i < n; ++i) {
      for (int rep = 0; rep < occ_in[i]; ++rep) {
        std::map<Occ, cxd> next;
        for (const auto& [occ, c] : poly) {
          for (const auto& [j, tji] : cols[i]) {
            Occ o = occ;
            ++o[j];
            next[o] += c * tji;
          }
        }
        poly.swap(next);
      }
    }
    for (const auto& [occ, c] : poly) acc[occ] += c * std::sqrt(occ_factorial(occ, n));
  }
  for (const auto& [occ, c] : acc)
    if (std::abs(c) >= 1e-14) out.add_term(occ, c);
  return out;
}

std::pair<PureState, double> post_select(
    const PureState& state, const std::map<std::string, int>& pattern) {
  if (pattern.empty()) throw std::invalid_argument("post_select: empty pattern");
  const ModeSetPtr& ms = state.modes();
  std::vector<std::pair<std::vector<int>, int>> reqs;
  for (const auto& [port, count] : pattern) {
    std::vector<int> modes = ms->port_modes(port);
    if (modes.empty())
      throw std::invalid_argument("post_select: unknown port " + port);
    if (count < 0) throw std::invalid_argument("post_select: negative requirement");
    reqs.push_back({std::move(modes), count});
  }

  PureState kept(ms, state.photon_number());
  double p = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    bool ok = true;
    for (const auto& [modes, count] : reqs) {
      int s = 0;
      for (int m : modes) s += occ[m];
      if (s != count) {
        ok = false;
        break;
      }
    }
    if (ok) {
      kept.add_term(occ, amp);
      p += std::norm(amp);
    }
  }
  if (p < 1e-15) return {PureState(ms, state.photon_number()), 0.0};
  return {kept.normalized(), p};
}

DensityMatrix reduce_to_polarization(const PureState& state,
                                     const std::string& control_port,
                                     const std::string& target_port) {
  const ModeSetPtr& ms = state.modes();
  const std::vector<int> cm = ms->port_modes(control_port);
  const std::vector<int> tm = ms->port_modes(target_port);
  if (cm.empty() || tm.empty())
    throw std::invalid_argument("reduce_to_polarization: unknown port");

  // Group coherent amplitudes by the traced-out internal indices.
  std::map<std::pair<int, int>, Eigen::Vector4cd> sectors;
  for (const auto& [occ, amp] : state.terms()) {
    int c_mode = -1, t_mode = -1, elsewhere = 0;
    for (int i = 0; i < ms->size(); ++i) {
      if (occ[i] == 0) continue;
      const bool in_c = std::find(cm.begin(), cm.end(), i) != cm.end();
      const bool in_t = std::find(tm.begin(), tm.end(), i) != tm.end();
      if (in_c) {
        if (occ[i] != 1 || c_mode != -1) c_mode = -2;
        else c_mode = i;
      } else if (in_t) {
        if (occ[i] != 1 || t_mode != -1) t_mode = -2;
        else t_mode = i;
      } else {
        elsewhere += occ[i];
      }
    }
    if (c_mode < 0 || t_mode < 0 || elsewhere != 0)
      throw std::invalid_argument(
          "reduce_to_polarization: state is not one photon per named port");
    const ModeLabel& cl = ms->label(c_mode);
    const ModeLabel& tl = ms->label(t_mode);
    auto [it, unused] = sectors.try_emplace(
        std::make_pair<int, int>(cl.internal, tl.internal),
        Eigen::Vector4cd::Zero());
    it->second(qubit_basis_index(cl.pol, tl.pol)) += amp;
  }

  DensityMatrix rho;
  for (const auto& [key, v] : sectors) rho.matrix += v * v.adjoint();
  const double tr = rho.matrix.trace().real();
  if (tr <= 0.0)
    throw std::domain_error("reduce_to_polarization: zero-trace result");
  rho.matrix /= tr;
  return rho;
}

}  // namespace tcn
