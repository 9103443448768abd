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

#include "tcn/gates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// The gate equalizes amplitudes when the target basis rotations are
// HWP(-22.5 deg); at +22.5 deg a residual controlled sign survives.
const double kTargetBasisAngle = -kPi / 8.0;

}  // namespace

TwoQubitState TwoQubitState::product(const Eigen::Vector2cd& control,
                                     const Eigen::Vector2cd& target) {
  TwoQubitState s;
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) s.amps(2 * c + t) = control(c) * target(t);
  return s;
}

ModeSetPtr cnot_mode_set() {
  std::vector<ModeLabel> labels;
  for (const char* port : {kControlPort, kTargetPort, kDump1Port, kDump2Port})
    for (Pol pol : {Pol::H, Pol::V})
      for (int internal : {0, 1})
        labels.push_back({port, pol, static_cast<std::uint8_t>(internal)});
  return std::make_shared<const ModeSet>(std::move(labels));
}

ModeTransfer jones_on_port(const ModeSetPtr& ms, const std::string& port,
                           const Eigen::Matrix2cd& jones_hv) {
  const int n = ms->size();
  ModeTransfer out;
  out.modes = ms;
  out.matrix = Eigen::MatrixXcd::Identity(n, n);
  for (int internal : {0, 1}) {
    const int h = ms->index_of(port, Pol::H, internal);
    const int v = ms->index_of(port, Pol::V, internal);
    if (h < 0 && v < 0) continue;
    if (h < 0 || v < 0)
      throw std::invalid_argument("jones_on_port: incomplete H/V pair");
    out.matrix(h, h) = jones_hv(0, 0);
    out.matrix(h, v) = jones_hv(0, 1);
    out.matrix(v, h) = jones_hv(1, 0);
    out.matrix(v, v) = jones_hv(1, 1);
  }
  out.unitary_flag = true;
  return out;
}

ModeTransfer port_swap(const ModeSetPtr& ms, const std::string& port_a,
                       const std::string& port_b) {
  const int n = ms->size();
  ModeTransfer out;
  out.modes = ms;
  out.matrix = Eigen::MatrixXcd::Identity(n, n);
  for (Pol pol : {Pol::H, Pol::V})
    for (int internal : {0, 1}) {
      const int a = ms->index_of(port_a, pol, internal);
      const int b = ms->index_of(port_b, pol, internal);
      if (a < 0 || b < 0)
        throw std::invalid_argument("port_swap: ports not mode-compatible");
      out.matrix(a, a) = 0.0;
      out.matrix(b, b) = 0.0;
      out.matrix(a, b) = 1.0;
      out.matrix(b, a) = 1.0;
    }
  out.unitary_flag = true;
  return out;
}

namespace {

// ppbs(r_h, r_v) between two ports with the reflected output staying on its
// own side, as in the gate geometry: embed the splitter, then undo the
// crossing with a relabeling swap.
ModeTransfer ppbs_keep(const ModeSetPtr& ms, const std::string& port_a,
                       const std::string& port_b, double r_h, double r_v) {
  const ModeTransfer element = ppbs(r_h, r_v);
  ModeTransfer total;
  total.modes = ms;
  total.matrix = Eigen::MatrixXcd::Identity(ms->size(), ms->size());
  total.unitary_flag = true;
  for (int internal : {0, 1}) {
    std::vector<int> mapping = {
        ms->index_of(port_a, Pol::H, internal),
        ms->index_of(port_a, Pol::V, internal),
        ms->index_of(port_b, Pol::H, internal),
        ms->index_of(port_b, Pol::V, internal),
    };
    for (int m : mapping)
      if (m < 0) throw std::invalid_argument("ppbs_keep: missing mode");
    total = compose(total, embed(element, mapping, ms));
  }
  return compose(total, port_swap(ms, port_a, port_b));
}

}  // namespace

PureState qs_source_state(const QsSpec& spec) {
  const double g = clamp01(spec.gamma_ind);
  const double g_perp = std::sqrt(std::max(0.0, 1.0 - g * g));
  auto ms = std::make_shared<const ModeSet>(std::vector<ModeLabel>{
      {"c", Pol::V, 0}, {"c", Pol::V, 1}, {"d", Pol::V, 0}, {"d", Pol::V, 1}});

  // (A_c^dag B_c^dag + e^{i delta} A_d^dag B_d^dag)/sqrt(2) with
  // A = internal 0 and B = gamma * internal 0 + sqrt(1-gamma^2) * internal 1.
  const cxd phase = std::exp(cxd(0.0, spec.delta));
  PureState in(ms, 2);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int port = 0; port < 2; ++port) {
    const int m0 = 2 * port;      // internal 0
    const int m1 = 2 * port + 1;  // internal 1
    const cxd w = (port == 0) ? cxd(inv_sqrt2) : phase * inv_sqrt2;
    if (g > 0.0) {
      Occ o = occ_zero();
      o[m0] = 2;
      in.add_term(o, w * g * std::sqrt(2.0));  // (a^dag)^2 |0> = sqrt(2) |2>
    }
    if (g_perp > 0.0) {
      Occ o = occ_zero();
      o[m0] = 1;
      o[m1] = 1;
      in.add_term(o, w * g_perp);
    }
  }

  ModeTransfer coupler;
  coupler.modes = ms;
  coupler.matrix = Eigen::MatrixXcd::Identity(4, 4);
  coupler.unitary_flag = true;
  const ModeTransfer bs = beam_splitter(0.5);
  for (int internal : {0, 1}) {
    std::vector<int> mapping = {internal, 2 + internal};
    coupler = compose(coupler, embed(bs, mapping, ms));
  }
  return apply_transfer(in.normalized(), coupler);
}

CnotCircuit build_cnot_circuit() {
  CnotCircuit circ;
  circ.mode_set = cnot_mode_set();
  const ModeSetPtr& ms = circ.mode_set;

  const Eigen::Matrix2cd target_rot =
      waveplate(WaveplateKind::HWP, kTargetBasisAngle).matrix;
  const Eigen::Matrix2cd swap_plate =
      waveplate(WaveplateKind::HWP, kPi / 4.0).matrix;

  ModeTransfer u = jones_on_port(ms, kTargetPort, target_rot);
  u = compose(u, ppbs_keep(ms, kControlPort, kTargetPort, 1.0 / 3.0, 1.0));
  u = compose(u, jones_on_port(ms, kControlPort, swap_plate));
  u = compose(u, jones_on_port(ms, kTargetPort, swap_plate));
  u = compose(u, ppbs_keep(ms, kControlPort, kDump1Port, 1.0 / 3.0, 1.0));
  u = compose(u, ppbs_keep(ms, kTargetPort, kDump2Port, 1.0 / 3.0, 1.0));
  u = compose(u, jones_on_port(ms, kControlPort, swap_plate));
  u = compose(u, jones_on_port(ms, kTargetPort, swap_plate));
  u = compose(u, jones_on_port(ms, kTargetPort, target_rot));

  circ.transfer = std::move(u);
  circ.success_pattern = {{kControlPort, 1}, {kTargetPort, 1},
                          {kDump1Port, 0},  {kDump2Port, 0}};
  return circ;
}

PureState cnot_input_state(const TwoQubitState& input, double gamma_ind,
                           const ModeSetPtr& ms) {
  const double g = clamp01(gamma_ind);
  const double g_perp = std::sqrt(std::max(0.0, 1.0 - g * g));
  PureState state(ms, 2);
  const Pol pols[2] = {Pol::V, Pol::H};
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) {
      const cxd amp = input.amps(2 * c + t);
      if (std::abs(amp) < 1e-15) continue;
      const int cm = ms->index_of(kControlPort, pols[c], 0);
      const int t0 = ms->index_of(kTargetPort, pols[t], 0);
      const int t1 = ms->index_of(kTargetPort, pols[t], 1);
      if (g > 0.0) {
        Occ o = occ_zero();
        ++o[cm];
        ++o[t0];
        state.add_term(o, amp * g);
      }
      if (g_perp > 0.0) {
        Occ o = occ_zero();
        ++o[cm];
        ++o[t1];
        state.add_term(o, amp * g_perp);
      }
    }
  return state;
}

std::pair<DensityMatrix, double> run_cnot(const TwoQubitState& input,
                                          const QsSpec& spec) {
  if (!input.is_normalized())
    throw std::invalid_argument("run_cnot: input state not normalized");
  static const CnotCircuit circ = build_cnot_circuit();
  PureState in = cnot_input_state(input, spec.gamma_ind, circ.mode_set);
  PureState out = apply_transfer(in, circ.transfer);
  auto [kept, prob] = post_select(out, circ.success_pattern);
  if (prob <= 0.0)
    throw std::domain_error("run_cnot: post-selection removed everything");
  return {reduce_to_polarization(kept, kControlPort, kTargetPort), prob};
}

Eigen::Matrix4d truth_table(const QsSpec& spec) {
  Eigen::Matrix4d table;
  for (int in = 0; in < 4; ++in) {
    TwoQubitState s;
    s.amps(in) = 1.0;
    auto [rho, prob] = run_cnot(s, spec);
    for (int out = 0; out < 4; ++out)
      table(in, out) = rho.matrix(out, out).real();
  }
  return table;
}

Eigen::Vector4cd bell_ket(BellKind which) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  switch (which) {
    case BellKind::PhiPlus:
      v(0) = s;
      v(3) = s;
      break;
    case BellKind::PhiMinus:
      v(0) = s;
      v(3) = -s;
      break;
    case BellKind::PsiPlus:
      v(1) = s;
      v(2) = s;
      break;
    case BellKind::PsiMinus:
      v(1) = s;
      v(2) = -s;
      break;
  }
  return v;
}

DensityMatrix bell_prep(BellKind which, const QsSpec& spec) {
  const double s = 1.0 / std::sqrt(2.0);
  const Eigen::Vector2cd d(s, s);    // (V, H) components of |D>
  const Eigen::Vector2cd a(-s, s);   // |A> = |H> - |V>
  const Eigen::Vector2cd v(1.0, 0.0);
  const Eigen::Vector2cd h(0.0, 1.0);
  TwoQubitState input;
  switch (which) {
    case BellKind::PhiPlus:
      input = TwoQubitState::product(d, v);
      break;
    case BellKind::PhiMinus:
      input = TwoQubitState::product(a, v);
      break;
    case BellKind::PsiPlus:
      input = TwoQubitState::product(d, h);
      break;
    case BellKind::PsiMinus:
      input = TwoQubitState::product(a, h);
      break;
  }
  return run_cnot(input, spec).first;
}

Eigen::Matrix4cd post_selected_operator(const CnotCircuit& circuit) {
  Eigen::Matrix4cd op = Eigen::Matrix4cd::Zero();
  const ModeSetPtr& ms = circuit.mode_set;
  const Pol pols[2] = {Pol::V, Pol::H};
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) {
      TwoQubitState s;
      s.amps(2 * c + t) = 1.0;
      PureState in = cnot_input_state(s, 1.0, ms);
      PureState out = apply_transfer(in, circuit.transfer);
      for (int co = 0; co < 2; ++co)
        for (int to = 0; to < 2; ++to) {
          Occ o = occ_zero();
          ++o[ms->index_of(kControlPort, pols[co], 0)];
          ++o[ms->index_of(kTargetPort, pols[to], 0)];
          op(2 * co + to, 2 * c + t) = out.amplitude(o);
        }
    }
  return op;
}

Eigen::Matrix4cd cnot_matrix() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1.0;  // VV -> VV
  m(1, 1) = 1.0;  // VH -> VH
  m(3, 2) = 1.0;  // HV -> HH
  m(2, 3) = 1.0;  // HH -> HV
  return m;
}

}  // namespace tcn
