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

#include "tcn/analyzer.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace tcn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Named arm states and the waveplate angles realizing them.
struct ArmSpec {
  const char* name;
  double qwp;
  double hwp;
};

constexpr ArmSpec kArms[6] = {
    {"H", 0.0, 0.0},        {"V", 0.0, kPi / 4},   {"D", 0.0, kPi / 8},
    {"A", 0.0, -kPi / 8},   {"R", -kPi / 4, 0.0},  {"L", kPi / 4, 0.0},
};

const ArmSpec& arm(const char* name) {
  for (const ArmSpec& a : kArms)
    if (std::string(name) == a.name) return a;
  throw std::invalid_argument("unknown analyzer arm");
}

AnalyzerSetting make_setting(const char* a1, const char* a2) {
  const ArmSpec& s1 = arm(a1);
  const ArmSpec& s2 = arm(a2);
  return {std::string(a1) + a2, s1.qwp, s1.hwp, s2.qwp, s2.hwp};
}

}  // namespace

Eigen::Matrix2cd analyzer_arm_jones(double qwp_rad, double hwp_rad) {
  // Light passes the half-wave plate, then the quarter-wave plate, then the
  // splitter. waveplate() returns (H, V)-ordered blocks; convert to (V, H).
  const Eigen::Matrix2cd q = waveplate(WaveplateKind::QWP, qwp_rad).matrix;
  const Eigen::Matrix2cd h = waveplate(WaveplateKind::HWP, hwp_rad).matrix;
  Eigen::Matrix2cd swap;
  swap << 0, 1, 1, 0;
  return swap * (q * h) * swap;
}

Eigen::Vector2cd analyzer_arm_ket(double qwp_rad, double hwp_rad) {
  const Eigen::Matrix2cd j = analyzer_arm_jones(qwp_rad, hwp_rad);
  // PBS transmits H; back-propagate through the plates.
  Eigen::Vector2cd h_ket;
  h_ket << 0.0, 1.0;
  return j.adjoint() * h_ket;
}

Eigen::Matrix4cd analyzer_projector(const AnalyzerSetting& s) {
  const Eigen::Vector2cd k1 = analyzer_arm_ket(s.qwp1, s.hwp1);
  const Eigen::Vector2cd k2 = analyzer_arm_ket(s.qwp2, s.hwp2);
  Eigen::Vector4cd k;
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) k(2 * c + t) = k1(c) * k2(t);
  return k * k.adjoint();
}

std::vector<AnalyzerSetting> canonical_settings_16() {
  static const char* kPairs[16][2] = {
      {"H", "H"}, {"H", "V"}, {"V", "V"}, {"V", "H"}, {"R", "H"}, {"R", "V"},
      {"D", "V"}, {"D", "H"}, {"D", "R"}, {"D", "D"}, {"R", "D"}, {"H", "D"},
      {"V", "D"}, {"V", "L"}, {"H", "L"}, {"R", "L"}};
  std::vector<AnalyzerSetting> out;
  out.reserve(16);
  for (auto& p : kPairs) out.push_back(make_setting(p[0], p[1]));
  return out;
}

std::vector<AnalyzerSetting> full_settings_36() {
  std::vector<AnalyzerSetting> out;
  out.reserve(36);
  for (const ArmSpec& a : kArms)
    for (const ArmSpec& b : kArms) out.push_back(make_setting(a.name, b.name));
  return out;
}

std::vector<AnalyzerSetting> logical_settings_4() {
  return {make_setting("V", "V"), make_setting("V", "H"),
          make_setting("H", "V"), make_setting("H", "H")};
}

}  // namespace tcn
