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

#include <functional>

#include <Eigen/Dense>

namespace tcn {

struct MinimizeOptions {
  int max_iterations = 2000;
  int history = 8;                // L-BFGS memory
  double rel_tolerance = 1e-9;    // relative objective change
  double grad_tolerance = 1e-10;  // gradient infinity norm
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Deterministic limited-memory BFGS with Armijo backtracking. `f` returns
/// the objective and fills the gradient.
MinimizeResult minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const MinimizeOptions& opts = {});

}  // namespace tcn
