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

#include "tcn/optim.hpp"

#include <cmath>
#include <deque>

namespace tcn {

MinimizeResult minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const MinimizeOptions& opts) {
  const int n = static_cast<int>(x0.size());
  MinimizeResult res;
  res.x = x0;
  Eigen::VectorXd grad(n);
  res.fx = f(res.x, grad);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tolerance) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double dg = dir.dot(grad);
    if (dg >= 0.0) {  // not a descent direction; restart from steepest
      dir = -grad;
      dg = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Armijo backtracking.
    double step = 1.0;
    const double c1 = 1e-4;
    Eigen::VectorXd x_new(n), grad_new(n);
    double f_new = res.fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * dir;
      f_new = f(x_new, grad_new);
      if (std::isfinite(f_new) && f_new <= res.fx + c1 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double drop = std::abs(res.fx - f_new);
    res.x = x_new;
    res.fx = f_new;
    grad = grad_new;
    if (drop <= opts.rel_tolerance * std::max(1.0, std::abs(res.fx))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace tcn
