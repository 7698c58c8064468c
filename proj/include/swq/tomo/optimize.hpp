// Copyright 2026 The swq Authors
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

// Quasi-Newton (BFGS) minimisation with Armijo backtracking. Small problems
// only: the inverse Hessian is kept dense.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "swq/qlin.hpp"

namespace swq {

struct OptimizerOptions {
  int max_iterations = 5000;
  double gradient_tol = 1e-8;     // stop when max |g_i| falls below
  double improvement_tol = 1e-12; // stop after two steps improving less than this
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::string stop_reason;
};

/// `f(x, grad)` returns the objective and writes the gradient into *grad
/// when grad is non-null.
template <class Objective>
OptimizerResult minimize_bfgs(Objective&& f, Eigen::VectorXd x, const OptimizerOptions& opts = {}) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  double fx = f(x, &g);
  if (!std::isfinite(fx)) throw NumericalError("minimize_bfgs: objective is not finite at start");
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  int small_steps = 0;

  OptimizerResult res;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it;
    const double gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm < opts.gradient_tol) {
      res.converged = true;
      res.stop_reason = "gradient";
      break;
    }
    Eigen::VectorXd dir = -hinv * g;
    if (dir.dot(g) >= 0.0) {
      hinv.setIdentity();
      fresh = true;
      dir = -g;
    }
    double step = 1.0;
    Eigen::VectorXd x_new(n), g_new(n);
    double f_new = fx;
    bool accepted = false;
    for (int k = 0; k < 80; ++k) {
      x_new = x + step * dir;
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        hinv.setIdentity();
        fresh = true;
        continue;
      }
      res.converged = true;
      res.stop_reason = "no descent";
      break;
    }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double improvement = fx - f_new;
    x = std::move(x_new);
    g = std::move(g_new);
    fx = f_new;

    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (fresh) {
        hinv *= sy / y.squaredNorm();
        fresh = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      hinv = left * hinv * left.transpose() + rho * s * s.transpose();
    }

    small_steps = improvement < opts.improvement_tol ? small_steps + 1 : 0;
    if (small_steps >= 2) {
      res.iterations = it + 1;
      res.converged = true;
      res.stop_reason = "improvement";
      break;
    }
    res.iterations = it + 1;
  }
  if (res.stop_reason.empty()) res.stop_reason = "max_iterations";
  res.x = std::move(x);
  res.value = fx;
  res.gradient_norm = g.cwiseAbs().maxCoeff();
  return res;
}

/// Central finite-difference gradient, for objectives without an analytic one.
template <class Value>
Eigen::VectorXd numeric_gradient(Value&& value, const Eigen::VectorXd& x, double rel_step = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * std::max(1.0, std::abs(x(k)));
    probe(k) = x(k) + h;
    const double up = value(probe);
    probe(k) = x(k) - h;
    const double down = value(probe);
    probe(k) = x(k);
    g(k) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace swq
