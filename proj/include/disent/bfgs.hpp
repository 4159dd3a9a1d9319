// Copyright 2026 The disent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISENT_BFGS_HPP
#define DISENT_BFGS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace disent {

struct BfgsOptions {
  double grad_tol = 1e-8;
  int max_iters = 200;
  /// Step for the central-difference gradient.
  double fd_step = 1e-5;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_linesearch = 60;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

inline Eigen::VectorXd central_difference_gradient(const Objective& f, const Eigen::VectorXd& x, double h,
                                                   int* evaluations = nullptr) {
  if (h <= 0.0) throw std::invalid_argument("central_difference_gradient: step must be positive");
  Eigen::VectorXd g(x.size()), xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double xi = x[i];
    xp[i] = xi + h;
    double fp = f(xp);
    xp[i] = xi - h;
    double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
    if (evaluations) *evaluations += 2;
  }
  return g;
}

/// Quasi-Newton minimizer with an Armijo backtracking line search and
/// finite-difference gradients. The inverse Hessian estimate is reset to the
/// identity whenever the curvature condition fails or the search direction
/// stops being a descent direction. Returns the best point ever evaluated,
/// so the result never exceeds f(x0).
inline BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts = {}) {
  if (opts.max_iters < 0) throw std::invalid_argument("minimize_bfgs: max_iters must be non-negative");
  if (opts.grad_tol <= 0.0) throw std::invalid_argument("minimize_bfgs: grad_tol must be positive");

  BfgsResult res;
  const Eigen::Index n = x0.size();
  double fx = f(x0);
  res.evaluations = 1;
  if (!std::isfinite(fx)) throw std::runtime_error("minimize_bfgs: objective is not finite at the start point");
  res.x = x0;
  res.value = fx;
  if (n == 0) {
    res.converged = true;
    return res;
  }

  Eigen::VectorXd x = std::move(x0);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = central_difference_gradient(f, x, opts.fd_step, &res.evaluations);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iterations = iter;
    if (g.norm() <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd d = -(hinv * g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      d = -g;
      slope = -g.squaredNorm();
    }

    double alpha = 1.0;
    double f_new = fx;
    bool accepted = false;
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < opts.max_linesearch; ++ls) {
      x_new = x + alpha * d;
      f_new = f(x_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= fx + opts.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
    }
    if (!accepted) break;

    Eigen::VectorXd g_new = central_difference_gradient(f, x_new, opts.fd_step, &res.evaluations);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    double ys = y.dot(s);
    if (ys > 1e-12 * y.norm() * s.norm()) {
      double rho = 1.0 / ys;
      Eigen::MatrixXd vt = Eigen::MatrixXd::Identity(n, n) - rho * y * s.transpose();
      hinv = vt.transpose() * hinv * vt + rho * s * s.transpose();
    } else {
      hinv.setIdentity();
    }

    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
    if (fx < res.value) {
      res.value = fx;
      res.x = x;
    }
    res.iterations = iter + 1;
  }

  if (g.norm() <= opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace disent

#endif
