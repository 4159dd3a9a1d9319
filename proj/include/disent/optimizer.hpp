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

#ifndef DISENT_OPTIMIZER_HPP
#define DISENT_OPTIMIZER_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "disent/bfgs.hpp"
#include "disent/circuit.hpp"
#include "disent/rng.hpp"
#include "disent/state.hpp"

namespace disent {

/// How rotation angles are initialized before the angle optimization. AllPi
/// starts every angle at pi; UniformAroundMean draws each angle uniformly
/// from [mean - half_width, mean + half_width], once per restart.
enum class InitScheme { AllPi, UniformAroundMean };

struct OptimizeConfig {
  InitScheme scheme = InitScheme::AllPi;
  double mean = kPi;
  double half_width = kPi / 4.0;
  int restarts = 1;
  BfgsOptions bfgs;
  std::uint64_t seed = 0;
};

inline OptimizeConfig uniform_init_config(double mean, std::uint64_t seed = 0) {
  OptimizeConfig cfg;
  cfg.scheme = InitScheme::UniformAroundMean;
  cfg.mean = mean;
  cfg.restarts = 5;
  cfg.seed = seed;
  return cfg;
}

struct OptimizeResult {
  Eigen::VectorXd params;
  double entropy = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  bool converged = false;
};

/// Target-site entropy after running the circuit on the given state.
inline double circuit_entropy(const PureState& ground, const CircuitArchitecture& arch,
                              std::span<const double> params) {
  PureState out = run_circuit(ground, arch, params);
  return entropy_of_site(out, arch.window.target);
}

namespace detail {

inline OptimizeResult finish_optimize(BfgsResult&& bfgs, int restarts_used) {
  OptimizeResult out;
  out.params = std::move(bfgs.x);
  out.entropy = std::min(1.0, std::max(0.0, bfgs.value));
  out.iterations = bfgs.iterations;
  out.evaluations = bfgs.evaluations;
  out.converged = bfgs.converged;
  out.restarts_used = restarts_used;
  return out;
}

}  // namespace detail

/// Minimizes the target-site entropy over the circuit's rotation angles from
/// an explicit start vector (single descent, no restarts).
inline OptimizeResult minimize_entropy_from(const PureState& ground, const CircuitArchitecture& arch,
                                            const Eigen::VectorXd& theta0, const OptimizeConfig& cfg = {}) {
  if (theta0.size() != parameter_count(arch))
    throw std::invalid_argument("minimize_entropy_from: start vector has wrong length");
  Objective objective = [&](const Eigen::VectorXd& theta) {
    return circuit_entropy(ground, arch, std::span<const double>(theta.data(), theta.size()));
  };
  return detail::finish_optimize(minimize_bfgs(objective, theta0, cfg.bfgs), 1);
}

/// Minimizes the target-site entropy over the circuit's rotation angles,
/// restarting from fresh initial angles as configured and keeping the best
/// restart. Architectures without rotation gates are evaluated directly. A
/// restart whose objective turns non-finite is dropped; the call fails only
/// if every restart does.
inline OptimizeResult minimize_entropy(const PureState& ground, const CircuitArchitecture& arch,
                                       const OptimizeConfig& cfg = {}) {
  const int n = parameter_count(arch);
  if (cfg.restarts < 1) throw std::invalid_argument("minimize_entropy: restarts must be positive");

  Objective objective = [&](const Eigen::VectorXd& theta) {
    return circuit_entropy(ground, arch, std::span<const double>(theta.data(), theta.size()));
  };

  if (n == 0) {
    Eigen::VectorXd empty(0);
    OptimizeResult out;
    out.params = empty;
    out.entropy = std::min(1.0, std::max(0.0, objective(empty)));
    out.evaluations = 1;
    out.restarts_used = 1;
    out.converged = true;
    return out;
  }

  const int restarts = cfg.scheme == InitScheme::AllPi ? 1 : cfg.restarts;
  bool have_best = false;
  BfgsResult best;
  int used = 0, total_evals = 0;
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta0(n);
    if (cfg.scheme == InitScheme::AllPi) {
      theta0.setConstant(kPi);
    } else {
      Rng rng = Rng::stream(cfg.seed, "optimizer", static_cast<std::uint64_t>(r));
      for (int i = 0; i < n; ++i) theta0[i] = rng.uniform(cfg.mean - cfg.half_width, cfg.mean + cfg.half_width);
    }
    try {
      BfgsResult res = minimize_bfgs(objective, std::move(theta0), cfg.bfgs);
      ++used;
      total_evals += res.evaluations;
      if (!have_best || res.value < best.value) {
        best = std::move(res);
        have_best = true;
      }
    } catch (const std::runtime_error&) {
      // Non-finite objective at this start point; try the next restart.
    }
  }
  if (!have_best) throw std::runtime_error("minimize_entropy: every restart failed");
  OptimizeResult out = detail::finish_optimize(std::move(best), used);
  out.evaluations = total_evals;
  return out;
}

}  // namespace disent

#endif
