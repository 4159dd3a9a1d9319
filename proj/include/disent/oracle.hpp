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

#ifndef DISENT_ORACLE_HPP
#define DISENT_ORACLE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "disent/bfgs.hpp"
#include "disent/rng.hpp"
#include "disent/state.hpp"

namespace disent {

/// Spectrum of a bipartite (P x R) density matrix together with the block
/// sums q_m = sum of the m-th group of d_R consecutive sorted eigenvalues.
/// The Shannon entropy of q is the lowest P-side entropy reachable by acting
/// unitarily on the full PR system.
struct GroupedSpectrum {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  int d_p = 0;
  int d_r = 0;
};

inline GroupedSpectrum group_spectrum(Eigen::VectorXd eigenvalues, int d_p, int d_r) {
  if (d_p < 1 || d_r < 1) throw std::invalid_argument("group_spectrum: subsystem dimensions must be positive");
  if (eigenvalues.size() != static_cast<Eigen::Index>(d_p) * d_r)
    throw std::invalid_argument("group_spectrum: eigenvalue count does not match d_p * d_r");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    double x = eigenvalues[i];
    if (!std::isfinite(x)) throw std::invalid_argument("group_spectrum: non-finite eigenvalue");
    if (x < -1e-8 || x > 1.0 + 1e-8) throw std::invalid_argument("group_spectrum: eigenvalue out of [0, 1]");
    eigenvalues[i] = std::min(1.0, std::max(0.0, x));
    sum += eigenvalues[i];
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("group_spectrum: eigenvalues do not sum to one");
  std::sort(eigenvalues.data(), eigenvalues.data() + eigenvalues.size(), std::greater<double>());

  GroupedSpectrum gs;
  gs.p = std::move(eigenvalues);
  gs.d_p = d_p;
  gs.d_r = d_r;
  gs.q.resize(d_p);
  for (int m = 0; m < d_p; ++m) {
    double qm = 0.0;
    for (int j = 0; j < d_r; ++j) qm += gs.p[static_cast<Eigen::Index>(m) * d_r + j];
    gs.q[m] = qm;
  }
  return gs;
}

/// Exact minimum of the P-side entropy over all unitaries on the PR window,
/// computed from the window spectrum alone. The density matrix indexes P on
/// the high bits: index = m * d_r + alpha.
inline std::pair<double, GroupedSpectrum> min_window_entropy(const DensityMatrix& rho, int d_p, int d_r) {
  check_density(rho, "min_window_entropy");
  if (rho.dim() != static_cast<Eigen::Index>(d_p) * d_r)
    throw std::invalid_argument("min_window_entropy: density matrix dimension does not match d_p * d_r");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("min_window_entropy: eigendecomposition failed");
  GroupedSpectrum gs = group_spectrum(es.eigenvalues(), d_p, d_r);
  std::vector<double> q(gs.q.data(), gs.q.data() + gs.q.size());
  return {shannon_bits(q), std::move(gs)};
}

/// The unitary attaining the minimum: it sends the eigenvector with the
/// (m * d_r + alpha)-th largest eigenvalue to the basis state |m>_P |alpha>_R.
/// Eigenvector phases are fixed by making the first non-negligible component
/// real and positive, so the result is deterministic up to degeneracies.
inline Eigen::MatrixXcd optimal_disentangler(const DensityMatrix& rho, int d_p, int d_r) {
  check_density(rho, "optimal_disentangler");
  if (rho.dim() != static_cast<Eigen::Index>(d_p) * d_r)
    throw std::invalid_argument("optimal_disentangler: density matrix dimension does not match d_p * d_r");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries);
  if (es.info() != Eigen::Success) throw std::runtime_error("optimal_disentangler: eigendecomposition failed");

  const Eigen::Index d = rho.dim();
  Eigen::MatrixXcd psi(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::VectorXcd col = es.eigenvectors().col(d - 1 - k);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(col[i]) > 1e-12) {
        col *= std::conj(col[i]) / std::abs(col[i]);
        break;
      }
    }
    psi.col(k) = col;
  }
  return psi.adjoint();
}

/// Haar-distributed random unitary (QR of a complex Ginibre matrix with the
/// phase correction of the R diagonal).
inline Eigen::MatrixXcd random_unitary(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("random_unitary: dimension must be positive");
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    Complex rjj = r(j, j);
    double m = std::abs(rjj);
    q.col(j) *= m > 0.0 ? rjj / m : Complex(1.0, 0.0);
  }
  return q;
}

namespace detail {

// Hermitian matrix from d^2 real parameters: d diagonal entries followed by
// (re, im) pairs for the strict upper triangle.
inline Eigen::MatrixXcd hermitian_from_params(const Eigen::VectorXd& theta, int d) {
  if (theta.size() != static_cast<Eigen::Index>(d) * d)
    throw std::invalid_argument("hermitian_from_params: expected d^2 parameters");
  Eigen::MatrixXcd h(d, d);
  Eigen::Index p = 0;
  for (int i = 0; i < d; ++i) h(i, i) = theta[p++];
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Complex z(theta[p], theta[p + 1]);
      p += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

inline Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("unitary_exp: eigendecomposition failed");
  const Eigen::Index d = h.rows();
  Eigen::VectorXcd phases(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double lam = es.eigenvalues()[i];
    phases[i] = Complex(std::cos(lam), -std::sin(lam));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline double two_level_entropy(double a, double c, Complex b) {
  // Eigenvalues of [[a, b], [conj(b), c]] via trace and determinant.
  double tr = a + c;
  double det = a * c - std::norm(b);
  double disc = std::max(0.0, 0.25 * tr * tr - det);
  double root = std::sqrt(disc);
  double lam0 = 0.5 * tr + root, lam1 = 0.5 * tr - root;
  double probs[2] = {lam0, lam1};
  return shannon_bits(probs);
}

}  // namespace detail

/// Direct numerical minimization of the target-site entropy over *all*
/// unitaries on the listed sites (the target must be listed last). The
/// unitary is parameterized as exp(-i H(theta)) with a dense Hermitian
/// generator, so nothing about the closed-form solution is assumed. Meant as
/// an independent cross-check; cost grows quickly with window size.
inline double brute_force_min_entropy(const PureState& state, std::span<const int> rp_sites, int trials,
                                      std::uint64_t seed) {
  if (rp_sites.size() < 2 || rp_sites.size() > 3)
    throw std::invalid_argument("brute_force_min_entropy: window must span 2 or 3 sites");
  if (trials < 1) throw std::invalid_argument("brute_force_min_entropy: need at least one trial");

  const int d = 1 << rp_sites.size();
  const int d_r = d / 2;
  DensityMatrix rho = reduced_density(state, rp_sites);

  Eigen::MatrixXcd sigma(d, d), u;
  Objective objective = [&](const Eigen::VectorXd& theta) {
    u = detail::unitary_exp(detail::hermitian_from_params(theta, d));
    sigma.noalias() = u * rho.entries * u.adjoint();
    double a = 0.0, c = 0.0;
    Complex b(0.0, 0.0);
    for (int alpha = 0; alpha < d_r; ++alpha) {
      a += sigma(alpha, alpha).real();
      c += sigma(d_r + alpha, d_r + alpha).real();
      b += sigma(alpha, d_r + alpha);
    }
    return detail::two_level_entropy(a, c, b);
  };

  BfgsOptions opts;
  opts.grad_tol = 1e-9;
  opts.max_iters = 120;
  double best = objective(Eigen::VectorXd::Zero(d * d));
  Rng rng = Rng::stream(seed, "brute-force");
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd theta0(d * d);
    for (int i = 0; i < d * d; ++i) theta0[i] = rng.normal();
    BfgsResult res = minimize_bfgs(objective, std::move(theta0), opts);
    best = std::min(best, res.value);
  }
  return std::max(0.0, best);
}

}  // namespace disent

#endif
