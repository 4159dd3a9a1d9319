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

#ifndef DISENT_MODELS_HPP
#define DISENT_MODELS_HPP

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "disent/rng.hpp"
#include "disent/state.hpp"

namespace disent {

enum class ModelKind { TFIM, XXZ };

inline const char* model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::TFIM: return "tfim";
    case ModelKind::XXZ: return "xxz";
  }
  throw std::invalid_argument("model_name: unknown model kind");
}

inline ModelKind model_from_name(std::string_view name) {
  if (name == "tfim") return ModelKind::TFIM;
  if (name == "xxz") return ModelKind::XXZ;
  throw std::invalid_argument("model_from_name: unknown model '" + std::string(name) + "'");
}

/// Periodic chain with a single coupling knob: the bond strength lambda for
/// the transverse-field Ising chain, the anisotropy Delta for the XXZ chain.
struct ModelSpec {
  ModelKind kind = ModelKind::TFIM;
  int n_sites = 0;
  double coupling = 0.0;
};

inline void validate_model(const ModelSpec& spec, int min_sites = 3) {
  if (spec.n_sites < min_sites || spec.n_sites > 18)
    throw std::invalid_argument("ModelSpec: n_sites must be in [" + std::to_string(min_sites) + ", 18]");
  if (!std::isfinite(spec.coupling)) throw std::invalid_argument("ModelSpec: coupling must be finite");
}

namespace detail {

// H = -sum_j (lambda x_j x_{j+1} + z_j), periodic. The wraparound bond j=n-1
// coincides with the j=0 bond when n=2, doubling it.
inline void tfim_apply(int n, double lambda, const double* in, double* out) {
  const std::uint64_t dim = std::uint64_t{1} << n;
  for (std::uint64_t k = 0; k < dim; ++k) {
    out[k] = static_cast<double>(2 * std::popcount(k) - n) * in[k];
  }
  for (int j = 0; j < n; ++j) {
    const std::uint64_t mask = (std::uint64_t{1} << j) | (std::uint64_t{1} << ((j + 1) % n));
    for (std::uint64_t k = 0; k < dim; ++k) {
      out[k] -= lambda * in[k ^ mask];
    }
  }
}

// H = +sum_j (x_j x_{j+1} + y_j y_{j+1} + delta z_j z_{j+1}), periodic.
inline void xxz_apply(int n, double delta, const double* in, double* out) {
  const std::uint64_t dim = std::uint64_t{1} << n;
  for (std::uint64_t k = 0; k < dim; ++k) {
    int aligned = 0;
    for (int j = 0; j < n; ++j) {
      std::uint64_t bj = (k >> j) & 1, bj1 = (k >> ((j + 1) % n)) & 1;
      aligned += (bj == bj1) ? 1 : -1;
    }
    out[k] = delta * static_cast<double>(aligned) * in[k];
  }
  for (int j = 0; j < n; ++j) {
    const int j1 = (j + 1) % n;
    const std::uint64_t mask = (std::uint64_t{1} << j) | (std::uint64_t{1} << j1);
    for (std::uint64_t k = 0; k < dim; ++k) {
      std::uint64_t bj = (k >> j) & 1, bj1 = (k >> j1) & 1;
      if (bj != bj1) out[k] += 2.0 * in[k ^ mask];
    }
  }
}

/// Dense matrix form. Permits n = 2, where the periodic wraparound doubles
/// the single bond; the public builder below requires n >= 3.
inline Eigen::MatrixXd dense_hamiltonian(ModelKind kind, int n, double coupling) {
  if (n < 2 || n > 12) throw std::invalid_argument("dense_hamiltonian: n must be in [2, 12]");
  if (!std::isfinite(coupling)) throw std::invalid_argument("dense_hamiltonian: coupling must be finite");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    e[c] = 1.0;
    if (kind == ModelKind::TFIM) {
      tfim_apply(n, coupling, e.data(), col.data());
    } else {
      xxz_apply(n, coupling, e.data(), col.data());
    }
    h.col(c) = col;
    e[c] = 0.0;
  }
  return h;
}

}  // namespace detail

/// Matrix-free action of the chain Hamiltonian. Both models are real
/// symmetric in the computational basis, so the core kernel works on real
/// vectors; the complex overload applies it to both parts.
class HamiltonianAction {
 public:
  explicit HamiltonianAction(const ModelSpec& spec) : spec_(spec) { validate_model(spec); }

  const ModelSpec& model() const { return spec_; }
  Eigen::Index dim() const { return Eigen::Index{1} << spec_.n_sites; }

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    if (in.size() != dim()) throw std::invalid_argument("HamiltonianAction: vector dimension mismatch");
    out.resize(dim());
    if (spec_.kind == ModelKind::TFIM) {
      detail::tfim_apply(spec_.n_sites, spec_.coupling, in.data(), out.data());
    } else {
      detail::xxz_apply(spec_.n_sites, spec_.coupling, in.data(), out.data());
    }
  }

  Eigen::VectorXd operator*(const Eigen::VectorXd& in) const {
    Eigen::VectorXd out;
    apply(in, out);
    return out;
  }

  Eigen::VectorXcd operator*(const Eigen::VectorXcd& in) const {
    if (in.size() != dim()) throw std::invalid_argument("HamiltonianAction: vector dimension mismatch");
    Eigen::VectorXd re = in.real(), im = in.imag(), hre, him;
    apply(re, hre);
    apply(im, him);
    Eigen::VectorXcd out(dim());
    out.real() = hre;
    out.imag() = him;
    return out;
  }

  /// Dense form, limited to dimensions where it is affordable.
  Eigen::MatrixXd dense() const {
    if (spec_.n_sites > 12) throw std::invalid_argument("HamiltonianAction::dense: chain too long for dense form");
    return detail::dense_hamiltonian(spec_.kind, spec_.n_sites, spec_.coupling);
  }

 private:
  ModelSpec spec_;
};

inline HamiltonianAction build_hamiltonian(const ModelSpec& spec) { return HamiltonianAction(spec); }

struct LanczosOptions {
  int max_krylov = 300;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

struct LanczosResult {
  double value0 = 0.0;
  double value1 = 0.0;
  Eigen::VectorXd vector0;
  Eigen::VectorXd vector1;
  int iterations = 0;
};

/// Lanczos with full reorthogonalization for the lowest eigenpair (plus the
/// second Ritz pair, used for gap estimates and degeneracy fallback).
/// MatVec is any callable (const VectorXd&, VectorXd&) applying the operator.
template <class MatVec>
LanczosResult lanczos_lowest(const MatVec& matvec, Eigen::Index dim, const LanczosOptions& opts) {
  if (dim < 2) throw std::invalid_argument("lanczos_lowest: dimension must be at least 2");
  if (opts.max_krylov < 2) throw std::invalid_argument("lanczos_lowest: max_krylov must be at least 2");
  if (opts.tol <= 0.0) throw std::invalid_argument("lanczos_lowest: tolerance must be positive");

  const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.max_krylov, dim));
  Eigen::MatrixXd basis(dim, m_max);
  std::vector<double> alpha, beta;

  Rng rng = Rng::stream(opts.seed, "lanczos");
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  v.normalize();
  basis.col(0) = v;

  Eigen::VectorXd w(dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small;
  int m = 0;
  bool converged = false;
  for (int k = 0; k < m_max; ++k) {
    matvec(basis.col(k), w);
    double a = basis.col(k).dot(w);
    alpha.push_back(a);
    w -= a * basis.col(k);
    if (k > 0) w -= beta[k - 1] * basis.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j <= k; ++j) w -= basis.col(j).dot(w) * basis.col(j);
    }
    double b = w.norm();
    m = k + 1;

    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
    for (int j = 0; j + 1 < m; ++j) sub[j] = beta[j];
    small.computeFromTridiagonal(diag, sub);
    if (small.info() != Eigen::Success) throw std::runtime_error("lanczos_lowest: tridiagonal solve failed");

    double resid_est = b * std::abs(small.eigenvectors()(m - 1, 0));
    if (resid_est <= 0.5 * opts.tol || b < 1e-13 || m == static_cast<int>(dim)) {
      converged = resid_est <= 0.5 * opts.tol || b < 1e-13 || m == static_cast<int>(dim);
      break;
    }
    beta.push_back(b);
    if (k + 1 < m_max) basis.col(k + 1) = w / b;
  }
  if (!converged)
    throw std::runtime_error("lanczos_lowest: no convergence within " + std::to_string(m_max) + " Krylov vectors");

  LanczosResult out;
  out.iterations = m;
  out.value0 = small.eigenvalues()[0];
  out.vector0 = basis.leftCols(m) * small.eigenvectors().col(0);
  out.vector0.normalize();
  if (m > 1) {
    out.value1 = small.eigenvalues()[1];
    out.vector1 = basis.leftCols(m) * small.eigenvectors().col(1);
    out.vector1.normalize();
  } else {
    out.value1 = small.eigenvalues()[0];
    out.vector1 = out.vector0;
  }
  return out;
}

struct GroundStateResult {
  PureState state;
  double energy = 0.0;
  /// Gap to the next computed level. Near-zero marks a degenerate pair.
  double gap = 0.0;
  double residual = 0.0;
  bool degenerate = false;
};

namespace detail {

inline constexpr double kDegenerateGap = 1e-10;

// Parity expectation sum_k (-1)^{popcount(k)} |v_k|^2.
inline double parity_expectation(const Eigen::VectorXd& v) {
  double p = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    double w = v[k] * v[k];
    p += (std::popcount(static_cast<std::uint64_t>(k)) % 2 == 0) ? w : -w;
  }
  return p;
}

// Variance of total magnetization sum_j z_j.
inline double magnetization_variance(const Eigen::VectorXd& v, int n) {
  double mean = 0.0, sq = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    double m = static_cast<double>(n - 2 * std::popcount(static_cast<std::uint64_t>(k)));
    double w = v[k] * v[k];
    mean += m * w;
    sq += m * m * w;
  }
  return sq - mean * mean;
}

// Keeps the even-parity (TFIM) or zero-magnetization (XXZ) component.
inline Eigen::VectorXd symmetry_project(const Eigen::VectorXd& v, const ModelSpec& spec) {
  Eigen::VectorXd w = v;
  if (spec.kind == ModelKind::TFIM) {
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      if (std::popcount(static_cast<std::uint64_t>(k)) % 2 != 0) w[k] = 0.0;
    }
  } else {
    if (spec.n_sites % 2 != 0) return v;
    const int half = spec.n_sites / 2;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      if (std::popcount(static_cast<std::uint64_t>(k)) != half) w[k] = 0.0;
    }
  }
  return w;
}

inline bool symmetry_mixed(const Eigen::VectorXd& v, const ModelSpec& spec) {
  if (spec.kind == ModelKind::TFIM) return std::abs(parity_expectation(v)) < 0.999;
  return magnetization_variance(v, spec.n_sites) > 1e-6;
}

inline void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    double a = std::abs(v[k]);
    if (a > best + 1e-15) {
      best = a;
      imax = k;
    }
  }
  if (v[imax] < 0.0) v = -v;
}

}  // namespace detail

/// Ground state of the chain. Dense eigendecomposition up to dimension 4096,
/// Lanczos beyond. When the lowest level is (numerically) degenerate, the
/// returned representative is the even-parity one for the Ising chain and the
/// zero-magnetization one for the XXZ chain; an arbitrary mixture within the
/// degenerate pair would make reduced entropies seed-dependent.
inline GroundStateResult ground_state(const ModelSpec& spec, double tol = 1e-10, std::uint64_t seed = 0) {
  validate_model(spec);
  if (tol <= 0.0) throw std::invalid_argument("ground_state: tolerance must be positive");

  HamiltonianAction h(spec);
  const Eigen::Index dim = h.dim();

  Eigen::VectorXd g0, g1;
  double e0 = 0.0, e1 = 0.0;
  if (dim <= 4096) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    if (es.info() != Eigen::Success) throw std::runtime_error("ground_state: dense eigendecomposition failed");
    e0 = es.eigenvalues()[0];
    e1 = es.eigenvalues()[1];
    g0 = es.eigenvectors().col(0);
    g1 = es.eigenvectors().col(1);
  } else {
    LanczosOptions opts;
    opts.tol = tol;
    opts.seed = seed;
    LanczosResult lr = lanczos_lowest([&h](const Eigen::VectorXd& in, Eigen::VectorXd& out) { h.apply(in, out); },
                                      dim, opts);
    e0 = lr.value0;
    e1 = lr.value1;
    g0 = std::move(lr.vector0);
    g1 = std::move(lr.vector1);
  }

  GroundStateResult out;
  out.gap = e1 - e0;
  out.degenerate = out.gap < detail::kDegenerateGap;

  Eigen::VectorXd v = g0;
  bool projected = false;
  if (out.degenerate || detail::symmetry_mixed(g0, spec)) {
    Eigen::VectorXd p = detail::symmetry_project(g0, spec);
    if (p.norm() < 1e-6) p = detail::symmetry_project(g1, spec);
    if (p.norm() >= 1e-6) {
      v = p.normalized();
      projected = true;
      out.degenerate = true;
    }
  }
  detail::fix_sign(v);

  Eigen::VectorXd hv;
  h.apply(v, hv);
  out.energy = v.dot(hv);
  out.residual = (hv - out.energy * v).norm();

  double allowance = projected ? std::max(tol, 2.0 * std::abs(out.gap) + 1e-12) : tol;
  if (!(out.residual <= std::max(allowance, 1e-9))) {
    throw std::runtime_error("ground_state: residual " + std::to_string(out.residual) +
                             " exceeds tolerance; eigensolver did not converge");
  }

  Eigen::VectorXcd amps = v.cast<Complex>();
  out.state = PureState(std::move(amps), spec.n_sites);
  return out;
}

}  // namespace disent

#endif
