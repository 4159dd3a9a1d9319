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

#ifndef DISENT_STATE_HPP
#define DISENT_STATE_HPP

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "disent/rng.hpp"

namespace disent {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Entropies below this eigenvalue floor are treated as exact zeros.
inline constexpr double kEigenvalueFloor = 1e-12;

/// State vector of a chain of spin-1/2 sites. Site j corresponds to bit j of
/// the basis index, so |0...0> is index 0 and flipping site j toggles bit j.
/// |0> is the sigma_z = +1 state.
struct PureState {
  Eigen::VectorXcd amplitudes;
  int n_sites = 0;

  PureState() = default;
  PureState(Eigen::VectorXcd amps, int n) : amplitudes(std::move(amps)), n_sites(n) {
    if (n < 1 || n > 30) throw std::invalid_argument("PureState: site count out of range");
    if (amplitudes.size() != (Eigen::Index{1} << n))
      throw std::invalid_argument("PureState: amplitude count does not match site count");
  }

  Eigen::Index dim() const { return amplitudes.size(); }

  double norm() const { return amplitudes.norm(); }

  void renormalize() {
    double n = norm();
    if (n <= 0.0 || !std::isfinite(n)) throw std::runtime_error("PureState: cannot normalize zero or non-finite vector");
    amplitudes /= n;
  }
};

inline PureState basis_state(int n_sites, std::uint64_t index) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("basis_state: site count out of range");
  Eigen::Index dim = Eigen::Index{1} << n_sites;
  if (index >= static_cast<std::uint64_t>(dim)) throw std::invalid_argument("basis_state: index out of range");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dim);
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return PureState(std::move(amps), n_sites);
}

inline PureState zero_state(int n_sites) { return basis_state(n_sites, 0); }

/// (|+>^n + |->^n)/sqrt(2), written in the z basis. Even-weight basis states
/// carry amplitude 2^{(1-n)/2}, odd-weight ones vanish.
inline PureState ghz_x(int n_sites) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("ghz_x: site count out of range");
  Eigen::Index dim = Eigen::Index{1} << n_sites;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dim);
  double a = std::pow(2.0, 0.5 * (1 - n_sites));
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (std::popcount(static_cast<std::uint64_t>(k)) % 2 == 0) amps[k] = a;
  }
  return PureState(std::move(amps), n_sites);
}

/// Haar-like random state: iid complex Gaussian amplitudes, normalized.
inline PureState random_state(int n_sites, Rng& rng) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("random_state: site count out of range");
  Eigen::Index dim = Eigen::Index{1} << n_sites;
  Eigen::VectorXcd amps(dim);
  for (Eigen::Index k = 0; k < dim; ++k) amps[k] = Complex(rng.normal(), rng.normal());
  PureState s(std::move(amps), n_sites);
  s.renormalize();
  return s;
}

enum class GateKind { RX, RY, RZ, H, CNOT };

inline bool gate_is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

inline const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::CNOT: return "CNOT";
  }
  throw std::invalid_argument("gate_name: unknown gate kind");
}

inline GateKind gate_from_name(std::string_view name) {
  if (name == "RX") return GateKind::RX;
  if (name == "RY") return GateKind::RY;
  if (name == "RZ") return GateKind::RZ;
  if (name == "H") return GateKind::H;
  if (name == "CNOT") return GateKind::CNOT;
  throw std::invalid_argument("gate_from_name: unknown gate '" + std::string(name) + "'");
}

/// 2x2 matrix of a single-qubit gate. Rotations follow exp(-i theta/2 sigma).
inline Eigen::Matrix2cd single_qubit_matrix(GateKind kind, double theta = 0.0) {
  Eigen::Matrix2cd u;
  const Complex i(0.0, 1.0);
  switch (kind) {
    case GateKind::RX: {
      double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
      u << c, -i * s, -i * s, c;
      return u;
    }
    case GateKind::RY: {
      double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
      u << c, -s, s, c;
      return u;
    }
    case GateKind::RZ: {
      u << std::exp(-i * (0.5 * theta)), 0.0, 0.0, std::exp(i * (0.5 * theta));
      return u;
    }
    case GateKind::H: {
      double r = 1.0 / std::sqrt(2.0);
      u << r, r, r, -r;
      return u;
    }
    case GateKind::CNOT:
      throw std::invalid_argument("single_qubit_matrix: CNOT is a two-qubit gate");
  }
  throw std::invalid_argument("single_qubit_matrix: unknown gate kind");
}

inline void check_site(const PureState& state, int site, const char* who) {
  if (site < 0 || site >= state.n_sites)
    throw std::invalid_argument(std::string(who) + ": site index " + std::to_string(site) + " out of range");
}

inline void apply_single_qubit_inplace(PureState& state, int site, const Eigen::Matrix2cd& u) {
  check_site(state, site, "apply_single_qubit");
  const Eigen::Index stride = Eigen::Index{1} << site;
  const Eigen::Index dim = state.dim();
  Complex* a = state.amplitudes.data();
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index off = 0; off < stride; ++off) {
      Eigen::Index i0 = base + off;
      Eigen::Index i1 = i0 + stride;
      Complex a0 = a[i0], a1 = a[i1];
      a[i0] = u(0, 0) * a0 + u(0, 1) * a1;
      a[i1] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

inline void apply_cnot_inplace(PureState& state, int control, int target) {
  check_site(state, control, "apply_cnot");
  check_site(state, target, "apply_cnot");
  if (control == target) throw std::invalid_argument("apply_cnot: control and target must differ");
  const Eigen::Index cmask = Eigen::Index{1} << control;
  const Eigen::Index tmask = Eigen::Index{1} << target;
  const Eigen::Index dim = state.dim();
  Complex* a = state.amplitudes.data();
  for (Eigen::Index k = 0; k < dim; ++k) {
    if ((k & cmask) && !(k & tmask)) std::swap(a[k], a[k | tmask]);
  }
}

/// Applies a named gate. Rotations take one site and require an angle; H takes
/// one site and no angle; CNOT takes (control, target) and no angle.
inline void apply_gate_inplace(PureState& state, GateKind kind, std::span<const int> sites,
                               std::optional<double> angle = std::nullopt) {
  if (kind == GateKind::CNOT) {
    if (sites.size() != 2) throw std::invalid_argument("apply_gate: CNOT takes exactly two sites");
    if (angle.has_value()) throw std::invalid_argument("apply_gate: CNOT takes no angle");
    apply_cnot_inplace(state, sites[0], sites[1]);
    return;
  }
  if (sites.size() != 1) throw std::invalid_argument("apply_gate: single-qubit gate takes exactly one site");
  if (gate_is_rotation(kind)) {
    if (!angle.has_value()) throw std::invalid_argument("apply_gate: rotation gate requires an angle");
    if (!std::isfinite(*angle)) throw std::invalid_argument("apply_gate: angle must be finite");
    apply_single_qubit_inplace(state, sites[0], single_qubit_matrix(kind, *angle));
    return;
  }
  if (angle.has_value()) throw std::invalid_argument("apply_gate: H takes no angle");
  apply_single_qubit_inplace(state, sites[0], single_qubit_matrix(kind));
}

inline PureState apply_gate(const PureState& state, GateKind kind, std::span<const int> sites,
                            std::optional<double> angle = std::nullopt) {
  PureState out = state;
  apply_gate_inplace(out, kind, sites, angle);
  return out;
}

inline PureState apply_gate(const PureState& state, GateKind kind, int site,
                            std::optional<double> angle = std::nullopt) {
  const int sites[1] = {site};
  return apply_gate(state, kind, std::span<const int>(sites), angle);
}

inline PureState apply_cnot(const PureState& state, int control, int target) {
  PureState out = state;
  apply_cnot_inplace(out, control, target);
  return out;
}

inline void check_subsystem(const PureState& state, std::span<const int> sites, const char* who) {
  if (sites.empty()) throw std::invalid_argument(std::string(who) + ": empty site list");
  for (std::size_t m = 0; m < sites.size(); ++m) {
    check_site(state, sites[m], who);
    for (std::size_t j = 0; j < m; ++j) {
      if (sites[j] == sites[m]) throw std::invalid_argument(std::string(who) + ": duplicate site index");
    }
  }
}

/// Applies a d x d unitary to the subsystem (sites[0], ..., sites[k-1]), where
/// sites[m] carries bit m of the subsystem index. d must equal 2^k.
inline void apply_unitary_inplace(PureState& state, std::span<const int> sites, const Eigen::MatrixXcd& u) {
  check_subsystem(state, sites, "apply_unitary");
  const int k = static_cast<int>(sites.size());
  const Eigen::Index d = Eigen::Index{1} << k;
  if (u.rows() != d || u.cols() != d)
    throw std::invalid_argument("apply_unitary: matrix dimension does not match subsystem size");

  std::uint64_t sub_mask = 0;
  for (int s : sites) sub_mask |= std::uint64_t{1} << s;
  std::vector<int> rest_bits;
  for (int j = 0; j < state.n_sites; ++j) {
    if (!(sub_mask & (std::uint64_t{1} << j))) rest_bits.push_back(j);
  }

  const Eigen::Index rest_dim = Eigen::Index{1} << rest_bits.size();
  Eigen::VectorXcd v(d), w(d);
  Complex* a = state.amplitudes.data();
  for (Eigen::Index r = 0; r < rest_dim; ++r) {
    std::uint64_t base = 0;
    for (std::size_t j = 0; j < rest_bits.size(); ++j) {
      if (r & (Eigen::Index{1} << j)) base |= std::uint64_t{1} << rest_bits[j];
    }
    for (Eigen::Index s = 0; s < d; ++s) {
      std::uint64_t idx = base;
      for (int m = 0; m < k; ++m) {
        if (s & (Eigen::Index{1} << m)) idx |= std::uint64_t{1} << sites[m];
      }
      v[s] = a[idx];
    }
    w.noalias() = u * v;
    for (Eigen::Index s = 0; s < d; ++s) {
      std::uint64_t idx = base;
      for (int m = 0; m < k; ++m) {
        if (s & (Eigen::Index{1} << m)) idx |= std::uint64_t{1} << sites[m];
      }
      a[idx] = w[s];
    }
  }
}

inline PureState apply_unitary(const PureState& state, std::span<const int> sites, const Eigen::MatrixXcd& u) {
  PureState out = state;
  apply_unitary_inplace(out, sites, u);
  return out;
}

/// Reduced density matrix of a subsystem. Row/column index bit m corresponds
/// to sites[m], so the last listed site carries the highest bit.
struct DensityMatrix {
  Eigen::MatrixXcd entries;
  std::vector<int> subsystem_sites;

  Eigen::Index dim() const { return entries.rows(); }
};

inline DensityMatrix reduced_density(const PureState& state, std::span<const int> sites) {
  check_subsystem(state, sites, "reduced_density");
  if (sites.size() > 12) throw std::invalid_argument("reduced_density: subsystem too large");
  const int k = static_cast<int>(sites.size());
  const Eigen::Index sub_dim = Eigen::Index{1} << k;

  std::uint64_t sub_mask = 0;
  for (int s : sites) sub_mask |= std::uint64_t{1} << s;
  std::vector<int> rest_bits;
  for (int j = 0; j < state.n_sites; ++j) {
    if (!(sub_mask & (std::uint64_t{1} << j))) rest_bits.push_back(j);
  }
  const Eigen::Index rest_dim = Eigen::Index{1} << rest_bits.size();

  // psi reshaped as M(rest, sub); then rho = (M^dagger M)^T.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rest_dim, sub_dim);
  const Eigen::Index dim = state.dim();
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    Eigen::Index sub = 0;
    for (int b = 0; b < k; ++b) {
      sub |= ((idx >> sites[b]) & 1) << b;
    }
    Eigen::Index rest = 0;
    for (std::size_t b = 0; b < rest_bits.size(); ++b) {
      rest |= ((idx >> rest_bits[b]) & 1) << b;
    }
    m(rest, sub) = state.amplitudes[idx];
  }

  DensityMatrix rho;
  rho.entries = (m.adjoint() * m).transpose();
  rho.subsystem_sites.assign(sites.begin(), sites.end());
  return rho;
}

/// Shannon entropy in bits of a probability vector; entries below the
/// eigenvalue floor contribute zero.
inline double shannon_bits(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) {
    if (!std::isfinite(x)) throw std::invalid_argument("shannon_bits: non-finite probability");
    if (x < -1e-8 || x > 1.0 + 1e-8) throw std::invalid_argument("shannon_bits: probability out of range");
    double c = std::min(std::max(x, 0.0), 1.0);
    if (c > kEigenvalueFloor) s -= c * std::log2(c);
  }
  return s;
}

inline void check_density(const DensityMatrix& rho, const char* who, double tol = 1e-8) {
  if (rho.entries.rows() != rho.entries.cols())
    throw std::invalid_argument(std::string(who) + ": density matrix must be square");
  if (rho.entries.rows() < 1) throw std::invalid_argument(std::string(who) + ": empty density matrix");
  double herm = (rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= tol)) throw std::invalid_argument(std::string(who) + ": density matrix is not Hermitian");
  Complex tr = rho.entries.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > tol)
    throw std::invalid_argument(std::string(who) + ": density matrix trace differs from one");
}

/// Von Neumann entropy in bits. Eigenvalues are clamped to [0, 1] and values
/// below 1e-12 are dropped before the log.
inline double entropy(const DensityMatrix& rho) {
  check_density(rho, "entropy");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("entropy: eigenvalue computation failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double p = es.eigenvalues()[i];
    if (p < -1e-8) throw std::invalid_argument("entropy: density matrix has a significantly negative eigenvalue");
    double c = std::min(std::max(p, 0.0), 1.0);
    if (c > kEigenvalueFloor) s -= c * std::log2(c);
  }
  return s < 0.0 ? 0.0 : s;
}

inline double entropy_of_site(const PureState& state, int site) {
  const int sites[1] = {site};
  return entropy(reduced_density(state, std::span<const int>(sites)));
}

}  // namespace disent

#endif
