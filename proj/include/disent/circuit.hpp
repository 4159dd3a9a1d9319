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

#ifndef DISENT_CIRCUIT_HPP
#define DISENT_CIRCUIT_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "disent/state.hpp"

namespace disent {

/// Contiguous arc of 2*radius + 1 sites centred on the target, with periodic
/// wraparound. Window positions are indexed 0 .. 2*radius, the target sitting
/// at position radius.
struct WindowSpec {
  int n_sites = 0;
  int target = 0;
  int radius = 1;

  int size() const { return 2 * radius + 1; }

  /// Absolute site of window position w.
  int absolute(int w) const {
    if (w < 0 || w >= size()) throw std::invalid_argument("WindowSpec::absolute: position out of window");
    return (((target - radius + w) % n_sites) + n_sites) % n_sites;
  }

  std::vector<int> sites() const {
    std::vector<int> out(size());
    for (int w = 0; w < size(); ++w) out[w] = absolute(w);
    return out;
  }
};

inline void validate_window(const WindowSpec& w) {
  if (w.radius != 1 && w.radius != 2) throw std::invalid_argument("WindowSpec: radius must be 1 or 2");
  if (w.n_sites < w.size())
    throw std::invalid_argument("WindowSpec: window of " + std::to_string(w.size()) + " sites does not fit chain");
  if (w.target < 0 || w.target >= w.n_sites) throw std::invalid_argument("WindowSpec: target site out of range");
}

/// One available gate placement, in window coordinates. For single-qubit
/// gates only `a` is used; for CNOT `a` is the control and `b` the target.
struct GateTemplate {
  GateKind kind = GateKind::RX;
  int a = 0;
  int b = -1;

  bool parameterized() const { return gate_is_rotation(kind); }
};

/// Fixed, deterministic action ordering: RX, RY, RZ, H per window position
/// from left to right, then the CNOT pairs (w, w+1) and (w+1, w).
inline std::vector<GateTemplate> action_space(const WindowSpec& window) {
  validate_window(window);
  std::vector<GateTemplate> actions;
  const GateKind singles[4] = {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::H};
  for (int w = 0; w < window.size(); ++w) {
    for (GateKind kind : singles) actions.push_back({kind, w, -1});
  }
  for (int w = 0; w + 1 < window.size(); ++w) {
    actions.push_back({GateKind::CNOT, w, w + 1});
    actions.push_back({GateKind::CNOT, w + 1, w});
  }
  return actions;
}

/// Gates per layer: one single-qubit round plus one entangling round over the
/// window, i.e. 2 * window size slots.
inline int layer_budget(const WindowSpec& window) {
  validate_window(window);
  return 2 * window.size();
}

/// Gate sequence of a growing circuit: a window, a slot budget (horizon) and
/// the action ids chosen so far.
struct CircuitArchitecture {
  WindowSpec window;
  int horizon = 0;
  std::vector<int> actions;
};

inline CircuitArchitecture make_architecture(const WindowSpec& window, int layers) {
  validate_window(window);
  if (layers < 1) throw std::invalid_argument("make_architecture: layer count must be positive");
  CircuitArchitecture arch;
  arch.window = window;
  arch.horizon = layers * layer_budget(window);
  return arch;
}

inline void validate_architecture(const CircuitArchitecture& arch) {
  validate_window(arch.window);
  if (arch.horizon < 1) throw std::invalid_argument("CircuitArchitecture: horizon must be positive");
  if (static_cast<int>(arch.actions.size()) > arch.horizon)
    throw std::invalid_argument("CircuitArchitecture: more actions than slots");
  const int n_actions = static_cast<int>(action_space(arch.window).size());
  for (int a : arch.actions) {
    if (a < 0 || a >= n_actions) throw std::invalid_argument("CircuitArchitecture: action id out of range");
  }
}

inline int parameter_count(const CircuitArchitecture& arch) {
  validate_architecture(arch);
  auto space = action_space(arch.window);
  int count = 0;
  for (int a : arch.actions) {
    if (space[a].parameterized()) ++count;
  }
  return count;
}

/// One-hot slot encoding of length horizon * (n_actions + 1). Each filled
/// slot sets the bit of its action id; unused slots set the trailing
/// "empty" symbol at offset n_actions.
inline Eigen::VectorXd encode(const CircuitArchitecture& arch) {
  validate_architecture(arch);
  const int n_actions = static_cast<int>(action_space(arch.window).size());
  const int block = n_actions + 1;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.horizon) * block);
  for (int t = 0; t < arch.horizon; ++t) {
    int symbol = t < static_cast<int>(arch.actions.size()) ? arch.actions[t] : n_actions;
    v[static_cast<Eigen::Index>(t) * block + symbol] = 1.0;
  }
  return v;
}

inline CircuitArchitecture decode(const Eigen::VectorXd& encoding, const WindowSpec& window, int horizon) {
  validate_window(window);
  const int n_actions = static_cast<int>(action_space(window).size());
  const int block = n_actions + 1;
  if (encoding.size() != static_cast<Eigen::Index>(horizon) * block)
    throw std::invalid_argument("decode: encoding length does not match horizon and action count");
  CircuitArchitecture arch;
  arch.window = window;
  arch.horizon = horizon;
  bool terminated = false;
  for (int t = 0; t < horizon; ++t) {
    int hot = -1;
    for (int s = 0; s < block; ++s) {
      double x = encoding[static_cast<Eigen::Index>(t) * block + s];
      if (x == 1.0) {
        if (hot >= 0) throw std::invalid_argument("decode: slot has more than one active symbol");
        hot = s;
      } else if (x != 0.0) {
        throw std::invalid_argument("decode: encoding entries must be 0 or 1");
      }
    }
    if (hot < 0) throw std::invalid_argument("decode: slot has no active symbol");
    if (hot == n_actions) {
      terminated = true;
    } else {
      if (terminated) throw std::invalid_argument("decode: gate slot after an empty slot");
      arch.actions.push_back(hot);
    }
  }
  return arch;
}

/// Runs the circuit on a copy of the state. Parameters are consumed by the
/// rotation gates in action order.
inline PureState run_circuit(const PureState& state, const CircuitArchitecture& arch,
                             std::span<const double> params) {
  validate_architecture(arch);
  if (state.n_sites != arch.window.n_sites)
    throw std::invalid_argument("run_circuit: state size does not match circuit window");
  if (static_cast<int>(params.size()) != parameter_count(arch))
    throw std::invalid_argument("run_circuit: expected " + std::to_string(parameter_count(arch)) +
                                " parameters, got " + std::to_string(params.size()));
  auto space = action_space(arch.window);
  PureState out = state;
  std::size_t p = 0;
  for (int a : arch.actions) {
    const GateTemplate& g = space[a];
    if (g.kind == GateKind::CNOT) {
      apply_cnot_inplace(out, arch.window.absolute(g.a), arch.window.absolute(g.b));
    } else if (g.parameterized()) {
      apply_single_qubit_inplace(out, arch.window.absolute(g.a), single_qubit_matrix(g.kind, params[p++]));
    } else {
      apply_single_qubit_inplace(out, arch.window.absolute(g.a), single_qubit_matrix(g.kind));
    }
  }
  return out;
}

/// Circuit as stored on disk: absolute sites plus the window metadata needed
/// to rebase the gates onto a different chain length.
struct SavedCircuit {
  struct Line {
    GateKind kind = GateKind::RX;
    int a = 0;
    int b = -1;
    double angle = 0.0;
  };

  int n_sites = 0;
  int target = 0;
  int radius = 1;
  std::vector<Line> lines;
};

inline SavedCircuit to_saved(const CircuitArchitecture& arch, std::span<const double> params) {
  validate_architecture(arch);
  if (static_cast<int>(params.size()) != parameter_count(arch))
    throw std::invalid_argument("to_saved: parameter count mismatch");
  auto space = action_space(arch.window);
  SavedCircuit saved;
  saved.n_sites = arch.window.n_sites;
  saved.target = arch.window.target;
  saved.radius = arch.window.radius;
  std::size_t p = 0;
  for (int a : arch.actions) {
    const GateTemplate& g = space[a];
    SavedCircuit::Line line;
    line.kind = g.kind;
    line.a = arch.window.absolute(g.a);
    line.b = g.kind == GateKind::CNOT ? arch.window.absolute(g.b) : -1;
    line.angle = g.parameterized() ? params[p++] : 0.0;
    saved.lines.push_back(line);
  }
  return saved;
}

namespace detail {

inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Offset of `site` from `target` on a ring of n sites, folded into
// (-n/2, n/2].
inline int ring_offset(int site, int target, int n) {
  int d = (((site - target) % n) + n) % n;
  if (2 * d > n) d -= n;
  return d;
}

}  // namespace detail

/// Rebases a stored circuit onto a chain of `n_sites` sites (pass the stored
/// size to keep it unchanged). Gate offsets relative to the target are
/// preserved; the result indexes the standard action space of the window.
inline std::pair<CircuitArchitecture, Eigen::VectorXd> from_saved(const SavedCircuit& saved, int n_sites) {
  WindowSpec window{n_sites, saved.target, saved.radius};
  validate_window(window);

  auto space = action_space(window);
  CircuitArchitecture arch;
  arch.window = window;

  auto position_of = [&](int site, int old_n) {
    int off = detail::ring_offset(site, saved.target, old_n);
    if (off < -saved.radius || off > saved.radius)
      throw std::invalid_argument("from_saved: gate site " + std::to_string(site) + " lies outside the window");
    return off + saved.radius;
  };
  auto action_of = [&](GateKind kind, int wa, int wb) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (space[i].kind == kind && space[i].a == wa && (kind != GateKind::CNOT || space[i].b == wb)) {
        return static_cast<int>(i);
      }
    }
    throw std::invalid_argument("from_saved: gate is not part of the window action space");
  };

  std::vector<double> params;
  for (const auto& line : saved.lines) {
    int wa = position_of(line.a, saved.n_sites);
    int wb = line.kind == GateKind::CNOT ? position_of(line.b, saved.n_sites) : -1;
    arch.actions.push_back(action_of(line.kind, wa, wb));
    if (gate_is_rotation(line.kind)) params.push_back(line.angle);
  }
  arch.horizon = std::max<int>(1, static_cast<int>(arch.actions.size()));
  validate_architecture(arch);
  return {arch, Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()))};
}

inline void save_circuit(std::ostream& os, const SavedCircuit& saved) {
  os << "version 1\n";
  os << "n_sites " << saved.n_sites << "\n";
  os << "target " << saved.target << "\n";
  os << "radius " << saved.radius << "\n";
  for (const auto& line : saved.lines) {
    os << gate_name(line.kind);
    if (line.kind == GateKind::CNOT) {
      os << " " << line.a << " " << line.b;
    } else if (gate_is_rotation(line.kind)) {
      os << " " << line.a << " " << detail::format_g17(line.angle);
    } else {
      os << " " << line.a;
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("save_circuit: write failed");
}

inline void save_circuit(const std::string& path, const CircuitArchitecture& arch, std::span<const double> params) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_circuit: cannot open '" + path + "'");
  save_circuit(os, to_saved(arch, params));
}

inline SavedCircuit load_circuit(std::istream& is) {
  SavedCircuit saved;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("load_circuit: line " + std::to_string(lineno) + ": " + msg);
  };
  auto next_line = [&]() {
    if (!std::getline(is, line)) fail("unexpected end of file");
    ++lineno;
  };

  next_line();
  if (line != "version 1") fail("expected 'version 1'");
  auto read_header_int = [&](const std::string& key, int lo, int hi) {
    next_line();
    std::istringstream ss(line);
    std::string k;
    int v = 0;
    if (!(ss >> k >> v) || k != key) fail("expected '" + key + " <int>'");
    std::string extra;
    if (ss >> extra) fail("trailing tokens after '" + key + "'");
    if (v < lo || v > hi) fail("'" + key + "' out of range");
    return v;
  };
  saved.n_sites = read_header_int("n_sites", 1, 30);
  saved.target = read_header_int("target", 0, saved.n_sites - 1);
  saved.radius = read_header_int("radius", 1, 2);

  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kind_token;
    ss >> kind_token;
    GateKind kind;
    try {
      kind = gate_from_name(kind_token);
    } catch (const std::invalid_argument&) {
      fail("unknown gate '" + kind_token + "'");
      throw;  // unreachable
    }
    SavedCircuit::Line gate;
    gate.kind = kind;
    if (kind == GateKind::CNOT) {
      if (!(ss >> gate.a >> gate.b)) fail("CNOT needs control and target sites");
    } else if (gate_is_rotation(kind)) {
      if (!(ss >> gate.a >> gate.angle)) fail("rotation needs a site and an angle");
      if (!std::isfinite(gate.angle)) fail("angle must be finite");
    } else {
      if (!(ss >> gate.a)) fail("H needs a site");
    }
    std::string extra;
    if (ss >> extra) fail("trailing tokens after gate");
    if (gate.a < 0 || gate.a >= saved.n_sites || (kind == GateKind::CNOT && (gate.b < 0 || gate.b >= saved.n_sites)))
      fail("site index out of range");
    saved.lines.push_back(gate);
  }
  return saved;
}

inline SavedCircuit load_circuit(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_circuit: cannot open '" + path + "'");
  return load_circuit(is);
}

}  // namespace disent

#endif
