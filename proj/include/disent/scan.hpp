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

#ifndef DISENT_SCAN_HPP
#define DISENT_SCAN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "disent/agent.hpp"
#include "disent/circuit.hpp"
#include "disent/models.hpp"
#include "disent/optimizer.hpp"
#include "disent/oracle.hpp"
#include "disent/state.hpp"
#include "disent/version.hpp"

namespace disent {

/// Angle initialization when a trained circuit is re-evaluated across the
/// coupling grid. FromTrained descends from the stored angles; the others
/// restart from scratch and exist to probe initialization robustness.
enum class ScanInit { FromTrained, AllPi, UniformMean0, UniformMeanHalfPi, UniformMeanPi };

inline const char* scan_init_name(ScanInit init) {
  switch (init) {
    case ScanInit::FromTrained: return "trained";
    case ScanInit::AllPi: return "allpi";
    case ScanInit::UniformMean0: return "uniform0";
    case ScanInit::UniformMeanHalfPi: return "uniform-half-pi";
    case ScanInit::UniformMeanPi: return "uniform-pi";
  }
  throw std::invalid_argument("scan_init_name: unknown init scheme");
}

inline ScanInit scan_init_from_name(std::string_view name) {
  if (name == "trained") return ScanInit::FromTrained;
  if (name == "allpi") return ScanInit::AllPi;
  if (name == "uniform0") return ScanInit::UniformMean0;
  if (name == "uniform-half-pi") return ScanInit::UniformMeanHalfPi;
  if (name == "uniform-pi") return ScanInit::UniformMeanPi;
  throw std::invalid_argument("scan_init_from_name: unknown scheme '" + std::string(name) + "'");
}

struct ScanOptions {
  /// Re-optimize rotation angles at every grid point; when false the stored
  /// angles are evaluated as-is.
  bool reoptimize = true;
  ScanInit init = ScanInit::FromTrained;
  BfgsOptions bfgs;
  int uniform_restarts = 5;
  /// Also evaluate the two-site reference at the inverted coupling. Costs one
  /// extra ground-state solve per grid point.
  bool dual_reference = true;
  double solver_tol = 1e-10;
  std::uint64_t seed = 0;
};

struct ScanResult {
  ModelKind kind = ModelKind::TFIM;
  int n_sites = 0;
  std::vector<double> grid;
  std::vector<double> s_raw;
  std::vector<double> s_a;
  std::vector<double> s_b;
  std::vector<double> direct_ref;
  std::vector<double> dual_ref;
  std::optional<double> crossing;
  bool ambiguous = false;
  std::vector<std::string> notes;
  std::map<std::string, std::string> metadata;
};

/// Parses "start:step:stop" into an inclusive grid.
inline std::vector<double> parse_grid(const std::string& text) {
  std::istringstream ss(text);
  double start = 0, step = 0, stop = 0;
  char c1 = 0, c2 = 0;
  if (!(ss >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':')
    throw std::invalid_argument("parse_grid: expected start:step:stop, got '" + text + "'");
  std::string extra;
  if (ss >> extra) throw std::invalid_argument("parse_grid: trailing characters in '" + text + "'");
  if (!(step > 0.0)) throw std::invalid_argument("parse_grid: step must be positive");
  if (stop < start) throw std::invalid_argument("parse_grid: stop must not precede start");
  int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) throw std::invalid_argument("parse_grid: grid too fine");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = start + i * step;
  return grid;
}

inline void check_grid(std::span<const double> grid, std::size_t min_len, const char* who) {
  if (grid.size() < min_len)
    throw std::invalid_argument(std::string(who) + ": grid needs at least " + std::to_string(min_len) + " points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw std::invalid_argument(std::string(who) + ": non-finite grid point");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument(std::string(who) + ": grid must be strictly increasing");
  }
}

/// Exact optimum of the target-site entropy over unitaries on the pair
/// (target, target+1), evaluated on the fresh ground state at `coupling`.
inline double two_site_floor(ModelKind kind, int n_sites, double coupling, int target = 0, double tol = 1e-10,
                             std::uint64_t seed = 0) {
  ModelSpec spec{kind, n_sites, coupling};
  GroundStateResult gs = ground_state(spec, tol, seed);
  if (target < 0 || target >= n_sites) throw std::invalid_argument("two_site_floor: target out of range");
  const int rp[2] = {(target + 1) % n_sites, target};
  return min_window_entropy(reduced_density(gs.state, std::span<const int>(rp)), 2, 2).first;
}

/// Crossing of the two curves by linear interpolation of their difference.
/// With several sign changes the one nearest the grid midpoint wins and the
/// result is flagged ambiguous; identical curves yield no crossing and the
/// same flag. Grid intervals touching a non-finite value are skipped.
inline std::optional<double> find_crossing(std::span<const double> grid, std::span<const double> a,
                                           std::span<const double> b, bool* ambiguous = nullptr) {
  check_grid(grid, 2, "find_crossing");
  if (a.size() != grid.size() || b.size() != grid.size())
    throw std::invalid_argument("find_crossing: curve lengths do not match grid");
  if (ambiguous) *ambiguous = false;

  std::vector<double> roots;
  bool any_valid = false;
  bool all_equal = true;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double d0 = a[i] - b[i];
    double d1 = a[i + 1] - b[i + 1];
    if (!std::isfinite(d0) || !std::isfinite(d1)) continue;
    any_valid = true;
    if (d0 != 0.0 || d1 != 0.0) all_equal = false;
    if (d0 == 0.0 && d1 == 0.0) continue;
    if (d0 == 0.0) {
      roots.push_back(grid[i]);
    } else if (d1 == 0.0) {
      if (i + 2 == grid.size()) roots.push_back(grid[i + 1]);
    } else if (d0 * d1 < 0.0) {
      roots.push_back(grid[i] + (grid[i + 1] - grid[i]) * d0 / (d0 - d1));
    }
  }

  if (any_valid && all_equal) {
    if (ambiguous) *ambiguous = true;
    return std::nullopt;
  }

  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || std::abs(r - unique.back()) > 1e-12) unique.push_back(r);
  }
  if (unique.empty()) return std::nullopt;
  if (unique.size() == 1) return unique.front();

  if (ambiguous) *ambiguous = true;
  double mid = 0.5 * (grid.front() + grid.back());
  double best = unique.front();
  for (double r : unique) {
    if (std::abs(r - mid) < std::abs(best - mid)) best = r;
  }
  return best;
}

struct SlopeSegment {
  int first = 0;
  int last = 0;
  bool slow = false;
};

/// Splits a curve into at most three contiguous segments labeled slow or
/// fast. A point is slow when its |slope| (centered differences, one-sided at
/// the ends) is at most half the median |slope| over the outer thirds of the
/// grid. Excess label runs are merged shortest-first.
inline std::vector<SlopeSegment> region_slopes(std::span<const double> grid, std::span<const double> curve) {
  check_grid(grid, 5, "region_slopes");
  if (curve.size() != grid.size()) throw std::invalid_argument("region_slopes: curve length does not match grid");
  const int n = static_cast<int>(grid.size());
  for (double y : curve) {
    if (!std::isfinite(y)) throw std::invalid_argument("region_slopes: curve has non-finite values");
  }

  std::vector<double> slope(n);
  slope[0] = (curve[1] - curve[0]) / (grid[1] - grid[0]);
  slope[n - 1] = (curve[n - 1] - curve[n - 2]) / (grid[n - 1] - grid[n - 2]);
  for (int i = 1; i + 1 < n; ++i) slope[i] = (curve[i + 1] - curve[i - 1]) / (grid[i + 1] - grid[i - 1]);

  const int k = std::max(1, n / 3);
  std::vector<double> outer;
  for (int i = 0; i < k; ++i) outer.push_back(std::abs(slope[i]));
  for (int i = n - k; i < n; ++i) outer.push_back(std::abs(slope[i]));
  std::sort(outer.begin(), outer.end());
  const std::size_t m = outer.size();
  double median = m % 2 == 1 ? outer[m / 2] : 0.5 * (outer[m / 2 - 1] + outer[m / 2]);
  double threshold = 0.5 * median;

  std::vector<char> slow(n);
  for (int i = 0; i < n; ++i) slow[i] = std::abs(slope[i]) <= threshold ? 1 : 0;

  std::vector<SlopeSegment> runs;
  for (int i = 0; i < n; ++i) {
    if (!runs.empty() && runs.back().slow == static_cast<bool>(slow[i])) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i, static_cast<bool>(slow[i])});
    }
  }

  while (runs.size() > 3) {
    std::size_t shortest = 0;
    int best_len = std::numeric_limits<int>::max();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      int len = runs[r].last - runs[r].first + 1;
      if (len < best_len) {
        best_len = len;
        shortest = r;
      }
    }
    runs[shortest].slow = !runs[shortest].slow;
    std::vector<SlopeSegment> merged;
    for (const SlopeSegment& r : runs) {
      if (!merged.empty() && merged.back().slow == r.slow) {
        merged.back().last = r.last;
      } else {
        merged.push_back(r);
      }
    }
    runs = std::move(merged);
  }
  return runs;
}

/// Two-site optimal-disentanglement references: direct at each coupling, and
/// the same quantity at the inverted coupling 1/x.
inline std::pair<std::vector<double>, std::vector<double>> reference_curves(ModelKind kind, int n_sites,
                                                                            std::span<const double> grid,
                                                                            double tol = 1e-10) {
  check_grid(grid, 1, "reference_curves");
  for (double x : grid) {
    if (x <= 0.0) throw std::invalid_argument("reference_curves: couplings must be positive");
  }
  std::vector<double> direct(grid.size()), dual(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    direct[i] = two_site_floor(kind, n_sites, grid[i], 0, tol);
    dual[i] = two_site_floor(kind, n_sites, 1.0 / grid[i], 0, tol);
  }
  return {std::move(direct), std::move(dual)};
}

namespace detail {

inline double evaluate_side(const PureState& ground, const CircuitArchitecture& arch,
                            const Eigen::VectorXd& trained, const ScanOptions& opts, std::uint64_t side_index,
                            std::size_t point_index) {
  if (!opts.reoptimize)
    return circuit_entropy(ground, arch, std::span<const double>(trained.data(), trained.size()));

  OptimizeConfig cfg;
  cfg.bfgs = opts.bfgs;
  switch (opts.init) {
    case ScanInit::FromTrained:
      return minimize_entropy_from(ground, arch, trained, cfg).entropy;
    case ScanInit::AllPi:
      cfg.scheme = InitScheme::AllPi;
      break;
    case ScanInit::UniformMean0:
    case ScanInit::UniformMeanHalfPi:
    case ScanInit::UniformMeanPi:
      cfg.scheme = InitScheme::UniformAroundMean;
      cfg.mean = opts.init == ScanInit::UniformMean0 ? 0.0
                 : opts.init == ScanInit::UniformMeanHalfPi ? kPi / 2.0
                                                            : kPi;
      cfg.restarts = opts.uniform_restarts;
      cfg.seed = Rng::stream(opts.seed, "scan-point", side_index * 1000003ULL + point_index).next_u64();
      break;
  }
  return minimize_entropy(ground, arch, cfg).entropy;
}

}  // namespace detail

/// Evaluates the pair of trained circuits over a coupling grid: the raw
/// target-site entropy, both circuit curves, and the two-site references.
/// Solver failures at single grid points become NaN rows rather than
/// aborting the whole scan.
inline ScanResult scan_curves(ModelKind kind, int n_sites, std::span<const double> grid, const SavedCircuit& saved_a,
                              const SavedCircuit& saved_b, const ScanOptions& opts = {}) {
  check_grid(grid, 2, "scan_curves");
  auto [arch_a, theta_a] = from_saved(saved_a, n_sites);
  auto [arch_b, theta_b] = from_saved(saved_b, n_sites);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  ScanResult res;
  res.kind = kind;
  res.n_sites = n_sites;
  res.grid.assign(grid.begin(), grid.end());
  res.s_raw.assign(grid.size(), nan);
  res.s_a.assign(grid.size(), nan);
  res.s_b.assign(grid.size(), nan);
  res.direct_ref.assign(grid.size(), nan);
  res.dual_ref.assign(grid.size(), nan);

  const int target = arch_a.window.target;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ModelSpec spec{kind, n_sites, grid[i]};
    GroundStateResult gs;
    try {
      gs = ground_state(spec, opts.solver_tol, opts.seed);
    } catch (const std::exception& e) {
      res.notes.push_back("coupling " + detail::format_g17(grid[i]) + ": " + e.what());
      continue;
    }
    res.s_raw[i] = entropy_of_site(gs.state, target);
    res.s_a[i] = detail::evaluate_side(gs.state, arch_a, theta_a, opts, 0, i);
    res.s_b[i] = detail::evaluate_side(gs.state, arch_b, theta_b, opts, 1, i);
    const int rp[2] = {(target + 1) % n_sites, target};
    res.direct_ref[i] = min_window_entropy(reduced_density(gs.state, std::span<const int>(rp)), 2, 2).first;
    if (opts.dual_reference && grid[i] > 0.0) {
      try {
        res.dual_ref[i] = two_site_floor(kind, n_sites, 1.0 / grid[i], target, opts.solver_tol, opts.seed);
      } catch (const std::exception& e) {
        res.notes.push_back("dual coupling " + detail::format_g17(1.0 / grid[i]) + ": " + e.what());
      }
    }
  }

  res.crossing = find_crossing(res.grid, res.s_a, res.s_b, &res.ambiguous);
  res.metadata["model"] = model_name(kind);
  res.metadata["n_sites"] = std::to_string(n_sites);
  res.metadata["target"] = std::to_string(target);
  res.metadata["init"] = scan_init_name(opts.init);
  res.metadata["reoptimize"] = opts.reoptimize ? "1" : "0";
  res.metadata["seed"] = std::to_string(opts.seed);
  res.metadata["version"] = kVersionString;
  return res;
}

/// Re-anchors the trained circuits onto other chain lengths and scans each.
inline std::map<int, ScanResult> transfer_scan(ModelKind kind, std::span<const int> sizes,
                                               std::span<const double> grid, const SavedCircuit& saved_a,
                                               const SavedCircuit& saved_b, const ScanOptions& opts = {}) {
  if (sizes.empty()) throw std::invalid_argument("transfer_scan: no chain sizes given");
  std::map<int, ScanResult> out;
  for (int n : sizes) {
    if (out.count(n)) throw std::invalid_argument("transfer_scan: duplicate chain size");
    out.emplace(n, scan_curves(kind, n, grid, saved_a, saved_b, opts));
  }
  return out;
}

inline const char* kScanCsvHeader = "coupling,S_raw,S_a,S_b,direct_ref,dual_ref";

inline void write_scan_csv(std::ostream& os, const ScanResult& res) {
  for (const auto& [key, value] : res.metadata) os << "# " << key << " " << value << "\n";
  os << "# crossing " << (res.crossing ? detail::format_g17(*res.crossing) : std::string("none")) << "\n";
  os << "# ambiguous " << (res.ambiguous ? "1" : "0") << "\n";
  os << kScanCsvHeader << "\n";
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    os << detail::format_g17(res.grid[i]) << "," << detail::format_g17(res.s_raw[i]) << ","
       << detail::format_g17(res.s_a[i]) << "," << detail::format_g17(res.s_b[i]) << ","
       << detail::format_g17(res.direct_ref[i]) << "," << detail::format_g17(res.dual_ref[i]) << "\n";
  }
  if (!os) throw std::runtime_error("write_scan_csv: write failed");
}

inline ScanResult read_scan_csv(std::istream& is) {
  ScanResult res;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      std::string value;
      std::getline(ss, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      if (key == "crossing") {
        if (value != "none") res.crossing = std::strtod(value.c_str(), nullptr);
      } else if (key == "ambiguous") {
        res.ambiguous = value == "1";
      } else {
        res.metadata[key] = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kScanCsvHeader) throw std::runtime_error("read_scan_csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<double> fields;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(std::strtod(tok.c_str(), nullptr));
    if (fields.size() != 6) throw std::runtime_error("read_scan_csv: malformed row '" + line + "'");
    res.grid.push_back(fields[0]);
    res.s_raw.push_back(fields[1]);
    res.s_a.push_back(fields[2]);
    res.s_b.push_back(fields[3]);
    res.direct_ref.push_back(fields[4]);
    res.dual_ref.push_back(fields[5]);
  }
  if (!header_seen) throw std::runtime_error("read_scan_csv: missing header");
  if (res.metadata.count("model")) res.kind = model_from_name(res.metadata["model"]);
  if (res.metadata.count("n_sites")) res.n_sites = std::stoi(res.metadata["n_sites"]);
  return res;
}

/// Trains one agent per training coupling with independent derived seeds.
inline std::pair<TrainResult, TrainResult> train_pair(ModelKind kind, int n_sites, double coupling_a,
                                                      double coupling_b, const WindowSpec& window, int layers,
                                                      const TrainConfig& cfg) {
  ModelSpec spec_a{kind, n_sites, coupling_a};
  ModelSpec spec_b{kind, n_sites, coupling_b};
  TrainConfig cfg_a = cfg, cfg_b = cfg;
  cfg_a.seed = Rng::stream(cfg.seed, "train-side", 0).next_u64();
  cfg_b.seed = Rng::stream(cfg.seed, "train-side", 1).next_u64();
  TrainResult a = train_agent(spec_a, window, layers, cfg_a);
  TrainResult b = train_agent(spec_b, window, layers, cfg_b);
  return {std::move(a), std::move(b)};
}

}  // namespace disent

#endif
