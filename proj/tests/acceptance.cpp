// Copyright 2026 The disent Authors
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

// End-to-end acceptance harness. Each invocation checks one numbered
// criterion and prints a single [PASS]/[FAIL] line on stdout; progress and
// detail go to stderr. Training runs and scans are cached under --workdir so
// the expensive criteria share artifacts across invocations.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "disent/agent.hpp"
#include "disent/circuit.hpp"
#include "disent/mlp.hpp"
#include "disent/models.hpp"
#include "disent/optimizer.hpp"
#include "disent/oracle.hpp"
#include "disent/replay.hpp"
#include "disent/rng.hpp"
#include "disent/scan.hpp"
#include "disent/state.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace disent;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Collects failed expectations; the criterion line reports them all.
struct Gate {
  bool ok = true;
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }

  std::string joined() const {
    std::string out;
    for (std::size_t i = 0; i < failures.size(); ++i) {
      if (i) out += "; ";
      out += failures[i];
    }
    return out;
  }
};

int finish(int criterion, const Gate& gate, const std::string& pass_text, bool soft = false) {
  if (gate.ok) {
    std::printf("[PASS] criterion %d: %s\n", criterion, pass_text.c_str());
    return 0;
  }
  std::printf("[FAIL] criterion %d: %s\n", criterion, gate.joined().c_str());
  return soft ? 0 : 1;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string describe_crossing(const ScanResult& res) {
  if (!res.crossing) return "none";
  std::string out = fmt("%.4f", *res.crossing);
  if (res.ambiguous) out += " (ambiguous)";
  return out;
}

/// Window sites with the target listed last, matching the density-matrix
/// convention where the last site carries the highest bit.
std::vector<int> rp_sites(const WindowSpec& window) {
  std::vector<int> out;
  for (int s : window.sites()) {
    if (s != window.target) out.push_back(s);
  }
  out.push_back(window.target);
  return out;
}

// ---------------------------------------------------------------------------
// Artifact cache. One directory per trained coupling pair, a done marker
// written last, and scans cached as CSV next to the circuits.

struct PairKey {
  ModelKind kind = ModelKind::TFIM;
  double coupling_a = 0.0;
  double coupling_b = 0.0;
  int radius = 1;
  int layers = 1;
  std::uint64_t seed = 1;
};

std::string pair_name(const PairKey& key) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "train_%s_a%g_b%g_r%d_p%d_s%llu", model_name(key.kind), key.coupling_a,
                key.coupling_b, key.radius, key.layers, static_cast<unsigned long long>(key.seed));
  return buf;
}

struct TrainedPair {
  PairKey key;
  fs::path dir;
  SavedCircuit circuit_a;
  SavedCircuit circuit_b;
  std::map<std::string, double> summary;

  double reward_sum() const {
    return summary.at("reward_a") + summary.at("reward_b");
  }
};

std::map<std::string, double> read_summary(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::map<std::string, double> out;
  std::string key;
  double value;
  while (is >> key >> value) out[key] = value;
  return out;
}

void write_summary(const fs::path& path, const std::map<std::string, double>& values) {
  std::ofstream os(path);
  for (const auto& [key, value] : values) os << key << " " << detail::format_g17(value) << "\n";
}

constexpr int kTrainSites = 8;

TrainedPair ensure_trained(const fs::path& work, const PairKey& key) {
  TrainedPair pair;
  pair.key = key;
  pair.dir = work / pair_name(key);
  if (!fs::exists(pair.dir / "done")) {
    fs::create_directories(pair.dir);
    WindowSpec window{kTrainSites, 0, key.radius};
    TrainConfig cfg;
    cfg.seed = key.seed;
    std::fprintf(stderr, "  training %s ...\n", pair_name(key).c_str());
    std::fflush(stderr);
    auto t0 = std::chrono::steady_clock::now();
    auto [side_a, side_b] = train_pair(key.kind, kTrainSites, key.coupling_a, key.coupling_b, window, key.layers, cfg);
    double elapsed = seconds_since(t0);
    save_circuit((pair.dir / "circuit_a.txt").string(), side_a.best_architecture,
                 std::span<const double>(side_a.best_params.data(), static_cast<std::size_t>(side_a.best_params.size())));
    save_circuit((pair.dir / "circuit_b.txt").string(), side_b.best_architecture,
                 std::span<const double>(side_b.best_params.data(), static_cast<std::size_t>(side_b.best_params.size())));
    {
      std::ofstream la(pair.dir / "train_a.csv"), lb(pair.dir / "train_b.csv");
      write_training_log(la, side_a.log);
      write_training_log(lb, side_b.log);
    }
    std::map<std::string, double> summary;
    summary["reward_a"] = side_a.best_reward;
    summary["reward_b"] = side_b.best_reward;
    summary["entropy_a"] = side_a.best_entropy;
    summary["entropy_b"] = side_b.best_entropy;
    summary["baseline_a"] = side_a.baseline_entropy;
    summary["baseline_b"] = side_b.baseline_entropy;
    summary["episodes_a"] = side_a.episodes_run;
    summary["episodes_b"] = side_b.episodes_run;
    summary["seconds"] = elapsed;
    write_summary(pair.dir / "summary.txt", summary);
    std::ofstream(pair.dir / "done") << "ok\n";
    std::fprintf(stderr, "  trained %s in %.1f s (rewards %.4f / %.4f)\n", pair_name(key).c_str(), elapsed,
                 side_a.best_reward, side_b.best_reward);
    std::fflush(stderr);
  }
  pair.circuit_a = load_circuit((pair.dir / "circuit_a.txt").string());
  pair.circuit_b = load_circuit((pair.dir / "circuit_b.txt").string());
  pair.summary = read_summary(pair.dir / "summary.txt");
  return pair;
}

ScanResult ensure_scan(const TrainedPair& pair, const std::string& tag, std::span<const double> grid,
                       const ScanOptions& opts) {
  fs::path csv = pair.dir / ("scan_" + tag + ".csv");
  if (fs::exists(csv)) {
    std::ifstream is(csv);
    return read_scan_csv(is);
  }
  std::fprintf(stderr, "  scanning %s (%s) ...\n", pair_name(pair.key).c_str(), tag.c_str());
  std::fflush(stderr);
  auto t0 = std::chrono::steady_clock::now();
  ScanResult res = scan_curves(pair.key.kind, kTrainSites, grid, pair.circuit_a, pair.circuit_b, opts);
  res.metadata["elapsed_seconds"] = fmt("%.3f", seconds_since(t0));
  std::ofstream os(csv);
  write_scan_csv(os, res);
  std::fprintf(stderr, "  scan %s done in %.1f s, crossing %s\n", tag.c_str(), seconds_since(t0),
               describe_crossing(res).c_str());
  std::fflush(stderr);
  return res;
}

double recorded_scan_seconds(const ScanResult& res) {
  auto it = res.metadata.find("elapsed_seconds");
  return it == res.metadata.end() ? 0.0 : std::strtod(it->second.c_str(), nullptr);
}

std::vector<double> default_grid() { return parse_grid("0.5:0.1:1.5"); }

/// Pick of the three training seeds, with its standard trained-circuit scan
/// and the compute cost of the whole selection.
struct SeedPick {
  TrainedPair pair;
  ScanResult scan;
  double train_seconds = 0.0;
  double scan_seconds = 0.0;
};

/// A run is only usable for the crossing estimator when its scan produces a
/// single unambiguous crossing, so usable seeds win over unusable ones and
/// ties break by summed best-episode reward. The location of the crossing is
/// never compared against the expected answer here.
SeedPick best_of_three(const fs::path& work, ModelKind kind, double coupling_a, double coupling_b, int radius,
                       int layers) {
  std::vector<double> grid = default_grid();
  ScanOptions opts;
  SeedPick pick;
  bool have = false, pick_usable = false;
  for (std::uint64_t seed : {1, 2, 3}) {
    TrainedPair pair = ensure_trained(work, PairKey{kind, coupling_a, coupling_b, radius, layers, seed});
    pick.train_seconds += pair.summary.at("seconds");
    ScanResult scan = ensure_scan(pair, "trained", grid, opts);
    pick.scan_seconds += recorded_scan_seconds(scan);
    bool usable = scan.crossing.has_value() && !scan.ambiguous;
    std::fprintf(stderr, "  seed %llu: reward sum %.4f, crossing %s\n", static_cast<unsigned long long>(seed),
                 pair.reward_sum(), describe_crossing(scan).c_str());
    bool take = !have || (usable && !pick_usable) ||
                (usable == pick_usable && pair.reward_sum() > pick.pair.reward_sum());
    if (take) {
      pick.pair = pair;
      pick.scan = std::move(scan);
      pick_usable = usable;
      have = true;
    }
  }
  std::fprintf(stderr, "  picked seed %llu\n", static_cast<unsigned long long>(pick.pair.key.seed));
  std::fflush(stderr);
  return pick;
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form window minimum vs brute-force unitary search on
// random 4-qubit states with a 2-site window.

int run_c1(const fs::path&) {
  auto t0 = std::chrono::steady_clock::now();
  Gate gate;
  Rng rng = Rng::stream(2026, "acceptance-random-states");
  const std::vector<int> rp = {1, 0};
  double max_diff = 0.0;
  for (int i = 0; i < 100; ++i) {
    PureState state(random_unitary(16, rng).col(0), 4);
    double closed = min_window_entropy(reduced_density(state, rp), 2, 2).first;
    double brute = brute_force_min_entropy(state, rp, 50, static_cast<std::uint64_t>(i));
    max_diff = std::max(max_diff, std::abs(closed - brute));
  }
  double elapsed = seconds_since(t0);
  gate.expect(max_diff < 1e-4, "max |closed - brute| = " + fmt("%.3g", max_diff) + " >= 1e-4");
  gate.expect(elapsed < 120.0, "runtime " + fmt("%.1f", elapsed) + " s >= 120 s");
  return finish(1, gate,
                "closed form matches 50-restart brute force on 100 random 4-qubit states, max diff " +
                    fmt("%.3g", max_diff) + " (" + fmt("%.1f", elapsed) + " s)");
}

// ---------------------------------------------------------------------------
// Criterion 2: no random window circuit beats the grouped-spectrum floor.

int run_c2(const fs::path&) {
  auto t0 = std::chrono::steady_clock::now();
  Gate gate;
  const std::vector<double> couplings = {0.5, 0.8, 1.0, 1.2, 1.5};
  std::vector<PureState> grounds;
  for (double coupling : couplings) {
    grounds.push_back(ground_state(ModelSpec{ModelKind::TFIM, kTrainSites, coupling}).state);
  }
  std::map<std::array<int, 3>, double> floor_cache;
  Rng rng = Rng::stream(2026, "acceptance-random-circuits");
  int violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    int ci = rng.uniform_int(static_cast<int>(couplings.size()));
    WindowSpec window{kTrainSites, rng.uniform_int(kTrainSites), 1 + rng.uniform_int(2)};
    CircuitArchitecture arch = make_architecture(window, 1 + rng.uniform_int(2));
    const int n_actions = static_cast<int>(action_space(window).size());
    const int length = rng.uniform_int(arch.horizon + 1);
    for (int k = 0; k < length; ++k) arch.actions.push_back(rng.uniform_int(n_actions));
    Eigen::VectorXd params(parameter_count(arch));
    for (Eigen::Index k = 0; k < params.size(); ++k) params[k] = rng.uniform(0.0, 2.0 * kPi);

    std::array<int, 3> cache_key = {ci, window.target, window.radius};
    auto it = floor_cache.find(cache_key);
    if (it == floor_cache.end()) {
      double floor = min_window_entropy(reduced_density(grounds[ci], rp_sites(window)), 2, 1 << (window.size() - 1)).first;
      it = floor_cache.emplace(cache_key, floor).first;
    }
    double entropy = circuit_entropy(grounds[ci], arch, std::span<const double>(params.data(), params.size()));
    double margin = entropy - it->second;
    min_margin = std::min(min_margin, margin);
    if (margin < -1e-8) ++violations;
  }
  double elapsed = seconds_since(t0);
  gate.expect(violations == 0, std::to_string(violations) + " floor violations");
  return finish(2, gate,
                std::to_string(trials) + " random circuits stay above the window floor, smallest margin " +
                    fmt("%.3g", min_margin) + " (" + fmt("%.1f", elapsed) + " s)");
}

// ---------------------------------------------------------------------------
// Criterion 3: near-product and maximally entangled Ising limits.

int run_c3(const fs::path&) {
  auto t0 = std::chrono::steady_clock::now();
  Gate gate;
  GroundStateResult weak = ground_state(ModelSpec{ModelKind::TFIM, kTrainSites, 0.01});
  GroundStateResult strong = ground_state(ModelSpec{ModelKind::TFIM, kTrainSites, 50.0});
  double s_weak = entropy_of_site(weak.state, 0);
  double s_strong = entropy_of_site(strong.state, 0);
  double elapsed = seconds_since(t0);
  gate.expect(s_weak < 1e-3, "S(lambda=0.01) = " + fmt("%.3g", s_weak) + " >= 1e-3");
  gate.expect(std::abs(s_strong - 1.0) <= 1e-3, "S(lambda=50) = " + fmt("%.6f", s_strong) + " not within 1e-3 of 1");
  gate.expect(elapsed < 60.0, "runtime " + fmt("%.1f", elapsed) + " s");
  return finish(3, gate,
                "S(0.01) = " + fmt("%.2e", s_weak) + ", S(50) = " + fmt("%.6f", s_strong) + " (" +
                    fmt("%.1f", elapsed) + " s)");
}

// ---------------------------------------------------------------------------
// Criterion 4: the full Ising pipeline locates the critical point.

int run_c4(const fs::path& work) {
  Gate gate;
  SeedPick pick = best_of_three(work, ModelKind::TFIM, 0.5, 1.5, 1, 2);
  double total_seconds = pick.train_seconds + pick.scan_seconds;
  gate.expect(pick.scan.crossing.has_value(), "curves do not cross");
  if (pick.scan.crossing) {
    gate.expect(*pick.scan.crossing >= 0.9 && *pick.scan.crossing <= 1.1,
                "crossing " + describe_crossing(pick.scan) + " outside [0.9, 1.1]");
  }
  gate.expect(total_seconds <= 7200.0, "pipeline took " + fmt("%.0f", total_seconds) + " s > 2 h");
  return finish(4, gate,
                "Ising crossing at " + describe_crossing(pick.scan) + " from seed " +
                    std::to_string(pick.pair.key.seed) + " (" + fmt("%.1f", total_seconds / 60.0) +
                    " min total compute)");
}

// ---------------------------------------------------------------------------
// Criterion 5: XXZ crossing at p=3 plus the shallow-circuit anomaly at p=2.

int run_c5(const fs::path& work) {
  Gate gate;

  std::fprintf(stderr, "p=3 pipeline:\n");
  SeedPick deep = best_of_three(work, ModelKind::XXZ, 0.5, 1.5, 2, 3);
  gate.expect(deep.scan.crossing.has_value(), "p=3 curves do not cross");
  if (deep.scan.crossing) {
    gate.expect(*deep.scan.crossing >= 0.9 && *deep.scan.crossing <= 1.1,
                "p=3 crossing " + describe_crossing(deep.scan) + " outside [0.9, 1.1]");
  }

  std::fprintf(stderr, "p=2 pipeline:\n");
  SeedPick shallow = best_of_three(work, ModelKind::XXZ, 0.5, 1.5, 2, 2);
  bool anomalous = !shallow.scan.crossing || shallow.scan.ambiguous || *shallow.scan.crossing < 0.95 ||
                   *shallow.scan.crossing > 1.05;
  gate.expect(anomalous, "p=2 crossing " + describe_crossing(shallow.scan) +
                             " sits cleanly inside [0.95, 1.05], anomaly not reproduced");
  return finish(5, gate,
                "XXZ p=3 crossing at " + describe_crossing(deep.scan) + ", p=2 anomalous (crossing " +
                    describe_crossing(shallow.scan) + ")");
}

// ---------------------------------------------------------------------------
// Criterion 6 (soft): trained circuits track the two-site reference curves,
// the ordered side directly and the disordered side through duality.

int run_c6(const fs::path& work) {
  Gate gate;
  SeedPick pick = best_of_three(work, ModelKind::TFIM, 0.5, 1.5, 1, 2);
  const ScanResult& scan = pick.scan;
  double max_direct = 0.0, max_dual = 0.0;
  for (std::size_t i = 0; i < scan.grid.size(); ++i) {
    if (scan.grid[i] >= 1.1 - 1e-9) max_direct = std::max(max_direct, std::abs(scan.s_b[i] - scan.direct_ref[i]));
    if (scan.grid[i] <= 0.9 + 1e-9) max_dual = std::max(max_dual, std::abs(scan.s_a[i] - scan.dual_ref[i]));
  }
  std::fprintf(stderr, "curves emitted at %s\n", (pick.pair.dir / "scan_trained.csv").string().c_str());
  gate.expect(max_direct <= 0.05,
              "ordered-side deviation from direct reference " + fmt("%.4f", max_direct) + " > 0.05");
  gate.expect(max_dual <= 0.05, "disordered-side deviation from dual reference " + fmt("%.4f", max_dual) + " > 0.05");
  // Soft criterion: the verdict is reported honestly but never gates the
  // suite, and the curves stay on disk either way.
  return finish(6, gate,
                "ordered side within " + fmt("%.4f", max_direct) + " of the direct reference, disordered side within " +
                    fmt("%.4f", max_dual) + " of the dual reference",
                /*soft=*/true);
}

// ---------------------------------------------------------------------------
// Criterion 7: circuits trained at N=8 transfer to longer chains.

int run_c7(const fs::path& work) {
  Gate gate;
  TrainedPair best = best_of_three(work, ModelKind::TFIM, 0.5, 1.5, 1, 2).pair;
  const std::vector<int> sizes = {10, 12, 14};
  std::vector<double> grid = default_grid();
  bool cached = true;
  for (int n : sizes) {
    if (!fs::exists(best.dir / ("transfer_n" + std::to_string(n) + ".csv"))) cached = false;
  }
  if (!fs::exists(best.dir / "transfer_meta.txt")) cached = false;

  std::map<int, ScanResult> results;
  double elapsed = 0.0;
  if (cached) {
    for (int n : sizes) {
      std::ifstream is(best.dir / ("transfer_n" + std::to_string(n) + ".csv"));
      results[n] = read_scan_csv(is);
    }
    elapsed = read_summary(best.dir / "transfer_meta.txt").at("seconds");
  } else {
    std::fprintf(stderr, "  evaluating transfers at N=10,12,14 ...\n");
    std::fflush(stderr);
    ScanOptions opts;
    opts.dual_reference = false;
    auto t0 = std::chrono::steady_clock::now();
    results = transfer_scan(ModelKind::TFIM, sizes, grid, best.circuit_a, best.circuit_b, opts);
    elapsed = seconds_since(t0);
    for (const auto& [n, res] : results) {
      std::ofstream os(best.dir / ("transfer_n" + std::to_string(n) + ".csv"));
      write_scan_csv(os, res);
    }
    write_summary(best.dir / "transfer_meta.txt", {{"seconds", elapsed}});
  }

  std::string crossings;
  for (int n : sizes) {
    const ScanResult& res = results.at(n);
    if (!crossings.empty()) crossings += ", ";
    crossings += "N=" + std::to_string(n) + ": " + describe_crossing(res);
    gate.expect(res.crossing.has_value(), "no crossing at N=" + std::to_string(n));
    if (res.crossing) {
      gate.expect(*res.crossing >= 0.9 && *res.crossing <= 1.1,
                  "crossing " + describe_crossing(res) + " at N=" + std::to_string(n) + " outside [0.9, 1.1]");
    }
  }
  gate.expect(elapsed <= 1200.0, "transfer evaluation took " + fmt("%.0f", elapsed) + " s > 20 min");
  return finish(7, gate, "transferred crossings " + crossings + " (" + fmt("%.1f", elapsed) + " s)");
}

// ---------------------------------------------------------------------------
// Criterion 8: crossing survives angle re-initialization and other training
// coupling pairs.

int run_c8(const fs::path& work) {
  Gate gate;
  std::vector<double> grid = default_grid();
  TrainedPair best = best_of_three(work, ModelKind::TFIM, 0.5, 1.5, 1, 2).pair;

  const std::pair<ScanInit, const char*> inits[] = {
      {ScanInit::UniformMean0, "uniform0"},
      {ScanInit::UniformMeanHalfPi, "uniform-half-pi"},
      {ScanInit::UniformMeanPi, "uniform-pi"},
  };
  std::string init_text;
  for (const auto& [init, tag] : inits) {
    ScanOptions opts;
    opts.init = init;
    opts.dual_reference = false;
    ScanResult res = ensure_scan(best, tag, grid, opts);
    if (!init_text.empty()) init_text += ", ";
    init_text += std::string(tag) + ": " + describe_crossing(res);
    gate.expect(res.crossing.has_value(), std::string("no crossing with init ") + tag);
    if (res.crossing) {
      gate.expect(*res.crossing >= 0.85 && *res.crossing <= 1.15,
                  std::string(tag) + " crossing " + describe_crossing(res) + " outside [0.85, 1.15]");
    }
  }

  const std::pair<double, double> alt_pairs[] = {{0.6, 1.3}, {0.7, 1.4}};
  std::string pair_text;
  for (const auto& [a, b] : alt_pairs) {
    std::fprintf(stderr, "pair (%g, %g):\n", a, b);
    SeedPick alt = best_of_three(work, ModelKind::TFIM, a, b, 1, 2);
    const ScanResult& res = alt.scan;
    std::string label = "(" + fmt("%g", a) + ", " + fmt("%g", b) + ")";
    if (!pair_text.empty()) pair_text += ", ";
    pair_text += label + ": " + describe_crossing(res);
    gate.expect(res.crossing.has_value(), "no crossing for pair " + label);
    if (res.crossing) {
      gate.expect(*res.crossing >= 0.85 && *res.crossing <= 1.15,
                  "pair " + label + " crossing " + describe_crossing(res) + " outside [0.85, 1.15]");
    }
  }
  return finish(8, gate, "init crossings " + init_text + "; pair crossings " + pair_text);
}

// ---------------------------------------------------------------------------
// Criterion 9: learning machinery. Reward boundaries, analytic gradients,
// prioritized replay statistics, target-network copies and bitwise
// train_agent determinism.

void check_rewards(Gate& gate) {
  gate.expect(terminal_reward(0.8, 0.8) == 0.0, "reward(b, b) != 0");
  gate.expect(terminal_reward(0.8, 0.0) == 1.0, "reward(b, 0) != 1");
  gate.expect(terminal_reward(0.8, 0.4) == 0.5, "reward(0.8, 0.4) != 0.5");
  gate.expect(terminal_reward(0.8, 1.6) == 0.0, "worsening not clipped to 0");
  gate.expect(terminal_reward(0.0, 0.3) == 0.0, "zero baseline not mapped to 0");
}

void check_backprop(Gate& gate) {
  Mlp net = Mlp::make({3, 5, 4, 2}, 11);
  Rng rng = Rng::stream(11, "acceptance-backprop");
  Eigen::MatrixXd x(6, 3), target(6, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = rng.uniform(-1.0, 1.0);

  Mlp::Cache cache;
  Eigen::MatrixXd y = net.forward(x, &cache);
  MlpGradients grads = net.backward(cache, y - target);

  // Per-coordinate stencil; the tolerance is relative to the finite
  // difference with a small absolute floor for near-zero gradients.
  double worst = 0.0;
  auto probe = [&](double* coeff, double analytic) {
    Eigen::VectorXd coord(1);
    coord << *coeff;
    auto f = [&](const Eigen::VectorXd& v) {
      double saved = *coeff;
      *coeff = v[0];
      double value = 0.5 * (net.forward(x) - target).squaredNorm();
      *coeff = saved;
      return value;
    };
    double fd = refimpl::four_point_gradient(f, coord, 1e-4)[0];
    worst = std::max(worst, std::abs(analytic - fd) / (1e-6 + 1e-4 * std::abs(fd)));
  };
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Eigen::MatrixXd& w = net.weights()[l];
    for (Eigen::Index k = 0; k < w.size(); ++k) probe(w.data() + k, grads.w[l].data()[k]);
    Eigen::VectorXd& b = net.biases()[l];
    for (Eigen::Index k = 0; k < b.size(); ++k) probe(&b[k], grads.b[l][k]);
  }
  gate.expect(worst < 1.0, "backprop vs finite differences off by " + fmt("%.3g", worst) + "x the 1e-4 tolerance");
}

void check_replay(Gate& gate) {
  ReplayBuffer buffer(8, 1.0, 1e-6);
  const double priorities[4] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) buffer.insert(StoredTransition{{}, static_cast<std::uint8_t>(i), 0.0, false});
  const int indices[4] = {0, 1, 2, 3};
  double deltas[4];
  for (int i = 0; i < 4; ++i) deltas[i] = priorities[i] - 1e-6;
  buffer.update_priorities(indices, deltas);

  Rng rng = Rng::stream(2026, "acceptance-per");
  std::array<int, 4> counts = {0, 0, 0, 0};
  double worst_weight_dev = 0.0;
  const int rounds = 5000;
  for (int r = 0; r < rounds; ++r) {
    ReplayBuffer::Sample sample = buffer.sample(4, 1.0, rng);
    double reference = 0.0;
    for (int i = 0; i < 4; ++i) {
      counts[static_cast<std::size_t>(sample.indices[i])]++;
      double product = sample.weights[i] * buffer.priority(sample.indices[i]);
      if (i == 0) {
        reference = product;
      } else {
        worst_weight_dev = std::max(worst_weight_dev, std::abs(product - reference) / reference);
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    double expected = rounds * 4.0 * priorities[i] / 10.0;
    gate.expect(std::abs(counts[static_cast<std::size_t>(i)] - expected) <= 200.0,
                "replay index " + std::to_string(i) + " drawn " + std::to_string(counts[static_cast<std::size_t>(i)]) +
                    " times, expected " + fmt("%.0f", expected) + " +- 200");
  }
  gate.expect(worst_weight_dev < 1e-12,
              "beta=1 weights do not invert the sampling bias, relative spread " + fmt("%.3g", worst_weight_dev));
}

void check_target_copy(Gate& gate) {
  Mlp online = Mlp::make({6, 12, 4}, 5);
  Mlp target = online;
  Rng rng = Rng::stream(5, "acceptance-target-probe");
  Eigen::VectorXd probe(6);
  for (int i = 0; i < 6; ++i) probe[i] = rng.uniform(-1.0, 1.0);
  gate.expect(online.forward_one(probe) == target.forward_one(probe), "copied target differs from online net");

  Adam adam(1e-2);
  Mlp::Cache cache;
  Eigen::MatrixXd y = online.forward(probe.transpose(), &cache);
  adam.step(online, online.backward(cache, Eigen::MatrixXd::Ones(y.rows(), y.cols())));
  gate.expect(online.forward_one(probe) != target.forward_one(probe), "online update leaked into the target copy");
  Mlp resynced = online;
  gate.expect(resynced.forward_one(probe) == online.forward_one(probe), "resync is not exact");
}

void check_determinism(Gate& gate) {
  ModelSpec model{ModelKind::TFIM, 4, 1.2};
  WindowSpec window{4, 1, 1};
  TrainConfig cfg;
  cfg.episodes = 40;
  cfg.minibatch = 16;
  cfg.replay_capacity = 500;
  cfg.stagnation_limit = 40;
  cfg.hidden = {32, 32};
  cfg.seed = 11;
  TrainResult first = train_agent(model, window, 1, cfg);
  TrainResult second = train_agent(model, window, 1, cfg);
  gate.expect(first.best_reward == second.best_reward, "best rewards differ between identical runs");
  gate.expect(first.best_entropy == second.best_entropy, "best entropies differ between identical runs");
  gate.expect(first.episodes_run == second.episodes_run, "episode counts differ between identical runs");
  gate.expect(first.learn_steps == second.learn_steps, "learn-step counts differ between identical runs");
  gate.expect(first.best_architecture.actions == second.best_architecture.actions, "best action sequences differ");
  gate.expect(first.best_params == second.best_params, "best parameters differ");
  bool logs_equal = first.log.size() == second.log.size();
  if (logs_equal) {
    for (std::size_t i = 0; i < first.log.size(); ++i) {
      const EpisodeRow &a = first.log[i], &b = second.log[i];
      bool losses_equal = (a.loss_mean == b.loss_mean) || (std::isnan(a.loss_mean) && std::isnan(b.loss_mean));
      bool entropies_equal = (a.s_rl == b.s_rl) || (std::isnan(a.s_rl) && std::isnan(b.s_rl));
      if (a.episode != b.episode || a.reward != b.reward || a.epsilon != b.epsilon || !losses_equal ||
          !entropies_equal) {
        logs_equal = false;
        break;
      }
    }
  }
  gate.expect(logs_equal, "episode logs differ between identical runs");

  GroundStateResult gs = ground_state(model, cfg.solver_tol);
  double replayed =
      circuit_entropy(gs.state, first.best_architecture,
                      std::span<const double>(first.best_params.data(), static_cast<std::size_t>(first.best_params.size())));
  gate.expect(std::abs(replayed - first.best_entropy) <= 1e-12,
              "replaying the best circuit gives " + fmt("%.12f", replayed) + " instead of " +
                  fmt("%.12f", first.best_entropy));
}

int run_c9(const fs::path&) {
  auto t0 = std::chrono::steady_clock::now();
  Gate gate;
  check_rewards(gate);
  check_backprop(gate);
  check_replay(gate);
  check_target_copy(gate);
  check_determinism(gate);
  double elapsed = seconds_since(t0);
  gate.expect(elapsed < 300.0, "runtime " + fmt("%.1f", elapsed) + " s >= 5 min");
  return finish(9, gate,
                "reward boundaries, gradients, replay statistics, target copies and training determinism all hold (" +
                    fmt("%.1f", elapsed) + " s)");
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  fs::path work;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      criterion = std::atoi(argv[++i]);
    } else if (arg == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance --criterion N --workdir PATH\n");
      return 2;
    }
  }
  if (criterion < 1 || criterion > 9 || work.empty()) {
    std::fprintf(stderr, "usage: acceptance --criterion N --workdir PATH\n");
    return 2;
  }
  try {
    fs::create_directories(work);
    switch (criterion) {
      case 1: return run_c1(work);
      case 2: return run_c2(work);
      case 3: return run_c3(work);
      case 4: return run_c4(work);
      case 5: return run_c5(work);
      case 6: return run_c6(work);
      case 7: return run_c7(work);
      case 8: return run_c8(work);
      case 9: return run_c9(work);
    }
  } catch (const std::exception& e) {
    std::printf("[FAIL] criterion %d: unhandled error: %s\n", criterion, e.what());
    return 1;
  }
  return 2;
}
