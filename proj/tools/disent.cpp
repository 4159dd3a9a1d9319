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

// Command line front end: ground-state diagnostics, agent training, coupling
// scans, chain-size transfer, exact window minima and the inverted-coupling
// reference curves.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "disent/agent.hpp"
#include "disent/circuit.hpp"
#include "disent/models.hpp"
#include "disent/optimizer.hpp"
#include "disent/oracle.hpp"
#include "disent/scan.hpp"
#include "disent/state.hpp"
#include "disent/version.hpp"

namespace fs = std::filesystem;
using namespace disent;

namespace {

struct OutDir {
  std::string path;
  bool force = false;
};

void add_out_options(CLI::App* cmd, OutDir& out) {
  cmd->add_option("--out", out.path, "Output directory");
  cmd->add_flag("--force", out.force, "Overwrite existing results in the output directory");
}

// Required flags are enforced after the config merge so a config file can
// satisfy them too.
int require_set(CLI::App* cmd, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (cmd->count(name) == 0) {
      std::fprintf(stderr, "%s is required\nRun with --help for more information.\n", name);
      return 2;
    }
  }
  return 0;
}

// Creates the directory and writes the resolved configuration. Refuses to
// touch a directory that already holds results unless --force is given.
void prepare_out_dir(const OutDir& out, CLI::App* cmd) {
  if (out.path.empty()) return;
  fs::path dir(out.path);
  fs::path marker = dir / "config.txt";
  if (fs::exists(marker) && !out.force) {
    throw std::runtime_error("output directory '" + out.path + "' already holds results; pass --force to overwrite");
  }
  fs::create_directories(dir);
  std::ofstream os(marker);
  if (!os) throw std::runtime_error("cannot write '" + marker.string() + "'");
  os << "# disent " << kVersionString << "\n";
  os << "# command " << cmd->get_name() << "\n";
  os << cmd->config_to_str(true, false);
}

std::ofstream open_out_file(const OutDir& out, const std::string& name) {
  fs::path p = fs::path(out.path) / name;
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

ModelKind parse_model(const std::string& name) { return model_from_name(name); }

std::vector<int> rp_sites_for_window(int window_size, int target, int n_sites) {
  std::vector<int> rp;
  auto wrap = [&](int s) { return ((s % n_sites) + n_sites) % n_sites; };
  if (window_size == 2) {
    rp = {wrap(target + 1), target};
  } else if (window_size == 3 || window_size == 5) {
    int radius = window_size / 2;
    for (int off = -radius; off <= radius; ++off) {
      if (off != 0) rp.push_back(wrap(target + off));
    }
    rp.push_back(target);
  } else {
    throw std::runtime_error("window must be 2, 3 or 5 sites");
  }
  return rp;
}

int run_ground(ModelKind kind, int n, double coupling, int target, double tol, std::uint64_t seed) {
  GroundStateResult gs = ground_state({kind, n, coupling}, tol, seed);
  std::printf("model = %s\n", model_name(kind));
  std::printf("n_sites = %d\n", n);
  std::printf("coupling = %.12g\n", coupling);
  std::printf("energy = %.12g\n", gs.energy);
  std::printf("entropy = %.12g\n", entropy_of_site(gs.state, target));
  std::printf("gap = %.12g\n", gs.gap);
  std::printf("residual = %.3g\n", gs.residual);
  std::printf("degenerate = %d\n", gs.degenerate ? 1 : 0);
  return 0;
}

int run_oracle(ModelKind kind, int n, double coupling, int target, int window, double tol) {
  GroundStateResult gs = ground_state({kind, n, coupling}, tol);
  std::vector<int> windows = window > 0 ? std::vector<int>{window} : std::vector<int>{2, 3, 5};
  for (int w : windows) {
    std::vector<int> rp = rp_sites_for_window(w, target, n);
    int d_r = 1 << (rp.size() - 1);
    auto [value, spectrum] = min_window_entropy(reduced_density(gs.state, rp), 2, d_r);
    std::printf("window %d: %.12g\n", w, value);
  }
  std::printf("raw: %.12g\n", entropy_of_site(gs.state, target));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disentangling-circuit laboratory for spin chains"};
  app.set_version_flag("--version", std::string("disent ") + kVersionString);
  app.require_subcommand(1);

  std::string model_name_arg = "tfim";
  int n_sites = 8;
  int target = 0;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd, bool with_target = true) {
    cmd->add_option("--model", model_name_arg, "Chain model (tfim or xxz)")
        ->check(CLI::IsMember({"tfim", "xxz"}))
        ->capture_default_str();
    cmd->add_option("--n", n_sites, "Number of sites")->capture_default_str();
    if (with_target) cmd->add_option("--target", target, "Target site")->capture_default_str();
    cmd->add_option("--tol", tol, "Ground-state solver tolerance")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("--config", config_path, "Read options from a key = value file (flags win)")
        ->configurable(false);
    cmd->allow_config_extras(false);
  };

  // ground
  double coupling = 1.0;
  CLI::App* ground = app.add_subcommand("ground", "Solve for the ground state and report target-site entropy");
  add_common(ground);
  ground->add_option("--coupling", coupling, "Coupling value");

  // oracle
  int oracle_window = 0;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact window entropy minima for the ground state");
  add_common(oracle);
  oracle->add_option("--coupling", coupling, "Coupling value");
  oracle->add_option("--window", oracle_window, "Window size (2, 3 or 5); default prints all")
      ->check(CLI::IsMember({2, 3, 5}));

  // train
  double coupling_a = 0.5, coupling_b = 1.5;
  int radius = 1, layers = 2;
  TrainConfig tcfg;
  OutDir train_out;
  CLI::App* train = app.add_subcommand("train", "Train the circuit-building agent at two couplings");
  add_common(train);
  train->add_option("--a", coupling_a, "First training coupling")->capture_default_str();
  train->add_option("--b", coupling_b, "Second training coupling")->capture_default_str();
  train->add_option("--radius", radius, "Window radius")->check(CLI::IsMember({1, 2}))->capture_default_str();
  train->add_option("--layers", layers, "Layer budget p")->capture_default_str();
  train->add_option("--episodes", tcfg.episodes, "Training episodes per coupling")->capture_default_str();
  train->add_option("--minibatch", tcfg.minibatch, "Replay minibatch size")->capture_default_str();
  train->add_option("--capacity", tcfg.replay_capacity, "Replay buffer capacity")->capture_default_str();
  train->add_option("--lr", tcfg.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--stagnation", tcfg.stagnation_limit, "Early-stop patience in episodes")->capture_default_str();
  add_out_options(train, train_out);

  // scan
  std::string grid_text = "0.5:0.1:1.5";
  std::string circuit_a_path, circuit_b_path;
  std::string init_name = "trained";
  bool no_reopt = false, no_dual = false;
  OutDir scan_out;
  CLI::App* scan = app.add_subcommand("scan", "Evaluate trained circuits across a coupling grid");
  add_common(scan, false);
  scan->add_option("--grid", grid_text, "Coupling grid start:step:stop")->capture_default_str();
  scan->add_option("--circuit-a", circuit_a_path, "Circuit file for the first side");
  scan->add_option("--circuit-b", circuit_b_path, "Circuit file for the second side");
  scan->add_option("--init", init_name, "Angle init at each grid point")
      ->check(CLI::IsMember({"trained", "allpi", "uniform0", "uniform-half-pi", "uniform-pi"}))
      ->capture_default_str();
  scan->add_flag("--no-reopt", no_reopt, "Evaluate stored angles without re-optimizing");
  scan->add_flag("--no-dual", no_dual, "Skip the inverted-coupling reference column");
  add_out_options(scan, scan_out);

  // transfer
  std::vector<int> sizes = {10, 12, 14};
  OutDir transfer_out;
  CLI::App* transfer = app.add_subcommand("transfer", "Re-anchor trained circuits onto other chain sizes and scan");
  add_common(transfer, false);
  transfer->add_option("--grid", grid_text, "Coupling grid start:step:stop")->capture_default_str();
  transfer->add_option("--sizes", sizes, "Chain sizes")->delimiter(',')->capture_default_str();
  transfer->add_option("--circuit-a", circuit_a_path, "Circuit file for the first side");
  transfer->add_option("--circuit-b", circuit_b_path, "Circuit file for the second side");
  transfer->add_option("--init", init_name, "Angle init at each grid point")
      ->check(CLI::IsMember({"trained", "allpi", "uniform0", "uniform-half-pi", "uniform-pi"}))
      ->capture_default_str();
  transfer->add_flag("--no-reopt", no_reopt, "Evaluate stored angles without re-optimizing");
  transfer->add_flag("--no-dual", no_dual, "Skip the inverted-coupling reference column");
  add_out_options(transfer, transfer_out);

  // duality
  OutDir duality_out;
  CLI::App* duality = app.add_subcommand("duality", "Two-site reference curve against its inverted-coupling image");
  add_common(duality, false);
  duality->add_option("--grid", grid_text, "Coupling grid start:step:stop")->capture_default_str();
  add_out_options(duality, duality_out);

  CLI::App* commands[6] = {ground, oracle, train, scan, transfer, duality};
  try {
    app.parse(argc, argv);
    // Merge the config file into whichever subcommand ran; values already
    // given on the command line are left alone.
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) {
        std::fprintf(stderr, "cannot read config file '%s'\n", config_path.c_str());
        return 2;
      }
      for (CLI::App* cmd : commands) {
        if (*cmd) cmd->parse_from_stream(is);
      }
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    app.exit(e);
    return 2;
  }

  if (*ground || *oracle) {
    if (int rc = require_set(*ground ? ground : oracle, {"--coupling"})) return rc;
  }
  if (*train) {
    if (int rc = require_set(train, {"--out"})) return rc;
  }
  if (*scan || *transfer) {
    if (int rc = require_set(*scan ? scan : transfer, {"--circuit-a", "--circuit-b", "--out"})) return rc;
  }

  try {
    ModelKind kind = parse_model(model_name_arg);

    if (*ground) return run_ground(kind, n_sites, coupling, target, tol, seed);

    if (*oracle) return run_oracle(kind, n_sites, coupling, target, oracle_window, tol);

    if (*train) {
      prepare_out_dir(train_out, train);
      tcfg.solver_tol = tol;
      tcfg.seed = seed;
      WindowSpec window{n_sites, target, radius};
      auto [res_a, res_b] = train_pair(kind, n_sites, coupling_a, coupling_b, window, layers, tcfg);
      const TrainResult* results[2] = {&res_a, &res_b};
      const char* names[2] = {"a", "b"};
      double couplings[2] = {coupling_a, coupling_b};
      for (int s = 0; s < 2; ++s) {
        const TrainResult& r = *results[s];
        save_circuit(train_out.path + "/circuit_" + names[s] + ".txt", r.best_architecture,
                     std::span<const double>(r.best_params.data(), r.best_params.size()));
        std::ofstream log = open_out_file(train_out, std::string("train_") + names[s] + ".csv");
        write_training_log(log, r.log);
        std::printf("side %s: coupling %.6g, episodes %d, best reward %.6f, entropy %.6g (baseline %.6g)\n",
                    names[s], couplings[s], r.episodes_run, r.best_reward, r.best_entropy, r.baseline_entropy);
      }
      return 0;
    }

    if (*scan) {
      prepare_out_dir(scan_out, scan);
      std::vector<double> grid = parse_grid(grid_text);
      ScanOptions opts;
      opts.reoptimize = !no_reopt;
      opts.init = scan_init_from_name(init_name);
      opts.dual_reference = !no_dual;
      opts.solver_tol = tol;
      opts.seed = seed;
      ScanResult res = scan_curves(kind, n_sites, grid, load_circuit(circuit_a_path), load_circuit(circuit_b_path),
                                   opts);
      std::ofstream os = open_out_file(scan_out, "scan.csv");
      write_scan_csv(os, res);
      if (res.crossing) {
        std::printf("crossing = %.6g%s\n", *res.crossing, res.ambiguous ? " (ambiguous)" : "");
      } else {
        std::printf("crossing = none%s\n", res.ambiguous ? " (curves identical)" : "");
      }
      for (const std::string& note : res.notes) std::fprintf(stderr, "note: %s\n", note.c_str());
      return 0;
    }

    if (*transfer) {
      prepare_out_dir(transfer_out, transfer);
      std::vector<double> grid = parse_grid(grid_text);
      ScanOptions opts;
      opts.reoptimize = !no_reopt;
      opts.init = scan_init_from_name(init_name);
      opts.dual_reference = !no_dual;
      opts.solver_tol = tol;
      opts.seed = seed;
      auto results = transfer_scan(kind, sizes, grid, load_circuit(circuit_a_path), load_circuit(circuit_b_path),
                                   opts);
      for (const auto& [n, res] : results) {
        std::ofstream os = open_out_file(transfer_out, "scan_n" + std::to_string(n) + ".csv");
        write_scan_csv(os, res);
        if (res.crossing) {
          std::printf("n=%d: crossing = %.6g%s\n", n, *res.crossing, res.ambiguous ? " (ambiguous)" : "");
        } else {
          std::printf("n=%d: crossing = none\n", n);
        }
      }
      return 0;
    }

    if (*duality) {
      std::vector<double> grid = parse_grid(grid_text);
      auto [direct, dual] = reference_curves(kind, n_sites, grid, tol);
      double max_diff = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) max_diff = std::max(max_diff, std::abs(direct[i] - dual[i]));
      if (!duality_out.path.empty()) {
        prepare_out_dir(duality_out, duality);
        std::ofstream os = open_out_file(duality_out, "duality.csv");
        os << "coupling,direct,dual\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
          os << detail::format_g17(grid[i]) << "," << detail::format_g17(direct[i]) << ","
             << detail::format_g17(dual[i]) << "\n";
        }
      }
      std::printf("max |direct - dual| = %.6g\n", max_diff);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
