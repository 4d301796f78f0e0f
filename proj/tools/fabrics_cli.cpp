// Copyright 2026 The Fabrics Authors
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

// Batch front end: runs scenarios, ships the built-in demos, renders
// trajectory snapshots, and executes the invariant self-check suite.
//
// Exit codes: 0 success, 1 validation error, 2 runtime/rollout failure,
// 3 invariant failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fabrics/fabrics.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationExit = 1;
constexpr int kRuntimeExit = 2;
constexpr int kInvariantExit = 3;

std::string scenario_dir() {
  if (const char* env = std::getenv("FABRICS_SCENARIO_DIR")) return env;
#ifdef FABRICS_DEFAULT_SCENARIO_DIR
  return FABRICS_DEFAULT_SCENARIO_DIR;
#else
  return "scenarios";
#endif
}

int run_scenario_file(fabrics::Scenario s, const std::string& out_dir,
                      int snapshots) {
  fabrics::RunOptions opts;
  opts.out_dir = out_dir;
  opts.snapshots = snapshots;
  const fabrics::RunSummary summary = fabrics::run_scenario(s, opts);
  for (std::size_t i = 0; i < summary.episodes.size(); ++i) {
    const auto& e = summary.episodes[i];
    std::printf(
        "episode %zu: goal=(%.3f, %.3f) converged=%s settle=%.2fs "
        "kkt=%.3e ee_err=%.3e min_limit=%.3e\n",
        i, e.goal.x(), e.goal.y(), e.report.converged ? "yes" : "no",
        e.report.settle_time, e.report.kkt_residual, e.ee_error,
        e.report.min_limit_distance);
    if (e.traj.failed()) {
      std::printf("episode %zu: rollout aborted: %s\n", i, e.traj.error.c_str());
    }
  }
  std::printf("wrote artifacts to %s\n", out_dir.c_str());
  return summary.all_converged ? kOk : kRuntimeExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimization-fabric scenario runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario file");
  std::string run_path, run_out = "out";
  double run_dt = 0.0;
  std::uint64_t run_seed = 0;
  int run_snapshots = 12;
  run->add_option("scenario", run_path, "scenario JSON file")->required();
  run->add_option("--out", run_out, "output directory");
  run->add_option("--dt", run_dt, "override integration step");
  run->add_option("--seed", run_seed, "override scenario seed");
  run->add_option("--snapshots", run_snapshots, "poses per SVG (default 12)");

  auto* demo = app.add_subcommand("demo", "run a built-in demo scenario");
  std::string demo_name;
  std::string demo_out;
  demo->add_option("name", demo_name, "reach | redundancy | shaping")
      ->required()
      ->check(CLI::IsMember({"reach", "redundancy", "shaping"}));
  demo->add_option("--out", demo_out, "output directory (default demo_<name>)");

  auto* check = app.add_subcommand("check", "run the invariant self-check suite");
  std::uint64_t check_seed = 0;
  bool inject_fault = false;
  check->add_option("--seed", check_seed, "sampling seed");
  check->add_flag("--inject-fault", inject_fault,
                  "corrupt one computation to prove the suite catches it")
      ->group("");  // hidden: test hook

  auto* plot = app.add_subcommand("plot", "render a trajectory CSV to SVG");
  std::string plot_csv, plot_arm, plot_out = "plot.svg";
  int plot_snapshots = 12;
  plot->add_option("trajectory", plot_csv, "trajectory CSV file")->required();
  plot->add_option("--arm", plot_arm, "scenario JSON supplying the arm")
      ->required();
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--snapshots", plot_snapshots, "poses to draw (default 12)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // app.exit prints CLI11's message but returns its own code family;
    // fold every argument error into the documented validation exit.
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationExit;
  }

  try {
    if (run->parsed()) {
      fabrics::Scenario s = fabrics::load_scenario(run_path);
      if (run_dt > 0.0) s.sim.dt = run_dt;
      if (run->count("--seed") > 0) s.sim.seed = run_seed;
      return run_scenario_file(std::move(s), run_out, run_snapshots);
    }

    if (demo->parsed()) {
      const std::string path =
          (std::filesystem::path(scenario_dir()) / (demo_name + ".json"))
              .string();
      const std::string out = demo_out.empty() ? "demo_" + demo_name : demo_out;
      return run_scenario_file(fabrics::load_scenario(path), out, 12);
    }

    if (check->parsed()) {
      const auto checks = fabrics::invariant_suite(check_seed, inject_fault);
      for (const auto& c : checks) {
        std::printf("%-32s tol=%-12.3e observed=%-12.3e %s\n", c.name.c_str(),
                    c.tolerance, c.observed, c.pass ? "PASS" : "FAIL");
      }
      const bool ok = fabrics::all_pass(checks);
      std::printf("invariant suite: %s\n", ok ? "all checks passed" : "FAILURES");
      return ok ? kOk : kInvariantExit;
    }

    if (plot->parsed()) {
      const fabrics::Scenario s = fabrics::load_scenario(plot_arm);
      const fabrics::CsvTable table = fabrics::read_csv(plot_csv);
      const int n = s.arm.dof();
      std::vector<std::vector<double>> joints;
      for (int i = 0; i < n; ++i) {
        joints.push_back(table.column("q" + std::to_string(i)));
      }
      const auto ee_x = table.column("ee_x");
      const auto ee_y = table.column("ee_y");
      std::vector<fabrics::Vec> configs;
      std::vector<Eigen::Vector2d> ee;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        fabrics::Vec q(n);
        for (int i = 0; i < n; ++i) q[i] = joints[i][r];
        configs.push_back(q);
        ee.emplace_back(ee_x[r], ee_y[r]);
      }
      fabrics::SvgOptions opts;
      opts.snapshots = plot_snapshots;
      opts.goals = s.goals;
      opts.draw_floor = s.workspace.has_floor;
      opts.floor_height = s.workspace.floor_height;
      fabrics::write_arm_svg(plot_out, s.arm, configs, ee, opts);
      std::printf("wrote %s\n", plot_out.c_str());
      return kOk;
    }
  } catch (const fabrics::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidationExit;
  } catch (const fabrics::DimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidationExit;
  } catch (const fabrics::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeExit;
  }
  return kOk;
}
