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

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fabrics/fabric_terms.hpp"
#include "fabrics/io.hpp"
#include "fabrics/planar_arm.hpp"
#include "fabrics/simulate.hpp"
#include "fabrics/speed_control.hpp"
#include "fabrics/transform_tree.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// A scenario bundles the arm, the behavior terms, the sequence of goals,
// the driving potential, and the regulator settings. Each goal is run as
// one episode; episodes chain, starting from the previous final state.

struct TermEntry {
  std::string kind;   // attractor | joint_limits | default_config |
                      // base_inertia | floor_lift | floor_limit |
                      // vertical_approach
  std::string space;  // ee | joints
  TermParams params;
  std::optional<Vec> q0;  // default_config only; defaults to start_q
};

struct PotentialParams {
  std::string kind = "soft_distance";  // or quadratic
  double k = 4.0;
  double alpha = 10.0;
};

struct WorkspaceParams {
  bool has_floor = false;
  double floor_height = 0.0;
  double clearance = 0.4;
};

struct SpeedParams {
  double eta = 0.0;
  double base_damping = 0.02;
  double switch_damping = 4.0;
  double switch_radius = 1.5;
  BoostConfig boost;
  double execution_scale = 1.0;
};

struct SimParams {
  double dt = 0.01;
  double t_max = 10.0;
  double stop_speed = 1e-4;
  double stop_hold = 0.5;
  std::uint64_t seed = 0;
};

struct Scenario {
  std::string name;
  ArmModel arm;
  Vec start_q;
  std::vector<Eigen::Vector2d> goals;
  std::vector<TermEntry> terms;
  PotentialParams potential;
  WorkspaceParams workspace;
  SpeedParams speed;
  SimParams sim;
};

// ---------------------------------------------------------------------------
// Parsing and validation. Every diagnostic names the offending field path.

namespace scenario_detail {

using nlohmann::json;

inline const json& require_field(const json& obj, const std::string& key,
                                 const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError("scenario: missing field " + path);
  }
  return obj.at(key);
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) {
    throw ValidationError("scenario: field " + path + " must be a number");
  }
  return v.get<double>();
}

inline double require_number(const json& obj, const std::string& key,
                             const std::string& path) {
  return as_number(require_field(obj, key, path), path);
}

inline double optional_number(const json& obj, const std::string& key,
                              const std::string& path, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return as_number(obj.at(key), path);
}

inline std::vector<double> require_number_list(const json& obj,
                                               const std::string& key,
                                               const std::string& path) {
  const json& v = require_field(obj, key, path);
  if (!v.is_array() || v.empty()) {
    throw ValidationError("scenario: field " + path +
                          " must be a non-empty array");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

inline TermParams parse_params(const json& obj, const std::string& path) {
  TermParams p;
  if (!obj.is_object()) return p;
  p.k = optional_number(obj, "k", path + ".k", p.k);
  p.lambda = optional_number(obj, "lambda", path + ".lambda", p.lambda);
  p.lambda_g = optional_number(obj, "lambda_g", path + ".lambda_g", p.lambda_g);
  p.alpha = optional_number(obj, "alpha", path + ".alpha", p.alpha);
  p.sigma = optional_number(obj, "sigma", path + ".sigma", p.sigma);
  if (p.k <= 0.0) throw ValidationError("scenario: field " + path + ".k must be > 0");
  if (p.lambda <= 0.0) {
    throw ValidationError("scenario: field " + path + ".lambda must be > 0");
  }
  if (p.lambda_g < 1.0) {
    throw ValidationError("scenario: field " + path +
                          ".lambda_g must be >= 1 to keep limits repelling");
  }
  if (p.alpha <= 0.0) {
    throw ValidationError("scenario: field " + path + ".alpha must be > 0");
  }
  if (p.sigma < 0.0) {
    throw ValidationError("scenario: field " + path + ".sigma must be >= 0");
  }
  return p;
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const nlohmann::json& j,
                               const std::string& name) {
  using namespace scenario_detail;
  Scenario s;
  s.name = j.contains("name") && j["name"].is_string()
               ? j["name"].get<std::string>()
               : name;

  // --- arm ---
  const json& arm = require_field(j, "arm", "arm");
  const auto lengths = require_number_list(arm, "link_lengths", "arm.link_lengths");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] <= 0.0) {
      throw ValidationError("scenario: field arm.link_lengths[" +
                            std::to_string(i) + "] must be > 0");
    }
  }
  s.arm.link_lengths = lengths;
  const auto lower = require_number_list(arm, "joint_lower", "arm.joint_lower");
  const auto upper = require_number_list(arm, "joint_upper", "arm.joint_upper");
  if (lower.size() != lengths.size() || upper.size() != lengths.size()) {
    throw ValidationError(
        "scenario: arm.joint_lower/arm.joint_upper must match link count");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw ValidationError("scenario: field arm.joint_lower[" +
                            std::to_string(i) + "] must be < arm.joint_upper[" +
                            std::to_string(i) + "]");
    }
  }
  s.arm.joint_lower = lower;
  s.arm.joint_upper = upper;
  if (arm.contains("base_position")) {
    const auto bp = require_number_list(arm, "base_position", "arm.base_position");
    if (bp.size() != 2) {
      throw ValidationError("scenario: field arm.base_position must have 2 entries");
    }
    s.arm.base_position << bp[0], bp[1];
  }
  s.arm.base_orientation =
      optional_number(arm, "base_orientation", "arm.base_orientation", 0.0);
  const int n = s.arm.dof();

  // --- start configuration ---
  if (j.contains("start_q")) {
    const auto sq = require_number_list(j, "start_q", "start_q");
    if (static_cast<int>(sq.size()) != n) {
      throw ValidationError("scenario: field start_q must have one entry per joint");
    }
    s.start_q = to_vec(sq);
  } else {
    s.start_q = Vec::Zero(n);
  }
  for (int i = 0; i < n; ++i) {
    if (s.start_q[i] <= s.arm.joint_lower[i] ||
        s.start_q[i] >= s.arm.joint_upper[i]) {
      throw ValidationError("scenario: field start_q[" + std::to_string(i) +
                            "] must lie strictly inside the joint limits");
    }
  }

  // --- goals ---
  const json& goals = require_field(j, "goals", "goals");
  if (!goals.is_array() || goals.empty()) {
    throw ValidationError("scenario: field goals must be a non-empty array");
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const std::string path = "goals[" + std::to_string(i) + "]";
    if (!goals[i].is_array() || goals[i].size() != 2) {
      throw ValidationError("scenario: field " + path +
                            " must be a 2-entry position");
    }
    s.goals.emplace_back(as_number(goals[i][0], path + "[0]"),
                         as_number(goals[i][1], path + "[1]"));
  }

  // --- workspace (optional; required by floor terms) ---
  if (j.contains("workspace")) {
    const json& ws = j["workspace"];
    s.workspace.has_floor = ws.contains("floor_height");
    s.workspace.floor_height =
        optional_number(ws, "floor_height", "workspace.floor_height", 0.0);
    s.workspace.clearance =
        optional_number(ws, "clearance", "workspace.clearance", 0.4);
    if (s.workspace.clearance <= 0.0) {
      throw ValidationError("scenario: field workspace.clearance must be > 0");
    }
  }

  // --- terms ---
  const json& terms = require_field(j, "terms", "terms");
  if (!terms.is_array() || terms.empty()) {
    throw ValidationError("scenario: field terms must be a non-empty array");
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string path = "terms[" + std::to_string(i) + "]";
    const json& t = terms[i];
    TermEntry e;
    const json& kind = require_field(t, "kind", path + ".kind");
    if (!kind.is_string()) {
      throw ValidationError("scenario: field " + path + ".kind must be a string");
    }
    e.kind = kind.get<std::string>();

    const bool ee_kind = e.kind == "attractor" || e.kind == "floor_lift" ||
                         e.kind == "floor_limit" ||
                         e.kind == "vertical_approach";
    const bool joint_kind = e.kind == "joint_limits" ||
                            e.kind == "default_config" ||
                            e.kind == "base_inertia";
    if (!ee_kind && !joint_kind) {
      throw ValidationError("scenario: field " + path + ".kind unknown: " + e.kind);
    }
    e.space = ee_kind ? "ee" : "joints";
    if (t.contains("space")) {
      const json& sp = t["space"];
      if (!sp.is_string() || sp.get<std::string>() != e.space) {
        throw ValidationError("scenario: field " + path + ".space must be \"" +
                              e.space + "\" for kind " + e.kind);
      }
    }
    e.params = parse_params(t.contains("params") ? t["params"] : json::object(),
                            path + ".params");

    if (e.kind == "floor_lift" || e.kind == "vertical_approach") {
      if (e.params.sigma == 0.0) {
        if (!s.workspace.has_floor) {
          throw ValidationError("scenario: field " + path +
                                ".params.sigma required (no workspace.clearance "
                                "to derive it from)");
        }
        e.params.sigma = (e.kind == "floor_lift" ? 0.5 : 0.8) *
                         s.workspace.clearance;
      }
      if (e.kind == "floor_lift" && !s.workspace.has_floor) {
        throw ValidationError(
            "scenario: field workspace.floor_height required by " + path);
      }
    }
    if (e.kind == "floor_limit" && !s.workspace.has_floor) {
      throw ValidationError(
          "scenario: field workspace.floor_height required by " + path);
    }
    if (e.kind == "default_config" && t.contains("q0")) {
      const auto q0 = require_number_list(t, "q0", path + ".q0");
      if (static_cast<int>(q0.size()) != n) {
        throw ValidationError("scenario: field " + path +
                              ".q0 must have one entry per joint");
      }
      e.q0 = to_vec(q0);
    }
    s.terms.push_back(std::move(e));
  }

  // --- potential ---
  if (j.contains("potential")) {
    const json& p = j["potential"];
    if (p.contains("kind")) {
      if (!p["kind"].is_string()) {
        throw ValidationError("scenario: field potential.kind must be a string");
      }
      s.potential.kind = p["kind"].get<std::string>();
      if (s.potential.kind != "soft_distance" && s.potential.kind != "quadratic") {
        throw ValidationError("scenario: field potential.kind unknown: " +
                              s.potential.kind);
      }
    }
    s.potential.k = optional_number(p, "k", "potential.k", s.potential.k);
    s.potential.alpha =
        optional_number(p, "alpha", "potential.alpha", s.potential.alpha);
    if (s.potential.k <= 0.0) {
      throw ValidationError("scenario: field potential.k must be > 0");
    }
    if (s.potential.alpha <= 0.0) {
      throw ValidationError("scenario: field potential.alpha must be > 0");
    }
  }

  // --- speed control ---
  if (j.contains("speed_control")) {
    const json& sc = j["speed_control"];
    s.speed.eta = optional_number(sc, "eta", "speed_control.eta", s.speed.eta);
    if (s.speed.eta < 0.0 || s.speed.eta > 1.0) {
      throw ValidationError("scenario: field speed_control.eta must be in [0,1]");
    }
    s.speed.base_damping = optional_number(sc, "base_damping",
                                           "speed_control.base_damping",
                                           s.speed.base_damping);
    if (s.speed.base_damping <= 0.0) {
      throw ValidationError(
          "scenario: field speed_control.base_damping must be > 0");
    }
    s.speed.switch_damping = optional_number(sc, "switch_damping",
                                             "speed_control.switch_damping",
                                             s.speed.switch_damping);
    if (s.speed.switch_damping < 0.0) {
      throw ValidationError(
          "scenario: field speed_control.switch_damping must be >= 0");
    }
    s.speed.switch_radius = optional_number(sc, "switch_radius",
                                            "speed_control.switch_radius",
                                            s.speed.switch_radius);
    if (s.speed.switch_radius <= 0.0) {
      throw ValidationError(
          "scenario: field speed_control.switch_radius must be > 0");
    }
    s.speed.execution_scale = optional_number(sc, "execution_scale",
                                              "speed_control.execution_scale",
                                              s.speed.execution_scale);
    if (s.speed.execution_scale <= 0.0) {
      throw ValidationError(
          "scenario: field speed_control.execution_scale must be > 0");
    }
    if (sc.contains("boost")) {
      const json& b = sc["boost"];
      s.speed.boost.target_speed = optional_number(
          b, "target_speed", "speed_control.boost.target_speed", 0.0);
      s.speed.boost.gain =
          optional_number(b, "gain", "speed_control.boost.gain", 0.0);
      s.speed.boost.window =
          optional_number(b, "window", "speed_control.boost.window", 0.0);
      if (s.speed.boost.target_speed < 0.0 || s.speed.boost.gain < 0.0 ||
          s.speed.boost.window < 0.0) {
        throw ValidationError(
            "scenario: fields under speed_control.boost must be >= 0");
      }
    }
  }

  // --- sim ---
  const json& sim = require_field(j, "sim", "sim");
  s.sim.dt = require_number(sim, "dt", "sim.dt");
  if (s.sim.dt <= 0.0) {
    throw ValidationError("scenario: field sim.dt must be > 0");
  }
  s.sim.t_max = require_number(sim, "t_max", "sim.t_max");
  if (s.sim.t_max <= 0.0) {
    throw ValidationError("scenario: field sim.t_max must be > 0");
  }
  s.sim.stop_speed =
      optional_number(sim, "stop_speed", "sim.stop_speed", s.sim.stop_speed);
  if (s.sim.stop_speed <= 0.0) {
    throw ValidationError("scenario: field sim.stop_speed must be > 0");
  }
  s.sim.stop_hold =
      optional_number(sim, "stop_hold", "sim.stop_hold", s.sim.stop_hold);
  if (s.sim.stop_hold < 0.0) {
    throw ValidationError("scenario: field sim.stop_hold must be >= 0");
  }
  s.sim.seed = static_cast<std::uint64_t>(
      optional_number(sim, "seed", "sim.seed", 0.0));
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("scenario: parse error in " + path + ": " + e.what());
  }
  return parse_scenario(j, std::filesystem::path(path).stem().string());
}

// ---------------------------------------------------------------------------
// Episode assembly: instantiate the transform tree and regulator for one
// goal of the scenario.

struct EpisodeSetup {
  TransformTree tree;
  EnergyLagrangian fabric_energy;
  Potential psi_ws;    // on the end-effector workspace
  Potential psi_root;  // pulled back to the joint space
  std::vector<TaskMap> limit_maps;
  SpeedControlConfig cfg;
};

inline EpisodeSetup build_episode(const Scenario& s,
                                  const Eigen::Vector2d& goal) {
  EpisodeSetup ep;
  const int n = s.arm.dof();
  ep.tree.root_dim = n;
  const TaskMap ee = ee_taskmap(s.arm);
  ep.limit_maps = joint_limit_maps(s.arm);
  Vec goal_v(2);
  goal_v << goal.x(), goal.y();

  for (const TermEntry& e : s.terms) {
    if (e.kind == "attractor") {
      ep.tree.add(ee, attractor_term(goal_v, e.params));
    } else if (e.kind == "vertical_approach") {
      ep.tree.add(ee, vertical_approach_term(goal_v, e.params));
    } else if (e.kind == "floor_lift") {
      ep.tree.add(ee, floor_lift_term(s.workspace.floor_height, e.params));
    } else if (e.kind == "floor_limit") {
      // Height above the floor is a limit coordinate like any joint's
      // distance to its bound, so the same barrier geometry applies.
      Mat row(1, 2);
      row << 0.0, 1.0;
      Vec off(1);
      off << -s.workspace.floor_height;
      ep.tree.add(compose(affine_map(row, off), ee),
                  joint_limit_term(e.params, "floor_limit"));
    } else if (e.kind == "default_config") {
      ep.tree.add(identity_map(n),
                  default_config_term(e.q0.value_or(s.start_q), e.params));
    } else if (e.kind == "base_inertia") {
      ep.tree.add(identity_map(n), base_inertia_term(n, e.params));
    } else if (e.kind == "joint_limits") {
      for (const TaskMap& lim : ep.limit_maps) {
        ep.tree.add(lim, joint_limit_term(e.params));
      }
    }
  }
  ep.fabric_energy = tree_energy(ep.tree);

  ep.psi_ws = s.potential.kind == "quadratic"
                  ? quadratic_potential(goal_v, s.potential.k)
                  : soft_distance_potential(goal_v, s.potential.k,
                                            s.potential.alpha);
  ep.psi_root = pullback_potential(ep.psi_ws, ee);

  ep.cfg.eta = s.speed.eta;
  ep.cfg.base_damping = s.speed.base_damping;
  ep.cfg.switch_damping = s.speed.switch_damping;
  ep.cfg.switch_fn = make_gradient_switch(ep.psi_root, s.speed.switch_radius);
  ep.cfg.boost = s.speed.boost;
  ep.cfg.execution_energy = euclidean_energy(n, s.speed.execution_scale);
  return ep;
}

// ---------------------------------------------------------------------------
// Scenario execution: sequential episodes, chained states, artifact files.

// Channels recorded at every trajectory row, in this order.
inline const std::vector<std::string>& episode_channel_names() {
  static const std::vector<std::string> names = {
      "H_fabric", "H_exec",      "psi",      "grad_norm",
      "alpha_ex0", "alpha_ex_psi", "alpha_le", "alpha_ex_eta",
      "beta",      "alpha_boost",  "alpha_reg"};
  return names;
}

struct EpisodeResult {
  Eigen::Vector2d goal;
  Trajectory traj;
  ConvergenceReport report;
  Vec final_q;
  double ee_error = 0.0;
};

struct RunSummary {
  std::string name;
  std::vector<EpisodeResult> episodes;
  bool all_converged = false;
};

struct RunOptions {
  std::string out_dir;  // empty: keep everything in memory
  bool emit_svg = true;
  int snapshots = 12;
};

inline EpisodeResult run_episode(const Scenario& s, const EpisodeSetup& ep,
                                 const Eigen::Vector2d& goal, const Vec& q0,
                                 const Vec& qd0) {
  // The diagnostics of the most recent acceleration evaluation; the rollout
  // records each row's qdd immediately before sampling the channels, so the
  // stash holds the row state's diagnostics at that point.
  auto diag = std::make_shared<SpeedDiagnostics>();
  const AccelFn accel = [&s, &ep, diag](double t, const Vec& q,
                                        const Vec& qd) -> Vec {
    const SpecEval root = tree_resolve(ep.tree, q, qd);
    return controlled_acceleration(root, ep.fabric_energy, ep.psi_root,
                                   ep.cfg, q, qd, t, diag.get());
  };

  RolloutOptions opts;
  opts.stop = make_speed_stop(s.sim.stop_speed, s.sim.stop_hold);
  opts.channel_names = episode_channel_names();
  opts.channels = [&s, &ep, diag](double, const Vec& q,
                                  const Vec& qd) -> std::vector<double> {
    return {hamiltonian(ep.fabric_energy, q, qd),
            hamiltonian(ep.cfg.execution_energy, q, qd),
            ep.psi_root.value(q),
            ep.psi_root.gradient(q).norm(),
            diag->alphas.alpha_ex0,
            diag->alphas.alpha_ex_psi,
            diag->alphas.alpha_le,
            diag->alpha_ex_eta,
            diag->beta,
            diag->alpha_boost,
            diag->alpha_reg};
  };

  EpisodeResult out;
  out.goal = goal;
  out.traj = rollout(accel, q0, qd0, s.sim.dt, s.sim.t_max, opts);
  if (out.traj.rows() == 0) {
    // Even the initial state failed to evaluate; nothing to report on.
    throw Error("rollout aborted before the first step: " + out.traj.error);
  }
  out.report = convergence_report(out.traj, ep.psi_root, ep.limit_maps,
                                  s.sim.stop_speed, s.sim.stop_hold);
  out.final_q = out.traj.q.back();
  out.ee_error = (fk(s.arm, out.final_q).back() - goal).norm();
  return out;
}

inline RunSummary run_scenario(const Scenario& s, const RunOptions& opts = {}) {
  namespace fs = std::filesystem;
  RunSummary summary;
  summary.name = s.name;
  summary.all_converged = true;

  if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);

  Vec q = s.start_q;
  Vec qd = Vec::Zero(s.arm.dof());
  for (std::size_t i = 0; i < s.goals.size(); ++i) {
    const EpisodeSetup ep = build_episode(s, s.goals[i]);
    EpisodeResult res = run_episode(s, ep, s.goals[i], q, qd);
    q = res.traj.q.back();
    qd = res.traj.qd.back();
    if (!res.report.converged || res.traj.failed()) {
      summary.all_converged = false;
    }

    if (!opts.out_dir.empty()) {
      const std::string stem =
          (fs::path(opts.out_dir) / ("episode_" + std::to_string(i))).string();
      write_trajectory_csv(stem + ".csv", res.traj, s.arm);
      write_diagnostics_csv(stem + "_diag.csv", res.traj);
      if (opts.emit_svg) {
        SvgOptions svg;
        svg.snapshots = opts.snapshots;
        svg.goals = {s.goals[i]};
        svg.draw_floor = s.workspace.has_floor;
        svg.floor_height = s.workspace.floor_height;
        write_trajectory_svg(stem + ".svg", s.arm, res.traj, svg);
      }
    }
    summary.episodes.push_back(std::move(res));
  }

  if (!opts.out_dir.empty()) {
    nlohmann::json j;
    j["scenario"] = s.name;
    j["all_converged"] = summary.all_converged;
    j["episodes"] = nlohmann::json::array();
    for (const auto& res : summary.episodes) {
      nlohmann::json e;
      e["goal"] = {res.goal.x(), res.goal.y()};
      e["converged"] = res.report.converged;
      e["settle_time"] = res.report.settle_time;
      e["kkt_residual"] = res.report.kkt_residual;
      e["min_limit_distance"] = res.report.min_limit_distance;
      e["final_q"] = std::vector<double>(res.final_q.data(),
                                         res.final_q.data() + res.final_q.size());
      e["ee_error"] = res.ee_error;
      if (res.traj.failed()) e["error"] = res.traj.error;
      j["episodes"].push_back(std::move(e));
    }
    std::ofstream out(fs::path(opts.out_dir) / "summary.json");
    if (!out) throw Error("cannot write summary.json");
    out << j.dump(2) << "\n";
  }
  return summary;
}

}  // namespace fabrics
