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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fabrics/energization.hpp"
#include "fabrics/fabric_terms.hpp"
#include "fabrics/finite_diff.hpp"
#include "fabrics/planar_arm.hpp"
#include "fabrics/simulate.hpp"
#include "fabrics/speed_control.hpp"
#include "fabrics/transform_tree.hpp"

namespace fabrics {

// One row of the machine-readable self-check report. `observed` is the
// worst measured value; for margin-style checks (bound satisfaction) the
// tolerance is 0 and pass means observed stayed on the right side.
struct InvariantCheck {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool pass = false;
};

namespace invariant_detail {

// Smooth two-term test fabric over a 2-D root used by the dynamic checks.
struct SmoothFabric {
  TransformTree tree;
  EnergyLagrangian energy;
};

inline SmoothFabric smooth_fabric(const Vec& goal) {
  TermParams gated;
  gated.sigma = 1.1;
  gated.lambda = 0.9;
  TermParams uniform;
  uniform.lambda = 0.4;
  uniform.k = 0.5;
  SmoothFabric f;
  f.tree.root_dim = 2;
  f.tree.add(identity_map(2), attractor_term(goal, gated));
  f.tree.add(identity_map(2), default_config_term(Vec::Zero(2), uniform));
  f.energy = tree_energy(f.tree);
  return f;
}

inline GeometryGenerator sample_geometry() {
  GeometryGenerator g;
  g.dim = 2;
  g.accel = [](const Vec& x, const Vec& v) -> Vec {
    Vec h(2);
    h << v.squaredNorm() * std::sin(x[1]) + 0.5 * v[0] * v[1],
        v[0] * v[0] - 0.3 * v.squaredNorm() * x[0];
    return h;
  };
  return g;
}

inline EnergyLagrangian sample_riemannian() {
  auto metric = [](const Vec& x) -> Mat {
    Mat g(2, 2);
    g << 1.0 + x[0] * x[0], 0.0, 0.0, 1.0;
    return g;
  };
  auto dmetric = [](const Vec& x) -> std::vector<Mat> {
    Mat d0 = Mat::Zero(2, 2);
    d0(0, 0) = 2.0 * x[0];
    return {d0, Mat::Zero(2, 2)};
  };
  return riemannian_energy(2, metric, dmetric);
}

// Cumulative arc length of a polyline.
inline std::vector<double> arc_lengths(const std::vector<Vec>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  return s;
}

// Positions at `count` evenly spaced arc lengths in [0, total].
inline std::vector<Vec> resample_by_arclength(const std::vector<Vec>& pts,
                                              double total, int count) {
  const std::vector<double> s = arc_lengths(pts);
  std::vector<Vec> out;
  out.reserve(count);
  std::size_t j = 1;
  for (int k = 0; k < count; ++k) {
    const double target = total * k / (count - 1.0);
    while (j + 1 < s.size() && s[j] < target) ++j;
    const double seg = s[j] - s[j - 1];
    const double w = seg > 0.0 ? (target - s[j - 1]) / seg : 0.0;
    out.push_back(pts[j - 1] + w * (pts[j] - pts[j - 1]));
  }
  return out;
}

}  // namespace invariant_detail

// Runs every cross-module self check. `inject_fault` deliberately corrupts
// the zero-work projector before measuring it, to demonstrate that the
// suite detects a broken build.
inline std::vector<InvariantCheck> invariant_suite(std::uint64_t seed,
                                                   bool inject_fault = false) {
  using namespace invariant_detail;
  std::vector<InvariantCheck> checks;
  Vec goal(2);
  goal << 1.4, -0.6;

  // --- Finsler structure of every shipped term ---
  {
    InvariantCheck c{"finsler_homogeneity", 1e-9, 0.0, false};
    TermParams gated;
    gated.sigma = 0.8;
    const std::vector<FabricTerm> terms = {
        attractor_term(goal, TermParams{}), attractor_term(goal, gated),
        joint_limit_term(TermParams{}),     default_config_term(Vec::Zero(3), TermParams{}),
        floor_lift_term(0.0, gated),        vertical_approach_term(goal, gated),
        base_inertia_term(3, TermParams{})};
    bool ok = true;
    std::uint64_t s = seed;
    for (const auto& t : terms) {
      const FinslerReport rep = validate_finsler(t.energy, ++s, 60);
      ok = ok && rep.pass;
      c.observed = std::max(c.observed, rep.max_violation);
      Rng rng(++s);
      for (int i = 0; i < 60; ++i) {
        const auto [x, v] = draw_state(t.energy, rng);
        const Hd2Check h = check_hd2(t.generator, x, v, 1e-9);
        ok = ok && h.pass;
        c.observed = std::max(c.observed, h.max_rel_err);
      }
    }
    c.pass = ok && c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Zero-work projection ---
  {
    InvariantCheck c{"zero_work_projection", 1e-10, 0.0, false};
    Rng rng(seed + 11);
    for (int i = 0; i < 1000; ++i) {
      const int d = 2 + static_cast<int>(rng.raw() % 3);
      Mat a(d, d);
      for (int r = 0; r < d; ++r)
        for (int k = 0; k < d; ++k) a(r, k) = rng.uniform(-1.0, 1.0);
      const Mat m = a * a.transpose() + 0.2 * Mat::Identity(d, d);
      EnergyLagrangian e = euclidean_energy(d);
      e.mass = [m](const Vec&, const Vec&) { return m; };
      const Vec v = rng.nonzero_vec(d, 0.2, 2.0);
      const Vec w = rng.uniform_vec(d, -2.0, 2.0);
      Mat p = projector(e, Vec::Zero(d), v).p;
      if (inject_fault) p(0, 0) += 1e-3;
      c.observed = std::max(c.observed, std::abs(v.dot(p * w)));
    }
    c.pass = c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Energization coefficient vs bisection of the energy rate ---
  {
    InvariantCheck c{"energization_bisection", 1e-8, 0.0, false};
    const GeometryGenerator h = sample_geometry();
    const EnergyLagrangian e = sample_riemannian();
    Rng rng(seed + 23);
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      const Vec x = rng.uniform_vec(2, -1.5, 1.5);
      const Vec v = rng.nonzero_vec(2, 0.3, 1.8);
      const auto rate = [&](double alpha) {
        const Vec a = -h.accel(x, v) - alpha * v;
        const double fd = 1e-6;
        return (e.value(x + fd * v, v + fd * a) -
                e.value(x - fd * v, v - fd * a)) /
               (2.0 * fd);
      };
      double lo = -1.0, hi = 1.0;
      int guard = 0;
      while (rate(lo) * rate(hi) > 0.0 && ++guard < 60) {
        lo *= 2.0;
        hi *= 2.0;
      }
      if (guard >= 60) {
        ok = false;
        break;
      }
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rate(lo) * rate(mid) <= 0.0 ? hi : lo) = mid;
      }
      const double oracle = 0.5 * (lo + hi);
      const double closed = energization_coefficient(h, e, x, v);
      c.observed = std::max(c.observed, std::abs(closed - oracle));
    }
    c.pass = ok && c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Fabric energy conservation along an energized rollout ---
  {
    InvariantCheck c{"fabric_energy_conservation", 1e-6, 0.0, false};
    const SmoothFabric f = smooth_fabric(goal);
    const AccelFn accel = [&](double, const Vec& q, const Vec& qd) -> Vec {
      const SpecEval root = tree_resolve(f.tree, q, qd);
      const Vec pi0 = policy(root);
      if (qd.norm() <= kVelocityGuard) return pi0;
      return pi0 + conserving_coefficient(pi0, f.energy, q, qd) * qd;
    };
    Vec q0(2), qd0(2);
    q0 << -1.2, 0.9;
    qd0 << 0.8, -0.3;
    RolloutOptions opts;
    opts.channel_names = {"H"};
    opts.channels = [&](double, const Vec& q, const Vec& qd) {
      return std::vector<double>{hamiltonian(f.energy, q, qd)};
    };
    const Trajectory traj = rollout(accel, q0, qd0, 1e-3, 2.0, opts);
    c.observed = channel_drift(traj, "H");
    c.pass = !traj.failed() && c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Path consistency across initial speeds ---
  {
    InvariantCheck c{"path_consistency", 1e-3, 0.0, false};
    const SmoothFabric f = smooth_fabric(goal);
    const AccelFn accel = [&](double, const Vec& q, const Vec& qd) -> Vec {
      const SpecEval root = tree_resolve(f.tree, q, qd);
      const Vec pi0 = policy(root);
      if (qd.norm() <= kVelocityGuard) return pi0;
      return pi0 + conserving_coefficient(pi0, f.energy, q, qd) * qd;
    };
    Vec q0(2), u(2);
    q0 << -1.2, 0.9;
    u << 0.8, -0.35;
    std::vector<std::vector<Vec>> resampled;
    bool ok = true;
    for (double scale : {0.5, 1.0, 2.0}) {
      const Trajectory traj =
          rollout(accel, q0, Vec(scale * u), 1e-3, 5.0 / scale);
      const auto s = arc_lengths(traj.q);
      if (s.back() < 1.0) ok = false;
      resampled.push_back(resample_by_arclength(traj.q, 1.0, 100));
    }
    if (ok) {
      for (std::size_t i = 1; i < resampled.size(); ++i) {
        for (int k = 0; k < 100; ++k) {
          c.observed =
              std::max(c.observed, (resampled[i][k] - resampled[0][k]).norm());
        }
      }
    }
    c.pass = ok && c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Finite-difference validation of shipped derivatives ---
  {
    InvariantCheck first{"derivative_first_order", 1e-5, 0.0, false};
    InvariantCheck curv{"derivative_curvature", 1e-4, 0.0, false};
    TermParams gated;
    gated.sigma = 0.8;
    const std::vector<FabricTerm> terms = {
        attractor_term(goal, TermParams{}), attractor_term(goal, gated),
        joint_limit_term(TermParams{}), floor_lift_term(0.0, gated),
        vertical_approach_term(goal, gated), base_inertia_term(3, TermParams{})};
    Rng rng(seed + 31);
    for (const auto& t : terms) {
      for (int i = 0; i < 40; ++i) {
        const auto [x, v] = draw_state(t.energy, rng);
        const DerivativeCheck chk = finite_diff_check(t.energy, x, v);
        first.observed = std::max(first.observed, chk.momentum_rel_err);
        curv.observed =
            std::max({curv.observed, chk.mass_rel_err, chk.force_rel_err});
      }
    }
    const Potential psi = soft_distance_potential(goal, 3.0, 8.0);
    for (int i = 0; i < 100; ++i) {
      const Vec x = rng.uniform_vec(2, -2.0, 2.0);
      first.observed = std::max(
          first.observed, rel_err(psi.gradient(x), fd_gradient(psi.value, x)));
    }
    const ArmModel arm = default_arm();
    const TaskMap ee = ee_taskmap(arm);
    for (int i = 0; i < 100; ++i) {
      const Vec q = rng.uniform_vec(3, -3.0, 3.0);
      const Vec qd = rng.uniform_vec(3, -2.0, 2.0);
      const TaskMapCheck chk = jacobian_fd_check(ee, q, qd);
      first.observed = std::max(first.observed, chk.jacobian_rel_err);
      curv.observed = std::max(curv.observed, chk.curvature_rel_err);
    }
    first.pass = first.observed < first.tolerance;
    curv.pass = curv.observed < curv.tolerance;
    checks.push_back(first);
    checks.push_back(curv);
  }

  // --- Energizing commutes with pullback ---
  {
    InvariantCheck c{"energize_pullback_commutation", 1e-6, 0.0, false};
    TaskMap warp;
    warp.domain_dim = 2;
    warp.codomain_dim = 2;
    warp.map = [](const Vec& q) -> Vec {
      Vec x(2);
      x << q[0] + 0.3 * std::sin(q[1]), q[1] - 0.2 * std::cos(q[0]);
      return x;
    };
    warp.jacobian = [](const Vec& q) -> Mat {
      Mat j(2, 2);
      j << 1.0, 0.3 * std::cos(q[1]), 0.2 * std::sin(q[0]), 1.0;
      return j;
    };
    warp.curvature = [](const Vec& q, const Vec& qd) -> Vec {
      Vec cv(2);
      cv << -0.3 * std::sin(q[1]) * qd[1] * qd[1],
          0.2 * std::cos(q[0]) * qd[0] * qd[0];
      return cv;
    };

    const GeometryGenerator h = sample_geometry();
    const EnergyLagrangian e = sample_riemannian();
    const Spec route_a = pullback(energize(h, e), warp);

    Spec raw;
    raw.dim = 2;
    raw.metric = e.mass;
    raw.force = [&](const Vec& x, const Vec& v) -> Vec {
      return e.mass(x, v) * h.accel(x, v);
    };
    const Spec pulled_raw = pullback(raw, warp);
    GeometryGenerator pulled_h;
    pulled_h.dim = 2;
    pulled_h.accel = [pulled_raw](const Vec& q, const Vec& qd) -> Vec {
      return canonical_accel(evaluate(pulled_raw, q, qd));
    };
    const Spec route_b = energize(pulled_h, pullback_energy(e, warp));

    Rng rng(seed + 41);
    for (int i = 0; i < 40; ++i) {
      const Vec q = rng.uniform_vec(2, -1.2, 1.2);
      const Vec qd = rng.nonzero_vec(2, 0.3, 1.5);
      c.observed = std::max(c.observed, rel_err(evaluate_policy(route_a, q, qd),
                                                evaluate_policy(route_b, q, qd)));
    }
    c.pass = c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Regulator stability margin along a forced rollout ---
  {
    InvariantCheck c{"speed_control_bound", 0.0, 0.0, false};
    const SmoothFabric f = smooth_fabric(goal);
    const Potential psi = soft_distance_potential(goal, 4.0, 10.0);
    SpeedControlConfig cfg;
    cfg.eta = 0.4;
    cfg.base_damping = 0.05;
    cfg.switch_damping = 3.0;
    cfg.switch_fn = make_gradient_switch(psi, 1.5);
    cfg.execution_energy = euclidean_energy(2);
    double min_margin = std::numeric_limits<double>::infinity();
    auto diag = std::make_shared<SpeedDiagnostics>();
    const AccelFn accel = [&, diag](double t, const Vec& q, const Vec& qd) -> Vec {
      const SpecEval root = tree_resolve(f.tree, q, qd);
      const Vec a =
          controlled_acceleration(root, f.energy, psi, cfg, q, qd, t, diag.get());
      if (qd.norm() > kVelocityGuard) {
        min_margin = std::min(min_margin, diag->alphas.alpha_le - diag->alpha_reg);
      }
      return a;
    };
    Vec q0(2);
    q0 << -1.5, 1.2;
    const Trajectory traj = rollout(accel, q0, Vec::Zero(2), 2e-3, 4.0);
    c.observed = min_margin;
    c.pass = !traj.failed() && min_margin > 0.0;
    checks.push_back(c);
  }

  // --- Damped total energy decrease for the forced energy equations ---
  {
    InvariantCheck c{"damped_energy_identity", 1e-4, 0.0, false};
    const EnergyLagrangian e = sample_riemannian();
    const Potential psi = quadratic_potential(Vec::Zero(2), 1.5);
    const Mat b = 0.7 * Mat::Identity(2, 2);
    const AccelFn accel = [&](double, const Vec& q, const Vec& qd) -> Vec {
      const SpecEval el = el_terms(e, q, qd);
      return solve_sym(el.m, Vec(-el.f - psi.gradient(q) - b * qd));
    };
    Vec q0(2), qd0(2);
    q0 << 1.1, -0.4;
    qd0 << -0.2, 0.8;
    RolloutOptions opts;
    opts.channel_names = {"total", "dissipation"};
    opts.channels = [&](double, const Vec& q, const Vec& qd) {
      return std::vector<double>{hamiltonian(e, q, qd) + psi.value(q),
                                 qd.dot(b * qd)};
    };
    const double dt = 1e-3;
    const Trajectory traj = rollout(accel, q0, qd0, dt, 3.0, opts);
    for (std::size_t i = 1; i + 1 < traj.rows(); ++i) {
      const double fd =
          (traj.channels[i + 1][0] - traj.channels[i - 1][0]) / (2.0 * dt);
      c.observed = std::max(c.observed, std::abs(fd + traj.channels[i][1]));
    }
    c.pass = !traj.failed() && c.observed < c.tolerance;
    checks.push_back(c);
  }

  // --- Interior convergence to a stationary point of the potential ---
  {
    InvariantCheck c{"kkt_interior", 1e-4, 0.0, false};
    const SmoothFabric f = smooth_fabric(goal);
    const Potential psi = soft_distance_potential(goal, 4.0, 10.0);
    SpeedControlConfig cfg;
    // eta = 1 lets the potential inject transit energy; the switch damping
    // dissipates it near the goal.
    cfg.eta = 1.0;
    cfg.base_damping = 0.1;
    cfg.switch_damping = 5.0;
    cfg.switch_fn = make_gradient_switch(psi, 1.0);
    cfg.execution_energy = euclidean_energy(2);
    const AccelFn accel = [&](double t, const Vec& q, const Vec& qd) -> Vec {
      const SpecEval root = tree_resolve(f.tree, q, qd);
      return controlled_acceleration(root, f.energy, psi, cfg, q, qd, t);
    };
    RolloutOptions opts;
    opts.stop = make_speed_stop(1e-6, 0.5);
    Vec q0(2);
    q0 << -1.0, 0.6;
    const Trajectory traj = rollout(accel, q0, Vec::Zero(2), 2e-3, 30.0, opts);
    const ConvergenceReport rep = convergence_report(traj, psi);
    c.observed = rep.kkt_residual;
    c.pass = !traj.failed() && rep.converged && c.observed < c.tolerance;
    checks.push_back(c);
  }

  return checks;
}

inline bool all_pass(const std::vector<InvariantCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InvariantCheck& c) { return c.pass; });
}

}  // namespace fabrics
