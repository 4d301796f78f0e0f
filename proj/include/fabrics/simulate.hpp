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
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fabrics/linalg.hpp"
#include "fabrics/potential.hpp"
#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Acceleration field qdd = f(t, q, qd).
using AccelFn = std::function<Vec(double, const Vec&, const Vec&)>;

// Optional per-row scalar channels (energies, potential values, regulator
// diagnostics) recorded alongside the state.
using ChannelFn = std::function<std::vector<double>(double, const Vec&, const Vec&)>;

struct Trajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Vec> q;
  std::vector<Vec> qd;
  std::vector<Vec> qdd;
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;  // aligned with t
  std::string error;  // non-empty if the rollout aborted mid-flight

  std::size_t rows() const { return t.size(); }
  bool failed() const { return !error.empty(); }
};

// One classic fourth-order Runge-Kutta step of the first-order lift
// (q, qd) -> (qd, f). Non-finite stage values are an error.
inline void step_rk4(const AccelFn& f, double t, double dt, Vec& q, Vec& qd) {
  if (!(dt > 0.0)) throw ValidationError("step_rk4: dt must be positive");
  const Vec k1q = qd;
  const Vec k1v = f(t, q, qd);
  const Vec k2q = qd + 0.5 * dt * k1v;
  const Vec k2v = f(t + 0.5 * dt, q + 0.5 * dt * k1q, k2q);
  const Vec k3q = qd + 0.5 * dt * k2v;
  const Vec k3v = f(t + 0.5 * dt, q + 0.5 * dt * k2q, k3q);
  const Vec k4q = qd + dt * k3v;
  const Vec k4v = f(t + dt, q + dt * k3q, k4q);
  const Vec qn = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  const Vec qdn = qd + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  if (!is_finite(qn) || !is_finite(qdn)) {
    // Leave (q, qd) untouched so a caller can report the last good state.
    throw Error("step_rk4: state became non-finite");
  }
  q = qn;
  qd = qdn;
}

struct RolloutOptions {
  // Optional early-stop predicate, checked at every recorded row. The row
  // that satisfies it is kept, so an immediately satisfied stop yields a
  // single-row trajectory.
  std::function<bool(double, const Vec&, const Vec&)> stop;
  std::vector<std::string> channel_names;
  ChannelFn channels;
};

// Fixed-step rollout from (q0, qd0) over [0, t_max].
inline Trajectory rollout(const AccelFn& f, const Vec& q0, const Vec& qd0,
                          double dt, double t_max,
                          const RolloutOptions& opts = {}) {
  if (!(dt > 0.0)) throw ValidationError("rollout: dt must be positive");
  if (!(t_max >= 0.0)) throw ValidationError("rollout: t_max must be nonnegative");
  Trajectory traj;
  traj.dt = dt;
  traj.channel_names = opts.channel_names;
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
  traj.t.reserve(steps + 1);
  traj.q.reserve(steps + 1);

  Vec q = q0, qd = qd0;
  double t = 0.0;
  for (std::size_t i = 0;; ++i) {
    // A failing step keeps the rows recorded so far and flags the abort.
    try {
      traj.t.push_back(t);
      traj.q.push_back(q);
      traj.qd.push_back(qd);
      const Vec a = f(t, q, qd);
      if (!is_finite(a)) throw Error("rollout: acceleration became non-finite");
      traj.qdd.push_back(a);
      if (opts.channels) traj.channels.push_back(opts.channels(t, q, qd));
      if (opts.stop && opts.stop(t, q, qd)) break;
      if (i >= steps) break;
      step_rk4(f, t, dt, q, qd);
    } catch (const Error& err) {
      traj.t.resize(traj.qdd.size());
      traj.q.resize(traj.qdd.size());
      traj.qd.resize(traj.qdd.size());
      traj.error = err.what();
      break;
    }
    t = dt * static_cast<double>(i + 1);
  }
  return traj;
}

// Stop predicate: speed below `threshold` sustained for `hold` seconds.
inline std::function<bool(double, const Vec&, const Vec&)> make_speed_stop(
    double threshold = 1e-4, double hold = 0.5) {
  auto below_since = std::make_shared<double>(-1.0);
  return [below_since, threshold, hold](double t, const Vec&, const Vec& qd) {
    if (qd.norm() >= threshold) {
      *below_since = -1.0;
      return false;
    }
    if (*below_since < 0.0) *below_since = t;
    return t - *below_since >= hold;
  };
}

struct ConvergenceReport {
  bool converged = false;
  double settle_time = 0.0;       // start of the final sustained-slow stretch
  double kkt_residual = 0.0;      // first-order stationarity at the end state
  double min_limit_distance = 0.0;  // over the whole trajectory, +inf if no limits
};

// Convergence: speed below `threshold` sustained through the end of the
// trajectory for at least `hold` seconds. The stationarity residual is the
// norm of the driving gradient at the final state; coordinates pinned
// against a limit (distance below `boundary_eps`) are projected out first,
// so boundary equilibria report the tangential residual.
inline ConvergenceReport convergence_report(
    const Trajectory& traj, const Potential& psi_root,
    const std::vector<TaskMap>& limit_coords = {}, double threshold = 1e-4,
    double hold = 0.5, double boundary_eps = 1e-3) {
  if (traj.rows() == 0) throw ValidationError("convergence_report: empty trajectory");
  ConvergenceReport out;

  double last_fast = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.rows(); ++i) {
    if (traj.qd[i].norm() >= threshold) last_fast = traj.t[i];
  }
  out.converged = traj.t.back() - last_fast >= hold;
  out.settle_time = std::isinf(last_fast) ? 0.0 : last_fast + traj.dt;

  out.min_limit_distance = std::numeric_limits<double>::infinity();
  for (const auto& lim : limit_coords) {
    for (std::size_t i = 0; i < traj.rows(); ++i) {
      out.min_limit_distance =
          std::min(out.min_limit_distance, lim.map(traj.q[i])[0]);
    }
  }

  const Vec& q_end = traj.q.back();
  Vec grad = psi_root.gradient(q_end);
  for (const auto& lim : limit_coords) {
    if (lim.map(q_end)[0] < boundary_eps) {
      // Remove the component along the limit normal J^T (unit row).
      const Vec n = lim.jacobian(q_end).row(0).transpose().normalized();
      grad -= n * n.dot(grad);
    }
  }
  out.kkt_residual = grad.norm();
  return out;
}

// Largest relative drift of one recorded channel from its initial value.
inline double channel_drift(const Trajectory& traj, const std::string& name) {
  std::size_t idx = traj.channel_names.size();
  for (std::size_t i = 0; i < traj.channel_names.size(); ++i) {
    if (traj.channel_names[i] == name) idx = i;
  }
  if (idx == traj.channel_names.size()) {
    throw ValidationError("channel_drift: unknown channel " + name);
  }
  const double h0 = traj.channels.front()[idx];
  double worst = 0.0;
  for (const auto& row : traj.channels) {
    worst = std::max(worst,
                     std::abs(row[idx] - h0) / std::max(1e-12, std::abs(h0)));
  }
  return worst;
}

}  // namespace fabrics
