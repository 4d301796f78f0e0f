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

#include "fabrics/energization.hpp"
#include "fabrics/lagrangian.hpp"
#include "fabrics/potential.hpp"
#include "fabrics/spec.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Speed regulation wraps the root fabric policy pi0 and the driving
// potential psi into
//   xdd = -M^{-1} grad psi + pi0 + alpha_reg v,
//   alpha_reg = alpha_ex^eta - beta + alpha_boost,
//   alpha_ex^eta = eta alpha_ex0 + (1 - eta) alpha_ex_psi.
// The alphas are conserving coefficients in this "+ alpha v" convention:
// alpha_ex0 would hold the execution energy constant under pi0 alone,
// alpha_ex_psi under pi0 with the potential included (stripping the
// potential's along-velocity push), and alpha_le would hold the fabric
// energy constant. Damping beta > 0 then guarantees alpha_reg < alpha_le,
// which keeps the system a damped forced fabric and therefore convergent.

struct BoostConfig {
  double target_speed = 0.0;  // desired execution speed during startup
  double gain = 0.0;          // strength of the push toward it
  double window = 0.0;        // seconds after rollout start the boost acts
};

struct SpeedControlConfig {
  double eta = 0.0;            // blend between pure-geometry (1) and
                               // potential-stripping (0) energization
  double base_damping = 0.02;  // B_low > 0, always active
  double switch_damping = 0.0; // B_high, blended in by switch_fn near goals
  std::function<double(const Vec&)> switch_fn;  // s_beta(x) in [0, 1]
  BoostConfig boost;
  EnergyLagrangian execution_energy;
};

// s_beta(x) = 1 - tanh(|grad psi(x)| / radius): ~0 in transit where the
// pull is strong, ~1 near the goal where extra damping settles the system.
inline std::function<double(const Vec&)> make_gradient_switch(
    const Potential& psi, double radius) {
  return [psi, radius](const Vec& x) {
    return 1.0 - std::tanh(psi.gradient(x).norm() / radius);
  };
}

struct ExecutionAlphas {
  double alpha_ex0 = 0.0;
  double alpha_ex_psi = 0.0;
  double alpha_le = 0.0;
};

// The three conserving coefficients at one state. At (numerically) zero
// velocity all are defined as zero.
inline ExecutionAlphas execution_alphas(const Vec& pi0, const Vec& grad_term,
                                        const EnergyLagrangian& fabric_energy,
                                        const EnergyLagrangian& execution_energy,
                                        const Vec& x, const Vec& v) {
  ExecutionAlphas out;
  if (v.norm() <= kVelocityGuard) return out;
  out.alpha_ex0 = conserving_coefficient(pi0, execution_energy, x, v);
  out.alpha_ex_psi =
      conserving_coefficient(pi0 + grad_term, execution_energy, x, v);
  out.alpha_le = conserving_coefficient(pi0, fabric_energy, x, v);
  return out;
}

// beta = s_beta(x) B_high + B_low + max(0, alpha_ex^eta - alpha_le).
// The max term caps the energization gain at the fabric-conserving level,
// so alpha_reg = alpha_ex^eta - beta <= alpha_le - B_low < alpha_le.
inline double damping_coefficient(const Vec& x, double alpha_ex_eta,
                                  double alpha_le,
                                  const SpeedControlConfig& cfg) {
  const double s = cfg.switch_fn ? cfg.switch_fn(x) : 0.0;
  return s * cfg.switch_damping + cfg.base_damping +
         std::max(0.0, alpha_ex_eta - alpha_le);
}

// Nonpositive startup push toward the target speed, active only inside the
// boost window:
//   alpha_boost = -gain max(0, target - |v|) for t <= window, else 0.
inline double boost_coefficient(const Vec& v, double t,
                                const BoostConfig& boost) {
  if (boost.window <= 0.0 || t > boost.window) return 0.0;
  return -boost.gain * std::max(0.0, boost.target_speed - v.norm());
}

struct SpeedDiagnostics {
  ExecutionAlphas alphas;
  double alpha_ex_eta = 0.0;
  double beta = 0.0;
  double alpha_boost = 0.0;
  double alpha_reg = 0.0;
};

// One regulated control step. `root` is the resolved fabric at (x, v) in
// natural form; `fabric_energy` supplies the conserved quantity bounding
// alpha_reg. Zero velocity falls back to xdd = -M^{-1} grad psi + pi0 with
// all alpha terms zero.
inline Vec controlled_acceleration(const SpecEval& root,
                                   const EnergyLagrangian& fabric_energy,
                                   const Potential& psi,
                                   const SpeedControlConfig& cfg, const Vec& x,
                                   const Vec& v, double t,
                                   SpeedDiagnostics* diag = nullptr) {
  const Vec pi0 = policy(root);
  const Vec grad_term = -solve_sym(root.m, psi.gradient(x), "controlled_acceleration");

  SpeedDiagnostics d;
  d.alphas =
      execution_alphas(pi0, grad_term, fabric_energy, cfg.execution_energy, x, v);
  d.alpha_ex_eta =
      cfg.eta * d.alphas.alpha_ex0 + (1.0 - cfg.eta) * d.alphas.alpha_ex_psi;
  d.beta = damping_coefficient(x, d.alpha_ex_eta, d.alphas.alpha_le, cfg);
  d.alpha_boost = boost_coefficient(v, t, cfg.boost);
  d.alpha_reg = d.alpha_ex_eta - d.beta + d.alpha_boost;
  if (diag != nullptr) *diag = d;

  if (v.norm() <= kVelocityGuard) return grad_term + pi0;
  return grad_term + pi0 + d.alpha_reg * v;
}

}  // namespace fabrics
