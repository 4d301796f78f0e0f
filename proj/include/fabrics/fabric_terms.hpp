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

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fabrics/energization.hpp"
#include "fabrics/geometry.hpp"
#include "fabrics/lagrangian.hpp"
#include "fabrics/potential.hpp"
#include "fabrics/spec.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Gains shared by the term constructors. All must be positive.
//   k        generator gain
//   lambda   priority-metric scale
//   lambda_g repulsion exponent of the limit geometry (>= 1 keeps rollouts
//            strictly inside the boundary)
//   alpha    sharpness of the soft-distance shape
//   sigma    length scale of position gates (Gaussian / exponential)
struct TermParams {
  double k = 1.0;
  double lambda = 1.0;
  double lambda_g = 2.0;
  double alpha = 10.0;
  double sigma = 0.0;  // 0 disables the gate where a gate is optional
};

// A fabric term pairs a path geometry (xdd + h2 = 0, h2 quadratic in
// velocity) with the Finsler energy whose mass prioritizes it against
// other terms. Terms are unbiased: they shape paths but vanish at rest, so
// only the driving potential decides equilibria.
struct FabricTerm {
  std::string name;
  GeometryGenerator generator;
  EnergyLagrangian energy;
};

// Natural-form spec (M_e, M_e h2) of a term: the shape summation combines
// across a transform tree. The energy's own curvature force enters later,
// through the root energy used for energization and speed regulation, not
// here.
inline Spec as_spec(const FabricTerm& t) {
  Spec s;
  s.dim = t.generator.dim;
  s.metric = t.energy.mass;
  s.force = [t](const Vec& x, const Vec& v) -> Vec {
    return t.energy.mass(x, v) * t.generator.accel(x, v);
  };
  return s;
}

// ---------------------------------------------------------------------------
// Goal attraction: h2 = k |v|^2 grad psi1(x) with psi1 the unit-gain
// soft-distance shape, so -h2 accelerates toward the goal with a pull that
// saturates away from it. Energy 0.5 lambda |v|^2; params.sigma > 0 selects
// the Gaussian-gated metric lambda exp(-d^2 / 2 sigma^2) I instead, which
// concentrates the term's priority near the goal at the cost of ceding
// influence far away.
inline FabricTerm attractor_term(const Vec& goal, const TermParams& params,
                                 const std::string& name = "attractor") {
  const int dim = static_cast<int>(goal.size());
  const Potential shape = soft_distance_potential(goal, 1.0, params.alpha);
  FabricTerm t;
  t.name = name;
  t.generator.dim = dim;
  t.generator.accel = [shape, k = params.k](const Vec& x, const Vec& v) -> Vec {
    return k * v.squaredNorm() * shape.gradient(x);
  };
  if (params.sigma > 0.0) {
    const double inv2s2 = 1.0 / (2.0 * params.sigma * params.sigma);
    auto weight = [goal, inv2s2](const Vec& x) {
      return std::exp(-(x - goal).squaredNorm() * inv2s2);
    };
    auto weight_grad = [goal, inv2s2, weight](const Vec& x) -> Vec {
      return weight(x) * (-2.0 * inv2s2) * (x - goal);
    };
    t.energy = weighted_quadratic_energy(dim, params.lambda, weight, weight_grad);
  } else {
    t.energy = euclidean_energy(dim, params.lambda);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Joint-limit repulsion on a one-dimensional distance-to-limit coordinate
// x > 0. The velocity gate s = [xd < 0] activates the term only while
// moving toward the limit:
//   h2 = -s lambda_g xd^2 / x      (-h2 pushes back toward the interior)
//   L  = 0.5 s (lambda / x) xd^2   (mass lambda / x, unbounded at the limit)
// The gated quantities are quadratic in xd, so forces stay continuous
// across the switch; the mass drops out of the weighted average on the
// receding branch. The energy is Finsler on its active branch, which is
// what its sampler draws.
inline FabricTerm joint_limit_term(const TermParams& params,
                                   const std::string& name = "joint_limit") {
  FabricTerm t;
  t.name = name;
  t.generator.dim = 1;
  t.generator.accel = [lg = params.lambda_g](const Vec& x, const Vec& v) -> Vec {
    Vec h(1);
    h[0] = (v[0] < 0.0) ? -lg * v[0] * v[0] / x[0] : 0.0;
    return h;
  };
  t.energy.dim = 1;
  t.energy.value = [lam = params.lambda](const Vec& x, const Vec& v) {
    return (v[0] < 0.0) ? 0.5 * lam * v[0] * v[0] / x[0] : 0.0;
  };
  t.energy.momentum = [lam = params.lambda](const Vec& x, const Vec& v) -> Vec {
    Vec p(1);
    p[0] = (v[0] < 0.0) ? lam * v[0] / x[0] : 0.0;
    return p;
  };
  t.energy.mass = [lam = params.lambda](const Vec& x, const Vec& v) -> Mat {
    Mat m(1, 1);
    m(0, 0) = (v[0] < 0.0) ? lam / x[0] : 0.0;
    return m;
  };
  t.energy.force = [lam = params.lambda](const Vec& x, const Vec& v) -> Vec {
    Vec f(1);
    f[0] = (v[0] < 0.0) ? -0.5 * lam * v[0] * v[0] / (x[0] * x[0]) : 0.0;
    return f;
  };
  t.energy.sampler = [](Rng& rng) -> std::pair<Vec, Vec> {
    Vec x(1), v(1);
    x[0] = rng.uniform(0.1, 2.0);
    v[0] = rng.uniform(-2.0, -0.1);
    return {x, v};
  };
  return t;
}

// ---------------------------------------------------------------------------
// Redundancy resolution: h2 = k |qd|^2 grad psi1(q; q0) biases the path,
// not the equilibrium, toward a default configuration. Constant metric
// lambda I keeps its priority uniform and low.
inline FabricTerm default_config_term(const Vec& q0, const TermParams& params,
                                      const std::string& name = "default_config") {
  FabricTerm t = attractor_term(q0, params, name);
  t.energy = euclidean_energy(static_cast<int>(q0.size()), params.lambda);
  return t;
}

// ---------------------------------------------------------------------------
// Constant root-space inertia lambda I with a zero generator. Pure metric
// regularization: pulled-back task metrics alone can be rank deficient (an
// end-effector metric spans at most the task dimension, velocity-gated
// masses vanish at rest), which would make the root solve singular. A small
// base inertia keeps it positive definite without biasing any path or
// equilibrium.
inline FabricTerm base_inertia_term(int dim, const TermParams& params,
                                    const std::string& name = "base_inertia") {
  FabricTerm t;
  t.name = name;
  t.generator.dim = dim;
  t.generator.accel = [dim](const Vec&, const Vec&) -> Vec {
    return Vec::Zero(dim);
  };
  t.energy = euclidean_energy(dim, params.lambda);
  return t;
}

// ---------------------------------------------------------------------------
// Surface-aware shaping for a planar end effector over a horizontal
// surface at the given height (outward normal +y).
//
// Lift: h2 = -k |v|^2 n, i.e. accelerate along the normal whenever moving,
// with metric lambda exp(-height / sigma) I that is strong near the
// surface and vanishes above it. Transit altitude emerges where this
// term's priority fades against the goal pull; k trades lift strength
// against the other terms' bending.
inline FabricTerm floor_lift_term(double floor_height, const TermParams& params,
                                  const std::string& name = "floor_lift") {
  const double sigma = params.sigma;
  FabricTerm t;
  t.name = name;
  t.generator.dim = 2;
  t.generator.accel = [k = params.k](const Vec&, const Vec& v) -> Vec {
    Vec h(2);
    h << 0.0, -k * v.squaredNorm();
    return h;
  };
  auto weight = [floor_height, sigma](const Vec& x) {
    return std::exp(-(x[1] - floor_height) / sigma);
  };
  auto weight_grad = [floor_height, sigma, weight](const Vec& x) -> Vec {
    Vec g(2);
    g << 0.0, -weight(x) / sigma;
    return g;
  };
  t.energy =
      weighted_quadratic_energy(2, params.lambda, weight, weight_grad);
  t.energy.sampler = [floor_height](Rng& rng) -> std::pair<Vec, Vec> {
    Vec x = rng.uniform_vec(2, -2.0, 2.0);
    x[1] = floor_height + rng.uniform(0.0, 2.0);
    return {x, rng.nonzero_vec(2, 0.2, 2.0)};
  };
  return t;
}

// Approach: the attractor shape toward the goal, prioritized only where
// the horizontal offset s = x_0 - goal_0 is small:
//   metric lambda exp(-s^2 / 2 sigma^2) I.
// Once the end effector is above the goal this term dominates and pulls
// straight down onto it.
inline FabricTerm vertical_approach_term(const Vec& goal,
                                         const TermParams& params,
                                         const std::string& name = "vertical_approach") {
  const Potential shape = soft_distance_potential(goal, 1.0, params.alpha);
  const double inv2s2 = 1.0 / (2.0 * params.sigma * params.sigma);
  FabricTerm t;
  t.name = name;
  t.generator.dim = 2;
  t.generator.accel = [shape, k = params.k](const Vec& x, const Vec& v) -> Vec {
    return k * v.squaredNorm() * shape.gradient(x);
  };
  auto weight = [goal, inv2s2](const Vec& x) {
    const double s = x[0] - goal[0];
    return std::exp(-s * s * inv2s2);
  };
  auto weight_grad = [goal, inv2s2, weight](const Vec& x) -> Vec {
    Vec g(2);
    g << weight(x) * (-2.0 * inv2s2) * (x[0] - goal[0]), 0.0;
    return g;
  };
  t.energy =
      weighted_quadratic_energy(2, params.lambda, weight, weight_grad);
  return t;
}

// Convenience bundle for the tabletop behavior: lift near the surface plus
// vertical approach above the goal. Gate widths default to fractions of
// the nominal clearance when not set.
inline std::vector<FabricTerm> behavior_shaping_terms(double floor_height,
                                                      double clearance,
                                                      const Vec& goal,
                                                      TermParams lift_params,
                                                      TermParams approach_params) {
  if (lift_params.sigma <= 0.0) lift_params.sigma = 0.5 * clearance;
  if (approach_params.sigma <= 0.0) approach_params.sigma = 0.8 * clearance;
  return {floor_lift_term(floor_height, lift_params),
          vertical_approach_term(goal, approach_params)};
}

}  // namespace fabrics
