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
#include <functional>
#include <vector>

#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Scalar potential with analytic gradient. Values are lower bounded on the
// domains the library evaluates them on.
struct Potential {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

// Soft-distance attractor potential
//   psi(x) = k (d + (1/alpha) log(1 + exp(-2 alpha d))),  d = |x - goal|.
// The gradient magnitude is k tanh(alpha d): it approaches the constant k
// far from the goal and decays smoothly to zero at the goal, so the pull
// never grows with distance yet vanishes exactly at the target.
inline Potential soft_distance_potential(const Vec& goal, double k,
                                         double alpha) {
  Potential p;
  p.dim = static_cast<int>(goal.size());
  p.value = [goal, k, alpha](const Vec& x) -> double {
    const double d = (x - goal).norm();
    return k * (d + std::log1p(std::exp(-2.0 * alpha * d)) / alpha);
  };
  p.gradient = [goal, k, alpha](const Vec& x) -> Vec {
    const Vec r = x - goal;
    const double d = r.norm();
    if (d < 1e-12) return Vec::Zero(r.size());
    // tanh(alpha d)/d stays bounded as d -> 0 (limit alpha).
    const double scale = (d < 1e-8) ? alpha : std::tanh(alpha * d) / d;
    return k * scale * r;
  };
  return p;
}

// One-dimensional repulsive barrier on a distance-to-limit coordinate
// x > 0:
//   psi(x) = a1 / x^2 + a2 log(exp(-a3 (x - a4)) + 1).
// The second term is a smoothed ramp that activates below x = a4. Available
// as an alternative forcing term next to the joint-limit geometry.
inline Potential barrier_potential(double a1, double a2, double a3,
                                   double a4) {
  Potential p;
  p.dim = 1;
  p.value = [a1, a2, a3, a4](const Vec& x) -> double {
    return a1 / (x[0] * x[0]) + a2 * std::log1p(std::exp(-a3 * (x[0] - a4)));
  };
  p.gradient = [a1, a2, a3, a4](const Vec& x) -> Vec {
    Vec g(1);
    const double e = std::exp(-a3 * (x[0] - a4));
    g[0] = -2.0 * a1 / (x[0] * x[0] * x[0]) - a2 * a3 * e / (1.0 + e);
    return g;
  };
  return p;
}

// psi(x) = 0.5 k |x - goal|^2.
inline Potential quadratic_potential(const Vec& goal, double k) {
  Potential p;
  p.dim = static_cast<int>(goal.size());
  p.value = [goal, k](const Vec& x) -> double {
    return 0.5 * k * (x - goal).squaredNorm();
  };
  p.gradient = [goal, k](const Vec& x) -> Vec { return k * (x - goal); };
  return p;
}

// Pulls a potential through a task map: psi_q(q) = psi(phi(q)), with
// gradient J^T grad psi.
inline Potential pullback_potential(const Potential& psi, const TaskMap& tm) {
  if (psi.dim != tm.codomain_dim) {
    throw DimensionError("pullback_potential: dimension mismatch");
  }
  Potential p;
  p.dim = tm.domain_dim;
  p.value = [psi, tm](const Vec& q) { return psi.value(tm.map(q)); };
  p.gradient = [psi, tm](const Vec& q) -> Vec {
    return tm.jacobian(q).transpose() * psi.gradient(tm.map(q));
  };
  return p;
}

// Sum of already-aligned potentials.
inline Potential sum_potentials(std::vector<Potential> terms) {
  if (terms.empty()) throw DimensionError("sum_potentials: empty sum");
  Potential p;
  p.dim = terms.front().dim;
  for (const auto& t : terms) {
    if (t.dim != p.dim) throw DimensionError("sum_potentials: dimension mismatch");
  }
  p.value = [terms](const Vec& x) {
    double v = 0.0;
    for (const auto& t : terms) v += t.value(x);
    return v;
  };
  p.gradient = [terms](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (const auto& t : terms) g += t.gradient(x);
    return g;
  };
  return p;
}

}  // namespace fabrics
