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
#include <vector>

#include "fabrics/lagrangian.hpp"
#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics::testing {

// Smooth full-rank 2 -> 2 map, a bounded perturbation of the identity:
//   x0 = q0 + a sin(q1), x1 = q1 + b cos(q0) + c q0.
// |a|, |b| < 0.5 keeps the Jacobian diagonally dominant, hence invertible.
inline TaskMap warp2(double a, double b, double c) {
  TaskMap tm;
  tm.domain_dim = 2;
  tm.codomain_dim = 2;
  tm.map = [a, b, c](const Vec& q) -> Vec {
    Vec x(2);
    x << q[0] + a * std::sin(q[1]), q[1] + b * std::cos(q[0]) + c * q[0];
    return x;
  };
  tm.jacobian = [a, b, c](const Vec& q) -> Mat {
    Mat j(2, 2);
    j << 1.0, a * std::cos(q[1]), -b * std::sin(q[0]) + c, 1.0;
    return j;
  };
  tm.curvature = [a, b](const Vec& q, const Vec& qd) -> Vec {
    Vec out(2);
    out << -a * std::sin(q[1]) * qd[1] * qd[1],
        -b * std::cos(q[0]) * qd[0] * qd[0];
    return out;
  };
  return tm;
}

// Smooth full-column-rank 2 -> 3 embedding:
//   x = (q0, q1, s sin(q0) cos(q1)).
inline TaskMap embed3(double s) {
  TaskMap tm;
  tm.domain_dim = 2;
  tm.codomain_dim = 3;
  tm.map = [s](const Vec& q) -> Vec {
    Vec x(3);
    x << q[0], q[1], s * std::sin(q[0]) * std::cos(q[1]);
    return x;
  };
  tm.jacobian = [s](const Vec& q) -> Mat {
    Mat j(3, 2);
    j << 1.0, 0.0, 0.0, 1.0, s * std::cos(q[0]) * std::cos(q[1]),
        -s * std::sin(q[0]) * std::sin(q[1]);
    return j;
  };
  tm.curvature = [s](const Vec& q, const Vec& qd) -> Vec {
    Vec out(3);
    const double c0 = std::cos(q[0]), s0 = std::sin(q[0]);
    const double c1 = std::cos(q[1]), s1 = std::sin(q[1]);
    out << 0.0, 0.0,
        s * (-s0 * c1 * qd[0] * qd[0] - 2.0 * c0 * s1 * qd[0] * qd[1] -
             s0 * c1 * qd[1] * qd[1]);
    return out;
  };
  return tm;
}

// Riemannian test energy L = 0.5 v^T G(x) v with G = diag(1 + x0^2, 1).
inline EnergyLagrangian bump_metric_energy() {
  auto g = [](const Vec& x) -> Mat {
    Mat m = Mat::Identity(2, 2);
    m(0, 0) = 1.0 + x[0] * x[0];
    return m;
  };
  auto dg = [](const Vec& x) -> std::vector<Mat> {
    std::vector<Mat> parts(2, Mat::Zero(2, 2));
    parts[0](0, 0) = 2.0 * x[0];
    return parts;
  };
  return riemannian_energy(2, g, dg);
}

// Finsler variant with direction-dependent mass:
//   L = 0.5 w(x) |v|^2 + 0.25 (v0^2 v1^2) / |v|^2,  w = 1 + 0.25 sin(x0).
// HD2 in v overall, mass HD0 but genuinely velocity dependent. The quartic
// part contributes p0 = 0.5 v0 v1^4 / |v|^4 (and symmetrically for p1),
// using v1^2 |v|^2 - v0^2 v1^2 = v1^4; Euler's identity p.v = 2L holds.
// Only the w factor depends on x, so f reduces to (grad w . v) v
// - 0.5 |v|^2 grad w. Undefined at v = 0.
inline EnergyLagrangian anisotropic_energy() {
  const auto w = [](const Vec& x) { return 1.0 + 0.25 * std::sin(x[0]); };
  const auto dw = [](const Vec& x) -> Vec {
    Vec g(2);
    g << 0.25 * std::cos(x[0]), 0.0;
    return g;
  };
  EnergyLagrangian e;
  e.dim = 2;
  e.value = [w](const Vec& x, const Vec& v) {
    const double n2 = v.squaredNorm();
    return 0.5 * w(x) * n2 + 0.25 * v[0] * v[0] * v[1] * v[1] / n2;
  };
  e.momentum = [w](const Vec& x, const Vec& v) -> Vec {
    const double n2 = v.squaredNorm();
    Vec p(2);
    p << w(x) * v[0] + 0.5 * v[0] * std::pow(v[1], 4) / (n2 * n2),
        w(x) * v[1] + 0.5 * v[1] * std::pow(v[0], 4) / (n2 * n2);
    return p;
  };
  e.mass = [w](const Vec& x, const Vec& v) -> Mat {
    const double n2 = v.squaredNorm();
    const double n6 = n2 * n2 * n2;
    Mat m(2, 2);
    m(0, 0) = w(x) + 0.5 * std::pow(v[1], 4) * (n2 - 4.0 * v[0] * v[0]) / n6;
    m(1, 1) = w(x) + 0.5 * std::pow(v[0], 4) * (n2 - 4.0 * v[1] * v[1]) / n6;
    m(0, 1) = m(1, 0) = 2.0 * std::pow(v[0], 3) * std::pow(v[1], 3) / n6;
    return m;
  };
  e.force = [dw](const Vec& x, const Vec& v) -> Vec {
    const Vec g = dw(x);
    return g.dot(v) * v - 0.5 * v.squaredNorm() * g;
  };
  e.sampler = [](Rng& rng) -> std::pair<Vec, Vec> {
    return {rng.uniform_vec(2, -2.0, 2.0), rng.nonzero_vec(2, 0.3, 2.0)};
  };
  return e;
}

}  // namespace fabrics::testing
