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

#include "fabrics/geometry.hpp"
#include "fabrics/lagrangian.hpp"
#include "fabrics/linalg.hpp"
#include "fabrics/spec.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Energy projection operators at a state, for energy mass M and momentum
// direction v:
//   R = M^{-1} - v v^T / (v^T M v)     (momentum-orthogonal corrector)
//   P = M R = I - (M v) v^T / (v^T M v)
// P is idempotent and v^T P = 0: corrections routed through P never do
// work along v, which is what makes energization preserve the energy.
struct Projectors {
  Mat p;  // P
  Mat r;  // R
};

inline Projectors projector(const EnergyLagrangian& e, const Vec& x,
                            const Vec& v) {
  if (v.norm() <= kVelocityGuard) {
    throw ZeroVelocityError("projector: undefined at zero velocity");
  }
  const Mat m = e.mass(x, v);
  require_symmetric(m, "projector");
  const Vec mv = m * v;
  const double denom = v.dot(mv);
  if (!(denom > 0.0)) {
    throw SingularMetricError("projector: v^T M v must be positive");
  }
  Projectors out;
  out.p = Mat::Identity(m.rows(), m.cols()) - mv * v.transpose() / denom;
  out.r = inverse_sym(m, "projector") - v * v.transpose() / denom;
  return out;
}

// Coefficient that makes xdd = -h - alpha v conserve the Hamiltonian of e:
//   alpha = -(v^T M v)^{-1} v^T [M h - f].
inline double energization_coefficient(const GeometryGenerator& h,
                                       const EnergyLagrangian& e,
                                       const Vec& x, const Vec& v) {
  if (v.norm() <= kVelocityGuard) {
    throw ZeroVelocityError("energization_coefficient: zero velocity");
  }
  const SpecEval el = el_terms(e, x, v);
  const double denom = v.dot(el.m * v);
  if (!(denom > 0.0)) {
    throw SingularMetricError("energization_coefficient: v^T M v must be positive");
  }
  return -v.dot(el.m * h.accel(x, v) - el.f) / denom;
}

// Conserving coefficient in the policy convention: xdd = a + alpha v keeps
// the Hamiltonian of e constant when
//   alpha = -(v^T M v)^{-1} v^T (M a + f).
// Same formula family as energization_coefficient with h = -a; this is the
// form speed regulation composes with its "+ alpha v" system.
inline double conserving_coefficient(const Vec& a, const EnergyLagrangian& e,
                                     const Vec& x, const Vec& v) {
  if (v.norm() <= kVelocityGuard) {
    throw ZeroVelocityError("conserving_coefficient: zero velocity");
  }
  const SpecEval el = el_terms(e, x, v);
  const double denom = v.dot(el.m * v);
  if (!(denom > 0.0)) {
    throw SingularMetricError("conserving_coefficient: v^T M v must be positive");
  }
  return -v.dot(el.m * a + el.f) / denom;
}

// Energization of a geometry h2 by an energy: the spec
//   M xdd + f_e + P [M h2 - f_e] = 0
// follows the geometry's paths while conserving the energy's Hamiltonian.
// At (numerically) zero velocity the projection is undefined and the spec
// falls back to the raw geometry, M xdd + M h2 = 0.
inline Spec energize(const GeometryGenerator& h, const EnergyLagrangian& e) {
  if (h.dim != e.dim) throw DimensionError("energize: dimension mismatch");
  Spec out;
  out.dim = e.dim;
  out.metric = e.mass;
  out.force = [h, e](const Vec& x, const Vec& v) -> Vec {
    const SpecEval el = el_terms(e, x, v);
    const Vec mh = el.m * h.accel(x, v);
    if (v.norm() <= kVelocityGuard) return mh;
    const double denom = v.dot(el.m * v);
    if (!(denom > 0.0)) {
      throw SingularMetricError("energize: v^T M v must be positive");
    }
    const Vec w = mh - el.f;
    // P w computed directly; forming P is not needed.
    return el.f + w - (el.m * v) * (v.dot(w) / denom);
  };
  return out;
}

// Policy view of the energized system: the bent generator
//   h2~ = M^{-1} f_e + R [M h2 - f_e],
// again homogeneous of degree 2 when the energy is Finsler and h2 is HD2.
inline GeometryGenerator energized_generator(const GeometryGenerator& h,
                                             const EnergyLagrangian& e) {
  const Spec s = energize(h, e);
  GeometryGenerator out;
  out.dim = h.dim;
  out.accel = [s](const Vec& x, const Vec& v) -> Vec {
    return solve_sym(s.metric(x, v), s.force(x, v), "energized_generator");
  };
  return out;
}

}  // namespace fabrics
