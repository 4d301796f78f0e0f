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

#include <functional>
#include <utility>
#include <vector>

#include "fabrics/linalg.hpp"
#include "fabrics/potential.hpp"
#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Second-order differential equation in natural form,
//   M(x, v) xdd + f(x, v) = 0,
// represented as a pair of closures. The natural form is closed under
// pullback and summation even where M is singular; views that invert M
// (policy, canonical acceleration) raise SingularMetricError instead of
// returning silently wrong values.
struct Spec {
  int dim = 0;
  std::function<Mat(const Vec&, const Vec&)> metric;
  std::function<Vec(const Vec&, const Vec&)> force;
};

// Point evaluation (M, f) of a spec at one state.
struct SpecEval {
  Mat m;
  Vec f;
};

inline SpecEval evaluate(const Spec& s, const Vec& x, const Vec& v) {
  if (x.size() != s.dim || v.size() != s.dim) {
    throw DimensionError("evaluate: state dimension mismatch");
  }
  SpecEval e{s.metric(x, v), s.force(x, v)};
  require_symmetric(e.m, "evaluate");
  if (!is_finite(e.f)) throw Error("evaluate: force has non-finite entries");
  return e;
}

// Policy view pi = -M^{-1} f (the acceleration the spec prescribes).
inline Vec policy(const SpecEval& e) {
  return -solve_sym(e.m, e.f, "policy");
}

inline Vec evaluate_policy(const Spec& s, const Vec& x, const Vec& v) {
  return policy(evaluate(s, x, v));
}

// Canonical acceleration a = M^{-1} f, so the spec reads xdd + a = 0.
inline Vec canonical_accel(const SpecEval& e) {
  return solve_sym(e.m, e.f, "canonical_accel");
}

// Pullback of a point evaluation through a task map at (q, qd):
//   M~ = J^T M J,   f~ = J^T (f + M c),
// with (M, f) evaluated at x = phi(q), v = J qd and c = J'(q, qd) qd the
// curvature of the map. This is how a task-space equation transports to
// configuration space; metrics of reduced rank stay representable and only
// fail if a view later inverts them.
inline SpecEval pullback_eval(const Spec& s, const TaskMap& tm, const Vec& q,
                              const Vec& qd) {
  if (s.dim != tm.codomain_dim) {
    throw DimensionError("pullback: spec dimension does not match map codomain");
  }
  const Vec x = tm.map(q);
  const Mat j = tm.jacobian(q);
  const Vec v = j * qd;
  const SpecEval e = evaluate(s, x, v);
  const Vec c = tm.curvature(q, qd);
  SpecEval out;
  out.m = symmetrize(j.transpose() * (e.m * j));
  out.f = j.transpose() * (e.f + e.m * c);
  return out;
}

// Closure form of the pullback.
inline Spec pullback(const Spec& s, const TaskMap& tm) {
  Spec out;
  out.dim = tm.domain_dim;
  out.metric = [s, tm](const Vec& q, const Vec& qd) {
    return pullback_eval(s, tm, q, qd).m;
  };
  out.force = [s, tm](const Vec& q, const Vec& qd) {
    return pullback_eval(s, tm, q, qd).f;
  };
  return out;
}

// Summation combines specs over the same space component-wise. The
// canonical view of the sum is the metric-weighted average of the summand
// accelerations.
inline SpecEval sum_evals(const std::vector<SpecEval>& evals) {
  if (evals.empty()) throw DimensionError("sum_evals: empty sum");
  SpecEval out = evals.front();
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (evals[i].m.rows() != out.m.rows()) {
      throw DimensionError("sum_evals: dimension mismatch");
    }
    out.m += evals[i].m;
    out.f += evals[i].f;
  }
  return out;
}

inline Spec sum_specs(std::vector<Spec> specs) {
  if (specs.empty()) throw DimensionError("sum_specs: empty sum");
  Spec out;
  out.dim = specs.front().dim;
  for (const auto& s : specs) {
    if (s.dim != out.dim) throw DimensionError("sum_specs: dimension mismatch");
  }
  out.metric = [specs](const Vec& x, const Vec& v) {
    Mat m = specs.front().metric(x, v);
    for (std::size_t i = 1; i < specs.size(); ++i) m += specs[i].metric(x, v);
    return m;
  };
  out.force = [specs](const Vec& x, const Vec& v) {
    Vec f = specs.front().force(x, v);
    for (std::size_t i = 1; i < specs.size(); ++i) f += specs[i].force(x, v);
    return f;
  };
  return out;
}

// Metric-weighted average acceleration of canonical pairs (M_i, a_i):
//   a = (sum M_i)^{-1} sum M_i a_i.
inline Vec weighted_average_accel(const std::vector<Mat>& metrics,
                                  const std::vector<Vec>& accels) {
  if (metrics.empty() || metrics.size() != accels.size()) {
    throw DimensionError("weighted_average_accel: bad input sizes");
  }
  Mat msum = metrics.front();
  Vec fsum = metrics.front() * accels.front();
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    msum += metrics[i];
    fsum += metrics[i] * accels[i];
  }
  return solve_sym(msum, fsum, "weighted_average_accel");
}

// Forcing adds a position potential: f <- f + grad psi.
inline Spec force_spec(const Spec& s, const Potential& psi) {
  if (s.dim != psi.dim) throw DimensionError("force_spec: dimension mismatch");
  Spec out = s;
  out.force = [s, psi](const Vec& x, const Vec& v) -> Vec {
    return s.force(x, v) + psi.gradient(x);
  };
  return out;
}

// Damping adds a velocity drain: f <- f + B(x, v) v. B must evaluate
// strictly positive definite; a zero or indefinite damper is rejected at
// evaluation time.
inline Spec damp_spec(const Spec& s,
                      std::function<Mat(const Vec&, const Vec&)> damper) {
  Spec out = s;
  out.force = [s, damper = std::move(damper)](const Vec& x, const Vec& v) -> Vec {
    const Mat b = damper(x, v);
    if (b.rows() != s.dim || !is_spd(b)) {
      throw Error("damp_spec: damping matrix must be positive definite");
    }
    return s.force(x, v) + b * v;
  };
  return out;
}

inline Spec damp_spec(const Spec& s, const Mat& b) {
  return damp_spec(s, [b](const Vec&, const Vec&) { return b; });
}

}  // namespace fabrics
