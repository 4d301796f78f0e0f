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
#include <string>
#include <utility>

#include "fabrics/finite_diff.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Differentiable map x = phi(q) between configuration and task space,
// bundled with its Jacobian J = d phi / d q and the curvature term
// c(q, qd) = J'(q, qd) qd that appears in every velocity-dependent
// pullback. Curvature is quadratic in qd by construction.
struct TaskMap {
  int domain_dim = 0;
  int codomain_dim = 0;
  std::function<Vec(const Vec&)> map;
  std::function<Mat(const Vec&)> jacobian;
  std::function<Vec(const Vec&, const Vec&)> curvature;
};

// Builds a task map from value and Jacobian functions, deriving curvature
// from the Jacobian by a directional central difference. Analytic maps
// should supply curvature directly via the aggregate.
inline TaskMap make_taskmap(int domain_dim, int codomain_dim,
                            std::function<Vec(const Vec&)> map,
                            std::function<Mat(const Vec&)> jacobian) {
  TaskMap tm;
  tm.domain_dim = domain_dim;
  tm.codomain_dim = codomain_dim;
  tm.map = std::move(map);
  tm.jacobian = jacobian;
  tm.curvature = [jacobian = std::move(jacobian)](const Vec& q, const Vec& qd) {
    return fd_directional_matvec(jacobian, q, qd);
  };
  return tm;
}

inline TaskMap identity_map(int dim) {
  TaskMap tm;
  tm.domain_dim = dim;
  tm.codomain_dim = dim;
  tm.map = [](const Vec& q) { return q; };
  tm.jacobian = [dim](const Vec&) { return Mat::Identity(dim, dim); };
  tm.curvature = [dim](const Vec&, const Vec&) { return Vec::Zero(dim); };
  return tm;
}

// x = A q + b. Curvature vanishes.
inline TaskMap affine_map(const Mat& a, const Vec& b) {
  TaskMap tm;
  tm.domain_dim = static_cast<int>(a.cols());
  tm.codomain_dim = static_cast<int>(a.rows());
  tm.map = [a, b](const Vec& q) -> Vec { return a * q + b; };
  tm.jacobian = [a](const Vec&) { return a; };
  tm.curvature = [rows = a.rows()](const Vec&, const Vec&) {
    return Vec::Zero(rows);
  };
  return tm;
}

// Composite map q -> outer(inner(q)). Chain rule:
//   J = J_out(inner(q)) J_in(q)
//   c = c_out(inner(q), J_in qd) + J_out c_in(q, qd)
inline TaskMap compose(const TaskMap& outer, const TaskMap& inner) {
  if (outer.domain_dim != inner.codomain_dim) {
    throw DimensionError("compose: outer domain does not match inner codomain");
  }
  TaskMap tm;
  tm.domain_dim = inner.domain_dim;
  tm.codomain_dim = outer.codomain_dim;
  tm.map = [outer, inner](const Vec& q) { return outer.map(inner.map(q)); };
  tm.jacobian = [outer, inner](const Vec& q) -> Mat {
    return outer.jacobian(inner.map(q)) * inner.jacobian(q);
  };
  tm.curvature = [outer, inner](const Vec& q, const Vec& qd) -> Vec {
    const Vec x = inner.map(q);
    const Vec xd = inner.jacobian(q) * qd;
    return outer.curvature(x, xd) + outer.jacobian(x) * inner.curvature(q, qd);
  };
  return tm;
}

struct TaskMapCheck {
  double jacobian_rel_err = 0.0;
  double curvature_rel_err = 0.0;
  bool pass = false;
};

// Validates the analytic Jacobian against central differences of the map
// and the curvature term against a directional difference of the Jacobian.
inline TaskMapCheck jacobian_fd_check(const TaskMap& tm, const Vec& q,
                                      const Vec& qd,
                                      double jac_tol = 1e-5,
                                      double curv_tol = 1e-4) {
  TaskMapCheck out;
  const Mat j_fd = fd_jacobian(tm.map, q);
  out.jacobian_rel_err = rel_err(tm.jacobian(q), j_fd);
  const Vec c_fd = fd_directional_matvec(tm.jacobian, q, qd);
  out.curvature_rel_err = rel_err(tm.curvature(q, qd), c_fd);
  out.pass = out.jacobian_rel_err < jac_tol && out.curvature_rel_err < curv_tol;
  return out;
}

}  // namespace fabrics
