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
#include <numbers>
#include <vector>

#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Planar revolute-chain arm. Joint i contributes its link along the
// cumulative angle c_i = base_orientation + q_0 + ... + q_i.
struct ArmModel {
  std::vector<double> link_lengths;
  std::vector<double> joint_lower;
  std::vector<double> joint_upper;
  Eigen::Vector2d base_position = Eigen::Vector2d::Zero();
  double base_orientation = 0.0;

  int dof() const { return static_cast<int>(link_lengths.size()); }
};

inline ArmModel default_arm() {
  ArmModel arm;
  arm.link_lengths = {1.0, 1.0, 1.0};
  arm.joint_lower = {-std::numbers::pi, -std::numbers::pi, -std::numbers::pi};
  arm.joint_upper = {std::numbers::pi, std::numbers::pi, std::numbers::pi};
  return arm;
}

// Base point followed by the endpoint of each link; back() is the end
// effector.
inline std::vector<Eigen::Vector2d> fk(const ArmModel& arm, const Vec& q) {
  if (q.size() != arm.dof()) throw DimensionError("fk: wrong joint count");
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(arm.dof() + 1);
  pts.push_back(arm.base_position);
  double c = arm.base_orientation;
  for (int i = 0; i < arm.dof(); ++i) {
    c += q[i];
    pts.push_back(pts.back() + arm.link_lengths[i] *
                                   Eigen::Vector2d(std::cos(c), std::sin(c)));
  }
  return pts;
}

// End-effector map with analytic Jacobian and curvature:
//   x       = base + sum_i l_i (cos c_i, sin c_i)
//   dx/dq_j = sum_{i >= j} l_i (-sin c_i, cos c_i)
//   J' qd qd = sum_i l_i cd_i^2 (-cos c_i, -sin c_i),  cd_i = sum_{k <= i} qd_k
inline TaskMap ee_taskmap(const ArmModel& arm) {
  const int n = arm.dof();
  TaskMap tm;
  tm.domain_dim = n;
  tm.codomain_dim = 2;
  tm.map = [arm](const Vec& q) -> Vec {
    const auto pts = fk(arm, q);
    return pts.back();
  };
  tm.jacobian = [arm, n](const Vec& q) -> Mat {
    if (q.size() != n) throw DimensionError("ee_taskmap: wrong joint count");
    Mat j = Mat::Zero(2, n);
    double c = arm.base_orientation;
    std::vector<Eigen::Vector2d> tangents(n);
    for (int i = 0; i < n; ++i) {
      c += q[i];
      tangents[i] =
          arm.link_lengths[i] * Eigen::Vector2d(-std::sin(c), std::cos(c));
    }
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int j_idx = n - 1; j_idx >= 0; --j_idx) {
      acc += tangents[j_idx];
      j.col(j_idx) = acc;
    }
    return j;
  };
  tm.curvature = [arm, n](const Vec& q, const Vec& qd) -> Vec {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    double c = arm.base_orientation;
    double cd = 0.0;
    for (int i = 0; i < n; ++i) {
      c += q[i];
      cd += qd[i];
      out += arm.link_lengths[i] * cd * cd *
             Eigen::Vector2d(-std::cos(c), -std::sin(c));
    }
    return out;
  };
  return tm;
}

// Distance-to-limit coordinates, one per joint per side, positive inside:
//   lower side: x = q_i - lower_i   (J row +e_i)
//   upper side: x = upper_i - q_i   (J row -e_i)
inline std::vector<TaskMap> joint_limit_maps(const ArmModel& arm) {
  const int n = arm.dof();
  std::vector<TaskMap> maps;
  maps.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    Mat a = Mat::Zero(1, n);
    Vec b(1);
    a(0, i) = 1.0;
    b[0] = -arm.joint_lower[i];
    maps.push_back(affine_map(a, b));
    a(0, i) = -1.0;
    b[0] = arm.joint_upper[i];
    maps.push_back(affine_map(a, b));
  }
  return maps;
}

}  // namespace fabrics
