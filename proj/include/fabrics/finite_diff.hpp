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

#include "fabrics/types.hpp"

namespace fabrics {

// Central-difference step sizes used by the validation suite. Derivative
// checks use 1e-5; directional curvature checks use 1e-6.
inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdCurvatureStep = 1e-6;

// Central-difference gradient of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double h = kFdStep) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

// Central-difference Jacobian of a vector function.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                       double h = kFdStep) {
  const Vec f0 = f(x);
  Mat j(f0.size(), x.size());
  Vec xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return j;
}

// Directional derivative of a matrix function along dir, contracted with
// dir: approximates d/dt[A(x + t dir)]|_{t=0} * dir. This is the shape of
// every curvature term J'(q) qd with J' differentiated along the motion.
inline Vec fd_directional_matvec(const std::function<Mat(const Vec&)>& a,
                                 const Vec& x, const Vec& dir,
                                 double h = kFdCurvatureStep) {
  const Mat ap = a(x + h * dir);
  const Mat am = a(x - h * dir);
  return ((ap - am) / (2.0 * h)) * dir;
}

// Relative error with an absolute floor of 1: |got - want| / max(1, |want|).
inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double rel_err(const Vec& got, const Vec& want) {
  return (got - want).cwiseAbs().maxCoeff() /
         std::max(1.0, want.cwiseAbs().maxCoeff());
}

inline double rel_err(const Mat& got, const Mat& want) {
  return (got - want).cwiseAbs().maxCoeff() /
         std::max(1.0, want.cwiseAbs().maxCoeff());
}

}  // namespace fabrics
