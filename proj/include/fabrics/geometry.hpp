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

#include "fabrics/finite_diff.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Geometry of paths xdd + h2(x, v) = 0 with h2 homogeneous of degree 2 in
// velocity. Homogeneity makes the traced paths independent of the speed
// they are run at; integrators below adopt the sign convention that
// -h2 is the prescribed acceleration.
struct GeometryGenerator {
  int dim = 0;
  std::function<Vec(const Vec&, const Vec&)> accel;  // h2(x, v)
};

struct Hd2Check {
  double max_rel_err = 0.0;
  bool pass = false;
};

// Verifies h2(x, a v) = a^2 h2(x, v) at one state for positive scales.
// Scales are powers of two, so smooth generators satisfy this to rounding.
inline Hd2Check check_hd2(const GeometryGenerator& g, const Vec& x,
                          const Vec& v, double tol = 1e-9) {
  Hd2Check out;
  const Vec base = g.accel(x, v);
  for (double a : {0.5, 2.0, 4.0}) {
    const Vec scaled = g.accel(x, a * v);
    out.max_rel_err =
        std::max(out.max_rel_err, rel_err(scaled, Vec(a * a * base)));
  }
  out.pass = out.max_rel_err < tol;
  return out;
}

}  // namespace fabrics
