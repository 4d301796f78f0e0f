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

#include <Eigen/Dense>

#include <random>
#include <stdexcept>
#include <string>

namespace fabrics {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Velocity norms at or below this guard take the zero-velocity branch of
// every velocity-normalized operation (energization, speed control).
inline constexpr double kVelocityGuard = 1e-9;

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched vector/matrix dimensions between composed objects.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// A metric solve failed: the (accumulated) metric is singular or
// numerically unusable. Reduced-rank pullbacks surface here when their
// metric is inverted.
class SingularMetricError : public Error {
 public:
  explicit SingularMetricError(const std::string& what) : Error(what) {}
};

// A velocity-normalized quantity was requested at (numerically) zero
// velocity where no fallback is defined.
class ZeroVelocityError : public Error {
 public:
  explicit ZeroVelocityError(const std::string& what) : Error(what) {}
};

// Malformed user input (scenario files, CLI arguments).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// Deterministic random draws for samplers and tests. Values are derived
// directly from the mt19937_64 stream so sequences are stable across
// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  Vec uniform_vec(int dim, double lo, double hi) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Uniform direction with norm in [min_norm, max_norm].
  Vec nonzero_vec(int dim, double min_norm, double max_norm) {
    Vec v = uniform_vec(dim, -1.0, 1.0);
    while (v.norm() < 1e-6) v = uniform_vec(dim, -1.0, 1.0);
    const double target = uniform(min_norm, max_norm);
    return v * (target / v.norm());
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace fabrics
