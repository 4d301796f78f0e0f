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

#include "fabrics/types.hpp"

namespace fabrics {

inline bool is_finite(const Vec& v) { return v.allFinite(); }
inline bool is_finite(const Mat& m) { return m.allFinite(); }

inline double asymmetry(const Mat& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

// Metrics must evaluate symmetric to tight absolute tolerance.
inline constexpr double kSymmetryTol = 1e-12;

inline void require_symmetric(const Mat& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(who) + ": metric is not square");
  }
  if (!is_finite(m)) {
    throw SingularMetricError(std::string(who) + ": metric has non-finite entries");
  }
  if (asymmetry(m) >= kSymmetryTol) {
    throw SingularMetricError(std::string(who) + ": metric asymmetry " +
                              std::to_string(asymmetry(m)) + " exceeds 1e-12");
  }
}

// Exact symmetrization of analytically symmetric products (J^T M J picks up
// roundoff-level asymmetry when formed directly).
inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

// Solves M x = b for symmetric M via LDLT. Failure (indefinite pivots,
// vanishing reciprocal condition number, or a bad residual) is an error,
// never a silent result.
inline Vec solve_sym(const Mat& m, const Vec& b, const char* who = "solve_sym") {
  if (m.rows() != b.size()) {
    throw DimensionError(std::string(who) + ": dimension mismatch");
  }
  Eigen::LDLT<Mat> ldlt(m);
  if (ldlt.info() != Eigen::Success) {
    throw SingularMetricError(std::string(who) + ": LDLT factorization failed");
  }
  const double rc = ldlt.rcond();
  if (!(rc > 1e-14)) {
    throw SingularMetricError(std::string(who) +
                              ": metric numerically singular (rcond " +
                              std::to_string(rc) + ")");
  }
  Vec x = ldlt.solve(b);
  if (!is_finite(x)) {
    throw SingularMetricError(std::string(who) + ": solve produced non-finite values");
  }
  const double scale = m.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() +
                       b.cwiseAbs().maxCoeff() + 1.0;
  if ((m * x - b).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw SingularMetricError(std::string(who) + ": solve residual too large");
  }
  return x;
}

// Inverse of a symmetric nonsingular matrix, with the same failure policy.
inline Mat inverse_sym(const Mat& m, const char* who = "inverse_sym") {
  Eigen::LDLT<Mat> ldlt(m);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
    throw SingularMetricError(std::string(who) + ": metric numerically singular");
  }
  Mat inv = ldlt.solve(Mat::Identity(m.rows(), m.cols()));
  if (!is_finite(inv)) {
    throw SingularMetricError(std::string(who) + ": inverse has non-finite values");
  }
  return inv;
}

// True when the symmetric matrix is positive definite (used to vet damping
// matrices; LLT fails on semidefinite and indefinite input).
inline bool is_spd(const Mat& m) {
  if (m.rows() != m.cols() || asymmetry(m) >= kSymmetryTol) return false;
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) return false;
  // LLT can succeed on borderline semidefinite input; reject zero pivots.
  return llt.matrixLLT().diagonal().minCoeff() > 1e-12;
}

}  // namespace fabrics
