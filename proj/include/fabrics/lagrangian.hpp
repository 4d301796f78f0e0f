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
#include <string>
#include <utility>
#include <vector>

#include "fabrics/finite_diff.hpp"
#include "fabrics/linalg.hpp"
#include "fabrics/spec.hpp"
#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Stationary Lagrangian L_e(x, v) with its analytic derivative bundle:
//   momentum p = dL/dv
//   mass     M = d2L/dv2            (full rank everywhere it is evaluated)
//   force    f = (d2L/dvdx) v - dL/dx
// so the Euler-Lagrange equation reads M xdd + f = 0. The Hamiltonian
// H = p . v - L is conserved along Euler-Lagrange solutions and must be
// nontrivial for an energy.
//
// `sampler` draws admissible states for validation: energies that are only
// defined (or only full rank) on part of the state space, such as the
// velocity-gated limit energy, sample their active branch.
struct EnergyLagrangian {
  int dim = 0;
  std::function<double(const Vec&, const Vec&)> value;
  std::function<Vec(const Vec&, const Vec&)> momentum;
  std::function<Mat(const Vec&, const Vec&)> mass;
  std::function<Vec(const Vec&, const Vec&)> force;
  std::function<std::pair<Vec, Vec>(Rng&)> sampler;
};

inline std::pair<Vec, Vec> default_energy_sample(int dim, Rng& rng) {
  return {rng.uniform_vec(dim, -2.0, 2.0), rng.nonzero_vec(dim, 0.2, 2.0)};
}

inline std::pair<Vec, Vec> draw_state(const EnergyLagrangian& e, Rng& rng) {
  return e.sampler ? e.sampler(rng) : default_energy_sample(e.dim, rng);
}

// Euler-Lagrange terms as a natural-form spec evaluation.
inline SpecEval el_terms(const EnergyLagrangian& e, const Vec& x,
                         const Vec& v) {
  SpecEval out{e.mass(x, v), e.force(x, v)};
  require_symmetric(out.m, "el_terms");
  return out;
}

inline double hamiltonian(const EnergyLagrangian& e, const Vec& x,
                          const Vec& v) {
  return e.momentum(x, v).dot(v) - e.value(x, v);
}

// Time derivative of the Hamiltonian under an arbitrary acceleration field:
//   H' = v . (M a + f).
// Zero when a solves the Euler-Lagrange equation; equal to -v . B v when a
// is the damped variant M a + f = -B v.
inline double energy_rate(const EnergyLagrangian& e, const Vec& x,
                          const Vec& v, const Vec& a) {
  const SpecEval el = el_terms(e, x, v);
  return v.dot(el.m * a + el.f);
}

// ---------------------------------------------------------------------------
// Shipped energies.

// L = 0.5 scale |v|^2.
inline EnergyLagrangian euclidean_energy(int dim, double scale = 1.0) {
  EnergyLagrangian e;
  e.dim = dim;
  e.value = [scale](const Vec&, const Vec& v) {
    return 0.5 * scale * v.squaredNorm();
  };
  e.momentum = [scale](const Vec&, const Vec& v) -> Vec { return scale * v; };
  e.mass = [dim, scale](const Vec&, const Vec&) -> Mat {
    return scale * Mat::Identity(dim, dim);
  };
  e.force = [dim](const Vec&, const Vec&) { return Vec::Zero(dim); };
  return e;
}

// L = 0.5 lambda w(x) |v|^2 for a smooth positive weight w. This is the
// Finsler energy behind every position-gated term: the mass lambda w(x) I
// is velocity-independent and the force
//   f = lambda (grad w . v) v - 0.5 lambda |v|^2 grad w
// is quadratic in velocity.
inline EnergyLagrangian weighted_quadratic_energy(
    int dim, double lambda, std::function<double(const Vec&)> weight,
    std::function<Vec(const Vec&)> weight_grad) {
  EnergyLagrangian e;
  e.dim = dim;
  e.value = [lambda, weight](const Vec& x, const Vec& v) {
    return 0.5 * lambda * weight(x) * v.squaredNorm();
  };
  e.momentum = [lambda, weight](const Vec& x, const Vec& v) -> Vec {
    return lambda * weight(x) * v;
  };
  e.mass = [dim, lambda, weight](const Vec& x, const Vec&) -> Mat {
    return lambda * weight(x) * Mat::Identity(dim, dim);
  };
  e.force = [lambda, weight_grad = std::move(weight_grad)](
                const Vec& x, const Vec& v) -> Vec {
    const Vec gw = weight_grad(x);
    return lambda * (gw.dot(v) * v - 0.5 * v.squaredNorm() * gw);
  };
  return e;
}

// L = 0.5 v^T G(x) v for a symmetric positive definite field G with
// per-coordinate partials dG[i] = dG/dx_i.
inline EnergyLagrangian riemannian_energy(
    int dim, std::function<Mat(const Vec&)> g,
    std::function<std::vector<Mat>(const Vec&)> dg) {
  EnergyLagrangian e;
  e.dim = dim;
  e.value = [g](const Vec& x, const Vec& v) { return 0.5 * v.dot(g(x) * v); };
  e.momentum = [g](const Vec& x, const Vec& v) -> Vec { return g(x) * v; };
  e.mass = [g](const Vec& x, const Vec&) -> Mat { return g(x); };
  e.force = [dim, dg = std::move(dg)](const Vec& x, const Vec& v) -> Vec {
    const std::vector<Mat> parts = dg(x);
    // (d/dx of G v) v: row i sums v^T dG/dx_j v over the x-dependence of
    // p_i = (G v)_i; assembled column-wise from the partials.
    Vec f = Vec::Zero(dim);
    for (int j = 0; j < dim; ++j) f += parts[j] * v * v[j];
    for (int i = 0; i < dim; ++i) f[i] -= 0.5 * v.dot(parts[i] * v);
    return f;
  };
  return e;
}

// ---------------------------------------------------------------------------
// Pullback and summation. The Euler-Lagrange operator commutes with the
// pullback: the derivative bundle of L~(q, qd) = L(phi(q), J qd) is exactly
// the spec pullback of the bundle of L.
inline EnergyLagrangian pullback_energy(const EnergyLagrangian& e,
                                        const TaskMap& tm) {
  if (e.dim != tm.codomain_dim) {
    throw DimensionError("pullback_energy: dimension mismatch");
  }
  EnergyLagrangian out;
  out.dim = tm.domain_dim;
  out.value = [e, tm](const Vec& q, const Vec& qd) {
    return e.value(tm.map(q), tm.jacobian(q) * qd);
  };
  out.momentum = [e, tm](const Vec& q, const Vec& qd) -> Vec {
    const Mat j = tm.jacobian(q);
    return j.transpose() * e.momentum(tm.map(q), j * qd);
  };
  out.mass = [e, tm](const Vec& q, const Vec& qd) -> Mat {
    const Mat j = tm.jacobian(q);
    return symmetrize(j.transpose() * e.mass(tm.map(q), j * qd) * j);
  };
  out.force = [e, tm](const Vec& q, const Vec& qd) -> Vec {
    const Vec x = tm.map(q);
    const Mat j = tm.jacobian(q);
    const Vec v = j * qd;
    return j.transpose() *
           (e.force(x, v) + e.mass(x, v) * tm.curvature(q, qd));
  };
  return out;
}

inline EnergyLagrangian sum_energies(std::vector<EnergyLagrangian> terms) {
  if (terms.empty()) throw DimensionError("sum_energies: empty sum");
  EnergyLagrangian out;
  out.dim = terms.front().dim;
  for (const auto& t : terms) {
    if (t.dim != out.dim) throw DimensionError("sum_energies: dimension mismatch");
  }
  out.value = [terms](const Vec& x, const Vec& v) {
    double s = 0.0;
    for (const auto& t : terms) s += t.value(x, v);
    return s;
  };
  out.momentum = [terms](const Vec& x, const Vec& v) {
    Vec s = Vec::Zero(x.size());
    for (const auto& t : terms) s += t.momentum(x, v);
    return s;
  };
  out.mass = [terms](const Vec& x, const Vec& v) {
    Mat s = Mat::Zero(x.size(), x.size());
    for (const auto& t : terms) s += t.mass(x, v);
    return s;
  };
  out.force = [terms](const Vec& x, const Vec& v) {
    Vec s = Vec::Zero(x.size());
    for (const auto& t : terms) s += t.force(x, v);
    return s;
  };
  return out;
}

// ---------------------------------------------------------------------------
// Validation.

struct FinslerReport {
  bool positive = true;       // L_g = sqrt(2 L_e) > 0 for v != 0
  bool hd1 = true;            // L_g(x, a v) = a L_g(x, v), a > 0
  bool mass_hd0 = true;       // M(x, a v) = M(x, v)
  bool force_hd2 = true;      // f(x, a v) = a^2 f(x, v)
  bool invertible = true;     // M full rank at samples
  double max_violation = 0.0; // worst relative error across scale checks
  bool pass = false;
};

// Checks the Finsler-energy structure on sampled admissible states. Scales
// are powers of two so homogeneity holds to rounding for exact-arithmetic
// structures.
inline FinslerReport validate_finsler(const EnergyLagrangian& e,
                                      std::uint64_t seed = 0,
                                      int samples = 200, double tol = 1e-9) {
  FinslerReport r;
  Rng rng(seed);
  const double scales[] = {0.5, 2.0, 4.0};
  for (int s = 0; s < samples; ++s) {
    const auto [x, v] = draw_state(e, rng);
    const double le = e.value(x, v);
    if (!(le > 0.0)) r.positive = false;
    const Mat m = e.mass(x, v);
    Eigen::LDLT<Mat> ldlt(m);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) {
      r.invertible = false;
    }
    const Vec f = e.force(x, v);
    const double lg = std::sqrt(std::max(0.0, 2.0 * le));
    for (double a : scales) {
      const Vec va = a * v;
      const double lga = std::sqrt(std::max(0.0, 2.0 * e.value(x, va)));
      const double e1 = rel_err(lga, a * lg);
      if (e1 > tol) r.hd1 = false;
      const double e0 = rel_err(e.mass(x, va), m);
      if (e0 > tol) r.mass_hd0 = false;
      const double e2 = rel_err(e.force(x, va), Vec(a * a * f));
      if (e2 > tol) r.force_hd2 = false;
      r.max_violation = std::max({r.max_violation, e1, e0, e2});
    }
  }
  r.pass = r.positive && r.hd1 && r.mass_hd0 && r.force_hd2 && r.invertible;
  return r;
}

struct DerivativeCheck {
  double momentum_rel_err = 0.0;
  double mass_rel_err = 0.0;
  double force_rel_err = 0.0;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Validates the analytic bundle against central differences of the value
// function only: p against dL/dv, M against dp/dv, and f against
// (d/dx dL/dv) v - dL/dx with the mixed partial taken by nested
// differences.
inline DerivativeCheck finite_diff_check(const EnergyLagrangian& e,
                                         const Vec& x, const Vec& v,
                                         double tol = 1e-5) {
  DerivativeCheck out;
  const auto l_of_v = [&](const Vec& vv) { return e.value(x, vv); };
  const Vec p_fd = fd_gradient(l_of_v, v);
  out.momentum_rel_err = rel_err(e.momentum(x, v), p_fd);

  const auto p_of_v = [&](const Vec& vv) -> Vec {
    return fd_gradient([&](const Vec& vvv) { return e.value(x, vvv); }, vv,
                       1e-4);
  };
  const Mat m_fd = fd_jacobian(p_of_v, v, 1e-4);
  out.mass_rel_err = rel_err(e.mass(x, v), symmetrize(m_fd));

  const auto p_of_x = [&](const Vec& xx) -> Vec {
    return fd_gradient([&](const Vec& vv) { return e.value(xx, vv); }, v);
  };
  const Mat dpdx = fd_jacobian(p_of_x, x);
  const Vec dldx =
      fd_gradient([&](const Vec& xx) { return e.value(xx, v); }, x);
  out.force_rel_err = rel_err(e.force(x, v), Vec(dpdx * v - dldx));

  out.max_rel_err = std::max(
      {out.momentum_rel_err, out.mass_rel_err, out.force_rel_err});
  out.pass = out.max_rel_err < tol;
  return out;
}

}  // namespace fabrics
