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

#include <catch_amalgamated.hpp>

#include "fabrics/energization.hpp"
#include "fabrics/fabric_terms.hpp"
#include "fabrics/simulate.hpp"
#include "support/test_maps.hpp"

using namespace fabrics;

namespace {

// Independent oracle for the energization coefficient: bisection on the
// finite-difference energy rate of the damped system xdd = -h - alpha v.
// Uses only the energy's value function.
double bisect_alpha(const GeometryGenerator& h, const EnergyLagrangian& e,
                    const Vec& x, const Vec& v) {
  auto rate = [&](double alpha) {
    const Vec a = -h.accel(x, v) - alpha * v;
    const double s = 1e-6;
    return (e.value(x + s * v, v + s * a) - e.value(x - s * v, v - s * a)) /
           (2.0 * s);
  };
  double lo = -1.0, hi = 1.0;
  while (rate(lo) * rate(hi) > 0.0) {
    lo *= 2.0;
    hi *= 2.0;
    REQUIRE(hi < 1e12);
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rate(lo) * rate(mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GeometryGenerator curl_geometry() {
  GeometryGenerator g;
  g.dim = 2;
  g.accel = [](const Vec& x, const Vec& v) -> Vec {
    Vec h(2);
    h << v.squaredNorm() * std::sin(x[1]) + 0.5 * v[0] * v[1],
        v[0] * v[0] - 0.3 * v.squaredNorm() * x[0];
    return h;
  };
  return g;
}

}  // namespace

TEST_CASE("projector reduces to the orthogonal projection for Euclidean mass") {
  const auto e = euclidean_energy(3);
  Vec v(3);
  v << 1.0, 2.0, -2.0;
  const Projectors pr = projector(e, Vec::Zero(3), v);
  const Vec vhat = v.normalized();
  const Mat want = Mat::Identity(3, 3) - vhat * vhat.transpose();
  CHECK(rel_err(pr.p, want) < 1e-12);
  CHECK(rel_err(pr.r, want) < 1e-12);
}

TEST_CASE("projector identities on random SPD masses") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const int d = 2 + static_cast<int>(rng.raw() % 3);
    Mat a(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
    const Mat m = a * a.transpose() + 0.2 * Mat::Identity(d, d);
    EnergyLagrangian e;
    e.dim = d;
    e.mass = [m](const Vec&, const Vec&) { return m; };
    e.value = [m](const Vec&, const Vec& v) { return 0.5 * v.dot(m * v); };
    e.momentum = [m](const Vec&, const Vec& v) -> Vec { return m * v; };
    e.force = [d](const Vec&, const Vec&) { return Vec::Zero(d); };

    const Vec v = rng.nonzero_vec(d, 0.2, 2.0);
    const Vec w = rng.uniform_vec(d, -2.0, 2.0);
    const Projectors pr = projector(e, Vec::Zero(d), v);
    CHECK((pr.p * pr.p - pr.p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(v.dot(pr.p * w)) < 1e-10);
    // R recovers P through the mass and is symmetric.
    CHECK(rel_err(Mat(m * pr.r), pr.p) < 1e-10);
    CHECK(asymmetry(pr.r) < 1e-10);
  }
}

TEST_CASE("projector requires nonzero velocity") {
  const auto e = euclidean_energy(2);
  CHECK_THROWS_AS(projector(e, Vec::Zero(2), Vec::Zero(2)), ZeroVelocityError);
}

TEST_CASE("energization coefficient closed form") {
  const auto e = euclidean_energy(2);
  Vec v(2);
  v << 1.0, 0.0;
  GeometryGenerator h;
  h.dim = 2;

  // h orthogonal to v does no work: alpha = 0.
  h.accel = [](const Vec&, const Vec&) -> Vec {
    Vec a(2);
    a << 0.0, 3.0;
    return a;
  };
  CHECK(energization_coefficient(h, e, Vec::Zero(2), v) ==
        Catch::Approx(0.0).margin(1e-14));

  // h = v at unit speed decelerates at unit rate: alpha = -1 cancels it.
  h.accel = [](const Vec&, const Vec& vv) -> Vec { return vv; };
  CHECK(energization_coefficient(h, e, Vec::Zero(2), v) == Catch::Approx(-1.0));
}

TEST_CASE("closed-form alpha matches the bisection oracle") {
  const GeometryGenerator h = curl_geometry();
  const auto energies = {testing::bump_metric_energy(),
                         testing::anisotropic_energy()};
  Rng rng(41);
  for (const auto& e : energies) {
    for (int i = 0; i < 50; ++i) {
      const Vec x = rng.uniform_vec(2, -1.5, 1.5);
      const Vec v = rng.nonzero_vec(2, 0.3, 1.8);
      const double closed = energization_coefficient(h, e, x, v);
      const double oracle = bisect_alpha(h, e, x, v);
      CHECK(std::abs(closed - oracle) < 1e-8);
    }
  }
}

TEST_CASE("conserving coefficient is the policy-convention mirror") {
  const auto e = testing::bump_metric_energy();
  const GeometryGenerator h = curl_geometry();
  Rng rng(43);
  for (int i = 0; i < 20; ++i) {
    const Vec x = rng.uniform_vec(2, -1.0, 1.0);
    const Vec v = rng.nonzero_vec(2, 0.3, 1.5);
    const Vec a = -h.accel(x, v);
    // xdd = a + alpha v with the conserving alpha has zero energy rate.
    const double alpha = conserving_coefficient(a, e, x, v);
    CHECK(std::abs(energy_rate(e, x, v, Vec(a + alpha * v))) < 1e-10);
  }
}

TEST_CASE("energization projects the correction orthogonally in energy geometry") {
  // Euclidean energy and h orthogonal to v: the energized policy is -h
  // itself (the projection leaves it untouched).
  const auto e = euclidean_energy(2);
  GeometryGenerator h;
  h.dim = 2;
  h.accel = [](const Vec&, const Vec& v) -> Vec {
    Vec a(2);
    a << -v[1], v[0];
    return a * v.norm();
  };
  const Spec en = energize(h, e);
  Vec x(2), v(2);
  x << 0.2, 0.4;
  v << 1.0, -0.5;
  const Vec pi = evaluate_policy(en, x, v);
  CHECK(rel_err(pi, Vec(-h.accel(x, v))) < 1e-12);
}

TEST_CASE("energized acceleration differs from the geometry by a multiple of v") {
  const auto e = testing::bump_metric_energy();
  const GeometryGenerator h = curl_geometry();
  const Spec en = energize(h, e);
  Rng rng(47);
  for (int i = 0; i < 30; ++i) {
    const Vec x = rng.uniform_vec(2, -1.5, 1.5);
    const Vec v = rng.nonzero_vec(2, 0.3, 1.8);
    const Vec diff = evaluate_policy(en, x, v) + h.accel(x, v);
    // Cross component against v vanishes.
    const double cross = diff[0] * v[1] - diff[1] * v[0];
    CHECK(std::abs(cross) < 1e-10);
    // And the multiple is the energization coefficient.
    const double alpha = energization_coefficient(h, e, x, v);
    CHECK(rel_err(diff, Vec(-alpha * v)) < 1e-8);
  }
}

TEST_CASE("energized rollout conserves the Hamiltonian") {
  TermParams p;
  p.lambda = 1.3;
  p.sigma = 1.1;
  const FabricTerm term = attractor_term(Vec::Zero(2), p);
  const Spec en = energize(term.generator, term.energy);
  const AccelFn accel = [&](double, const Vec& q, const Vec& qd) {
    return evaluate_policy(en, q, qd);
  };
  Vec q0(2), qd0(2);
  q0 << 1.4, -0.8;
  qd0 << -0.6, 0.9;
  RolloutOptions opts;
  opts.channel_names = {"H"};
  opts.channels = [&](double, const Vec& q, const Vec& qd) {
    return std::vector<double>{hamiltonian(term.energy, q, qd)};
  };
  const Trajectory traj = rollout(accel, q0, qd0, 1e-3, 4.0, opts);
  CHECK(channel_drift(traj, "H") < 1e-7);
}

TEST_CASE("bent generator stays homogeneous of degree two") {
  TermParams p;
  p.sigma = 0.9;
  const FabricTerm term = attractor_term(Vec::Ones(2), p);
  const GeometryGenerator bent =
      energized_generator(term.generator, term.energy);
  Rng rng(53);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rng.uniform_vec(2, -2.0, 2.0);
    const Vec v = rng.nonzero_vec(2, 0.3, 1.5);
    CHECK(check_hd2(bent, x, v, 1e-8).pass);
  }
}

TEST_CASE("zero velocity falls back to the raw geometry") {
  const auto e = euclidean_energy(2, 2.0);
  GeometryGenerator h;
  h.dim = 2;
  h.accel = [](const Vec&, const Vec&) { return Vec::Constant(2, 0.7); };
  const Spec en = energize(h, e);
  const Vec pi = evaluate_policy(en, Vec::Zero(2), Vec::Zero(2));
  CHECK(rel_err(pi, Vec(Vec::Constant(2, -0.7))) < 1e-12);
  CHECK_THROWS_AS(
      energization_coefficient(h, e, Vec::Zero(2), Vec::Zero(2)),
      ZeroVelocityError);
}

TEST_CASE("energizing commutes with pullback on full-rank maps") {
  TermParams p;
  p.lambda = 0.8;
  p.sigma = 1.4;

  const GeometryGenerator h = curl_geometry();
  const auto e = testing::bump_metric_energy();
  const Spec en_upstairs = energize(h, e);

  for (const TaskMap& tm :
       {testing::warp2(0.3, -0.2, 0.25), testing::warp2(-0.4, 0.35, 0.0)}) {
    // Route A: energize on the leaf, pull the spec down.
    const Spec route_a = pullback(en_upstairs, tm);

    // Route B: pull the raw geometry and the energy down, then energize.
    Spec raw;
    raw.dim = 2;
    raw.metric = e.mass;
    raw.force = [&](const Vec& x, const Vec& v) -> Vec {
      return e.mass(x, v) * h.accel(x, v);
    };
    const Spec pulled_raw = pullback(raw, tm);
    const auto pulled_e = pullback_energy(e, tm);
    GeometryGenerator pulled_h;
    pulled_h.dim = 2;
    pulled_h.accel = [pulled_raw](const Vec& q, const Vec& qd) -> Vec {
      return canonical_accel(evaluate(pulled_raw, q, qd));
    };
    const Spec route_b = energize(pulled_h, pulled_e);

    Rng rng(59);
    for (int i = 0; i < 25; ++i) {
      const Vec q = rng.uniform_vec(2, -1.2, 1.2);
      const Vec qd = rng.nonzero_vec(2, 0.3, 1.5);
      const Vec pi_a = evaluate_policy(route_a, q, qd);
      const Vec pi_b = evaluate_policy(route_b, q, qd);
      CHECK(rel_err(pi_a, pi_b) < 1e-6);
    }
  }
}

TEST_CASE("geometry magnitude is bounded by its unit-velocity envelope") {
  // HD2 means |h2(x, v)| = |v|^2 |h2(x, v/|v|)|: along a rollout the
  // generator vanishes quadratically with speed, which is what makes
  // fabrics unbiased at rest.
  const GeometryGenerator h = curl_geometry();
  Rng rng(61);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rng.uniform_vec(2, -1.5, 1.5);
    const Vec v = rng.nonzero_vec(2, 1e-3, 2.0);
    const double unit = h.accel(x, v.normalized()).norm();
    CHECK(h.accel(x, v).norm() <= v.squaredNorm() * unit * (1.0 + 1e-9) + 1e-15);
  }
}
