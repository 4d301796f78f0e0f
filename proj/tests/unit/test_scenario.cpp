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

// Scenario parsing, artifact files, and the command-line front end
// (exercised end to end through std::system on the built binary).

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fabrics/fabrics.hpp"

#ifdef _WIN32
#error "exit-code handling below assumes POSIX wait status semantics"
#endif
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json minimal_scenario() {
  return json::parse(R"({
    "arm": {
      "link_lengths": [1.0, 1.0],
      "joint_lower": [-3.1, -3.1],
      "joint_upper": [3.1, 3.1]
    },
    "start_q": [0.4, 0.6],
    "goals": [[1.2, 0.8]],
    "terms": [
      { "kind": "attractor", "params": { "k": 0.8, "lambda": 0.6, "alpha": 10.0 } },
      { "kind": "joint_limits", "params": { "lambda": 0.2, "lambda_g": 1.5 } },
      { "kind": "base_inertia", "params": { "lambda": 0.15 } }
    ],
    "potential": { "kind": "soft_distance", "k": 4.0, "alpha": 10.0 },
    "speed_control": {
      "eta": 1.0,
      "base_damping": 0.1,
      "switch_damping": 6.0,
      "switch_radius": 1.5
    },
    "sim": { "dt": 0.005, "t_max": 8.0, "stop_speed": 1e-4, "stop_hold": 0.3 }
  })");
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("scenario_test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(FABRICS_CLI_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_scenario accepts the minimal document") {
  const fabrics::Scenario s = fabrics::parse_scenario(minimal_scenario(), "mini");
  CHECK(s.name == "mini");
  CHECK(s.arm.dof() == 2);
  CHECK(s.goals.size() == 1);
  CHECK(s.terms.size() == 3);
  CHECK(s.speed.eta == 1.0);
  CHECK(s.sim.dt == 0.005);
  CHECK(s.start_q[1] == 0.6);
}

TEST_CASE("scenario validation names the offending field") {
  auto expect_error = [](json j, const std::string& needle) {
    try {
      fabrics::parse_scenario(j, "bad");
      FAIL("expected ValidationError mentioning " + needle);
    } catch (const fabrics::ValidationError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  json j = minimal_scenario();
  j["sim"].erase("dt");
  expect_error(j, "sim.dt");

  j = minimal_scenario();
  j["sim"]["dt"] = -0.01;
  expect_error(j, "sim.dt");

  j = minimal_scenario();
  j["arm"]["link_lengths"][1] = 0.0;
  expect_error(j, "arm.link_lengths[1]");

  j = minimal_scenario();
  j["terms"][0]["kind"] = "teleport";
  expect_error(j, "terms[0].kind");

  j = minimal_scenario();
  j.erase("goals");
  expect_error(j, "goals");

  j = minimal_scenario();
  j["goals"] = json::array();
  expect_error(j, "goals");

  j = minimal_scenario();
  j["goals"][0] = {1.0, 2.0, 3.0};
  expect_error(j, "goals[0]");

  j = minimal_scenario();
  j["start_q"][0] = 4.0;  // outside [-3.1, 3.1]
  expect_error(j, "start_q[0]");

  j = minimal_scenario();
  j["arm"]["joint_lower"][0] = 5.0;  // lower above upper
  expect_error(j, "arm.joint_lower[0]");

  j = minimal_scenario();
  j["terms"][0]["params"]["lambda"] = 0.0;
  expect_error(j, "terms[0].params.lambda");

  j = minimal_scenario();
  j["terms"][1]["params"]["lambda_g"] = 0.5;
  expect_error(j, "terms[1].params.lambda_g");

  j = minimal_scenario();
  j["speed_control"]["eta"] = 1.5;
  expect_error(j, "speed_control.eta");

  j = minimal_scenario();
  j["potential"]["kind"] = "volcano";
  expect_error(j, "potential.kind");

  // floor terms need a gate width, from params.sigma or workspace.clearance
  j = minimal_scenario();
  j["terms"].push_back({{"kind", "vertical_approach"}});
  expect_error(j, "terms[3].params.sigma");

  j = minimal_scenario();
  j["terms"].push_back({{"kind", "floor_lift"}, {"params", {{"sigma", 0.2}}}});
  expect_error(j, "workspace.floor_height");

  j = minimal_scenario();
  j["terms"].push_back({{"kind", "floor_limit"}});
  expect_error(j, "workspace.floor_height");
}

TEST_CASE("shipped scenarios parse and build episodes") {
  for (const std::string name : {"reach", "redundancy", "shaping"}) {
    const fs::path path = fs::path(FABRICS_SCENARIO_DIR) / (name + ".json");
    INFO(path.string());
    const fabrics::Scenario s = fabrics::load_scenario(path.string());
    CHECK(s.arm.dof() == 3);
    CHECK(!s.goals.empty());
    const fabrics::EpisodeSetup ep = fabrics::build_episode(s, s.goals[0]);
    CHECK(ep.tree.leaves.size() >= 2);
    CHECK(ep.limit_maps.size() == 6);
    // The assembled episode produces a finite regulated acceleration.
    const fabrics::Vec q = s.start_q;
    fabrics::Vec qd = fabrics::Vec::Zero(3);
    qd[0] = 0.3;
    const fabrics::SpecEval root = fabrics::tree_resolve(ep.tree, q, qd);
    const fabrics::Vec qdd = fabrics::controlled_acceleration(
        root, ep.fabric_energy, ep.psi_root, ep.cfg, q, qd, 0.0);
    CHECK(fabrics::is_finite(qdd));
  }
}

TEST_CASE("load_scenario rejects missing and malformed files") {
  CHECK_THROWS_AS(fabrics::load_scenario("no_such_file.json"),
                  fabrics::ValidationError);
  const fs::path dir = fresh_dir("malformed");
  const fs::path p = dir / "broken.json";
  std::ofstream(p) << "{ not json";
  CHECK_THROWS_AS(fabrics::load_scenario(p.string()), fabrics::ValidationError);
}

TEST_CASE("trajectory CSV header is bit-exact and values round-trip") {
  CHECK(fabrics::trajectory_csv_header(3) ==
        "t,ee_x,ee_y,H_fabric,H_exec,psi,grad_norm,"
        "q0,q1,q2,qd0,qd1,qd2");
  CHECK(fabrics::trajectory_csv_header(2) ==
        "t,ee_x,ee_y,H_fabric,H_exec,psi,grad_norm,q0,q1,qd0,qd1");

  const fs::path dir = fresh_dir("roundtrip");
  fabrics::Scenario s = fabrics::parse_scenario(minimal_scenario(), "mini");
  s.sim.t_max = 0.5;
  const fabrics::EpisodeSetup ep = fabrics::build_episode(s, s.goals[0]);
  const fabrics::EpisodeResult res =
      fabrics::run_episode(s, ep, s.goals[0], s.start_q,
                           fabrics::Vec::Zero(2));
  const fs::path csv = dir / "traj.csv";
  fabrics::write_trajectory_csv(csv.string(), res.traj, s.arm);

  const fabrics::CsvTable table = fabrics::read_csv(csv.string());
  REQUIRE(table.rows.size() == res.traj.rows());
  const auto t = table.column("t");
  const auto q0 = table.column("q0");
  const auto psi = table.column("psi");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    // %.17g printing preserves doubles exactly
    CHECK(t[i] == res.traj.t[i]);
    CHECK(q0[i] == res.traj.q[i][0]);
  }
  CHECK(psi.front() > psi.back());
  CHECK_THROWS_AS(table.column("nope"), fabrics::ValidationError);
}

TEST_CASE("run_scenario writes per-episode artifacts and a summary") {
  const fs::path dir = fresh_dir("artifacts");
  fabrics::Scenario s = fabrics::parse_scenario(minimal_scenario(), "mini");
  fabrics::RunOptions opts;
  opts.out_dir = (dir / "out").string();
  const fabrics::RunSummary summary = fabrics::run_scenario(s, opts);
  REQUIRE(summary.episodes.size() == 1);
  CHECK(summary.all_converged);
  CHECK(summary.episodes[0].ee_error < 5e-3);

  CHECK(fs::exists(dir / "out" / "episode_0.csv"));
  CHECK(fs::exists(dir / "out" / "episode_0_diag.csv"));
  CHECK(fs::exists(dir / "out" / "episode_0.svg"));
  const json summary_json = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary_json["all_converged"].get<bool>());
  CHECK(summary_json["episodes"].size() == 1);
  CHECK(summary_json["episodes"][0]["converged"].get<bool>());
  CHECK(summary_json["episodes"][0]["kkt_residual"].get<double>() >= 0.0);

  const std::string svg = slurp(dir / "out" / "episode_0.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);

  // The diagnostics log keeps the regulator below the conserving level.
  const fabrics::CsvTable diag =
      fabrics::read_csv((dir / "out" / "episode_0_diag.csv").string());
  const auto reg = diag.column("alpha_reg");
  const auto le = diag.column("alpha_le");
  REQUIRE(!reg.empty());
  for (std::size_t i = 0; i < reg.size(); ++i) CHECK(reg[i] < le[i]);
}

TEST_CASE("cli exit codes distinguish validation, runtime, and invariant failures") {
  const fs::path dir = fresh_dir("cli");

  json good = minimal_scenario();
  const fs::path good_path = write_json(dir, "good.json", good);

  SECTION("run succeeds on a convergent scenario") {
    CHECK(run_cli("run " + good_path.string() + " --out " +
                  (dir / "run_ok").string()) == 0);
    CHECK(fs::exists(dir / "run_ok" / "summary.json"));
  }

  SECTION("validation failures exit 1") {
    json bad = minimal_scenario();
    bad["sim"].erase("dt");
    const fs::path bad_path = write_json(dir, "bad.json", bad);
    CHECK(run_cli("run " + bad_path.string() + " --out " +
                  (dir / "run_bad").string()) == 1);
    CHECK(run_cli("run " + (dir / "missing.json").string()) == 1);
  }

  SECTION("starved rollouts exit 2 and record the failure") {
    json starved = minimal_scenario();
    starved["sim"]["t_max"] = 0.05;
    const fs::path starved_path = write_json(dir, "starved.json", starved);
    CHECK(run_cli("run " + starved_path.string() + " --out " +
                  (dir / "run_starved").string()) == 2);
    const json summary = json::parse(slurp(dir / "run_starved" / "summary.json"));
    CHECK(!summary["all_converged"].get<bool>());
    CHECK(!summary["episodes"][0]["converged"].get<bool>());
  }

  SECTION("dt override propagates") {
    CHECK(run_cli("run " + good_path.string() + " --dt 0.004 --out " +
                  (dir / "run_dt").string()) == 0);
    const fabrics::CsvTable table =
        fabrics::read_csv((dir / "run_dt" / "episode_0.csv").string());
    const auto t = table.column("t");
    REQUIRE(t.size() >= 2);
    CHECK(t[1] == Catch::Approx(0.004));
  }

  SECTION("plot renders an SVG from a trajectory CSV") {
    REQUIRE(run_cli("run " + good_path.string() + " --out " +
                    (dir / "run_plot").string()) == 0);
    const fs::path svg = dir / "plot.svg";
    CHECK(run_cli("plot " + (dir / "run_plot" / "episode_0.csv").string() +
                  " --arm " + good_path.string() + " --out " + svg.string() +
                  " --snapshots 6") == 0);
    const std::string body = slurp(svg);
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(body.find("<circle") != std::string::npos);
  }

  SECTION("unknown subcommands and bad arguments exit 1") {
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("demo nosuchdemo") == 1);
    CHECK(run_cli("run") == 1);
  }
}

TEST_CASE("cli check runs the invariant suite and catches injected faults") {
  CHECK(run_cli("check --seed 7") == 0);
  CHECK(run_cli("check --seed 7 --inject-fault") == 3);
}

TEST_CASE("runs are deterministic byte for byte") {
  const fs::path dir = fresh_dir("determinism");
  const fs::path p = write_json(dir, "scene.json", minimal_scenario());
  REQUIRE(run_cli("run " + p.string() + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run_cli("run " + p.string() + " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "episode_0.csv") == slurp(dir / "b" / "episode_0.csv"));
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
}
