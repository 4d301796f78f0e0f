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

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fabrics/planar_arm.hpp"
#include "fabrics/simulate.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Shortest round-trippable decimal form of a double, locale independent.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed trajectory CSV schema. The four energy channels are looked up by
// name in the recorded channels; per-joint columns follow them.
//   t,ee_x,ee_y,H_fabric,H_exec,psi,grad_norm,q0..q{n-1},qd0..qd{n-1}
inline std::string trajectory_csv_header(int dof) {
  std::string h = "t,ee_x,ee_y,H_fabric,H_exec,psi,grad_norm";
  for (int i = 0; i < dof; ++i) h += ",q" + std::to_string(i);
  for (int i = 0; i < dof; ++i) h += ",qd" + std::to_string(i);
  return h;
}

namespace detail {
inline std::size_t channel_index(const Trajectory& traj,
                                 const std::string& name) {
  for (std::size_t i = 0; i < traj.channel_names.size(); ++i) {
    if (traj.channel_names[i] == name) return i;
  }
  throw ValidationError("trajectory is missing channel " + name);
}
}  // namespace detail

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 const ArmModel& arm) {
  const std::size_t ih = detail::channel_index(traj, "H_fabric");
  const std::size_t ie = detail::channel_index(traj, "H_exec");
  const std::size_t ip = detail::channel_index(traj, "psi");
  const std::size_t ig = detail::channel_index(traj, "grad_norm");

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << trajectory_csv_header(arm.dof()) << "\n";
  for (std::size_t r = 0; r < traj.rows(); ++r) {
    const auto ee = fk(arm, traj.q[r]).back();
    const auto& ch = traj.channels[r];
    out << format_double(traj.t[r]) << ',' << format_double(ee.x()) << ','
        << format_double(ee.y()) << ',' << format_double(ch[ih]) << ','
        << format_double(ch[ie]) << ',' << format_double(ch[ip]) << ','
        << format_double(ch[ig]);
    for (int i = 0; i < arm.dof(); ++i) {
      out << ',' << format_double(traj.q[r][i]);
    }
    for (int i = 0; i < arm.dof(); ++i) {
      out << ',' << format_double(traj.qd[r][i]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

// Per-step regulator diagnostics, one file per episode beside the
// trajectory CSV (the trajectory schema above is fixed).
inline void write_diagnostics_csv(const std::string& path,
                                  const Trajectory& traj) {
  static const char* kCols[] = {"alpha_ex0", "alpha_ex_psi", "alpha_le",
                                "alpha_ex_eta", "beta", "alpha_boost",
                                "alpha_reg"};
  std::vector<std::size_t> idx;
  for (const char* c : kCols) idx.push_back(detail::channel_index(traj, c));

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "t";
  for (const char* c : kCols) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < traj.rows(); ++r) {
    out << format_double(traj.t[r]);
    for (const std::size_t i : idx) {
      out << ',' << format_double(traj.channels[r][i]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

// Loaded CSV table, column-addressable by header name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  const std::vector<double> column(const std::string& name) const {
    std::size_t idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) idx = i;
    }
    if (idx == header.size()) {
      throw ValidationError("csv column not found: " + name);
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty csv: " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size()) {
      throw ValidationError("csv row width mismatch in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// SVG snapshot rendering: a sequence of arm poses sampled evenly in time,
// drawn light to dark, over the end-effector path. World y points up.

struct SvgOptions {
  int snapshots = 12;
  int width = 640;
  std::vector<Eigen::Vector2d> goals;
  bool draw_floor = false;
  double floor_height = 0.0;
};

inline void write_arm_svg(const std::string& path, const ArmModel& arm,
                          const std::vector<Vec>& configurations,
                          const std::vector<Eigen::Vector2d>& ee_path,
                          const SvgOptions& opts = {}) {
  if (configurations.empty()) {
    throw ValidationError("write_arm_svg: no configurations");
  }
  const double reach =
      std::accumulate(arm.link_lengths.begin(), arm.link_lengths.end(), 0.0);
  const double margin = 0.15 * reach;
  const double x0 = arm.base_position.x() - reach - margin;
  const double y0 = arm.base_position.y() - reach - margin;
  const double span = 2.0 * (reach + margin);
  const double scale = opts.width / span;
  const int height = opts.width;
  const auto px = [&](double wx) { return (wx - x0) * scale; };
  const auto py = [&](double wy) { return height - (wy - y0) * scale; };

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << opts.width << " "
      << height << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (opts.draw_floor) {
    out << "  <line x1=\"0\" y1=\"" << py(opts.floor_height) << "\" x2=\""
        << opts.width << "\" y2=\"" << py(opts.floor_height)
        << "\" stroke=\"#8c564b\" stroke-width=\"2\"/>\n";
  }

  if (ee_path.size() > 1) {
    out << "  <polyline fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\""
        << " stroke-opacity=\"0.6\" points=\"";
    for (const auto& p : ee_path) {
      out << px(p.x()) << ',' << py(p.y()) << ' ';
    }
    out << "\"/>\n";
  }

  // Evenly spaced snapshot indices including both endpoints.
  const int n = std::min<int>(opts.snapshots,
                              static_cast<int>(configurations.size()));
  for (int s = 0; s < n; ++s) {
    const std::size_t idx =
        (n == 1) ? 0
                 : static_cast<std::size_t>(
                       std::llround(static_cast<double>(s) * (configurations.size() - 1) /
                                    (n - 1)));
    const double opacity = (n == 1) ? 1.0 : 0.15 + 0.85 * s / (n - 1.0);
    const auto pts = fk(arm, configurations[idx]);
    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"4\""
        << " stroke-linecap=\"round\" stroke-opacity=\"" << opacity
        << "\" points=\"";
    for (const auto& p : pts) out << px(p.x()) << ',' << py(p.y()) << ' ';
    out << "\"/>\n";
    for (const auto& p : pts) {
      out << "  <circle cx=\"" << px(p.x()) << "\" cy=\"" << py(p.y())
          << "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"" << opacity
          << "\"/>\n";
    }
  }

  for (const auto& g : opts.goals) {
    out << "  <circle cx=\"" << px(g.x()) << "\" cy=\"" << py(g.y())
        << "\" r=\"6\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw Error("write failed for " + path);
}

// Convenience overload drawing a trajectory directly.
inline void write_trajectory_svg(const std::string& path, const ArmModel& arm,
                                 const Trajectory& traj,
                                 const SvgOptions& opts = {}) {
  std::vector<Eigen::Vector2d> ee;
  ee.reserve(traj.rows());
  for (const auto& q : traj.q) ee.push_back(fk(arm, q).back());
  write_arm_svg(path, arm, traj.q, ee, opts);
}

}  // namespace fabrics
