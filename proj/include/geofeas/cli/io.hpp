#pragma once

// CSV emission and re-ingestion. Floating-point fields use 17 significant
// digits so values re-parse bit-exactly.

#include "geofeas/auv/auv.hpp"
#include "geofeas/cli/config.hpp"
#include "geofeas/sim/integrators.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace geofeas::cli {

inline std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

namespace detail {

inline const char* axis(int a) {
  static const char* names[] = {"x", "y", "z"};
  return names[a];
}

inline std::string edge_tag(const EdgeConstraint& e) { return fmt::format("{}_{}_{}", e.i + 1, e.j + 1, e.k); }

inline void write_row(std::ostream& os, const std::vector<double>& row) {
  std::string line;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (c) line += ',';
    line += fmt_double(row[c]);
  }
  line += '\n';
  os << line;
}

inline void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
}

}  // namespace detail

/// t, per agent (b, R row-major, nu, Omega), lambda per edge, phi per edge.
inline std::vector<std::string> trajectory_columns(GroupTag tag, int agents, const ConstraintGraph& graph) {
  const int k = rotation_dim(tag);
  const int nt = translation_dim(tag);
  std::vector<std::string> cols{"t"};
  for (int i = 1; i <= agents; ++i) {
    for (int a = 0; a < nt; ++a) cols.push_back(fmt::format("b{}_{}", i, detail::axis(a)));
    for (int r = 1; r <= k; ++r) {
      for (int c = 1; c <= k; ++c) cols.push_back(fmt::format("R{}_{}{}", i, r, c));
    }
    for (int a = 0; a < nt; ++a) cols.push_back(fmt::format("nu{}_{}", i, detail::axis(a)));
    if (tag == GroupTag::SE2) {
      cols.push_back(fmt::format("omega{}", i));
    } else {
      for (int a = 0; a < 3; ++a) cols.push_back(fmt::format("Omega{}_{}", i, detail::axis(a)));
    }
  }
  for (const auto& e : graph.edges()) cols.push_back("lambda_" + detail::edge_tag(e));
  for (const auto& e : graph.edges()) cols.push_back("phi_" + detail::edge_tag(e));
  return cols;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ConstraintGraph& graph) {
  const GroupTag tag = traj.tag;
  const int k = rotation_dim(tag);
  const int n = algebra_dim(tag);
  detail::write_header(os, trajectory_columns(tag, traj.agents, graph));
  std::vector<double> row;
  for (const auto& rec : traj.records) {
    row.clear();
    row.push_back(rec.state.t);
    for (int i = 0; i < traj.agents; ++i) {
      const GroupElement& g = rec.state.g[i];
      const Vec b = g.translation();
      for (Eigen::Index a = 0; a < b.size(); ++a) row.push_back(b(a));
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) row.push_back(g.matrix()(r, c));
      }
      for (int s = 0; s < n; ++s) row.push_back(rec.state.xi(i * n + s));
    }
    for (Eigen::Index q = 0; q < rec.lambda.size(); ++q) row.push_back(rec.lambda(q));
    for (Eigen::Index q = 0; q < rec.phi.size(); ++q) row.push_back(rec.phi(q));
    detail::write_row(os, row);
  }
}

inline std::vector<std::string> diagnostics_columns(GroupTag tag, int agents, const ConstraintGraph& graph) {
  std::vector<std::string> cols{"t", "energy", "max_abs_phi", "max_abs_dphi", "max_distance_error", "orthogonality_error"};
  for (const auto& e : graph.edges()) cols.push_back("dphi_" + detail::edge_tag(e));
  for (int i = 1; i <= agents; ++i) {
    for (int s = 1; s <= algebra_dim(tag); ++s) cols.push_back(fmt::format("momentum{}_{}", i, s));
  }
  return cols;
}

inline void write_diagnostics_csv(std::ostream& os, const Trajectory& traj, const ConstraintGraph& graph) {
  detail::write_header(os, diagnostics_columns(traj.tag, traj.agents, graph));
  std::vector<double> row;
  for (const auto& rec : traj.records) {
    row.clear();
    row.push_back(rec.state.t);
    row.push_back(rec.energy);
    row.push_back(worst_violation(rec.phi).second);
    row.push_back(worst_violation(rec.phi_dot).second);
    row.push_back(worst_violation(center_distance_error(graph, rec.state.g)).second);
    row.push_back(rec.orthogonality_error);
    for (Eigen::Index q = 0; q < rec.phi_dot.size(); ++q) row.push_back(rec.phi_dot(q));
    for (Eigen::Index q = 0; q < rec.spatial_momentum.size(); ++q) row.push_back(rec.spatial_momentum(q));
    detail::write_row(os, row);
  }
}

/// Controls per record: u, u_bar per vehicle for the AUV model; generic u per algebra coordinate otherwise.
inline void write_controls_csv(std::ostream& os, const ScenarioConfig& cfg, const Trajectory& traj) {
  std::vector<std::string> cols{"t"};
  const int n = algebra_dim(traj.tag);
  if (cfg.model == ModelKind::Auv) {
    for (int i = 1; i <= traj.agents; ++i) {
      for (int a = 0; a < 3; ++a) cols.push_back(fmt::format("u{}_{}", i, detail::axis(a)));
      for (int a = 0; a < 3; ++a) cols.push_back(fmt::format("ubar{}_{}", i, detail::axis(a)));
    }
  } else {
    for (int i = 1; i <= traj.agents; ++i) {
      for (int s = 1; s <= n; ++s) cols.push_back(fmt::format("u{}_{}", i, s));
    }
  }
  detail::write_header(os, cols);
  std::vector<double> row;
  if (cfg.model == ModelKind::Auv) {
    const auv::ControlSignal sig = auv::extract_control(cfg.auv_params(), traj, cfg.force_sign);
    for (std::size_t k = 0; k < sig.size(); ++k) {
      row.clear();
      row.push_back(sig.times[k]);
      const Eigen::VectorXd u = sig.stacked(k);
      for (Eigen::Index q = 0; q < u.size(); ++q) row.push_back(u(q));
      detail::write_row(os, row);
    }
    return;
  }
  const LagrangianModel model = cfg.make_model();
  for (const auto& rec : traj.records) {
    row.clear();
    row.push_back(rec.state.t);
    const Eigen::VectorXd u = control_from_motion(model, rec.state.g, rec.state.xi, rec.xi_dot);
    for (Eigen::Index q = 0; q < u.size(); ++q) row.push_back(u(q));
    detail::write_row(os, row);
  }
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == name) return static_cast<int>(c);
    }
    throw std::invalid_argument("CSV: no column named '" + name + "'");
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.columns.size());
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      row.push_back(std::strtod(p, &end));
      if (end == p) throw std::invalid_argument("CSV: bad number on line " + std::to_string(lineno));
      p = end;
      if (*p == ',') ++p;
    }
    if (row.size() != t.columns.size()) {
      throw std::invalid_argument("CSV: line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                                  " fields, expected " + std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Rebuilds recorded states (t, g, xi) from trajectory.csv; rhs, lambda and diagnostics are left empty.
inline Trajectory trajectory_from_csv(const CsvTable& table, GroupTag tag, int agents, const ConstraintGraph& graph) {
  const auto expected = trajectory_columns(tag, agents, graph);
  if (table.columns != expected) throw std::invalid_argument("trajectory.csv: columns do not match the scenario");
  const int k = rotation_dim(tag);
  const int nt = translation_dim(tag);
  const int n = algebra_dim(tag);
  const int md = matrix_dim(tag);
  Trajectory traj;
  traj.tag = tag;
  traj.agents = agents;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    TrajectoryRecord rec;
    rec.step = static_cast<int>(r);
    rec.state.t = row[0];
    std::size_t c = 1;
    std::vector<GroupElement> g;
    rec.state.xi.resize(agents * n);
    for (int i = 0; i < agents; ++i) {
      Mat m = Mat::Identity(md, md);
      for (int a = 0; a < nt; ++a) m(a, k) = row[c++];
      for (int rr = 0; rr < k; ++rr) {
        for (int cc = 0; cc < k; ++cc) m(rr, cc) = row[c++];
      }
      g.push_back(GroupElement::from_matrix(tag, m));
      for (int s = 0; s < n; ++s) rec.state.xi(i * n + s) = row[c++];
    }
    rec.state.g = ProductElement(std::move(g));
    traj.records.push_back(std::move(rec));
  }
  if (traj.records.size() >= 2) traj.h = traj.records[1].state.t - traj.records[0].state.t;
  return traj;
}

}  // namespace geofeas::cli
