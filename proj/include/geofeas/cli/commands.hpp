#pragma once

#include "geofeas/cli/config.hpp"
#include "geofeas/cli/io.hpp"
#include "geofeas/kin/feasibility.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace geofeas::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kInfeasible = 2,
  kSingular = 3,
};

struct SimulateOverrides {
  std::optional<IntegratorMethod> method;
  std::optional<double> h;
  std::optional<int> steps;
  bool no_constraints = false;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'", 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

// Original config with the effective integrator settings written back in.
inline std::string effective_config(const std::string& text, const IntegratorConfig& ic) {
  YAML::Node root = YAML::Load(text);
  YAML::Node integ = root["integrator"];
  integ["method"] = to_string(ic.method);
  integ["h"] = fmt_double(ic.h);
  integ["steps"] = ic.steps;
  integ["refresh_multipliers"] = ic.refresh_multipliers;
  integ["record_every"] = ic.record_every;
  integ["project_positions"] = ic.project_positions;
  integ["constraints"] = ic.constraints_enabled;
  YAML::Emitter em;
  em << root;
  return std::string(em.c_str()) + "\n";
}

inline std::string report_text(const ScenarioConfig& cfg, const Trajectory& traj, const RegularityReport& reg) {
  const IntegratorConfig& ic = cfg.integrator;
  double dist = 0.0;
  double e_dev = 0.0;
  const double e0 = traj.records.front().energy;
  for (const auto& r : traj.records) {
    dist = std::max(dist, worst_violation(center_distance_error(cfg.graph, r.state.g)).second);
    e_dev = std::max(e_dev, std::abs(r.energy - e0));
  }
  std::string s;
  s += fmt::format("scenario: {}\n", cfg.name);
  s += fmt::format("group: {}\nagents: {}\nconstraints: {}\n", to_string(cfg.tag), traj.agents,
                   cfg.graph.constraint_count());
  s += fmt::format("method: {}\nh: {}\nsteps: {}\nrecords: {}\n", to_string(ic.method), fmt_double(ic.h), ic.steps,
                   traj.size());
  s += fmt::format("constraints_enabled: {}\n", ic.constraints_enabled ? "true" : "false");
  s += fmt::format("regularity: {} (sigma_min {}, sigma_max {})\n", reg.regular ? "regular" : "singular",
                   fmt_double(reg.smallest_singular_value), fmt_double(reg.largest_singular_value));
  s += fmt::format("max_abs_phi: {}\n", fmt_double(traj.max_abs_phi()));
  s += fmt::format("max_abs_dphi: {}\n", fmt_double(traj.max_abs_phi_dot()));
  s += fmt::format("max_distance_error: {}\n", fmt_double(dist));
  s += fmt::format("max_orthogonality_error: {}\n", fmt_double(traj.max_orthogonality_error()));
  s += fmt::format("energy_initial: {}\nenergy_final: {}\nenergy_max_deviation: {}\n", fmt_double(e0),
                   fmt_double(traj.records.back().energy), fmt_double(e_dev));
  return s;
}

}  // namespace detail

/// Runs one scenario and writes trajectory.csv, diagnostics.csv, controls.csv,
/// report.txt and scenario.cfg into out_dir.
inline int simulate_one(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                        const SimulateOverrides& ov, std::ostream& out, std::ostream& err) {
  try {
    const std::string text = detail::read_file(config_path);
    ScenarioConfig cfg = parse_config(text, config_path.stem().string());
    if (ov.method) cfg.integrator.method = *ov.method;
    if (ov.h) cfg.integrator.h = *ov.h;
    if (ov.steps) cfg.integrator.steps = *ov.steps;
    if (ov.no_constraints) cfg.integrator.constraints_enabled = false;
    try {
      cfg.integrator.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), 0, 0);
    }

    const LagrangianModel model = cfg.make_model();
    const SystemState init = cfg.initial_state();
    const RegularityReport reg = regularity_check(model, cfg.graph, init.g);
    const Trajectory traj = run_simulation(model, cfg.graph, init, cfg.integrator);

    std::filesystem::create_directories(out_dir);
    std::ostringstream tr, dg, ct;
    write_trajectory_csv(tr, traj, cfg.graph);
    write_diagnostics_csv(dg, traj, cfg.graph);
    write_controls_csv(ct, cfg, traj);
    detail::write_file(out_dir / "trajectory.csv", tr.str());
    detail::write_file(out_dir / "diagnostics.csv", dg.str());
    detail::write_file(out_dir / "controls.csv", ct.str());
    const std::string report = detail::report_text(cfg, traj, reg);
    detail::write_file(out_dir / "report.txt", report);
    detail::write_file(out_dir / "scenario.cfg", detail::effective_config(text, cfg.integrator));
    out << fmt::format("{}: {} records written to {}\n", cfg.name, traj.size(), out_dir.string());
    return kOk;
  } catch (const ConfigError& e) {
    err << config_path.string() << ":" << e.what() << "\n";
    return kConfigError;
  } catch (const InfeasibleStateError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const SingularConstraintError& e) {
    err << "singular: " << e.what() << "\n";
    return kSingular;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

/// Runs every config, at most `jobs` at a time. With several configs each run
/// goes to out_dir/<config stem>. Returns the first nonzero exit code in config order.
inline int cmd_simulate(const std::vector<std::string>& configs, const std::filesystem::path& out_dir,
                        const SimulateOverrides& ov, int jobs, std::ostream& out, std::ostream& err) {
  if (configs.empty()) {
    err << "simulate: no config given\n";
    return kConfigError;
  }
  const std::size_t count = configs.size();
  std::vector<int> codes(count, kOk);
  std::vector<std::ostringstream> outs(count), errs(count);
  auto run = [&](std::size_t k) {
    const std::filesystem::path cp(configs[k]);
    const auto dir = count == 1 ? out_dir : out_dir / cp.stem();
    codes[k] = simulate_one(cp, dir, ov, outs[k], errs[k]);
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, count);
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) run(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  int code = kOk;
  for (std::size_t k = 0; k < count; ++k) {
    out << outs[k].str();
    err << errs[k].str();
    if (code == kOk) code = codes[k];
  }
  return code;
}

inline nlohmann::json kinfeas_json(const ScenarioConfig& cfg, const FeasibilitySystem& sys) {
  nlohmann::json j;
  j["group"] = to_string(cfg.tag);
  j["agents"] = static_cast<int>(cfg.agents.size());
  j["constraints"] = cfg.graph.constraint_count();
  j["rank"] = sys.rank;
  j["nullspace_dim"] = sys.nullspace_dim();
  j["singular_values"] = std::vector<double>(sys.singular_values.data(),
                                             sys.singular_values.data() + sys.singular_values.size());
  auto basis = nlohmann::json::array();
  for (int k = 0; k < sys.nullspace_dim(); ++k) {
    const Eigen::VectorXd c = sys.nullspace.col(k);
    basis.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  }
  j["basis"] = basis;
  return j;
}

inline int cmd_kinfeas(const std::string& config_path, bool json, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_config(config_path);
    const FeasibilitySystem sys = admissible_velocity_space(cfg.graph, cfg.initial_state().g);
    if (json) {
      out << kinfeas_json(cfg, sys).dump(2) << "\n";
      return kOk;
    }
    out << fmt::format("rank {}, nullspace dim {}\n", sys.rank, sys.nullspace_dim());
    for (int k = 0; k < sys.nullspace_dim(); ++k) {
      std::string line;
      for (Eigen::Index c = 0; c < sys.nullspace.rows(); ++c) {
        if (c) line += ' ';
        line += fmt::format("{: .6f}", sys.nullspace(c, k));
      }
      out << line << "\n";
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << config_path << ":" << e.what() << "\n";
    return kConfigError;
  } catch (const InfeasibleStateError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

/// Recomputes controls.csv for a finished run from DIR/trajectory.csv and DIR/scenario.cfg.
/// The right-hand side is re-solved at every recorded state.
inline int cmd_extract_control(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_config((dir / "scenario.cfg").string());
    std::ifstream in(dir / "trajectory.csv");
    if (!in) throw std::runtime_error("cannot open '" + (dir / "trajectory.csv").string() + "'");
    Trajectory traj = trajectory_from_csv(read_csv(in), cfg.tag, static_cast<int>(cfg.agents.size()), cfg.graph);
    if (traj.records.empty()) throw std::invalid_argument("trajectory.csv has no rows");
    const LagrangianModel model = cfg.make_model();
    const ConstraintGraph dyn = cfg.integrator.constraints_enabled ? cfg.graph : cfg.graph.without_edges();
    for (auto& rec : traj.records) rec.xi_dot = constrained_xi_dot(model, dyn, rec.state);
    std::ostringstream ct;
    write_controls_csv(ct, cfg, traj);
    detail::write_file(dir / "controls.csv", ct.str());
    out << fmt::format("{}: controls for {} records written to {}\n", cfg.name, traj.size(),
                       (dir / "controls.csv").string());
    return kOk;
  } catch (const ConfigError& e) {
    err << (dir / "scenario.cfg").string() << ":" << e.what() << "\n";
    return kConfigError;
  } catch (const SingularConstraintError& e) {
    err << "singular: " << e.what() << "\n";
    return kSingular;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace geofeas::cli
