#pragma once

// Scenario configuration (YAML). Every key, unit and default is listed in
// README.md; parse and validation errors carry line:column of the offending
// node.

#include "geofeas/auv/auv.hpp"
#include "geofeas/constraint/graph.hpp"
#include "geofeas/dyn/model.hpp"
#include "geofeas/sim/integrators.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace geofeas::cli {

/// Malformed or invalid configuration; line/column are 1-based (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line, int column, std::string key = {})
      : std::runtime_error(format(msg, line, column)), line_(line), column_(column), key_(std::move(key)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& key() const { return key_; }

 private:
  static std::string format(const std::string& msg, int line, int column) {
    if (line <= 0) return msg;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + msg;
  }
  int line_, column_;
  std::string key_;
};

enum class ModelKind {
  /// Buoyant vehicles on SE(3) (mass, added mass, inertia, buoyancy).
  Auv,
  /// Free bodies with a constant diagonal metric and no potential.
  Free,
};

struct AgentSpec {
  auv::AuvParams auv;
  Eigen::VectorXd metric_diag;  // Free model
  GroupElement pose;
  Eigen::VectorXd xi;  // body velocity
};

struct ScenarioConfig {
  std::string name;
  GroupTag tag = GroupTag::SE3;
  ModelKind model = ModelKind::Auv;
  ForceSignConvention force_sign = ForceSignConvention::Variational;
  std::vector<AgentSpec> agents;
  ConstraintGraph graph;
  IntegratorConfig integrator;

  std::vector<auv::AuvParams> auv_params() const {
    std::vector<auv::AuvParams> out;
    for (const auto& a : agents) out.push_back(a.auv);
    return out;
  }

  LagrangianModel make_model() const {
    if (model == ModelKind::Auv) return auv::make_model(auv_params(), force_sign);
    LagrangianModel m;
    m.tag = tag;
    m.force_sign = force_sign;
    for (const auto& a : agents) m.agents.emplace_back(Eigen::MatrixXd(a.metric_diag.asDiagonal()));
    return m;
  }

  SystemState initial_state() const {
    SystemState s;
    std::vector<GroupElement> g;
    const int n = algebra_dim(tag);
    s.xi.resize(static_cast<Eigen::Index>(agents.size()) * n);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      g.push_back(agents[i].pose);
      s.xi.segment(static_cast<Eigen::Index>(i) * n, n) = agents[i].xi;
    }
    s.g = ProductElement(std::move(g));
    return s;
  }
};

namespace detail {

inline ConfigError error_at(const YAML::Node& node, const std::string& key, const std::string& msg) {
  const YAML::Mark m = node.Mark();
  return ConfigError("'" + key + "': " + msg, m.line >= 0 ? m.line + 1 : 0, m.column >= 0 ? m.column + 1 : 0, key);
}

inline double as_double(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw error_at(node, key, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw error_at(node, key, "expected a number, got '" + node.Scalar() + "'");
  }
}

inline int as_int(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw error_at(node, key, "expected an integer");
  try {
    return node.as<int>();
  } catch (const YAML::Exception&) {
    throw error_at(node, key, "expected an integer, got '" + node.Scalar() + "'");
  }
}

inline bool as_bool(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw error_at(node, key, "expected true or false");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    throw error_at(node, key, "expected true or false, got '" + node.Scalar() + "'");
  }
}

inline std::string as_string(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw error_at(node, key, "expected a string");
  return node.Scalar();
}

inline Eigen::VectorXd as_vector(const YAML::Node& node, const std::string& key, int size) {
  if (!node.IsSequence()) throw error_at(node, key, "expected a list of " + std::to_string(size) + " numbers");
  if (static_cast<int>(node.size()) != size) {
    throw error_at(node, key, "expected " + std::to_string(size) + " numbers, got " + std::to_string(node.size()));
  }
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = as_double(node[static_cast<std::size_t>(i)], key);
  return v;
}

// Merged lookup: the agent's own key wins over the shared `vehicle` block.
class Lookup {
 public:
  Lookup(YAML::Node own, YAML::Node shared, std::string prefix)
      : own_(std::move(own)), shared_(std::move(shared)), prefix_(std::move(prefix)) {}

  std::optional<YAML::Node> get(const std::string& key) const {
    if (own_ && own_.IsMap() && own_[key]) return own_[key];
    if (shared_ && shared_.IsMap() && shared_[key]) return shared_[key];
    return std::nullopt;
  }
  std::string name(const std::string& key) const {
    if (own_ && own_.IsMap() && own_[key]) return prefix_ + "." + key;
    return "vehicle." + key;
  }

 private:
  YAML::Node own_, shared_;
  std::string prefix_;
};

inline void check_keys(const YAML::Node& map, const std::string& where, const std::vector<std::string>& allowed) {
  for (const auto& kv : map) {
    const std::string k = kv.first.Scalar();
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw error_at(kv.first, where.empty() ? k : where + "." + k, "unknown key");
    }
  }
}

inline auv::AuvParams read_auv(const Lookup& l) {
  auv::AuvParams p;
  if (auto n = l.get("mass")) p.mass = as_double(*n, l.name("mass"));
  if (auto n = l.get("added_mass")) p.added_mass = as_vector(*n, l.name("added_mass"), 3);
  if (auto n = l.get("inertia")) p.inertia = as_vector(*n, l.name("inertia"), 3);
  if (auto n = l.get("buoyancy")) p.buoyancy = as_double(*n, l.name("buoyancy"));
  if (auto n = l.get("r_bar")) p.r_bar = as_vector(*n, l.name("r_bar"), 3);
  if (auto n = l.get("radius")) p.radius = as_double(*n, l.name("radius"));
  if (auto n = l.get("g_grav")) p.g_grav = as_double(*n, l.name("g_grav"));
  const auto bad = [&](const std::string& key, const std::string& msg) {
    auto n = l.get(key);
    return n ? error_at(*n, l.name(key), msg) : ConfigError("'" + l.name(key) + "': " + msg, 0, 0, key);
  };
  if (!(p.mass > 0.0)) throw bad("mass", "must be positive");
  if (!((p.mass_matrix().diagonal().array() > 0.0).all())) throw bad("added_mass", "mass matrix must be positive definite");
  if (!((p.inertia.array() > 0.0).all())) throw bad("inertia", "entries must be positive");
  if (!(p.radius > 0.0)) throw bad("radius", "must be positive");
  if (!(p.g_grav > 0.0)) throw bad("g_grav", "must be positive");
  return p;
}

inline GroupElement read_pose(const YAML::Node& a, const std::string& where, GroupTag tag) {
  const int k = rotation_dim(tag);
  Mat m = Mat::Identity(matrix_dim(tag), matrix_dim(tag));
  if (tag == GroupTag::SE2) {
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    double th = 0.0;
    if (a["position"]) p = as_vector(a["position"], where + ".position", 2);
    if (a["heading"]) th = as_double(a["heading"], where + ".heading");
    return GroupElement::se2(p.x(), p.y(), th);
  }
  if (a["rotation"]) {
    const Eigen::VectorXd r = as_vector(a["rotation"], where + ".rotation", k * k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) m(i, j) = r(i * k + j);
    }
  }
  if (has_translation(tag) && a["position"]) m.block(0, k, k, 1) = as_vector(a["position"], where + ".position", k);
  try {
    return GroupElement::from_matrix(tag, m);
  } catch (const std::invalid_argument& e) {
    throw error_at(a["rotation"] ? a["rotation"] : a, where + ".rotation", e.what());
  }
}

// Body velocity from world-frame linear velocity (nu = R^T v) and body angular velocity.
inline Eigen::VectorXd read_velocity(const YAML::Node& a, const std::string& where, GroupTag tag,
                                     const GroupElement& pose) {
  const int n = algebra_dim(tag);
  const int nt = translation_dim(tag);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  if (nt > 0 && a["velocity"]) {
    xi.head(nt) = pose.rotation().transpose() * as_vector(a["velocity"], where + ".velocity", nt);
  } else if (nt == 0 && a["velocity"]) {
    throw error_at(a["velocity"], where + ".velocity", "SO3 agents have no linear velocity");
  }
  if (a["angular_velocity"]) {
    const int nr = n - nt;
    if (nr == 1) {
      xi(nt) = as_double(a["angular_velocity"], where + ".angular_velocity");
    } else {
      xi.tail(nr) = as_vector(a["angular_velocity"], where + ".angular_velocity", nr);
    }
  }
  return xi;
}

inline ConstraintGraph read_constraints(const YAML::Node& c, GroupTag tag, const std::vector<double>& radii) {
  const int r = static_cast<int>(radii.size());
  if (!c) return ConstraintGraph(r, tag == GroupTag::SE2 ? ConstraintKind::SE2Frobenius : ConstraintKind::SE3CenterDistance, {}, radii);
  if (!c.IsMap()) throw error_at(c, "constraints", "expected a map");
  check_keys(c, "constraints", {"distance", "edges"});
  if (tag == GroupTag::SO3) throw error_at(c, "constraints", "SO3 agents carry no positions to constrain");
  const ConstraintKind kind = tag == GroupTag::SE2 ? ConstraintKind::SE2Frobenius : ConstraintKind::SE3CenterDistance;
  std::vector<EdgeConstraint> edges;
  if (c["distance"] && c["edges"]) throw error_at(c["edges"], "constraints.edges", "give either distance or edges");
  if (c["distance"]) {
    const double d = as_double(c["distance"], "constraints.distance");
    if (!(d > 0.0)) throw error_at(c["distance"], "constraints.distance", "must be positive");
    for (int i = 0; i < r; ++i) {
      for (int j = i + 1; j < r; ++j) edges.push_back({i, j, 1, d});
    }
  } else if (c["edges"]) {
    const YAML::Node& es = c["edges"];
    if (!es.IsSequence()) throw error_at(es, "constraints.edges", "expected a list");
    for (std::size_t q = 0; q < es.size(); ++q) {
      const YAML::Node& e = es[q];
      const std::string w = "constraints.edges[" + std::to_string(q) + "]";
      if (!e.IsMap()) throw error_at(e, w, "expected a map with i, j, distance");
      check_keys(e, w, {"i", "j", "k", "distance"});
      for (const char* key : {"i", "j", "distance"}) {
        if (!e[key]) throw error_at(e, w + "." + key, "missing");
      }
      const int i = as_int(e["i"], w + ".i");
      const int j = as_int(e["j"], w + ".j");
      const int k = e["k"] ? as_int(e["k"], w + ".k") : 1;
      const double d = as_double(e["distance"], w + ".distance");
      if (i < 1 || i > r) throw error_at(e["i"], w + ".i", "agent index out of range 1.." + std::to_string(r));
      if (j < 1 || j > r) throw error_at(e["j"], w + ".j", "agent index out of range 1.." + std::to_string(r));
      if (i == j) throw error_at(e["j"], w + ".j", "an agent cannot be constrained to itself");
      if (!(d > 0.0)) throw error_at(e["distance"], w + ".distance", "must be positive");
      edges.push_back({i - 1, j - 1, k, d});
    }
  }
  try {
    return ConstraintGraph(r, kind, std::move(edges), radii);
  } catch (const std::invalid_argument& e) {
    throw error_at(c, "constraints", e.what());
  }
}

inline IntegratorConfig read_integrator(const YAML::Node& n) {
  IntegratorConfig cfg;
  if (!n) return cfg;
  if (!n.IsMap()) throw error_at(n, "integrator", "expected a map");
  check_keys(n, "integrator",
             {"method", "h", "steps", "refresh_multipliers", "record_every", "project_positions", "constraints"});
  if (n["method"]) {
    try {
      cfg.method = parse_integrator_method(as_string(n["method"], "integrator.method"));
    } catch (const std::invalid_argument& e) {
      throw error_at(n["method"], "integrator.method", e.what());
    }
  }
  if (n["h"]) cfg.h = as_double(n["h"], "integrator.h");
  if (n["steps"]) cfg.steps = as_int(n["steps"], "integrator.steps");
  if (n["refresh_multipliers"]) cfg.refresh_multipliers = as_bool(n["refresh_multipliers"], "integrator.refresh_multipliers");
  if (n["record_every"]) cfg.record_every = as_int(n["record_every"], "integrator.record_every");
  if (n["project_positions"]) cfg.project_positions = as_bool(n["project_positions"], "integrator.project_positions");
  if (n["constraints"]) cfg.constraints_enabled = as_bool(n["constraints"], "integrator.constraints");
  if (!(cfg.h > 0.0)) throw error_at(n["h"], "integrator.h", "must be positive");
  if (cfg.steps < 1) throw error_at(n["steps"], "integrator.steps", "must be at least 1");
  if (cfg.record_every < 1) throw error_at(n["record_every"], "integrator.record_every", "must be at least 1");
  return cfg;
}

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text, const std::string& name = "config") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("top level must be a map of keys", 1, 1);
  detail::check_keys(root, "", {"name", "group", "model", "force_sign_convention", "vehicle", "agents", "constraints",
                                "integrator"});

  ScenarioConfig cfg;
  cfg.name = root["name"] ? detail::as_string(root["name"], "name") : name;
  if (root["group"]) {
    try {
      cfg.tag = parse_group_tag(detail::as_string(root["group"], "group"));
    } catch (const std::invalid_argument& e) {
      throw detail::error_at(root["group"], "group", e.what());
    }
  }
  cfg.model = cfg.tag == GroupTag::SE3 ? ModelKind::Auv : ModelKind::Free;
  if (root["model"]) {
    const std::string m = detail::as_string(root["model"], "model");
    if (m == "auv") {
      cfg.model = ModelKind::Auv;
    } else if (m == "free") {
      cfg.model = ModelKind::Free;
    } else {
      throw detail::error_at(root["model"], "model", "expected auv or free, got '" + m + "'");
    }
  }
  if (cfg.model == ModelKind::Auv && cfg.tag != GroupTag::SE3) {
    throw detail::error_at(root["model"] ? root["model"] : root, "model", "the auv model needs group SE3");
  }
  if (root["force_sign_convention"]) {
    const std::string s = detail::as_string(root["force_sign_convention"], "force_sign_convention");
    if (s == "variational") {
      cfg.force_sign = ForceSignConvention::Variational;
    } else if (s == "as_printed") {
      cfg.force_sign = ForceSignConvention::AsPrinted;
    } else {
      throw detail::error_at(root["force_sign_convention"], "force_sign_convention",
                             "expected variational or as_printed, got '" + s + "'");
    }
  }

  const YAML::Node vehicle = root["vehicle"];
  if (vehicle && !vehicle.IsMap()) throw detail::error_at(vehicle, "vehicle", "expected a map");
  const YAML::Node agents = root["agents"];
  if (!agents) throw ConfigError("'agents': missing", 0, 0, "agents");
  if (!agents.IsSequence() || agents.size() == 0) throw detail::error_at(agents, "agents", "expected a non-empty list");

  const int n = algebra_dim(cfg.tag);
  std::vector<double> radii;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const YAML::Node& a = agents[i];
    const std::string w = "agents[" + std::to_string(i) + "]";
    if (!a.IsMap()) throw detail::error_at(a, w, "expected a map");
    detail::check_keys(a, w, {"position", "rotation", "heading", "velocity", "angular_velocity", "mass", "added_mass",
                              "inertia", "buoyancy", "r_bar", "radius", "g_grav", "metric"});
    AgentSpec spec;
    const detail::Lookup l(a, vehicle, w);
    if (cfg.model == ModelKind::Auv) {
      spec.auv = detail::read_auv(l);
    } else {
      spec.metric_diag = Eigen::VectorXd::Ones(n);
      if (auto m = l.get("metric")) spec.metric_diag = detail::as_vector(*m, l.name("metric"), n);
      if (!((spec.metric_diag.array() > 0.0).all())) {
        throw detail::error_at(*l.get("metric"), l.name("metric"), "entries must be positive");
      }
      if (auto r = l.get("radius")) spec.auv.radius = detail::as_double(*r, l.name("radius"));
    }
    spec.pose = detail::read_pose(a, w, cfg.tag);
    spec.xi = detail::read_velocity(a, w, cfg.tag, spec.pose);
    radii.push_back(cfg.tag == GroupTag::SE3 ? spec.auv.radius : 0.0);
    cfg.agents.push_back(std::move(spec));
  }
  if (vehicle) {
    detail::check_keys(vehicle, "vehicle",
                       {"mass", "added_mass", "inertia", "buoyancy", "r_bar", "radius", "g_grav", "metric"});
  }
  cfg.graph = detail::read_constraints(root["constraints"], cfg.tag, radii);
  cfg.integrator = detail::read_integrator(root["integrator"]);
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_config(ss.str(), stem);
}

}  // namespace geofeas::cli
