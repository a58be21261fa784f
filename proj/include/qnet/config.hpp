#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/argand.hpp"
#include "qnet/error.hpp"
#include "qnet/lpdos.hpp"
#include "qnet/network.hpp"
#include "qnet/scattering.hpp"

namespace qnet {

enum class Command { Smatrix, ScanEnergy, ArgandSweep, LpdosMap, Eq10Scan, Verify };

inline constexpr std::string_view command_name(Command c) {
  switch (c) {
    case Command::Smatrix: return "smatrix";
    case Command::ScanEnergy: return "scan-energy";
    case Command::ArgandSweep: return "argand-sweep";
    case Command::LpdosMap: return "lpdos-map";
    case Command::Eq10Scan: return "eq10-scan";
    case Command::Verify: return "verify";
  }
  return "?";
}

inline constexpr Command all_commands[] = {Command::Smatrix,  Command::ScanEnergy, Command::ArgandSweep,
                                           Command::LpdosMap, Command::Eq10Scan,   Command::Verify};

/// Either the three-prong preset or an explicit vertex/edge/lead list. For
/// explicit networks, U1 is the potential of edge `u1_edge`.
struct NetworkConfig {
  bool use_preset = true;
  ThreeProngParams preset;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<Lead> leads;
  std::string u1_edge = "VI";

  Network build() const {
    if (use_preset) return three_prong_preset(preset);
    return Network(vertices, edges, leads);
  }

  Network build(double u1) const {
    if (use_preset) {
      auto p = preset;
      p.u1 = u1;
      return three_prong_preset(p);
    }
    auto es = edges;
    auto it = std::find_if(es.begin(), es.end(), [&](const Edge& e) { return e.id == u1_edge; });
    if (it == es.end()) throw Error(ErrorCode::UnknownEdge, "u1_edge '" + u1_edge + "' not in network");
    it->potential = u1;
    return Network(vertices, std::move(es), leads);
  }

  bool operator==(const NetworkConfig&) const = default;
};

struct SmatrixConfig {
  double energy = 4.0;
  bool operator==(const SmatrixConfig&) const = default;
};

struct ScanEnergyConfig {
  double e_min = 0.25;
  double e_max = 16.0;
  int points = 400;
  bool operator==(const ScanEnergyConfig&) const = default;
};

struct ArgandConfig {
  std::string alpha = "3";
  std::string gamma = "1";
  SweepKind parameter = SweepKind::U1;
  double from = -10.0;
  double to = -1000.0;
  double fixed = 4.0;  // energy for u1 sweeps, U1 for k sweeps
  int initial_points = 512;
  double delta_step = 0.002;
  int max_depth = 30;
  double closure_rel = 1e-2;
  int min_samples = 16;
  bool operator==(const ArgandConfig&) const = default;
};

struct ProbeConfig {
  std::optional<double> width;  // unset: width_fraction * edge length
  double width_fraction = 0.01;
  std::optional<double> delta_u;  // unset: chosen from target_phase
  double target_phase = 1e-4;
  double max_rel_discrepancy = 0.1;
  bool operator==(const ProbeConfig&) const = default;
};

struct LpdosMapConfig {
  std::string gamma = "1";
  double e_min = 1.0;
  double e_max = 9.0;
  int energy_points = 5;
  std::vector<std::string> edges;  // empty: every edge
  int positions = 9;               // interior points per edge
  ProbeConfig probe;
  bool operator==(const LpdosMapConfig&) const = default;
};

struct Eq10Config {
  std::string alpha = "3";
  std::string gamma = "1";
  double k_min = 0.2;
  double k_max = 8.0;
  double u1 = 100.0;
  double delta_u1 = 0.1;
  int points = 801;
  int refine_levels = 8;
  double flag_mag2 = 1e-10;
  int minima_points = 4000;
  bool operator==(const Eq10Config&) const = default;
};

struct VerifyConfig {
  int random_networks = 100;
  int sum_rule_points = 60;
  bool operator==(const VerifyConfig&) const = default;
};

struct RunConfig {
  NetworkConfig network;
  Command command = Command::Verify;
  std::string output = "out";
  int workers = 1;
  std::uint64_t seed = 1;
  double eps_mag = default_eps_mag;
  double threshold_eps = 1e-9;
  double min_rcond = 1e-13;
  SmatrixConfig smatrix;
  ScanEnergyConfig scan_energy;
  ArgandConfig argand_sweep;
  LpdosMapConfig lpdos_map;
  Eq10Config eq10_scan;
  VerifyConfig verify;

  SolverOptions solver() const { return {threshold_eps, min_rcond}; }
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string where(const YAML::Mark& m) {
  if (m.is_null()) return "";
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

inline void require_map(const YAML::Node& n, std::string_view what) {
  if (!n.IsMap()) throw Error(ErrorCode::ParseError, where(n.Mark()) + std::string(what) + " must be a mapping");
}

inline void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, std::string_view what) {
  require_map(map, what);
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::UnknownKey, where(kv.first.Mark()) + "unknown key '" + key + "' in " + std::string(what));
  }
}

template <class T>
void get(const YAML::Node& map, const char* key, T& out) {
  const auto n = map[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::ParseError, where(n.Mark()) + "bad value for '" + key + "'");
  }
}

template <class T>
void get(const YAML::Node& map, const char* key, std::optional<T>& out) {
  if (!map[key]) return;
  T v{};
  get(map, key, v);
  out = v;
}

template <class T>
T get_required(const YAML::Node& map, const char* key, std::string_view what) {
  if (!map[key])
    throw Error(ErrorCode::MissingRequired, where(map.Mark()) + "missing '" + key + "' in " + std::string(what));
  T v{};
  get(map, key, v);
  return v;
}

inline YAML::Node sequence(const YAML::Node& map, const char* key, std::string_view what) {
  const auto n = map[key];
  if (!n) throw Error(ErrorCode::MissingRequired, where(map.Mark()) + "missing '" + key + "' in " + std::string(what));
  if (!n.IsSequence()) throw Error(ErrorCode::ParseError, where(n.Mark()) + "'" + key + "' must be a list");
  return n;
}

inline NetworkConfig parse_network(const YAML::Node& n) {
  NetworkConfig nc;
  require_map(n, "network");
  if (n["preset"]) {
    check_keys(n, {"preset", "l2", "l3", "l5", "l6", "v2", "v3", "v5", "u1", "barrier"}, "network (preset)");
    const auto name = get_required<std::string>(n, "preset", "network");
    if (name != "three_prong")
      throw Error(ErrorCode::ParseError, where(n["preset"].Mark()) + "unknown preset '" + name + "'");
    auto& p = nc.preset;
    get(n, "l2", p.l2);
    get(n, "l3", p.l3);
    get(n, "l5", p.l5);
    get(n, "l6", p.l6);
    get(n, "v2", p.v2);
    get(n, "v3", p.v3);
    get(n, "v5", p.v5);
    get(n, "u1", p.u1);
    std::string barrier = "edge";
    get(n, "barrier", barrier);
    if (barrier == "edge")
      p.barrier = BarrierModel::Edge;
    else if (barrier == "delta")
      p.barrier = BarrierModel::Delta;
    else
      throw Error(ErrorCode::ParseError, where(n["barrier"].Mark()) + "barrier must be 'edge' or 'delta'");
    return nc;
  }
  check_keys(n, {"vertices", "edges", "leads", "u1_edge"}, "network");
  nc.use_preset = false;
  for (const auto& v : sequence(n, "vertices", "network")) {
    check_keys(v, {"id", "delta"}, "vertex");
    Vertex vx{get_required<std::string>(v, "id", "vertex"), 0.0};
    get(v, "delta", vx.delta_strength);
    nc.vertices.push_back(vx);
  }
  for (const auto& e : sequence(n, "edges", "network")) {
    check_keys(e, {"id", "from", "to", "length", "potential"}, "edge");
    Edge ed{get_required<std::string>(e, "id", "edge"), get_required<std::string>(e, "from", "edge"),
            get_required<std::string>(e, "to", "edge"), get_required<double>(e, "length", "edge"), 0.0};
    get(e, "potential", ed.potential);
    nc.edges.push_back(ed);
  }
  for (const auto& l : sequence(n, "leads", "network")) {
    check_keys(l, {"id", "vertex"}, "lead");
    nc.leads.push_back({get_required<std::string>(l, "id", "lead"), get_required<std::string>(l, "vertex", "lead")});
  }
  get(n, "u1_edge", nc.u1_edge);
  return nc;
}

inline SweepKind parse_sweep_kind(const YAML::Node& n) {
  const auto s = n.as<std::string>();
  if (s == "u1") return SweepKind::U1;
  if (s == "k") return SweepKind::K;
  throw Error(ErrorCode::ParseError, where(n.Mark()) + "parameter must be 'u1' or 'k'");
}

}  // namespace detail

/// Strict YAML parse: unknown keys, missing required keys and malformed values
/// are reported with line and column.
inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ParseError, where(e.mark) + e.msg);
  }
  if (!root || root.IsNull()) throw Error(ErrorCode::MissingRequired, "empty configuration");
  check_keys(root,
             {"network", "command", "output", "workers", "seed", "eps_mag", "solver", "smatrix", "scan_energy",
              "argand_sweep", "lpdos_map", "eq10_scan", "verify"},
             "configuration");
  RunConfig c;
  if (!root["network"]) throw Error(ErrorCode::MissingRequired, "missing 'network'");
  c.network = parse_network(root["network"]);
  const auto cmd = get_required<std::string>(root, "command", "configuration");
  auto it = std::find_if(std::begin(all_commands), std::end(all_commands),
                         [&](Command k) { return command_name(k) == cmd; });
  if (it == std::end(all_commands))
    throw Error(ErrorCode::ParseError, where(root["command"].Mark()) + "unknown command '" + cmd + "'");
  c.command = *it;
  get(root, "output", c.output);
  get(root, "workers", c.workers);
  get(root, "seed", c.seed);
  get(root, "eps_mag", c.eps_mag);
  if (const auto s = root["solver"]) {
    check_keys(s, {"threshold_eps", "min_rcond"}, "solver");
    get(s, "threshold_eps", c.threshold_eps);
    get(s, "min_rcond", c.min_rcond);
  }
  if (const auto s = root["smatrix"]) {
    check_keys(s, {"energy"}, "smatrix");
    get(s, "energy", c.smatrix.energy);
  }
  if (const auto s = root["scan_energy"]) {
    check_keys(s, {"e_min", "e_max", "points"}, "scan_energy");
    get(s, "e_min", c.scan_energy.e_min);
    get(s, "e_max", c.scan_energy.e_max);
    get(s, "points", c.scan_energy.points);
  }
  if (const auto s = root["argand_sweep"]) {
    check_keys(s,
               {"alpha", "gamma", "parameter", "from", "to", "fixed", "initial_points", "delta_step", "max_depth",
                "closure_rel", "min_samples"},
               "argand_sweep");
    auto& a = c.argand_sweep;
    get(s, "alpha", a.alpha);
    get(s, "gamma", a.gamma);
    if (s["parameter"]) a.parameter = parse_sweep_kind(s["parameter"]);
    get(s, "from", a.from);
    get(s, "to", a.to);
    get(s, "fixed", a.fixed);
    get(s, "initial_points", a.initial_points);
    get(s, "delta_step", a.delta_step);
    get(s, "max_depth", a.max_depth);
    get(s, "closure_rel", a.closure_rel);
    get(s, "min_samples", a.min_samples);
  }
  if (const auto s = root["lpdos_map"]) {
    check_keys(s, {"gamma", "e_min", "e_max", "energy_points", "edges", "positions", "probe"}, "lpdos_map");
    auto& m = c.lpdos_map;
    get(s, "gamma", m.gamma);
    get(s, "e_min", m.e_min);
    get(s, "e_max", m.e_max);
    get(s, "energy_points", m.energy_points);
    get(s, "edges", m.edges);
    get(s, "positions", m.positions);
    if (const auto p = s["probe"]) {
      check_keys(p, {"width", "width_fraction", "delta_u", "target_phase", "max_rel_discrepancy"}, "probe");
      get(p, "width", m.probe.width);
      get(p, "width_fraction", m.probe.width_fraction);
      get(p, "delta_u", m.probe.delta_u);
      get(p, "target_phase", m.probe.target_phase);
      get(p, "max_rel_discrepancy", m.probe.max_rel_discrepancy);
    }
  }
  if (const auto s = root["eq10_scan"]) {
    check_keys(s,
               {"alpha", "gamma", "k_min", "k_max", "u1", "delta_u1", "points", "refine_levels", "flag_mag2",
                "minima_points"},
               "eq10_scan");
    auto& q = c.eq10_scan;
    get(s, "alpha", q.alpha);
    get(s, "gamma", q.gamma);
    get(s, "k_min", q.k_min);
    get(s, "k_max", q.k_max);
    get(s, "u1", q.u1);
    get(s, "delta_u1", q.delta_u1);
    get(s, "points", q.points);
    get(s, "refine_levels", q.refine_levels);
    get(s, "flag_mag2", q.flag_mag2);
    get(s, "minima_points", q.minima_points);
  }
  if (const auto s = root["verify"]) {
    check_keys(s, {"random_networks", "sum_rule_points"}, "verify");
    get(s, "random_networks", c.verify.random_networks);
    get(s, "sum_rule_points", c.verify.sum_rule_points);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

/// Every field with its effective value; `flow` gives a single-line form for
/// CSV headers. parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c, bool flow = false) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  if (flow) out << YAML::Flow;
  out << YAML::BeginMap;
  out << YAML::Key << "command" << YAML::Value << std::string(command_name(c.command));
  out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
  const auto& n = c.network;
  if (n.use_preset) {
    const auto& p = n.preset;
    out << YAML::Key << "preset" << YAML::Value << "three_prong";
    out << YAML::Key << "l2" << YAML::Value << p.l2 << YAML::Key << "l3" << YAML::Value << p.l3;
    out << YAML::Key << "l5" << YAML::Value << p.l5 << YAML::Key << "l6" << YAML::Value << p.l6;
    out << YAML::Key << "v2" << YAML::Value << p.v2 << YAML::Key << "v3" << YAML::Value << p.v3;
    out << YAML::Key << "v5" << YAML::Value << p.v5 << YAML::Key << "u1" << YAML::Value << p.u1;
    out << YAML::Key << "barrier" << YAML::Value << (p.barrier == BarrierModel::Edge ? "edge" : "delta");
  } else {
    out << YAML::Key << "vertices" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : n.vertices)
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << v.id
          << YAML::Key << "delta" << YAML::Value << v.delta_strength << YAML::EndMap;
    out << YAML::EndSeq;
    out << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : n.edges)
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << e.id
          << YAML::Key << "from" << YAML::Value << YAML::DoubleQuoted << e.from << YAML::Key << "to" << YAML::Value
          << YAML::DoubleQuoted << e.to << YAML::Key << "length" << YAML::Value << e.length << YAML::Key
          << "potential" << YAML::Value << e.potential << YAML::EndMap;
    out << YAML::EndSeq;
    out << YAML::Key << "leads" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : n.leads)
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << l.id
          << YAML::Key << "vertex" << YAML::Value << YAML::DoubleQuoted << l.vertex << YAML::EndMap;
    out << YAML::EndSeq;
    out << YAML::Key << "u1_edge" << YAML::Value << YAML::DoubleQuoted << n.u1_edge;
  }
  out << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;
  out << YAML::Key << "workers" << YAML::Value << c.workers;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "eps_mag" << YAML::Value << c.eps_mag;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap << YAML::Key << "threshold_eps" << YAML::Value
      << c.threshold_eps << YAML::Key << "min_rcond" << YAML::Value << c.min_rcond << YAML::EndMap;
  out << YAML::Key << "smatrix" << YAML::Value << YAML::BeginMap << YAML::Key << "energy" << YAML::Value
      << c.smatrix.energy << YAML::EndMap;
  const auto& se = c.scan_energy;
  out << YAML::Key << "scan_energy" << YAML::Value << YAML::BeginMap << YAML::Key << "e_min" << YAML::Value
      << se.e_min << YAML::Key << "e_max" << YAML::Value << se.e_max << YAML::Key << "points" << YAML::Value
      << se.points << YAML::EndMap;
  const auto& a = c.argand_sweep;
  out << YAML::Key << "argand_sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha" << YAML::Value << YAML::DoubleQuoted << a.alpha;
  out << YAML::Key << "gamma" << YAML::Value << YAML::DoubleQuoted << a.gamma;
  out << YAML::Key << "parameter" << YAML::Value << (a.parameter == SweepKind::U1 ? "u1" : "k");
  out << YAML::Key << "from" << YAML::Value << a.from << YAML::Key << "to" << YAML::Value << a.to;
  out << YAML::Key << "fixed" << YAML::Value << a.fixed;
  out << YAML::Key << "initial_points" << YAML::Value << a.initial_points;
  out << YAML::Key << "delta_step" << YAML::Value << a.delta_step;
  out << YAML::Key << "max_depth" << YAML::Value << a.max_depth;
  out << YAML::Key << "closure_rel" << YAML::Value << a.closure_rel;
  out << YAML::Key << "min_samples" << YAML::Value << a.min_samples;
  out << YAML::EndMap;
  const auto& m = c.lpdos_map;
  out << YAML::Key << "lpdos_map" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value << YAML::DoubleQuoted << m.gamma;
  out << YAML::Key << "e_min" << YAML::Value << m.e_min << YAML::Key << "e_max" << YAML::Value << m.e_max;
  out << YAML::Key << "energy_points" << YAML::Value << m.energy_points;
  out << YAML::Key << "edges" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& e : m.edges) out << YAML::DoubleQuoted << e;
  out << YAML::EndSeq;
  out << YAML::Key << "positions" << YAML::Value << m.positions;
  out << YAML::Key << "probe" << YAML::Value << YAML::BeginMap;
  if (m.probe.width) out << YAML::Key << "width" << YAML::Value << *m.probe.width;
  out << YAML::Key << "width_fraction" << YAML::Value << m.probe.width_fraction;
  if (m.probe.delta_u) out << YAML::Key << "delta_u" << YAML::Value << *m.probe.delta_u;
  out << YAML::Key << "target_phase" << YAML::Value << m.probe.target_phase;
  out << YAML::Key << "max_rel_discrepancy" << YAML::Value << m.probe.max_rel_discrepancy;
  out << YAML::EndMap << YAML::EndMap;
  const auto& q = c.eq10_scan;
  out << YAML::Key << "eq10_scan" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha" << YAML::Value << YAML::DoubleQuoted << q.alpha;
  out << YAML::Key << "gamma" << YAML::Value << YAML::DoubleQuoted << q.gamma;
  out << YAML::Key << "k_min" << YAML::Value << q.k_min << YAML::Key << "k_max" << YAML::Value << q.k_max;
  out << YAML::Key << "u1" << YAML::Value << q.u1 << YAML::Key << "delta_u1" << YAML::Value << q.delta_u1;
  out << YAML::Key << "points" << YAML::Value << q.points;
  out << YAML::Key << "refine_levels" << YAML::Value << q.refine_levels;
  out << YAML::Key << "flag_mag2" << YAML::Value << q.flag_mag2;
  out << YAML::Key << "minima_points" << YAML::Value << q.minima_points;
  out << YAML::EndMap;
  out << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "random_networks" << YAML::Value << c.verify.random_networks;
  out << YAML::Key << "sum_rule_points" << YAML::Value << c.verify.sum_rule_points;
  out << YAML::EndMap;
  out << YAML::EndMap;
  if (!out.good()) throw Error(ErrorCode::InvalidArgument, "config serialization failed: " + out.GetLastError());
  return std::string(out.c_str()) + (flow ? "" : "\n");
}

inline ProbeSettings probe_settings(const RunConfig& c, const ProbeConfig& p) {
  ProbeSettings s;
  s.width = p.width;
  s.width_fraction = p.width_fraction;
  s.delta_u = p.delta_u;
  s.target_phase = p.target_phase;
  s.max_rel_discrepancy = p.max_rel_discrepancy;
  s.eps_mag = c.eps_mag;
  s.solver = c.solver();
  return s;
}

}  // namespace qnet
