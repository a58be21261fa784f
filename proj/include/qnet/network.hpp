#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qnet/error.hpp"

namespace qnet {

/// Junction point. delta_strength = lambda imposes sum of outward derivatives
/// = lambda * psi(vertex); zero gives a transparent Kirchhoff vertex.
struct Vertex {
  std::string id;
  double delta_strength = 0.0;

  bool operator==(const Vertex&) const = default;
};

/// Finite segment from `from` (x = 0) to `to` (x = length) with constant potential.
struct Edge {
  std::string id;
  std::string from;
  std::string to;
  double length = 1.0;
  double potential = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Semi-infinite lead at zero potential. Declaration order fixes the S-matrix
/// channel order.
struct Lead {
  std::string id;
  std::string vertex;

  bool operator==(const Lead&) const = default;
};

/// A point on the sample: edge id and distance from the edge's `from` vertex.
struct Position {
  std::string edge;
  double x = 0.0;

  bool operator==(const Position&) const = default;
};

/// Immutable quantum graph. Construction does not validate; use
/// validate_network() or let the solver reject invalid input.
class Network {
 public:
  Network() = default;
  Network(std::vector<Vertex> vertices, std::vector<Edge> edges, std::vector<Lead> leads)
      : vertices_(std::move(vertices)), edges_(std::move(edges)), leads_(std::move(leads)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) vertex_index_.emplace(vertices_[i].id, i);
    for (std::size_t i = 0; i < edges_.size(); ++i) edge_index_.emplace(edges_[i].id, i);
    for (std::size_t i = 0; i < leads_.size(); ++i) lead_index_.emplace(leads_[i].id, i);
  }

  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Lead>& leads() const noexcept { return leads_; }

  std::optional<std::size_t> find_vertex(std::string_view id) const { return find(vertex_index_, id); }
  std::optional<std::size_t> find_edge(std::string_view id) const { return find(edge_index_, id); }
  std::optional<std::size_t> find_lead(std::string_view id) const { return find(lead_index_, id); }

  const Edge& edge(std::string_view id) const {
    auto i = find_edge(id);
    if (!i) throw Error(ErrorCode::UnknownEdge, "no edge '" + std::string(id) + "'");
    return edges_[*i];
  }

  std::size_t lead_index(std::string_view id) const {
    auto i = find_lead(id);
    if (!i) throw Error(ErrorCode::UnknownChannel, "no lead '" + std::string(id) + "'");
    return *i;
  }

  std::vector<std::string> channel_order() const {
    std::vector<std::string> ids;
    ids.reserve(leads_.size());
    for (const auto& l : leads_) ids.push_back(l.id);
    return ids;
  }

  bool operator==(const Network& o) const {
    return vertices_ == o.vertices_ && edges_ == o.edges_ && leads_ == o.leads_;
  }

 private:
  using Index = std::unordered_map<std::string, std::size_t>;
  static std::optional<std::size_t> find(const Index& index, std::string_view id) {
    auto it = index.find(std::string(id));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<Lead> leads_;
  Index vertex_index_;
  Index edge_index_;
  Index lead_index_;
};

// ---------------------------------------------------------------------------
// Validation

enum class DiagnosticCode {
  EdgeLengthNonpositive,
  NonfiniteValue,
  DuplicateId,
  UnknownVertex,
  LoopEdge,
  MultiEdge,
  IsolatedVertex,
  Disconnected,
  TooFewLeads,
};

constexpr std::string_view diagnostic_name(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::EdgeLengthNonpositive: return "EDGE_LENGTH_NONPOSITIVE";
    case DiagnosticCode::NonfiniteValue: return "NONFINITE_VALUE";
    case DiagnosticCode::DuplicateId: return "DUPLICATE_ID";
    case DiagnosticCode::UnknownVertex: return "UNKNOWN_VERTEX";
    case DiagnosticCode::LoopEdge: return "LOOP_EDGE";
    case DiagnosticCode::MultiEdge: return "MULTI_EDGE";
    case DiagnosticCode::IsolatedVertex: return "ISOLATED_VERTEX";
    case DiagnosticCode::Disconnected: return "DISCONNECTED";
    case DiagnosticCode::TooFewLeads: return "TOO_FEW_LEADS";
  }
  return "UNKNOWN";
}

struct Diagnostic {
  DiagnosticCode code;
  std::string message;
};

/// Returns every violated invariant; an empty list means the network is valid.
inline std::vector<Diagnostic> validate_network(const Network& net) {
  std::vector<Diagnostic> out;
  auto report = [&](DiagnosticCode c, std::string msg) { out.push_back({c, std::move(msg)}); };

  std::unordered_map<std::string, int> seen;
  for (const auto& v : net.vertices()) {
    if (seen["v:" + v.id]++ == 1) report(DiagnosticCode::DuplicateId, "vertex '" + v.id + "'");
    if (!std::isfinite(v.delta_strength))
      report(DiagnosticCode::NonfiniteValue, "vertex '" + v.id + "' delta_strength");
  }
  for (const auto& e : net.edges()) {
    if (seen["e:" + e.id]++ == 1) report(DiagnosticCode::DuplicateId, "edge '" + e.id + "'");
    if (!std::isfinite(e.length) || !std::isfinite(e.potential))
      report(DiagnosticCode::NonfiniteValue, "edge '" + e.id + "'");
    else if (e.length <= 0.0)
      report(DiagnosticCode::EdgeLengthNonpositive, "edge '" + e.id + "'");
  }
  for (const auto& l : net.leads())
    if (seen["l:" + l.id]++ == 1) report(DiagnosticCode::DuplicateId, "lead '" + l.id + "'");
  if (net.leads().size() < 2)
    report(DiagnosticCode::TooFewLeads, std::to_string(net.leads().size()) + " lead(s)");

  const std::size_t nv = net.vertices().size();
  std::vector<std::size_t> parent(nv);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<int> degree(nv, 0);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& e : net.edges()) {
    auto a = net.find_vertex(e.from);
    auto b = net.find_vertex(e.to);
    if (!a || !b) {
      report(DiagnosticCode::UnknownVertex, "edge '" + e.id + "' endpoint");
      continue;
    }
    if (*a == *b) {
      report(DiagnosticCode::LoopEdge, "edge '" + e.id + "'");
      continue;
    }
    const std::pair<std::size_t, std::size_t> key{std::min(*a, *b), std::max(*a, *b)};
    for (const auto& p : pairs)
      if (p == key) report(DiagnosticCode::MultiEdge, "edge '" + e.id + "' duplicates a vertex pair");
    pairs.emplace_back(key);
    ++degree[*a];
    ++degree[*b];
    parent[root(*a)] = root(*b);
  }
  for (const auto& l : net.leads()) {
    auto v = net.find_vertex(l.vertex);
    if (!v) {
      report(DiagnosticCode::UnknownVertex, "lead '" + l.id + "' vertex '" + l.vertex + "'");
      continue;
    }
    ++degree[*v];
  }
  for (std::size_t i = 0; i < nv; ++i)
    if (degree[i] == 0) report(DiagnosticCode::IsolatedVertex, "vertex '" + net.vertices()[i].id + "'");
  for (std::size_t i = 1; i < nv; ++i)
    if (root(i) != root(0)) {
      report(DiagnosticCode::Disconnected, "vertex '" + net.vertices()[i].id + "' unreachable");
      break;
    }
  return out;
}

inline void require_valid(const Network& net) {
  auto diags = validate_network(net);
  if (diags.empty()) return;
  std::string msg;
  for (const auto& d : diags) {
    if (!msg.empty()) msg += "; ";
    msg += std::string(diagnostic_name(d.code)) + " " + d.message;
  }
  throw Error(ErrorCode::InvalidNetwork, msg);
}

// ---------------------------------------------------------------------------
// Three-prong sample

enum class BarrierModel { Edge, Delta };

/// Lead 1 - II - J - III - lead 3, with the prong J - V - VI - lead 2.
/// Region VI carries potential u1 (Edge model) or is replaced by a delta of
/// strength u1 at the lead-2 vertex (Delta model, l6 unused).
struct ThreeProngParams {
  double l2 = 1.0;
  double l3 = 1.0;
  double l5 = 1.5;
  double l6 = 0.45;
  double v2 = 0.0;
  double v3 = 0.0;
  double v5 = 0.0;
  double u1 = 100.0;
  BarrierModel barrier = BarrierModel::Edge;

  bool operator==(const ThreeProngParams&) const = default;
};

inline Network three_prong_preset(const ThreeProngParams& p) {
  auto check = [](double len, const char* name) {
    if (!(len > 0.0) || !std::isfinite(len))
      throw Error(ErrorCode::NonpositiveLength, std::string(name) + " = " + std::to_string(len));
  };
  check(p.l2, "l2");
  check(p.l3, "l3");
  check(p.l5, "l5");
  if (p.barrier == BarrierModel::Edge) check(p.l6, "l6");

  std::vector<Edge> edges{
      {"II", "A", "J", p.l2, p.v2},
      {"III", "J", "C", p.l3, p.v3},
      {"V", "J", "D", p.l5, p.v5},
  };
  std::vector<Vertex> vertices{{"A", 0.0}, {"J", 0.0}, {"C", 0.0}};
  std::string lead2_vertex = "D";
  if (p.barrier == BarrierModel::Edge) {
    vertices.push_back({"D", 0.0});
    vertices.push_back({"B", 0.0});
    edges.push_back({"VI", "D", "B", p.l6, p.u1});
    lead2_vertex = "B";
  } else {
    vertices.push_back({"D", p.u1});
  }
  return Network(std::move(vertices), std::move(edges),
                 {{"1", "A"}, {"2", lead2_vertex}, {"3", "C"}});
}

// ---------------------------------------------------------------------------
// Local potential probe

/// Rectangular potential step delta_u of width `width` centred at `center` on `edge`.
struct PerturbationSpec {
  std::string edge;
  double center = 0.0;
  double width = 0.0;
  double delta_u = 0.0;

  bool operator==(const PerturbationSpec&) const = default;
};

/// Splits the target edge into left / probe / right pieces; the probe piece
/// carries potential V + delta_u. The input network is not modified.
inline Network apply_perturbation(const Network& net, const PerturbationSpec& p) {
  auto idx = net.find_edge(p.edge);
  if (!idx) throw Error(ErrorCode::UnknownEdge, "no edge '" + p.edge + "'");
  const Edge& target = net.edges()[*idx];
  if (!(p.width > 0.0) || p.width > target.length / 10.0)
    throw Error(ErrorCode::ProbeTooWide, "width " + std::to_string(p.width) + " on edge '" + p.edge +
                                             "' of length " + std::to_string(target.length));
  const double lo = p.center - 0.5 * p.width;
  const double hi = p.center + 0.5 * p.width;
  if (!(lo > 0.0) || !(hi < target.length))
    throw Error(ErrorCode::ProbeOutOfRange,
                "probe [" + std::to_string(lo) + ", " + std::to_string(hi) + "] on edge '" + p.edge + "'");

  const std::string left_v = target.id + "#p0";
  const std::string right_v = target.id + "#p1";
  std::vector<Vertex> vertices = net.vertices();
  vertices.push_back({left_v, 0.0});
  vertices.push_back({right_v, 0.0});

  std::vector<Edge> edges;
  edges.reserve(net.edges().size() + 2);
  for (const auto& e : net.edges()) {
    if (e.id != target.id) {
      edges.push_back(e);
      continue;
    }
    edges.push_back({e.id + "#L", e.from, left_v, lo, e.potential});
    edges.push_back({e.id + "#P", left_v, right_v, hi - lo, e.potential + p.delta_u});
    edges.push_back({e.id + "#R", right_v, e.to, e.length - hi, e.potential});
  }
  return Network(std::move(vertices), std::move(edges), net.leads());
}

}  // namespace qnet
