#pragma once

#include "diffseer/error.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace diffseer {

/// Opaque node identifier, stable across timeslices.
struct NodeId {
  std::string value;

  NodeId() = default;
  explicit NodeId(std::string v) : value(std::move(v)) {}

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

/// Position of a node inside DynamicWeightedGraph::nodes.
using NodeIndex = std::uint32_t;

/// Undirected weighted edge. Canonical form has nodes[u] < nodes[v].
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphSnapshot {
  std::size_t index = 0;
  std::string label;
  std::vector<Edge> edges;
};

/// The node universe plus the ordered snapshot sequence.
struct DynamicWeightedGraph {
  std::vector<NodeId> nodes;
  std::vector<GraphSnapshot> snapshots;

  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t timeslice_count() const noexcept { return snapshots.size(); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back(s.label);
    return out;
  }

  std::optional<NodeIndex> find(const NodeId& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == id) return static_cast<NodeIndex>(i);
    return std::nullopt;
  }
};

/// A weight change on one canonical pair; delta is never zero.
struct DiffEdge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double delta = 0.0;

  friend bool operator==(const DiffEdge&, const DiffEdge&) = default;
};

/// Edge deltas for the transition from snapshot (transition_index - 1) to
/// snapshot transition_index.
struct GraphDiff {
  std::size_t transition_index = 1;
  std::vector<DiffEdge> edges;
};

enum class ViolationCode {
  EmptyNodeId,
  DuplicateNode,
  SelfLoop,
  UnknownNode,
  NonCanonicalEdge,
  DuplicateEdge,
  NonFiniteWeight,
  ZeroWeight,
  IsolatedNode,
  IndexGap,
};

inline std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::EmptyNodeId: return "EmptyNodeId";
    case ViolationCode::DuplicateNode: return "DuplicateNode";
    case ViolationCode::SelfLoop: return "SelfLoop";
    case ViolationCode::UnknownNode: return "UnknownNode";
    case ViolationCode::NonCanonicalEdge: return "NonCanonicalEdge";
    case ViolationCode::DuplicateEdge: return "DuplicateEdge";
    case ViolationCode::NonFiniteWeight: return "NonFiniteWeight";
    case ViolationCode::ZeroWeight: return "ZeroWeight";
    case ViolationCode::IsolatedNode: return "IsolatedNode";
    case ViolationCode::IndexGap: return "IndexGap";
  }
  return "Unknown";
}

struct Violation {
  ViolationCode code;
  std::optional<std::size_t> timeslice;  // absent for universe-level issues
  std::string node;                      // offending node, if any
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

inline std::string node_name(const DynamicWeightedGraph& g, NodeIndex i) {
  return i < g.nodes.size() ? g.nodes[i].value : "#" + std::to_string(i);
}

inline bool edge_less(const Edge& a, const Edge& b) {
  return a.u != b.u ? a.u < b.u : a.v < b.v;
}

inline bool sorted_edges(const std::vector<Edge>& edges) {
  return std::is_sorted(edges.begin(), edges.end(), edge_less);
}

inline std::vector<Edge> sorted_copy(const std::vector<Edge>& edges) {
  std::vector<Edge> out = edges;
  std::sort(out.begin(), out.end(), edge_less);
  return out;
}

}  // namespace detail

/// Reports every broken invariant; an empty result means the graph is valid.
inline std::vector<Violation> validate_graph(const DynamicWeightedGraph& g) {
  std::vector<Violation> out;
  const std::size_t n = g.nodes.size();

  std::set<NodeId> seen;
  for (const auto& id : g.nodes) {
    if (id.value.empty()) out.push_back({ViolationCode::EmptyNodeId, {}, "", "empty node id"});
    else if (!seen.insert(id).second)
      out.push_back({ViolationCode::DuplicateNode, {}, id.value, "node listed twice"});
  }

  std::vector<bool> touched(n, false);
  for (std::size_t t = 0; t < g.snapshots.size(); ++t) {
    const auto& snap = g.snapshots[t];
    if (snap.index != t)
      out.push_back({ViolationCode::IndexGap, t, "",
                     "snapshot index " + std::to_string(snap.index) + " at position " +
                         std::to_string(t)});
    std::set<std::pair<NodeIndex, NodeIndex>> pairs;
    for (const auto& e : snap.edges) {
      bool known = true;
      for (NodeIndex end : {e.u, e.v}) {
        if (end >= n) {
          out.push_back({ViolationCode::UnknownNode, t, detail::node_name(g, end),
                         "endpoint outside the node universe"});
          known = false;
        }
      }
      if (e.u == e.v) {
        out.push_back({ViolationCode::SelfLoop, t, detail::node_name(g, e.u), "self-loop"});
        continue;
      }
      if (!std::isfinite(e.weight))
        out.push_back({ViolationCode::NonFiniteWeight, t, detail::node_name(g, e.u),
                       "weight is not finite"});
      else if (e.weight == 0.0)
        out.push_back({ViolationCode::ZeroWeight, t, detail::node_name(g, e.u),
                       "zero-weight edges must not be stored"});
      if (!known) continue;
      touched[e.u] = touched[e.v] = true;
      if (!(g.nodes[e.u] < g.nodes[e.v]))
        out.push_back({ViolationCode::NonCanonicalEdge, t, g.nodes[e.u].value,
                       "edge endpoints not in canonical order"});
      auto key = std::minmax(e.u, e.v);
      if (!pairs.insert({key.first, key.second}).second)
        out.push_back({ViolationCode::DuplicateEdge, t, g.nodes[e.u].value,
                       "pair " + g.nodes[e.u].value + "-" + g.nodes[e.v].value + " repeated"});
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!touched[i] && !g.nodes[i].value.empty())
      out.push_back({ViolationCode::IsolatedNode, {}, g.nodes[i].value,
                     "node has no edge in any snapshot"});
  return out;
}

inline void require_valid(const DynamicWeightedGraph& g) {
  const auto violations = validate_graph(g);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error(ErrorCode::InvalidGraph,
                std::string(to_string(v.code)) + ": " + v.detail +
                    (v.node.empty() ? "" : " (" + v.node + ")") + " [" +
                    std::to_string(violations.size()) + " violation(s)]");
  }
}

/// Deltas between two snapshots. A pair counts as changed when
/// |new - old| > epsilon; epsilon = 0 means any difference.
inline std::vector<DiffEdge> diff_edges(const GraphSnapshot& before, const GraphSnapshot& after,
                                        double epsilon = 0.0) {
  std::vector<Edge> sorted_a, sorted_b;
  if (!detail::sorted_edges(before.edges)) sorted_a = detail::sorted_copy(before.edges);
  if (!detail::sorted_edges(after.edges)) sorted_b = detail::sorted_copy(after.edges);
  const auto& a = sorted_a.empty() ? before.edges : sorted_a;
  const auto& b = sorted_b.empty() ? after.edges : sorted_b;

  std::vector<DiffEdge> out;
  auto emit = [&](NodeIndex u, NodeIndex v, double delta) {
    if (std::abs(delta) > epsilon && delta != 0.0) out.push_back({u, v, delta});
  };
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && detail::edge_less(a[i], b[j]))) {
      emit(a[i].u, a[i].v, -a[i].weight);
      ++i;
    } else if (i == a.size() || detail::edge_less(b[j], a[i])) {
      emit(b[j].u, b[j].v, b[j].weight);
      ++j;
    } else {
      emit(a[i].u, a[i].v, b[j].weight - a[i].weight);
      ++i;
      ++j;
    }
  }
  return out;
}

/// One GraphDiff per adjacent pair of snapshots, transition indices 1..T-1.
inline std::vector<GraphDiff> compute_diff_sequence(const DynamicWeightedGraph& g,
                                                    double epsilon = 0.0) {
  require_valid(g);
  std::vector<GraphDiff> out;
  for (std::size_t t = 1; t < g.snapshots.size(); ++t)
    out.push_back({t, diff_edges(g.snapshots[t - 1], g.snapshots[t], epsilon)});
  return out;
}

/// Inverse of differencing: adds each delta and drops pairs that land on 0.
inline GraphSnapshot apply_diff(const GraphSnapshot& s, const GraphDiff& d) {
  if (d.transition_index != s.index + 1)
    throw Error(ErrorCode::IndexMismatch,
                "diff for transition " + std::to_string(d.transition_index) +
                    " cannot follow snapshot " + std::to_string(s.index));

  std::map<std::pair<NodeIndex, NodeIndex>, double> weights;
  for (const auto& e : s.edges) weights[{e.u, e.v}] = e.weight;
  for (const auto& e : d.edges) weights[{e.u, e.v}] += e.delta;

  GraphSnapshot out{s.index + 1, s.label, {}};
  for (const auto& [key, w] : weights)
    if (w != 0.0) out.edges.push_back({key.first, key.second, w});
  return out;
}

/// True at timeslice t iff the node has an incident edge in snapshot t.
inline std::vector<bool> node_presence(const DynamicWeightedGraph& g, const NodeId& id) {
  const auto idx = g.find(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, "unknown node '" + id.value + "'");
  std::vector<bool> out(g.snapshots.size(), false);
  for (std::size_t t = 0; t < g.snapshots.size(); ++t)
    for (const auto& e : g.snapshots[t].edges)
      if (e.u == *idx || e.v == *idx) {
        out[t] = true;
        break;
      }
  return out;
}

/// Builds a canonical snapshot from (u, v, w) triples on node indices:
/// orients pairs by NodeId, drops zero weights, sorts by (u, v).
inline std::vector<Edge> canonical_edges(const std::vector<NodeId>& nodes, std::vector<Edge> edges) {
  for (auto& e : edges)
    if (e.u < nodes.size() && e.v < nodes.size() && nodes[e.v] < nodes[e.u]) std::swap(e.u, e.v);
  std::erase_if(edges, [](const Edge& e) { return e.weight == 0.0; });
  std::sort(edges.begin(), edges.end(), detail::edge_less);
  return edges;
}

}  // namespace diffseer
