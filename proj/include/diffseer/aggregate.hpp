#pragma once

#include "diffseer/error.hpp"
#include "diffseer/matrix.hpp"
#include "diffseer/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace diffseer {

/// Inclusive range of transition indices (1-based: transition t is the
/// change from snapshot t-1 to snapshot t).
struct TransitionRange {
  std::size_t from = 1;
  std::size_t to = 1;

  std::size_t width() const noexcept { return to - from + 1; }
  friend bool operator==(const TransitionRange&, const TransitionRange&) = default;
};

inline TransitionRange full_range(const std::vector<GraphDiff>& diffs) {
  if (diffs.empty()) throw Error(ErrorCode::RangeError, "graph has no transitions");
  return {diffs.front().transition_index, diffs.back().transition_index};
}

inline void check_range(const std::vector<GraphDiff>& diffs, TransitionRange range) {
  if (diffs.empty()) throw Error(ErrorCode::RangeError, "graph has no transitions");
  const auto first = diffs.front().transition_index;
  const auto last = diffs.back().transition_index;
  if (range.from > range.to || range.from < first || range.to > last)
    throw Error(ErrorCode::RangeError, "range [" + std::to_string(range.from) + ", " +
                                           std::to_string(range.to) + "] outside [" +
                                           std::to_string(first) + ", " + std::to_string(last) + "]");
}

inline const GraphDiff& diff_at(const std::vector<GraphDiff>& diffs, std::size_t transition) {
  if (diffs.empty() || transition < diffs.front().transition_index ||
      transition > diffs.back().transition_index)
    throw Error(ErrorCode::RangeError, "no transition " + std::to_string(transition));
  return diffs[transition - diffs.front().transition_index];
}

struct OverviewCell {
  NodeId node;
  std::size_t transition_index = 0;
  std::size_t pos_count = 0;
  std::size_t neg_count = 0;
  double avg_change = 0.0;  // mean delta over changed incident edges, 0 if none
  double avg_pos = 0.0;     // mean of positive deltas, 0 if none
  double avg_neg = 0.0;     // mean of negative deltas, 0 if none
  double sum_change = 0.0;

  std::size_t changed() const noexcept { return pos_count + neg_count; }
};

/// Node x transition grid of change aggregates, row-major.
struct OverviewMatrix {
  std::vector<NodeId> node_order;
  std::vector<std::size_t> transitions;
  std::vector<OverviewCell> cells;

  std::size_t rows() const noexcept { return node_order.size(); }
  std::size_t cols() const noexcept { return transitions.size(); }
  const OverviewCell& cell(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
  OverviewCell& cell(std::size_t r, std::size_t c) { return cells[r * cols() + c]; }
};

enum class DetailKind { Difference, Original };

struct DetailMatrix {
  DetailKind kind = DetailKind::Difference;
  std::size_t time_index = 0;
  std::vector<NodeId> node_order;
  SquareMatrix values;
};

struct StackedBar {
  std::size_t transition_index = 0;
  std::size_t pos_edges = 0;
  std::size_t neg_edges = 0;

  friend bool operator==(const StackedBar&, const StackedBar&) = default;
};

struct NodeArea {
  NodeId node;
  std::size_t changed_edges = 0;
};

struct ChartSeries {
  std::vector<StackedBar> stacked_bars;
  std::vector<NodeArea> area_per_node;
};

/// One cell per (node, transition in range), rows in `nodes` order.
/// `nodes` is the graph universe the diffs index into.
inline OverviewMatrix build_overview(const std::vector<GraphDiff>& diffs,
                                     const std::vector<NodeId>& nodes, TransitionRange range) {
  check_range(diffs, range);
  OverviewMatrix ov;
  ov.node_order = nodes;
  for (auto t = range.from; t <= range.to; ++t) ov.transitions.push_back(t);
  const std::size_t cols = ov.cols();
  ov.cells.resize(nodes.size() * cols);

  std::vector<double> pos_sum(nodes.size()), neg_sum(nodes.size());
  for (std::size_t c = 0; c < cols; ++c) {
    std::fill(pos_sum.begin(), pos_sum.end(), 0.0);
    std::fill(neg_sum.begin(), neg_sum.end(), 0.0);
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      auto& cell = ov.cell(r, c);
      cell.node = nodes[r];
      cell.transition_index = ov.transitions[c];
    }
    for (const auto& e : diff_at(diffs, ov.transitions[c]).edges) {
      for (NodeIndex end : {e.u, e.v}) {
        auto& cell = ov.cell(end, c);
        if (e.delta > 0) {
          ++cell.pos_count;
          pos_sum[end] += e.delta;
        } else {
          ++cell.neg_count;
          neg_sum[end] += e.delta;
        }
      }
    }
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      auto& cell = ov.cell(r, c);
      cell.sum_change = pos_sum[r] + neg_sum[r];
      if (cell.changed() > 0) cell.avg_change = cell.sum_change / static_cast<double>(cell.changed());
      if (cell.pos_count > 0) cell.avg_pos = pos_sum[r] / static_cast<double>(cell.pos_count);
      if (cell.neg_count > 0) cell.avg_neg = neg_sum[r] / static_cast<double>(cell.neg_count);
    }
  }
  return ov;
}

/// Reorders overview rows to follow `order` (a permutation of node_order).
inline OverviewMatrix permute_rows(const OverviewMatrix& ov, const std::vector<NodeId>& order) {
  if (order.size() != ov.rows())
    throw Error(ErrorCode::NodeSetMismatch, "row permutation has wrong length");
  OverviewMatrix out;
  out.node_order = order;
  out.transitions = ov.transitions;
  out.cells.reserve(ov.cells.size());
  for (const auto& id : order) {
    const auto it = std::find(ov.node_order.begin(), ov.node_order.end(), id);
    if (it == ov.node_order.end())
      throw Error(ErrorCode::NodeSetMismatch, "node '" + id.value + "' not in overview");
    const auto r = static_cast<std::size_t>(it - ov.node_order.begin());
    for (std::size_t c = 0; c < ov.cols(); ++c) out.cells.push_back(ov.cell(r, c));
  }
  return out;
}

/// Largest |avg_change| in the matrix; the diverging color domain.
inline double max_abs_avg_change(const OverviewMatrix& ov) {
  double m = 0.0;
  for (const auto& c : ov.cells) m = std::max(m, std::abs(c.avg_change));
  return m;
}

/// Dense adjacency of one snapshot, rows and columns in universe order.
inline SquareMatrix dense_snapshot(const GraphSnapshot& s, std::size_t n) {
  SquareMatrix m(n);
  for (const auto& e : s.edges) m(e.u, e.v) = m(e.v, e.u) = e.weight;
  return m;
}

inline SquareMatrix dense_diff(const GraphDiff& d, std::size_t n) {
  SquareMatrix m(n);
  for (const auto& e : d.edges) m(e.u, e.v) = m(e.v, e.u) = e.delta;
  return m;
}

/// Symmetric node x node grid for one timeslice (Original) or transition
/// (Difference). `order` lists universe indices row by row; empty keeps the
/// universe order.
inline DetailMatrix build_detail(const DynamicWeightedGraph& g, const std::vector<GraphDiff>& diffs,
                                 DetailKind kind, std::size_t time_index,
                                 const std::vector<NodeIndex>& order = {}) {
  const std::size_t n = g.node_count();
  SquareMatrix dense;
  if (kind == DetailKind::Difference) {
    dense = dense_diff(diff_at(diffs, time_index), n);
  } else {
    if (time_index >= g.snapshots.size())
      throw Error(ErrorCode::RangeError, "no timeslice " + std::to_string(time_index));
    dense = dense_snapshot(g.snapshots[time_index], n);
  }

  DetailMatrix out{kind, time_index, {}, SquareMatrix(n)};
  std::vector<NodeIndex> rows = order;
  if (rows.empty())
    for (NodeIndex i = 0; i < n; ++i) rows.push_back(i);
  if (rows.size() != n) throw Error(ErrorCode::NodeSetMismatch, "detail order has wrong length");
  for (auto i : rows) out.node_order.push_back(g.nodes.at(i));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out.values(r, c) = dense(rows[r], rows[c]);
  return out;
}

/// Stacked-bar totals per transition and per-node changed-edge totals.
inline ChartSeries build_charts(const std::vector<GraphDiff>& diffs, const std::vector<NodeId>& nodes,
                                TransitionRange range) {
  check_range(diffs, range);
  ChartSeries out;
  std::vector<std::size_t> area(nodes.size(), 0);
  for (auto t = range.from; t <= range.to; ++t) {
    StackedBar bar{t, 0, 0};
    for (const auto& e : diff_at(diffs, t).edges) {
      if (e.delta > 0) ++bar.pos_edges;
      else ++bar.neg_edges;
      ++area[e.u];
      ++area[e.v];
    }
    out.stacked_bars.push_back(bar);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) out.area_per_node.push_back({nodes[i], area[i]});
  return out;
}

enum class ColorScheme { Diverging, Sequential };

/// Normalized color coordinate: diverging in [-1, 1] (positive = red end),
/// sequential in [0, 1].
inline double color_scale(double value, double max_abs, ColorScheme scheme) {
  if (!(max_abs > 0.0) || !std::isfinite(max_abs))
    throw Error(ErrorCode::DomainError, "color scale domain must be positive");
  const double x = value / max_abs;
  return scheme == ColorScheme::Diverging ? std::clamp(x, -1.0, 1.0) : std::clamp(x, 0.0, 1.0);
}

}  // namespace diffseer
