#pragma once

#include "diffseer/aggregate.hpp"
#include "diffseer/io.hpp"
#include "diffseer/mask.hpp"
#include "diffseer/model.hpp"
#include "diffseer/reorder.hpp"
#include "diffseer/timeline.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace diffseer {

inline constexpr int kPayloadSchemaVersion = 1;

/// A validated graph together with its diff sequence, computed once.
struct PreparedDataset {
  DynamicWeightedGraph graph;
  std::vector<GraphDiff> diffs;

  explicit PreparedDataset(DynamicWeightedGraph g)
      : graph(std::move(g)), diffs(compute_diff_sequence(graph)) {}

  TransitionRange full() const { return full_range(diffs); }

  std::vector<NodeIndex> indices_of(const std::vector<NodeId>& order) const {
    std::map<NodeId, NodeIndex> pos;
    for (NodeIndex i = 0; i < graph.nodes.size(); ++i) pos.emplace(graph.nodes[i], i);
    std::vector<NodeIndex> out;
    for (const auto& id : order) out.push_back(pos.at(id));
    return out;
  }
};

struct AnalysisParams {
  std::optional<TransitionRange> range;  // empty = every transition
  double alpha = 0.5;
  DetailSource detail_source = DetailSource::Original;
  MaskConfig mask;
};

struct Analysis {
  TransitionRange range;
  OrderingResult ordering;
  OverviewMatrix overview;  // rows follow ordering.permutation
  ChartSeries charts;       // area_per_node follows ordering.permutation
};

inline Analysis analyze(const PreparedDataset& ds, const AnalysisParams& p) {
  Analysis a;
  a.range = p.range.value_or(ds.full());
  a.ordering = order_nodes(ds.graph, ds.diffs, a.range, p.alpha, p.detail_source);
  const auto& perm = a.ordering.ordering.permutation;
  a.overview = permute_rows(build_overview(ds.diffs, ds.graph.nodes, a.range), perm);

  a.charts = build_charts(ds.diffs, ds.graph.nodes, a.range);
  std::map<NodeId, std::size_t> area;
  for (const auto& n : a.charts.area_per_node) area.emplace(n.node, n.changed_edges);
  a.charts.area_per_node.clear();
  for (const auto& id : perm) a.charts.area_per_node.push_back({id, area.at(id)});
  return a;
}

inline std::string_view to_string(DetailKind k) {
  return k == DetailKind::Difference ? "difference" : "original";
}
inline std::string_view to_string(DetailSource s) {
  return s == DetailSource::Difference ? "difference" : "original";
}
inline std::string_view to_string(Sign s) { return s == Sign::Positive ? "positive" : "negative"; }
inline std::string_view to_string(MaskCriterion c) {
  return c == MaskCriterion::AvgChange ? "avgChange" : "changedEdgeCount";
}

inline std::optional<DetailKind> parse_detail_kind(std::string_view s) {
  if (s == "difference") return DetailKind::Difference;
  if (s == "original") return DetailKind::Original;
  return std::nullopt;
}
inline std::optional<DetailSource> parse_detail_source(std::string_view s) {
  if (s == "difference") return DetailSource::Difference;
  if (s == "original") return DetailSource::Original;
  return std::nullopt;
}
inline std::optional<MaskCriterion> parse_criterion(std::string_view s) {
  if (s == "avgChange" || s == "avg-change") return MaskCriterion::AvgChange;
  if (s == "changedEdgeCount" || s == "changed-edge-count") return MaskCriterion::ChangedEdgeCount;
  return std::nullopt;
}

namespace detail {

inline json id_list(const std::vector<NodeId>& ids) {
  json out = json::array();
  for (const auto& id : ids) out.push_back(id.value);
  return out;
}

}  // namespace detail

inline json ordering_payload(const NodeOrdering& o) {
  return {{"alpha", o.alpha}, {"permutation", detail::id_list(o.permutation)}, {"objective", o.objective}};
}

inline json charts_payload(const ChartSeries& c) {
  json bars = json::array(), area = json::array();
  for (const auto& b : c.stacked_bars)
    bars.push_back({{"t", b.transition_index}, {"posEdges", b.pos_edges}, {"negEdges", b.neg_edges}});
  for (const auto& a : c.area_per_node) area.push_back({{"node", a.node.value}, {"changedEdges", a.changed_edges}});
  return {{"schemaVersion", kPayloadSchemaVersion}, {"stackedBars", bars}, {"areaPerNode", area}};
}

inline json overview_matrix_payload(const OverviewMatrix& ov, const DynamicWeightedGraph& g) {
  json labels = json::array(), cells = json::array();
  for (auto t : ov.transitions) labels.push_back(g.snapshots.at(t).label);
  for (std::size_t r = 0; r < ov.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < ov.cols(); ++c) {
      const auto& cell = ov.cell(r, c);
      row.push_back({{"node", cell.node.value},
                     {"t", cell.transition_index},
                     {"posCount", cell.pos_count},
                     {"negCount", cell.neg_count},
                     {"avgChange", cell.avg_change},
                     {"avgPos", cell.avg_pos},
                     {"avgNeg", cell.avg_neg}});
    }
    cells.push_back(std::move(row));
  }
  return {{"schemaVersion", kPayloadSchemaVersion},
          {"nodeOrder", detail::id_list(ov.node_order)},
          {"transitions", ov.transitions},
          {"labels", labels},
          {"cells", cells},
          {"maxAbsAvgChange", max_abs_avg_change(ov)}};
}

/// Combined overview response: matrix, ordering and charts for one range.
inline json overview_payload(const Analysis& a, const DynamicWeightedGraph& g, DetailSource source) {
  return {{"range", {{"from", a.range.from}, {"to", a.range.to}}},
          {"detailSource", std::string(to_string(source))},
          {"overview", overview_matrix_payload(a.overview, g)},
          {"ordering", ordering_payload(a.ordering.ordering)},
          {"charts", charts_payload(a.charts)}};
}

inline json detail_payload(const DetailMatrix& m, const DynamicWeightedGraph& g) {
  json values = json::array();
  double max_abs = 0.0;
  for (std::size_t r = 0; r < m.values.size(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.values.size(); ++c) {
      row.push_back(m.values(r, c));
      max_abs = std::max(max_abs, std::abs(m.values(r, c)));
    }
    values.push_back(std::move(row));
  }
  return {{"schemaVersion", kPayloadSchemaVersion},
          {"kind", std::string(to_string(m.kind))},
          {"timeIndex", m.time_index},
          {"label", g.snapshots.at(m.time_index).label},
          {"nodeOrder", detail::id_list(m.node_order)},
          {"values", values},
          {"maxAbs", max_abs}};
}

inline json mask_payload(const DifferenceMask& m, const MaskConfig& cfg) {
  json highlights = json::array(), paths = json::array();
  for (const auto& h : m.highlights)
    highlights.push_back(
        {{"node", h.node.value}, {"t", h.transition_index}, {"sign", std::string(to_string(h.sign))}});
  for (const auto& p : m.paths) {
    if (p.kind == PathKind::WithinColumn) {
      paths.push_back({{"kind", "withinColumn"},
                       {"column", p.column},
                       {"sign", std::string(to_string(p.sign))},
                       {"nodes", detail::id_list(p.nodes)}});
    } else {
      paths.push_back({{"kind", "crossColumn"},
                       {"node", p.node.value},
                       {"fromColumn", p.from_column},
                       {"fromSign", std::string(to_string(p.from_sign))},
                       {"toColumn", p.to_column},
                       {"toSign", std::string(to_string(p.to_sign))}});
    }
  }
  return {{"schemaVersion", kPayloadSchemaVersion},
          {"criterion", std::string(to_string(cfg.criterion))},
          {"threshold", cfg.threshold},
          {"gapLimit", cfg.gap_limit},
          {"highlights", highlights},
          {"paths", paths}};
}

/// Array of {t, offset, intensity, label}.
inline json timeline_payload(const Timeline& tl) {
  json out = json::array();
  for (const auto& p : tl.points)
    out.push_back({{"t", p.time_index}, {"offset", p.offset}, {"intensity", p.change_intensity}, {"label", p.label}});
  return out;
}

}  // namespace diffseer
