#pragma once

#include "diffseer/aggregate.hpp"
#include "diffseer/error.hpp"
#include "diffseer/model.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace diffseer {

enum class MaskCriterion { AvgChange, ChangedEdgeCount };

struct MaskConfig {
  MaskCriterion criterion = MaskCriterion::AvgChange;
  double threshold = 1.0;
  std::size_t gap_limit = 3;

  void validate() const {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
      throw Error(ErrorCode::DomainError, "mask threshold must be positive");
  }
};

enum class Sign { Positive, Negative };

struct Highlight {
  NodeId node;
  std::size_t transition_index = 0;
  Sign sign = Sign::Positive;

  friend bool operator==(const Highlight&, const Highlight&) = default;
};

enum class PathKind { WithinColumn, CrossColumn };

/// Within-column paths fill `column`, `sign` and `nodes`; cross-column paths
/// fill `node`, `from_column`, `from_sign`, `to_column`, `to_sign`.
struct MaskPath {
  PathKind kind = PathKind::WithinColumn;
  std::size_t column = 0;
  Sign sign = Sign::Positive;
  std::vector<NodeId> nodes;

  NodeId node;
  std::size_t from_column = 0;
  Sign from_sign = Sign::Positive;
  std::size_t to_column = 0;
  Sign to_sign = Sign::Positive;

  friend bool operator==(const MaskPath&, const MaskPath&) = default;
};

struct DifferenceMask {
  std::vector<Highlight> highlights;
  std::vector<MaskPath> paths;
};

/// Cells that pass the configured criterion, column by column, rows in the
/// overview's node order.
inline std::vector<Highlight> select_highlights(const OverviewMatrix& ov, const MaskConfig& cfg) {
  cfg.validate();
  std::vector<Highlight> out;
  for (std::size_t c = 0; c < ov.cols(); ++c) {
    for (std::size_t r = 0; r < ov.rows(); ++r) {
      const auto& cell = ov.cell(r, c);
      if (cfg.criterion == MaskCriterion::AvgChange) {
        if (cell.changed() > 0 && std::abs(cell.avg_change) >= cfg.threshold)
          out.push_back({cell.node, cell.transition_index,
                         cell.avg_change > 0 ? Sign::Positive : Sign::Negative});
      } else if (static_cast<double>(cell.changed()) >= cfg.threshold) {
        out.push_back({cell.node, cell.transition_index,
                       cell.pos_count >= cell.neg_count ? Sign::Positive : Sign::Negative});
      }
    }
  }
  return out;
}

/// Vertical same-sign connectors per column and horizontal same-node
/// connectors between successive highlighted columns, skipping any pair of
/// columns separated by more than `gap_limit` quiet columns.
inline std::vector<MaskPath> build_paths(const std::vector<Highlight>& highlights,
                                         const std::vector<std::size_t>& columns,
                                         const std::vector<NodeId>& node_order, const MaskConfig& cfg) {
  std::map<NodeId, std::size_t> row_of;
  for (std::size_t r = 0; r < node_order.size(); ++r) row_of.emplace(node_order[r], r);

  // per column: row -> sign
  std::vector<std::map<std::size_t, Sign>> marked(columns.size());
  std::map<std::size_t, std::size_t> column_pos;
  for (std::size_t i = 0; i < columns.size(); ++i) column_pos.emplace(columns[i], i);
  for (const auto& h : highlights) {
    const auto col = column_pos.find(h.transition_index);
    const auto row = row_of.find(h.node);
    if (col == column_pos.end() || row == row_of.end())
      throw Error(ErrorCode::RangeError, "highlight outside the mask columns or node order");
    marked[col->second][row->second] = h.sign;
  }

  std::vector<MaskPath> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (Sign sign : {Sign::Positive, Sign::Negative}) {
      MaskPath p;
      p.kind = PathKind::WithinColumn;
      p.column = columns[i];
      p.sign = sign;
      for (const auto& [row, s] : marked[i])
        if (s == sign) p.nodes.push_back(node_order[row]);
      if (p.nodes.size() >= 2) out.push_back(std::move(p));
    }
  }

  std::size_t prev = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (marked[i].empty()) continue;
    if (prev != columns.size() && i - prev - 1 <= cfg.gap_limit) {
      for (const auto& [row, to_sign] : marked[i]) {
        const auto from = marked[prev].find(row);
        if (from == marked[prev].end()) continue;
        MaskPath p;
        p.kind = PathKind::CrossColumn;
        p.node = node_order[row];
        p.from_column = columns[prev];
        p.from_sign = from->second;
        p.to_column = columns[i];
        p.to_sign = to_sign;
        out.push_back(std::move(p));
      }
    }
    prev = i;
  }
  return out;
}

inline DifferenceMask build_mask(const OverviewMatrix& ov, const MaskConfig& cfg) {
  DifferenceMask m;
  m.highlights = select_highlights(ov, cfg);
  m.paths = build_paths(m.highlights, ov.transitions, ov.node_order, cfg);
  return m;
}

}  // namespace diffseer
