#pragma once

#include "diffseer/diffseer.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <map>
#include <sstream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace diffseer::testing {

using NamedEdge = std::tuple<std::string, std::string, double>;

/// Builds a graph from named edges per snapshot; nodes keep the given order.
inline DynamicWeightedGraph make_graph(const std::vector<std::string>& nodes,
                                       const std::vector<std::vector<NamedEdge>>& snapshots) {
  DynamicWeightedGraph g;
  std::map<std::string, NodeIndex> idx;
  for (const auto& n : nodes) {
    idx[n] = static_cast<NodeIndex>(g.nodes.size());
    g.nodes.emplace_back(n);
  }
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    GraphSnapshot s{t, "t" + std::to_string(t), {}};
    for (const auto& [u, v, w] : snapshots[t]) s.edges.push_back({idx.at(u), idx.at(v), w});
    s.edges = canonical_edges(g.nodes, std::move(s.edges));
    g.snapshots.push_back(std::move(s));
  }
  return g;
}

/// nodes {A,B,C}; G0 = {A-B:2, B-C:1}; G1 = {A-B:5, B-C:1, A-C:4}; G2 = {A-B:5}
inline DynamicWeightedGraph core_fixture() {
  return make_graph({"A", "B", "C"}, {{{"A", "B", 2}, {"B", "C", 1}},
                                      {{"A", "B", 5}, {"B", "C", 1}, {"A", "C", 4}},
                                      {{"A", "B", 5}}});
}

/// Random valid graph: every node gets at least one edge somewhere.
inline DynamicWeightedGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t steps,
                                         bool integer_weights = true, double density = 0.3) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> small(-5, 5);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(100 + i));
  std::vector<std::vector<NamedEdge>> snaps(steps);
  auto weight = [&] {
    if (integer_weights) {
      int w = 0;
      while (w == 0) w = small(rng);
      return static_cast<double>(w);
    }
    double w = 0.0;
    while (w == 0.0) w = (unit(rng) - 0.5) * 10.0;
    return w;
  };
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (unit(rng) < density) snaps[t].emplace_back(names[a], names[b], weight());
  // Chain through the universe in snapshot 0 so no node is isolated.
  for (std::size_t a = 0; a + 1 < n; ++a) {
    bool present = false;
    for (const auto& [u, v, w] : snaps[0]) present = present || (u == names[a] && v == names[a + 1]);
    if (!present) snaps[0].emplace_back(names[a], names[a + 1], weight());
  }
  return make_graph(names, snaps);
}

/// Dense weight lookup for comparisons.
inline std::map<std::pair<NodeIndex, NodeIndex>, double> weights_of(const GraphSnapshot& s) {
  std::map<std::pair<NodeIndex, NodeIndex>, double> out;
  for (const auto& e : s.edges) out[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
  return out;
}

inline SquareMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
  SquareMatrix m(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
  return m;
}

inline SquareMatrix random_symmetric(std::mt19937_64& rng, std::size_t n, bool zero_diagonal = false) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  SquareMatrix m(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) m(r, c) = m(c, r) = (zero_diagonal && r == c) ? 0.0 : unit(rng);
  return m;
}

inline DistanceMatrix random_distance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DistanceMatrix d{{}, SquareMatrix(n)};
  for (std::size_t i = 0; i < n; ++i) d.node_ids.emplace_back("v" + std::to_string(i));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) d.d(r, c) = d.d(c, r) = unit(rng);
  return d;
}

/// Every leaf order reachable by flipping internal nodes of the tree.
inline std::vector<std::vector<std::size_t>> consistent_orders(const Dendrogram& tree, std::size_t cluster) {
  if (cluster < tree.leaves) return {{cluster}};
  const auto& m = tree.merges[cluster - tree.leaves];
  const auto left = consistent_orders(tree, m.left);
  const auto right = consistent_orders(tree, m.right);
  std::vector<std::vector<std::size_t>> out;
  for (const auto& l : left)
    for (const auto& r : right) {
      auto lr = l;
      lr.insert(lr.end(), r.begin(), r.end());
      out.push_back(lr);
      auto rl = r;
      rl.insert(rl.end(), l.begin(), l.end());
      out.push_back(rl);
    }
  return out;
}

inline double brute_force_min(const SquareMatrix& d, const Dendrogram& tree) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& order : consistent_orders(tree, tree.root())) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) s += d(order[i], order[i + 1]);
    best = std::min(best, s);
  }
  return best;
}

/// Random overview matrix with arbitrary counts and averages.
inline OverviewMatrix random_overview(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_real_distribution<double> unit(-5.0, 5.0);
  OverviewMatrix ov;
  for (std::size_t r = 0; r < rows; ++r) ov.node_order.emplace_back("r" + std::to_string(10 + r));
  for (std::size_t c = 0; c < cols; ++c) ov.transitions.push_back(c + 1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      OverviewCell cell;
      cell.node = ov.node_order[r];
      cell.transition_index = c + 1;
      // Sparse activity so that quiet columns and gaps occur.
      if (unit(rng) > 2.0) {
        cell.pos_count = static_cast<std::size_t>(count(rng));
        cell.neg_count = static_cast<std::size_t>(count(rng));
        if (cell.changed() > 0) cell.avg_change = unit(rng);
      }
      ov.cells.push_back(cell);
    }
  return ov;
}

/// Edge-list CSV shaped like the rugby tweet network: 12 teams, 329 daily
/// timeslices, a few weighted edges per day.
inline std::string rttn_csv(std::uint64_t seed = 2019) {
  std::mt19937_64 rng(seed);
  std::ostringstream out;
  out << "time,source,target,weight\n";
  for (int day = 0; day < 329; ++day) {
    const std::string label = "day" + std::to_string(1000 + day);
    for (int k = 0; k < 4; ++k) {
      const int a = static_cast<int>(rng() % 12), b = static_cast<int>((a + 1 + rng() % 11) % 12);
      out << label << ",team" << a << ",team" << b << "," << 1 + rng() % 40 << "\n";
    }
    if (day < 12) out << label << ",team" << day << ",team" << (day + 1) % 12 << ",1\n";
  }
  return out.str();
}

/// Series CSV shaped like the sector index data: `entities` random walks.
inline std::string sicn_csv(std::size_t entities, std::size_t rows, std::uint64_t seed = 28) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> level(entities, 100.0);
  std::ostringstream out;
  out.precision(10);
  out << "time";
  for (std::size_t c = 0; c < entities; ++c) out << ",idx" << (10 + c);
  out << "\n";
  for (std::size_t t = 0; t < rows; ++t) {
    out << "d" << (100000 + t);
    const double market = step(rng);
    for (std::size_t c = 0; c < entities; ++c) {
      level[c] += market * (0.5 + 0.05 * static_cast<double>(c % 7)) + step(rng);
      out << "," << level[c];
    }
    out << "\n";
  }
  return out.str();
}

/// Independent re-derivation of the mask rules. Returns a description of the
/// first disagreement with `m`, or an empty string.
inline std::string mask_audit(const OverviewMatrix& ov, const MaskConfig& cfg, const DifferenceMask& m) {
  using Cell = std::tuple<std::size_t, std::size_t, Sign>;
  std::set<Cell> expected, got;
  for (std::size_t r = 0; r < ov.rows(); ++r)
    for (std::size_t c = 0; c < ov.cols(); ++c) {
      const auto& cell = ov.cell(r, c);
      if (cfg.criterion == MaskCriterion::AvgChange) {
        if (std::abs(cell.avg_change) >= cfg.threshold)
          expected.insert({r, c, cell.avg_change > 0 ? Sign::Positive : Sign::Negative});
      } else if (static_cast<double>(cell.pos_count + cell.neg_count) >= cfg.threshold) {
        expected.insert({r, c, cell.pos_count >= cell.neg_count ? Sign::Positive : Sign::Negative});
      }
    }
  auto row_of = [&](const NodeId& id) {
    return static_cast<std::size_t>(std::find(ov.node_order.begin(), ov.node_order.end(), id) -
                                    ov.node_order.begin());
  };
  auto col_of = [&](std::size_t t) {
    return static_cast<std::size_t>(std::find(ov.transitions.begin(), ov.transitions.end(), t) -
                                    ov.transitions.begin());
  };
  for (const auto& h : m.highlights) got.insert({row_of(h.node), col_of(h.transition_index), h.sign});
  if (got != expected) return "highlight set differs from rule application";

  std::vector<bool> lit(ov.cols(), false);
  for (const auto& [r, c, s] : expected) lit[c] = true;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> want_cross, got_cross;
  for (std::size_t i = 0; i < ov.cols(); ++i) {
    if (!lit[i]) continue;
    std::size_t j = i + 1;
    while (j < ov.cols() && !lit[j]) ++j;
    if (j == ov.cols() || j - i - 1 > cfg.gap_limit) continue;
    for (std::size_t r = 0; r < ov.rows(); ++r) {
      const bool a = expected.count({r, i, Sign::Positive}) || expected.count({r, i, Sign::Negative});
      const bool b = expected.count({r, j, Sign::Positive}) || expected.count({r, j, Sign::Negative});
      if (a && b) want_cross.insert({r, i, j});
    }
  }
  std::size_t within = 0;
  for (const auto& p : m.paths) {
    if (p.kind == PathKind::CrossColumn) {
      const auto r = row_of(p.node), i = col_of(p.from_column), j = col_of(p.to_column);
      if (j <= i || j - i - 1 > cfg.gap_limit) return "cross-column path spans a forbidden gap";
      if (!expected.count({r, i, p.from_sign}) || !expected.count({r, j, p.to_sign}))
        return "cross-column endpoint is not a highlight";
      got_cross.insert({r, i, j});
    } else {
      ++within;
      if (p.nodes.size() < 2) return "within-column path with fewer than two nodes";
      for (std::size_t k = 0; k < p.nodes.size(); ++k) {
        if (!expected.count({row_of(p.nodes[k]), col_of(p.column), p.sign}))
          return "within-column node is not a same-sign highlight";
        if (k && row_of(p.nodes[k - 1]) >= row_of(p.nodes[k])) return "within-column nodes out of row order";
      }
    }
  }
  if (got_cross != want_cross) return "cross-column path set differs from the gap rule";
  std::size_t want_within = 0;
  for (std::size_t c = 0; c < ov.cols(); ++c)
    for (Sign s : {Sign::Positive, Sign::Negative}) {
      std::size_t k = 0;
      for (const auto& [r, cc, ss] : expected) k += (cc == c && ss == s);
      want_within += k >= 2;
    }
  if (within != want_within) return "within-column path count differs";
  return {};
}

/// Highlights at `higher` are a subset of those at `lower`.
inline bool highlights_nested(const OverviewMatrix& ov, MaskCriterion criterion, double lower, double higher) {
  const auto lo = select_highlights(ov, {criterion, lower, 0});
  for (const auto& h : select_highlights(ov, {criterion, higher, 0}))
    if (std::find(lo.begin(), lo.end(), h) == lo.end()) return false;
  return true;
}

}  // namespace diffseer::testing
