#pragma once

#include "diffseer/aggregate.hpp"
#include "diffseer/error.hpp"
#include "diffseer/matrix.hpp"
#include "diffseer/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace diffseer {

/// Symmetric, zero-diagonal, non-negative distances between node rows.
struct DistanceMatrix {
  std::vector<NodeId> node_ids;
  SquareMatrix d;

  std::size_t size() const noexcept { return node_ids.size(); }
};

struct NodeOrdering {
  std::vector<NodeId> permutation;
  double alpha = 0.0;
  double objective = 0.0;  // sum of D between adjacent rows
};

enum class DetailSource { Original, Difference };

/// Similarity of rows a and b of a symmetric matrix: the cosine of the two
/// rows after subtracting the global matrix mean, divided by (n - 1).
/// Lies in [-1/(n-1), 1/(n-1)]; 0 when either centered row vanishes.
inline double row_similarity(const SquareMatrix& m, std::size_t a, std::size_t b) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorCode::DimensionError, "row similarity needs at least two rows");
  if (a >= n || b >= n || a == b)
    throw Error(ErrorCode::DimensionError, "row similarity needs two distinct rows in range");
  const double mean =
      std::accumulate(m.data().begin(), m.data().end(), 0.0) / static_cast<double>(n * n);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double za = m(a, c) - mean, zb = m(b, c) - mean;
    dot += za * zb;
    na += za * za;
    nb += zb * zb;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return cosine / static_cast<double>(n - 1);
}

/// Min-max scales the off-diagonal entries to [0, 1]; a constant
/// off-diagonal maps to all zeros.
inline SquareMatrix normalize_off_diagonal(const SquareMatrix& m) {
  const std::size_t n = m.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (r != c) {
        lo = std::min(lo, m(r, c));
        hi = std::max(hi, m(r, c));
      }
  SquareMatrix out(n);
  if (!(hi > lo)) return out;
  const double span = hi - lo;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (r != c) out(r, c) = std::clamp((m(r, c) - lo) / span, 0.0, 1.0);
  return out;
}

/// Averages per-grid row distances 1/(n-1) - I_s(a, b) over a stream of
/// symmetric grids that share one node universe.
class DetailDistanceAccumulator {
 public:
  explicit DetailDistanceAccumulator(std::size_t n) : n_(n), sum_(n), centered_(n * n), norms_(n) {}

  void add(const SquareMatrix& grid) {
    if (grid.size() != n_)
      throw Error(ErrorCode::DimensionMismatch, "detail grid is " + std::to_string(grid.size()) +
                                                    " wide, expected " + std::to_string(n_));
    ++count_;
    if (n_ < 2) return;
    const auto& data = grid.data();
    const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n_ * n_);
    for (std::size_t i = 0; i < n_ * n_; ++i) centered_[i] = data[i] - mean;
    for (std::size_t r = 0; r < n_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n_; ++c) s += centered_[r * n_ + c] * centered_[r * n_ + c];
      norms_[r] = std::sqrt(s);
    }
    const double bound = 1.0 / static_cast<double>(n_ - 1);
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + 1; b < n_; ++b) {
        double similarity = 0.0;
        if (norms_[a] > 0.0 && norms_[b] > 0.0) {
          double dot = 0.0;
          for (std::size_t c = 0; c < n_; ++c) dot += centered_[a * n_ + c] * centered_[b * n_ + c];
          similarity = std::clamp(dot / (norms_[a] * norms_[b]), -1.0, 1.0) * bound;
        }
        const double dist = bound - similarity;
        sum_(a, b) += dist;
        sum_(b, a) += dist;
      }
    }
  }

  std::size_t count() const noexcept { return count_; }

  /// Mean distance across the added grids, before normalization.
  SquareMatrix mean() const {
    if (count_ == 0) throw Error(ErrorCode::DimensionMismatch, "no detail grids supplied");
    SquareMatrix out(n_);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c)
        if (r != c) out(r, c) = sum_(r, c) / static_cast<double>(count_);
    return out;
  }

 private:
  std::size_t n_;
  std::size_t count_ = 0;
  SquareMatrix sum_;
  std::vector<double> centered_;
  std::vector<double> norms_;
};

inline SquareMatrix detail_distance_raw(std::span<const SquareMatrix> grids) {
  if (grids.empty()) throw Error(ErrorCode::DimensionMismatch, "no detail grids supplied");
  DetailDistanceAccumulator acc(grids.front().size());
  for (const auto& g : grids) acc.add(g);
  return acc.mean();
}

/// Normalized detail distance over the supplied grids.
inline DistanceMatrix detail_distance(std::span<const SquareMatrix> grids,
                                      const std::vector<NodeId>& node_ids) {
  if (!grids.empty() && grids.front().size() != node_ids.size())
    throw Error(ErrorCode::DimensionMismatch, "grid size does not match node list");
  return {node_ids, normalize_off_diagonal(detail_distance_raw(grids))};
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "feature vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// Per-node feature rows: for each transition (pos_count, neg_count,
/// avg_change), each channel min-max scaled to [0, 1] over the whole matrix.
inline std::vector<std::vector<double>> overview_features(const OverviewMatrix& ov) {
  constexpr std::size_t channels = 3;
  auto channel = [](const OverviewCell& c, std::size_t k) {
    switch (k) {
      case 0: return static_cast<double>(c.pos_count);
      case 1: return static_cast<double>(c.neg_count);
      default: return c.avg_change;
    }
  };
  double lo[channels], hi[channels];
  for (std::size_t k = 0; k < channels; ++k) {
    lo[k] = std::numeric_limits<double>::infinity();
    hi[k] = -std::numeric_limits<double>::infinity();
    for (const auto& c : ov.cells) {
      lo[k] = std::min(lo[k], channel(c, k));
      hi[k] = std::max(hi[k], channel(c, k));
    }
  }
  std::vector<std::vector<double>> rows(ov.rows());
  for (std::size_t r = 0; r < ov.rows(); ++r) {
    rows[r].reserve(ov.cols() * channels);
    for (std::size_t c = 0; c < ov.cols(); ++c)
      for (std::size_t k = 0; k < channels; ++k) {
        const double span = hi[k] - lo[k];
        rows[r].push_back(span > 0.0 ? (channel(ov.cell(r, c), k) - lo[k]) / span : 0.0);
      }
  }
  return rows;
}

inline SquareMatrix overview_distance_raw(const OverviewMatrix& ov) {
  if (ov.cols() == 0) throw Error(ErrorCode::DimensionError, "overview has no transition columns");
  const auto rows = overview_features(ov);
  SquareMatrix d(ov.rows());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) d(a, b) = d(b, a) = l1_distance(rows[a], rows[b]);
  return d;
}

/// Manhattan distance between scaled overview rows, normalized to [0, 1].
inline DistanceMatrix overview_distance(const OverviewMatrix& ov) {
  return {ov.node_order, normalize_off_diagonal(overview_distance_raw(ov))};
}

/// alpha * overview + (1 - alpha) * detail, entrywise.
inline DistanceMatrix blend(const DistanceMatrix& overview, const DistanceMatrix& detail, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in [0, 1]");
  if (overview.node_ids != detail.node_ids)
    throw Error(ErrorCode::NodeSetMismatch, "distance matrices cover different node lists");
  const std::size_t n = overview.size();
  DistanceMatrix out{overview.node_ids, SquareMatrix(n)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out.d(r, c) = alpha * overview.d(r, c) + (1.0 - alpha) * detail.d(r, c);
  return out;
}

/// Binary merge tree over n leaves. Leaves are 0..n-1; merge k creates
/// cluster n + k.
struct Dendrogram {
  struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
  };
  std::size_t leaves = 0;
  std::vector<Merge> merges;

  std::size_t root() const { return merges.empty() ? 0 : leaves + merges.size() - 1; }

  /// Leaves under `cluster`, left subtree first.
  std::vector<std::size_t> members(std::size_t cluster) const {
    std::vector<std::size_t> out, stack{cluster};
    while (!stack.empty()) {
      const auto c = stack.back();
      stack.pop_back();
      if (c < leaves) {
        out.push_back(c);
      } else {
        stack.push_back(merges[c - leaves].right);
        stack.push_back(merges[c - leaves].left);
      }
    }
    return out;
  }
};

namespace detail {

inline void require_finite(const SquareMatrix& d) {
  for (double v : d.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteDistance, "distance matrix has a non-finite entry");
}

/// rank[i] = position of node i when the ids are sorted.
inline std::vector<std::size_t> id_ranks(const std::vector<NodeId>& ids) {
  std::vector<std::size_t> idx(ids.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  std::vector<std::size_t> rank(ids.size());
  for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r;
  return rank;
}

}  // namespace detail

/// Average-linkage (UPGMA) agglomerative clustering. Equal-distance merges
/// are resolved by the smallest member rank of each cluster.
inline Dendrogram average_linkage(const SquareMatrix& d, const std::vector<std::size_t>& rank) {
  detail::require_finite(d);
  const std::size_t n = d.size();
  Dendrogram tree{n, {}};
  if (n < 2) return tree;

  SquareMatrix dist = d;  // indexed by slot; slot i starts as leaf i
  std::vector<std::size_t> cluster(n), size(n, 1), key(n);
  std::vector<bool> active(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = i;
    key[i] = rank[i];
  }

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (bi == n) {
          bi = i;
          bj = j;
          continue;
        }
        const double cur = dist(i, j), best = dist(bi, bj);
        if (cur < best) {
          bi = i;
          bj = j;
        } else if (cur == best) {
          const auto ck = std::minmax(key[i], key[j]);
          const auto bk = std::minmax(key[bi], key[bj]);
          if (ck < bk) {
            bi = i;
            bj = j;
          }
        }
      }
    }
    // Smaller key goes left so the tree shape is independent of slot order.
    std::size_t left = bi, right = bj;
    if (key[right] < key[left]) std::swap(left, right);
    tree.merges.push_back({cluster[left], cluster[right], dist(bi, bj)});

    const double sl = static_cast<double>(size[left]), sr = static_cast<double>(size[right]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == left || k == right) continue;
      const double v = (sl * dist(k, left) + sr * dist(k, right)) / (sl + sr);
      dist(k, left) = dist(left, k) = v;
    }
    active[right] = false;
    cluster[left] = n + step;
    size[left] += size[right];
    key[left] = std::min(key[left], key[right]);
  }
  return tree;
}

inline double adjacent_sum(const SquareMatrix& d, const std::vector<std::size_t>& order) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) s += d(order[i], order[i + 1]);
  return s;
}

/// Optimal leaf ordering over a fixed dendrogram: among the leaf orders
/// obtainable by flipping internal nodes, returns one with minimal sum of
/// adjacent distances. Exact cost ties go to the sequence with the
/// lexicographically smallest ranks.
inline std::vector<std::size_t> optimal_leaf_order(const SquareMatrix& d, const Dendrogram& tree,
                                                   const std::vector<std::size_t>& rank) {
  const std::size_t n = tree.leaves;
  if (n == 0) return {};
  if (n == 1) return {0};

  // best[a][b]: minimal cost of a subtree ordering that starts at leaf a and
  // ends at leaf b, where the subtree is the lowest common ancestor of a, b.
  // Entries are filled bottom-up, one merge at a time.
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  SquareMatrix best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> inner_left(n * n, none), inner_right(n * n, none);
  for (std::size_t i = 0; i < n; ++i) best(i, i) = 0.0;

  // Sequence of leaf ranks for the stored ordering a..b.
  auto append_sequence = [&](auto&& self, std::size_t a, std::size_t b,
                             std::vector<std::size_t>& out) -> void {
    if (a == b) {
      out.push_back(rank[a]);
      return;
    }
    self(self, a, inner_left[a * n + b], out);
    self(self, inner_right[a * n + b], b, out);
  };
  auto sequence = [&](std::size_t a, std::size_t b) {
    std::vector<std::size_t> out;
    append_sequence(append_sequence, a, b, out);
    return out;
  };

  // An ordering of a cluster starting at x must end in the half opposite x.
  std::vector<std::vector<std::size_t>> members(n + tree.merges.size());
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};

  // Leaves that can terminate an ordering of `cluster` starting at `start`.
  auto ends_for = [&](std::size_t cluster, std::size_t start) {
    if (cluster < n) return std::vector<std::size_t>{start};
    const auto& m = tree.merges[cluster - n];
    const auto& l = members[m.left];
    const bool start_left = std::find(l.begin(), l.end(), start) != l.end();
    return start_left ? members[m.right] : members[m.left];
  };

  for (std::size_t k = 0; k < tree.merges.size(); ++k) {
    const auto& m = tree.merges[k];
    const std::size_t id = n + k;
    members[id] = members[m.left];
    members[id].insert(members[id].end(), members[m.right].begin(), members[m.right].end());

    for (int orientation = 0; orientation < 2; ++orientation) {
      const std::size_t first = orientation == 0 ? m.left : m.right;
      const std::size_t second = orientation == 0 ? m.right : m.left;
      for (std::size_t a : members[first]) {
        const auto first_ends = ends_for(first, a);
        for (std::size_t b : members[second]) {
          const auto second_starts = ends_for(second, b);
          double cost = std::numeric_limits<double>::infinity();
          std::size_t bk = none, bm = none;
          for (std::size_t kk : first_ends) {
            for (std::size_t mm : second_starts) {
              const double c = best(a, kk) + d(kk, mm) + best(mm, b);
              bool take = c < cost;
              if (!take && c == cost) {
                // Both halves have fixed lengths, so compare them in turn.
                const auto head = sequence(a, kk), best_head = sequence(a, bk);
                take = head != best_head ? head < best_head : sequence(mm, b) < sequence(bm, b);
              }
              if (take) {
                cost = c;
                bk = kk;
                bm = mm;
              }
            }
          }
          best(a, b) = cost;
          inner_left[a * n + b] = bk;
          inner_right[a * n + b] = bm;
        }
      }
    }
  }

  const auto& root_merge = tree.merges.back();
  double cost = std::numeric_limits<double>::infinity();
  std::size_t wa = none, wb = none;
  for (int orientation = 0; orientation < 2; ++orientation) {
    const auto& firsts = members[orientation == 0 ? root_merge.left : root_merge.right];
    const auto& seconds = members[orientation == 0 ? root_merge.right : root_merge.left];
    for (std::size_t a : firsts)
      for (std::size_t b : seconds) {
        const double c = best(a, b);
        bool take = c < cost;
        if (!take && c == cost) take = sequence(a, b) < sequence(wa, wb);
        if (take) {
          cost = c;
          wa = a;
          wb = b;
        }
      }
  }

  std::vector<std::size_t> order;
  auto collect = [&](auto&& self, std::size_t a, std::size_t b) -> void {
    if (a == b) {
      order.push_back(a);
      return;
    }
    self(self, a, inner_left[a * n + b]);
    self(self, inner_right[a * n + b], b);
  };
  collect(collect, wa, wb);
  // A reversed order costs the same; pick the orientation by rank.
  std::vector<std::size_t> forward, backward;
  for (auto i : order) forward.push_back(rank[i]);
  backward.assign(forward.rbegin(), forward.rend());
  if (backward < forward) std::reverse(order.begin(), order.end());
  return order;
}

/// Hierarchical clustering plus optimal leaf ordering over `d`.
inline NodeOrdering leaf_order(const DistanceMatrix& d) {
  detail::require_finite(d.d);
  const std::size_t n = d.size();
  NodeOrdering out;
  if (n == 0) return out;

  bool all_zero = true;
  for (double v : d.d.data()) all_zero = all_zero && v == 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (n > 1 && !all_zero) {
    const auto rank = detail::id_ranks(d.node_ids);
    order = optimal_leaf_order(d.d, average_linkage(d.d, rank), rank);
  }
  for (auto i : order) out.permutation.push_back(d.node_ids[i]);
  out.objective = adjacent_sum(d.d, order);
  return out;
}

/// Everything that produced one ordering.
struct OrderingResult {
  NodeOrdering ordering;
  DistanceMatrix overview;
  DistanceMatrix detail;
  DistanceMatrix blended;
};

/// Detail grids for a brushed range: original adjacency of every snapshot
/// the range touches (from-1 .. to), or the dense diffs of each transition.
inline DistanceMatrix detail_distance_for_range(const DynamicWeightedGraph& g,
                                                const std::vector<GraphDiff>& diffs,
                                                TransitionRange range, DetailSource source) {
  check_range(diffs, range);
  const std::size_t n = g.node_count();
  DetailDistanceAccumulator acc(n);
  if (source == DetailSource::Original) {
    for (auto t = range.from - 1; t <= range.to; ++t) acc.add(dense_snapshot(g.snapshots.at(t), n));
  } else {
    for (auto t = range.from; t <= range.to; ++t) acc.add(dense_diff(diff_at(diffs, t), n));
  }
  return {g.nodes, normalize_off_diagonal(acc.mean())};
}

/// Blended ordering for the brushed range.
inline OrderingResult order_nodes(const DynamicWeightedGraph& g, const std::vector<GraphDiff>& diffs,
                                  TransitionRange range, double alpha,
                                  DetailSource source = DetailSource::Original) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in [0, 1]");
  OrderingResult out;
  out.overview = overview_distance(build_overview(diffs, g.nodes, range));
  out.detail = detail_distance_for_range(g, diffs, range, source);
  out.blended = blend(out.overview, out.detail, alpha);
  out.ordering = leaf_order(out.blended);
  out.ordering.alpha = alpha;
  return out;
}

}  // namespace diffseer
