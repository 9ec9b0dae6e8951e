#pragma once

#include "diffseer/error.hpp"
#include "diffseer/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace diffseer {

struct EdgeListRecord {
  std::string time;
  NodeId source;
  NodeId target;
  double weight = 0.0;
};

enum class Aggregation { Sum, Last };

/// Raw entity x time observations. Missing cells are flagged, not imputed.
struct SeriesTable {
  std::vector<NodeId> entities;
  std::vector<std::string> times;
  std::vector<double> values;  // row-major: entity * times.size() + time
  std::vector<bool> missing;   // same layout as values

  double value(std::size_t entity, std::size_t time) const {
    return values[entity * times.size() + time];
  }
  bool is_missing(std::size_t entity, std::size_t time) const {
    return missing[entity * times.size() + time];
  }
};

struct CorrelationOptions {
  std::size_t window = 20;
  std::size_t step = 1;
  double min_abs_weight = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

/// Splits one CSV record; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.emplace_back(trim(cur));
  return fields;
}

inline bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline bool blank(std::string_view line) { return trim(line).empty(); }

/// Assembles a canonical graph from named edges grouped by time label.
/// Nodes are sorted by id; only nodes with at least one stored edge survive.
inline DynamicWeightedGraph assemble(
    const std::vector<std::string>& labels,
    const std::vector<std::map<std::pair<std::string, std::string>, double>>& per_label) {
  std::set<std::string> names;
  for (const auto& edges : per_label)
    for (const auto& [pair, w] : edges)
      if (w != 0.0) {
        names.insert(pair.first);
        names.insert(pair.second);
      }

  DynamicWeightedGraph g;
  std::map<std::string, NodeIndex> index;
  for (const auto& name : names) {
    index.emplace(name, static_cast<NodeIndex>(g.nodes.size()));
    g.nodes.emplace_back(name);
  }
  for (std::size_t t = 0; t < labels.size(); ++t) {
    GraphSnapshot snap{t, labels[t], {}};
    for (const auto& [pair, w] : per_label[t])
      if (w != 0.0) snap.edges.push_back({index.at(pair.first), index.at(pair.second), w});
    snap.edges = canonical_edges(g.nodes, std::move(snap.edges));
    g.snapshots.push_back(std::move(snap));
  }
  return g;
}

}  // namespace detail

/// Reads `time,source,target,weight` rows. One snapshot per distinct time
/// label in first-appearance order; repeated (time, pair) rows are combined
/// by `aggregation`.
inline DynamicWeightedGraph parse_edge_list(std::istream& in, Aggregation aggregation = Aggregation::Sum) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    auto header = detail::split_csv(line, line_no);
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    if (header != std::vector<std::string>{"time", "source", "target", "weight"})
      throw ParseError(line_no, "expected header time,source,target,weight");
    have_header = true;
  }
  if (!have_header) throw Error(ErrorCode::EmptyInput, "edge list is empty");

  std::vector<std::string> labels;
  std::map<std::string, std::size_t> label_pos;
  std::vector<std::map<std::pair<std::string, std::string>, double>> per_label;

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = detail::split_csv(line, line_no);
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    EdgeListRecord rec{fields[0], NodeId(fields[1]), NodeId(fields[2]), 0.0};
    if (rec.time.empty()) throw ParseError(line_no, "empty time label");
    if (rec.source.value.empty() || rec.target.value.empty())
      throw ParseError(line_no, "empty node id");
    if (rec.source == rec.target) throw ParseError(line_no, "self-loop on " + rec.source.value);
    if (!detail::parse_double(fields[3], rec.weight))
      throw ParseError(line_no, "weight '" + fields[3] + "' is not a number");
    if (!std::isfinite(rec.weight)) throw ParseError(line_no, "weight is not finite");

    auto [it, inserted] = label_pos.emplace(rec.time, labels.size());
    if (inserted) {
      labels.push_back(rec.time);
      per_label.emplace_back();
    }
    auto key = rec.source < rec.target ? std::pair{rec.source.value, rec.target.value}
                                       : std::pair{rec.target.value, rec.source.value};
    auto& slot = per_label[it->second];
    if (aggregation == Aggregation::Sum) slot[key] += rec.weight;
    else slot[key] = rec.weight;
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::EmptyInput, "edge list has a header but no rows");
  return detail::assemble(labels, per_label);
}

/// Reads a series CSV: first column `time`, one column per entity, empty
/// cell = missing.
inline SeriesTable parse_series_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  SeriesTable table;
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<bool>> gaps;

  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    auto header = detail::split_csv(line, line_no);
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    if (header.size() < 2 || header[0] != "time")
      throw ParseError(line_no, "expected header time,<entity>,...");
    std::set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (header[c].empty()) throw ParseError(line_no, "empty entity name");
      if (!seen.insert(header[c]).second)
        throw ParseError(line_no, "duplicate entity '" + header[c] + "'");
      table.entities.emplace_back(header[c]);
    }
    columns.resize(table.entities.size());
    gaps.resize(table.entities.size());
    have_header = true;
  }
  if (!have_header) throw Error(ErrorCode::EmptyInput, "series table is empty");

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = detail::split_csv(line, line_no);
    if (fields.size() != table.entities.size() + 1)
      throw ParseError(line_no, "expected " + std::to_string(table.entities.size() + 1) +
                                    " fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(line_no, "empty time label");
    table.times.push_back(fields[0]);
    for (std::size_t c = 0; c < table.entities.size(); ++c) {
      const auto& cell = fields[c + 1];
      double v = std::numeric_limits<double>::quiet_NaN();
      const bool is_missing = cell.empty();
      if (!is_missing && !detail::parse_double(cell, v))
        throw ParseError(line_no, "value '" + cell + "' is not a number");
      columns[c].push_back(v);
      gaps[c].push_back(is_missing);
    }
  }
  if (table.times.empty()) throw Error(ErrorCode::EmptyInput, "series table has no rows");

  for (std::size_t c = 0; c < columns.size(); ++c) {
    table.values.insert(table.values.end(), columns[c].begin(), columns[c].end());
    table.missing.insert(table.missing.end(), gaps[c].begin(), gaps[c].end());
  }
  return table;
}

/// Textbook two-pass Pearson coefficient, clamped into [-1, 1].
/// Returns NaN when either input is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (n < 2 || constant(x) || constant(y)) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Drops edges with |w| < min_abs_weight and prunes nodes left without edges.
inline DynamicWeightedGraph filter_min_abs_weight(const DynamicWeightedGraph& g, double min_abs_weight) {
  if (min_abs_weight <= 0.0) return g;
  std::vector<std::string> labels;
  std::vector<std::map<std::pair<std::string, std::string>, double>> per_label;
  for (const auto& s : g.snapshots) {
    labels.push_back(s.label);
    auto& slot = per_label.emplace_back();
    for (const auto& e : s.edges)
      if (std::abs(e.weight) >= min_abs_weight)
        slot[{g.nodes[e.u].value, g.nodes[e.v].value}] = e.weight;
  }
  return detail::assemble(labels, per_label);
}

/// Rolling correlation network: one snapshot per trailing window end
/// (window-1, window-1+step, ...), edges = Pearson r of every entity pair
/// whose window is complete and non-constant for both series.
inline DynamicWeightedGraph build_correlation_network(const SeriesTable& s,
                                                      const CorrelationOptions& opt = {}) {
  if (opt.window < 3) throw Error(ErrorCode::DomainError, "window must be at least 3");
  if (opt.step < 1) throw Error(ErrorCode::DomainError, "step must be at least 1");
  const std::size_t n = s.entities.size();
  const std::size_t len = s.times.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "need at least two entities");
  if (len < opt.window)
    throw Error(ErrorCode::InsufficientData, "window " + std::to_string(opt.window) +
                                                 " exceeds series length " + std::to_string(len));
  for (std::size_t e = 0; e < n; ++e) {
    std::size_t observed = 0;
    for (std::size_t t = 0; t < len; ++t) {
      if (s.is_missing(e, t)) continue;
      if (!std::isfinite(s.value(e, t)))
        throw Error(ErrorCode::NonFiniteValue, "non-finite value for '" + s.entities[e].value +
                                                   "' at " + s.times[t]);
      ++observed;
    }
    if (observed < opt.window)
      throw Error(ErrorCode::InsufficientData,
                  "'" + s.entities[e].value + "' has " + std::to_string(observed) +
                      " observations, window needs " + std::to_string(opt.window));
  }

  // Orient each pair by entity name so the assembled graph is canonical.
  std::vector<std::size_t> by_name(n);
  for (std::size_t i = 0; i < n; ++i) by_name[i] = i;
  std::sort(by_name.begin(), by_name.end(),
            [&](std::size_t a, std::size_t b) { return s.entities[a] < s.entities[b]; });

  std::vector<std::string> labels;
  std::vector<std::map<std::pair<std::string, std::string>, double>> per_label;
  std::vector<bool> complete(n);
  for (std::size_t end = opt.window - 1; end < len; end += opt.step) {
    const std::size_t begin = end + 1 - opt.window;
    for (std::size_t e = 0; e < n; ++e) {
      complete[e] = true;
      for (std::size_t t = begin; t <= end && complete[e]; ++t)
        if (s.is_missing(e, t)) complete[e] = false;
    }
    labels.push_back(s.times[end]);
    auto& slot = per_label.emplace_back();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = by_name[i];
      if (!complete[a]) continue;
      std::span<const double> xa(&s.values[a * len + begin], opt.window);
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t b = by_name[j];
        if (!complete[b]) continue;
        std::span<const double> xb(&s.values[b * len + begin], opt.window);
        const double r = pearson(xa, xb);
        if (std::isnan(r)) continue;
        slot[{s.entities[a].value, s.entities[b].value}] = r;
      }
    }
  }
  return filter_min_abs_weight(detail::assemble(labels, per_label), opt.min_abs_weight);
}

}  // namespace diffseer
