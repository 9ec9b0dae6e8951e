#pragma once

#include "diffseer/error.hpp"
#include "diffseer/model.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace diffseer {

using json = nlohmann::json;

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kPayloadPrecision = 12;  // significant digits in view payloads
inline constexpr int kExactPrecision = 17;    // round-trips any double

namespace detail {

inline void format_number(std::string& out, double v, int precision) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  out += buf;
}

inline void dump_canonical(const json& j, std::string& out, int precision) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_canonical(it.value(), out, precision);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_canonical(j[i], out, precision);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float:
      format_number(out, j.get<double>(), precision);
      break;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Sorted keys, no whitespace, floats with `precision` significant digits.
inline std::string canonical_dump(const json& j, int precision = kPayloadPrecision) {
  std::string out;
  detail::dump_canonical(j, out, precision);
  return out;
}

inline json dataset_to_json(const DynamicWeightedGraph& g) {
  json nodes = json::array(), labels = json::array(), snapshots = json::array();
  for (const auto& id : g.nodes) nodes.push_back(id.value);
  for (const auto& s : g.snapshots) {
    labels.push_back(s.label);
    json edges = json::array();
    for (const auto& e : s.edges)
      edges.push_back(json::array({g.nodes.at(e.u).value, g.nodes.at(e.v).value, e.weight}));
    snapshots.push_back(std::move(edges));
  }
  return {{"version", kDatasetFormatVersion}, {"nodes", nodes}, {"timeslices", labels},
          {"snapshots", snapshots}};
}

inline std::string dataset_to_string(const DynamicWeightedGraph& g) {
  return canonical_dump(dataset_to_json(g), kExactPrecision);
}

/// A parsed dataset plus everything wrong with it. Edges naming nodes
/// outside the universe are reported and left out of `graph`.
struct DatasetLoad {
  DynamicWeightedGraph graph;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Structural problems (wrong types, missing keys) throw ParseError;
/// invariant breaches are collected as violations.
inline DatasetLoad dataset_from_json(const json& j) {
  auto fail = [](const std::string& why) -> void { throw ParseError(1, why); };
  if (!j.is_object()) fail("dataset must be a JSON object");
  for (const char* key : {"version", "nodes", "timeslices", "snapshots"})
    if (!j.contains(key)) fail(std::string("missing key '") + key + "'");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kDatasetFormatVersion)
    fail("unsupported dataset version");
  const auto& nodes = j["nodes"];
  const auto& labels = j["timeslices"];
  const auto& snaps = j["snapshots"];
  if (!nodes.is_array() || !labels.is_array() || !snaps.is_array())
    fail("nodes, timeslices and snapshots must be arrays");
  if (labels.size() != snaps.size()) fail("timeslices and snapshots differ in length");

  DatasetLoad out;
  std::map<std::string, NodeIndex> index;
  for (const auto& n : nodes) {
    if (!n.is_string()) fail("node ids must be strings");
    const auto name = n.get<std::string>();
    index.emplace(name, static_cast<NodeIndex>(out.graph.nodes.size()));
    out.graph.nodes.emplace_back(name);
  }
  for (std::size_t t = 0; t < snaps.size(); ++t) {
    if (!labels[t].is_string()) fail("timeslice labels must be strings");
    GraphSnapshot snap{t, labels[t].get<std::string>(), {}};
    if (!snaps[t].is_array()) fail("snapshot " + std::to_string(t) + " must be an array");
    for (const auto& triple : snaps[t]) {
      if (!triple.is_array() || triple.size() != 3 || !triple[0].is_string() ||
          !triple[1].is_string() || !triple[2].is_number())
        fail("snapshot " + std::to_string(t) + ": edges must be [u, v, weight]");
      const auto u = triple[0].get<std::string>(), v = triple[1].get<std::string>();
      bool known = true;
      for (const auto& name : {u, v})
        if (!index.count(name)) {
          out.violations.push_back({ViolationCode::UnknownNode, t, name, "endpoint outside the node universe"});
          known = false;
        }
      if (known) snap.edges.push_back({index.at(u), index.at(v), triple[2].get<double>()});
    }
    out.graph.snapshots.push_back(std::move(snap));
  }
  auto structural = validate_graph(out.graph);
  out.violations.insert(out.violations.end(), structural.begin(), structural.end());
  return out;
}

inline DatasetLoad dataset_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid JSON: ") + e.what());
  }
  return dataset_from_json(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

/// Loads a dataset file and throws InvalidGraph if any violation is found.
inline DynamicWeightedGraph load_dataset(const std::string& path) {
  auto load = dataset_from_string(read_file(path));
  if (!load.ok()) {
    const auto& v = load.violations.front();
    throw Error(ErrorCode::InvalidGraph, std::string(to_string(v.code)) + ": " + v.detail +
                                             (v.node.empty() ? "" : " (" + v.node + ")"));
  }
  return std::move(load.graph);
}

inline json violations_to_json(const std::vector<Violation>& violations) {
  json out = json::array();
  for (const auto& v : violations) {
    json item = {{"code", std::string(to_string(v.code))}, {"message", v.detail}};
    if (v.timeslice) item["t"] = *v.timeslice;
    if (!v.node.empty()) item["node"] = v.node;
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace diffseer
