#pragma once

#include "diffseer/error.hpp"
#include "diffseer/ingest.hpp"
#include "diffseer/io.hpp"
#include "diffseer/pipeline.hpp"

#include "httplib.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace diffseer {

struct DatasetHandle {
  std::string id;
  std::string name;
  std::size_t node_count = 0;
  std::size_t timeslice_count = 0;
  std::string created_at;  // ISO-8601 UTC
};

inline json handle_payload(const DatasetHandle& h) {
  return {{"id", h.id},
          {"name", h.name},
          {"nodeCount", h.node_count},
          {"timesliceCount", h.timeslice_count},
          {"createdAt", h.created_at}};
}

struct StoredDataset {
  DatasetHandle handle;
  PreparedDataset data;
};

namespace detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Datasets persisted as canonical JSON files (`<id>.json` plus
/// `<id>.meta.json`) in one directory. Readers get an immutable registry
/// snapshot; `add` publishes a new snapshot after the files are written.
class DatasetStore {
 public:
  using Registry = std::map<std::string, std::shared_ptr<const StoredDataset>>;

  explicit DatasetStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    auto registry = std::make_shared<Registry>();
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      const auto name = entry.path().filename().string();
      const std::string suffix = ".meta.json";
      if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
        continue;
      const auto meta = json::parse(read_file(entry.path().string()));
      DatasetHandle h{meta.at("id").get<std::string>(), meta.at("name").get<std::string>(), 0, 0,
                      meta.at("createdAt").get<std::string>()};
      auto graph = load_dataset((dir_ / (h.id + ".json")).string());
      h.node_count = graph.node_count();
      h.timeslice_count = graph.timeslice_count();
      registry->emplace(h.id, std::make_shared<const StoredDataset>(StoredDataset{h, PreparedDataset(std::move(graph))}));
      next_id_ = std::max(next_id_, sequence_of(h.id) + 1);
    }
    registry_ = std::move(registry);
  }

  std::shared_ptr<const Registry> snapshot() const {
    std::lock_guard lock(mutex_);
    return registry_;
  }

  std::vector<DatasetHandle> list() const {
    std::vector<DatasetHandle> out;
    for (const auto& [id, ds] : *snapshot()) out.push_back(ds->handle);
    return out;
  }

  std::shared_ptr<const StoredDataset> get(const std::string& id) const {
    const auto reg = snapshot();
    const auto it = reg->find(id);
    return it == reg->end() ? nullptr : it->second;
  }

  DatasetHandle add(DynamicWeightedGraph graph, const std::string& name) {
    std::lock_guard write(write_mutex_);
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "ds%06zu", next_id_);
    DatasetHandle h{id_buf, name.empty() ? id_buf : name, graph.node_count(), graph.timeslice_count(),
                    detail::utc_now()};
    auto stored = std::make_shared<const StoredDataset>(StoredDataset{h, PreparedDataset(std::move(graph))});

    write_file((dir_ / (h.id + ".json")).string(), dataset_to_string(stored->data.graph) + "\n");
    write_file((dir_ / (h.id + ".meta.json")).string(),
               canonical_dump({{"id", h.id}, {"name", h.name}, {"createdAt", h.created_at}}) + "\n");
    ++next_id_;

    auto next = std::make_shared<Registry>(*snapshot());
    next->emplace(h.id, std::move(stored));
    std::lock_guard lock(mutex_);
    registry_ = std::move(next);
    return h;
  }

 private:
  static std::size_t sequence_of(const std::string& id) {
    if (id.size() < 3 || id.rfind("ds", 0) != 0) return 0;
    try {
      return static_cast<std::size_t>(std::stoull(id.substr(2)));
    } catch (...) {
      return 0;
    }
  }

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const Registry> registry_;
  std::size_t next_id_ = 1;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "diffseer-data";
  std::size_t max_upload_bytes = 64u << 20;
};

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
};

/// HTTP/JSON front end. `handle` is the whole routing table and is usable
/// without a socket; `bind` + `run` put it behind cpp-httplib.
class Service {
 public:
  explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)), store_(cfg_.data_dir) {}

  DatasetStore& store() { return store_; }

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const ParseError& e) {
      return error(400, "ParseError", e.what(), {{"line", e.line()}});
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::RangeError:
        case ErrorCode::AlphaOutOfRange:
        case ErrorCode::DomainError:
          return error(422, std::string(to_string(e.code())), e.what());
        default:
          return error(400, std::string(to_string(e.code())), e.what());
      }
    } catch (const std::exception& e) {
      return error(500, "InternalError", e.what());
    }
  }

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port or -1 when the address is unavailable.
  int bind(const std::string& host, int port) {
    server_.set_payload_max_length(cfg_.max_upload_bytes + 1);
    // No SO_REUSEPORT: a port held by another listener must fail to bind.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    auto forward = [this](const httplib::Request& in, httplib::Response& out) {
      Request req{in.method, in.path, {}, in.body};
      for (const auto& [k, v] : in.params) req.query[k] = v;
      const auto res = handle(req);
      out.status = res.status;
      out.set_header("Access-Control-Allow-Origin", "*");
      out.set_content(res.body, "application/json; charset=utf-8");
    };
    server_.Get(".*", forward);
    server_.Post(".*", forward);
    server_.set_error_handler([](const httplib::Request&, httplib::Response& out) {
      if (out.body.empty())
        out.set_content(canonical_dump({{"code", "HttpError"},
                                        {"message", httplib::status_message(out.status)},
                                        {"details", nullptr}}),
                        "application/json; charset=utf-8");
    });
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  /// Blocks until stop() is called.
  bool run() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  using AnalysisKey = std::tuple<std::string, std::size_t, std::size_t, double, int>;

  static Response json_response(int status, const json& body) { return {status, canonical_dump(body)}; }

  static Response error(int status, const std::string& code, const std::string& message,
                        json details = nullptr) {
    return json_response(status, {{"code", code}, {"message", message}, {"details", std::move(details)}});
  }

  static std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '/'))
      if (!part.empty()) parts.push_back(part);
    return parts;
  }

  static std::optional<std::string> param(const Request& r, const std::string& key) {
    const auto it = r.query.find(key);
    if (it == r.query.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }

  static double number_param(const Request& r, const std::string& key, double fallback) {
    const auto v = param(r, key);
    if (!v) return fallback;
    double out = 0.0;
    if (!detail::parse_double(*v, out) || !std::isfinite(out))
      throw Error(ErrorCode::DomainError, "parameter '" + key + "' must be a number");
    return out;
  }

  static std::size_t count_param(const Request& r, const std::string& key, std::size_t fallback) {
    const double v = number_param(r, key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::DomainError, "parameter '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  Response route(const Request& req) {
    const auto parts = split_path(req.path);
    if (parts.size() < 2 || parts[0] != "api" || parts[1] != "datasets")
      return error(404, "NotFound", "no route for " + req.path);
    if (parts.size() == 2) {
      if (req.method == "GET") return list_datasets();
      if (req.method == "POST") return upload(req);
      return error(405, "MethodNotAllowed", req.method + " not allowed on " + req.path);
    }
    if (req.method != "GET") return error(405, "MethodNotAllowed", req.method + " not allowed on " + req.path);

    const auto ds = store_.get(parts[2]);
    if (!ds) return error(404, "UnknownDataset", "no dataset '" + parts[2] + "'");
    if (parts.size() == 4 && parts[3] == "overview") return cached(req, ds, [&] { return overview(req, *ds); });
    if (parts.size() == 5 && parts[3] == "detail") return cached(req, ds, [&] { return detail_view(req, *ds, parts[4]); });
    if (parts.size() == 4 && parts[3] == "mask") return cached(req, ds, [&] { return mask(req, *ds); });
    if (parts.size() == 4 && parts[3] == "timeline") return cached(req, ds, [&] { return timeline(*ds); });
    return error(404, "NotFound", "no route for " + req.path);
  }

  Response list_datasets() const {
    json out = json::array();
    for (const auto& h : store_.list()) out.push_back(handle_payload(h));
    return json_response(200, out);
  }

  Response upload(const Request& req) {
    if (req.body.size() > cfg_.max_upload_bytes)
      return error(413, "PayloadTooLarge",
                   "upload exceeds " + std::to_string(cfg_.max_upload_bytes) + " bytes");
    const std::string kind = param(req, "kind").value_or("json");
    const std::string name = param(req, "name").value_or("");
    DynamicWeightedGraph graph;
    if (kind == "json") {
      auto load = dataset_from_string(req.body);
      if (!load.ok())
        return error(400, "InvalidGraph", "dataset violates graph invariants",
                     violations_to_json(load.violations));
      graph = std::move(load.graph);
    } else if (kind == "edge-list") {
      std::istringstream in(req.body);
      const auto agg = param(req, "aggregation").value_or("sum");
      if (agg != "sum" && agg != "last") return error(422, "DomainError", "aggregation must be sum or last");
      graph = filter_min_abs_weight(parse_edge_list(in, agg == "sum" ? Aggregation::Sum : Aggregation::Last),
                                    number_param(req, "minAbsWeight", 0.0));
    } else if (kind == "series") {
      std::istringstream in(req.body);
      CorrelationOptions opt;
      opt.window = count_param(req, "window", opt.window);
      opt.step = count_param(req, "step", opt.step);
      opt.min_abs_weight = number_param(req, "minAbsWeight", 0.0);
      graph = build_correlation_network(parse_series_csv(in), opt);
    } else {
      return error(422, "DomainError", "kind must be json, edge-list or series");
    }
    const auto violations = validate_graph(graph);
    if (!violations.empty())
      return error(400, "InvalidGraph", "dataset violates graph invariants", violations_to_json(violations));
    if (graph.timeslice_count() < 2)
      return error(400, "InsufficientData", "a dataset needs at least two timeslices");
    return json_response(201, handle_payload(store_.add(std::move(graph), name)));
  }

  TransitionRange range_of(const Request& req, const PreparedDataset& ds) const {
    const auto full = ds.full();
    const double from = number_param(req, "from", static_cast<double>(full.from));
    const double to = number_param(req, "to", static_cast<double>(full.to));
    if (from != std::floor(from) || to != std::floor(to) || from < 0 || to < 0)
      throw Error(ErrorCode::RangeError, "range bounds must be non-negative integers");
    TransitionRange r{static_cast<std::size_t>(from), static_cast<std::size_t>(to)};
    check_range(ds.diffs, r);
    return r;
  }

  AnalysisParams params_of(const Request& req, const PreparedDataset& ds) const {
    AnalysisParams p;
    p.range = range_of(req, ds);
    p.alpha = number_param(req, "alpha", 0.5);
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in [0, 1]");
    if (const auto s = param(req, "detailSource")) {
      const auto parsed = parse_detail_source(*s);
      if (!parsed) throw Error(ErrorCode::DomainError, "detailSource must be original or difference");
      p.detail_source = *parsed;
    }
    return p;
  }

  std::shared_ptr<const Analysis> analysis(const StoredDataset& ds, const AnalysisParams& p) {
    const AnalysisKey key{ds.handle.id, p.range->from, p.range->to, p.alpha, static_cast<int>(p.detail_source)};
    {
      std::lock_guard lock(cache_mutex_);
      if (const auto it = analyses_.find(key); it != analyses_.end()) return it->second;
    }
    auto result = std::make_shared<const Analysis>(analyze(ds.data, p));
    std::lock_guard lock(cache_mutex_);
    if (analyses_.size() >= kCacheLimit) analyses_.clear();
    analyses_.emplace(key, result);
    return result;
  }

  template <class Compute>
  Response cached(const Request& req, const std::shared_ptr<const StoredDataset>& ds, Compute&& compute) {
    std::string key = ds->handle.id + req.path;
    for (const auto& [k, v] : req.query) key += "&" + k + "=" + v;
    {
      std::lock_guard lock(cache_mutex_);
      if (const auto it = bodies_.find(key); it != bodies_.end()) return {200, it->second};
    }
    Response res = compute();
    if (res.status == 200) {
      std::lock_guard lock(cache_mutex_);
      if (bodies_.size() >= kCacheLimit) bodies_.clear();
      bodies_.emplace(key, res.body);
    }
    return res;
  }

  Response overview(const Request& req, const StoredDataset& ds) {
    const auto p = params_of(req, ds.data);
    const auto a = analysis(ds, p);
    return json_response(200, overview_payload(*a, ds.data.graph, p.detail_source));
  }

  Response detail_view(const Request& req, const StoredDataset& ds, const std::string& t_text) {
    double t = 0.0;
    if (!detail::parse_double(t_text, t) || t < 0 || t != std::floor(t))
      throw Error(ErrorCode::RangeError, "time index must be a non-negative integer");
    const auto kind = parse_detail_kind(param(req, "kind").value_or("difference"));
    if (!kind) throw Error(ErrorCode::DomainError, "kind must be difference or original");
    const auto a = analysis(ds, params_of(req, ds.data));
    const auto order = ds.data.indices_of(a->ordering.ordering.permutation);
    const auto m = build_detail(ds.data.graph, ds.data.diffs, *kind, static_cast<std::size_t>(t), order);
    return json_response(200, detail_payload(m, ds.data.graph));
  }

  Response mask(const Request& req, const StoredDataset& ds) {
    MaskConfig cfg;
    if (const auto c = param(req, "criterion")) {
      const auto parsed = parse_criterion(*c);
      if (!parsed) throw Error(ErrorCode::DomainError, "criterion must be avgChange or changedEdgeCount");
      cfg.criterion = *parsed;
    }
    cfg.threshold = number_param(req, "threshold", cfg.threshold);
    cfg.gap_limit = count_param(req, "gap", cfg.gap_limit);
    cfg.validate();
    const auto a = analysis(ds, params_of(req, ds.data));
    return json_response(200, mask_payload(build_mask(a->overview, cfg), cfg));
  }

  Response timeline(const StoredDataset& ds) {
    return json_response(200, timeline_payload(project_timeline(ds.data.graph)));
  }

  static constexpr std::size_t kCacheLimit = 512;

  ServiceConfig cfg_;
  DatasetStore store_;
  httplib::Server server_;
  std::mutex cache_mutex_;
  std::map<AnalysisKey, std::shared_ptr<const Analysis>> analyses_;
  std::map<std::string, std::string> bodies_;
};

}  // namespace diffseer
