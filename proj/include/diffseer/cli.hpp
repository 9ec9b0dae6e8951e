#pragma once

#include "diffseer/error.hpp"
#include "diffseer/ingest.hpp"
#include "diffseer/io.hpp"
#include "diffseer/pipeline.hpp"
#include "diffseer/service.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

namespace diffseer::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUserError = 2 };

struct IngestArgs {
  std::string input;
  std::string kind = "edge-list";  // edge-list | series
  std::size_t window = 20;
  std::size_t step = 1;
  std::string aggregation = "sum";
  double min_abs_weight = 0.0;
  std::string output;
};

struct AnalyzeArgs {
  std::string dataset;
  std::optional<std::size_t> from;
  std::optional<std::size_t> to;
  double alpha = 0.5;
  std::string detail_source = "original";
  std::string criterion = "avg-change";
  double threshold = 1.0;
  std::size_t gap = 3;
  std::string output_dir = ".";
};

struct ServeArgs {
  std::string data_dir;
  int port = 8080;
  std::string host = "0.0.0.0";
  std::size_t max_upload_bytes = 64u << 20;
};

namespace detail {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: ParseError at " << e.what() << "\n";
    return kUserError;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace detail

inline int cmd_ingest(const IngestArgs& args, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::ifstream in(args.input, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + args.input + "'");
    DynamicWeightedGraph g;
    if (args.kind == "edge-list") {
      if (args.aggregation != "sum" && args.aggregation != "last")
        throw Error(ErrorCode::DomainError, "aggregation must be sum or last");
      g = filter_min_abs_weight(
          parse_edge_list(in, args.aggregation == "sum" ? Aggregation::Sum : Aggregation::Last),
          args.min_abs_weight);
    } else if (args.kind == "series") {
      g = build_correlation_network(parse_series_csv(in),
                                    CorrelationOptions{args.window, args.step, args.min_abs_weight});
    } else {
      throw Error(ErrorCode::DomainError, "kind must be edge-list or series");
    }
    require_valid(g);
    write_file(args.output, dataset_to_string(g) + "\n");
    return static_cast<int>(kOk);
  });
}

inline int cmd_analyze(const AnalyzeArgs& args, std::ostream& err) {
  return detail::guarded(err, [&] {
    const PreparedDataset ds(load_dataset(args.dataset));
    AnalysisParams p;
    const auto full = ds.full();
    p.range = TransitionRange{args.from.value_or(full.from), args.to.value_or(full.to)};
    p.alpha = args.alpha;
    const auto source = parse_detail_source(args.detail_source);
    if (!source) throw Error(ErrorCode::DomainError, "detail source must be original or difference");
    p.detail_source = *source;
    const auto criterion = parse_criterion(args.criterion);
    if (!criterion) throw Error(ErrorCode::DomainError, "criterion must be avg-change or changed-edge-count");
    p.mask = MaskConfig{*criterion, args.threshold, args.gap};
    p.mask.validate();

    const auto a = analyze(ds, p);
    const auto timeline = project_timeline(ds.graph);
    if (timeline.degenerate) err << "warning: all timeslices are identical; timeline offsets are zero\n";

    const std::filesystem::path dir(args.output_dir);
    std::filesystem::create_directories(dir);
    write_file((dir / "overview.json").string(),
               canonical_dump(overview_payload(a, ds.graph, p.detail_source)) + "\n");
    write_file((dir / "ordering.json").string(), canonical_dump(ordering_payload(a.ordering.ordering)) + "\n");
    write_file((dir / "mask.json").string(),
               canonical_dump(mask_payload(build_mask(a.overview, p.mask), p.mask)) + "\n");
    write_file((dir / "timeline.json").string(), canonical_dump(timeline_payload(timeline)) + "\n");
    return static_cast<int>(kOk);
  });
}

/// Serves until SIGTERM or SIGINT.
inline int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGTERM);
    sigaddset(&stop_signals, SIGINT);
    // Threads spawned from here on inherit the mask, so only the waiter sees them.
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    Service service(ServiceConfig{args.data_dir, args.max_upload_bytes});
    const int port = service.bind(args.host, args.port);
    if (port < 0) {
      err << "error: cannot bind " << args.host << ":" << args.port << "\n";
      return static_cast<int>(kUserError);
    }
    out << "diffseer listening on " << args.host << ":" << port << std::endl;

    std::thread waiter([&] {
      int sig = 0;
      sigwait(&stop_signals, &sig);
      service.stop();
    });
    const bool clean = service.run();
    pthread_kill(waiter.native_handle(), SIGTERM);  // releases the waiter if run() ended on its own
    waiter.join();
    out << "diffseer stopped" << std::endl;
    return static_cast<int>(clean ? kOk : kInternal);
  });
}

namespace detail {

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace detail

/// Full command-line entry point.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"diffseer: difference-centric analysis of dynamic weighted graphs"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "convert an edge list or series CSV into a dataset JSON");
  ingest_cmd->add_option("--input", ingest.input, "input CSV path")->required();
  ingest_cmd->add_option("--kind", ingest.kind, "edge-list or series")
      ->check(CLI::IsMember({"edge-list", "series"}))
      ->capture_default_str();
  ingest_cmd->add_option("--window", ingest.window, "trailing correlation window (series)")
      ->capture_default_str();
  ingest_cmd->add_option("--step", ingest.step, "window step (series)")->capture_default_str();
  ingest_cmd->add_option("--aggregation", ingest.aggregation, "duplicate-row handling: sum or last (edge-list)")
      ->check(CLI::IsMember({"sum", "last"}))
      ->capture_default_str();
  ingest_cmd->add_option("--min-abs-weight", ingest.min_abs_weight, "drop edges with |w| below this")
      ->capture_default_str();
  ingest_cmd->add_option("--output", ingest.output, "output dataset JSON path")->required();

  AnalyzeArgs analyze_args;
  std::size_t from = 0, to = 0;
  auto* analyze_cmd = app.add_subcommand("analyze", "write overview, ordering, mask and timeline JSON");
  analyze_cmd->add_option("--dataset", analyze_args.dataset, "dataset JSON path")->required();
  auto* from_opt = analyze_cmd->add_option("--from", from, "first transition (default: 1)");
  auto* to_opt = analyze_cmd->add_option("--to", to, "last transition (default: last)");
  analyze_cmd->add_option("--alpha", analyze_args.alpha, "overview weight in the blended distance")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  analyze_cmd->add_option("--detail-source", analyze_args.detail_source, "original or difference")
      ->check(CLI::IsMember({"original", "difference"}))
      ->capture_default_str();
  analyze_cmd->add_option("--criterion", analyze_args.criterion, "mask criterion: avg-change or changed-edge-count")
      ->check(CLI::IsMember({"avg-change", "changed-edge-count"}))
      ->capture_default_str();
  analyze_cmd->add_option("--threshold", analyze_args.threshold, "mask highlight threshold")->capture_default_str();
  analyze_cmd->add_option("--gap", analyze_args.gap, "max quiet columns bridged by mask paths")->capture_default_str();
  analyze_cmd->add_option("--output-dir", analyze_args.output_dir, "directory for the JSON artifacts")
      ->capture_default_str();

  ServeArgs serve;
  serve.data_dir = detail::env_or("DIFFSEER_DATA_DIR", "diffseer-data");
  serve.port = std::atoi(detail::env_or("DIFFSEER_PORT", "8080").c_str());
  serve.max_upload_bytes = static_cast<std::size_t>(
      std::atoll(detail::env_or("DIFFSEER_MAX_UPLOAD_BYTES", std::to_string(serve.max_upload_bytes)).c_str()));
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP/JSON API");
  serve_cmd->add_option("--data-dir", serve.data_dir, "dataset directory (env DIFFSEER_DATA_DIR)")
      ->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "listen port (env DIFFSEER_PORT)")->capture_default_str();
  serve_cmd->add_option("--host", serve.host, "listen address")->capture_default_str();
  serve_cmd->add_option("--max-upload-bytes", serve.max_upload_bytes,
                        "upload size cap (env DIFFSEER_MAX_UPLOAD_BYTES)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? static_cast<int>(kOk) : static_cast<int>(kUserError);
  }

  if (ingest_cmd->parsed()) return cmd_ingest(ingest, err);
  if (analyze_cmd->parsed()) {
    if (*from_opt) analyze_args.from = from;
    if (*to_opt) analyze_args.to = to;
    return cmd_analyze(analyze_args, err);
  }
  return cmd_serve(serve, out, err);
}

}  // namespace diffseer::cli
