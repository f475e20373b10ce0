#pragma once

#include "refgraph/eval.hpp"
#include "refgraph/graph.hpp"
#include "refgraph/paths.hpp"
#include "refgraph/risk.hpp"
#include "refgraph/synth.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace refgraph::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_usage = 2,
    exit_data = 3,
};

enum class WindowMode { automatic, seq, seconds };

struct RunConfig {
    std::vector<std::string> traffic;
    std::optional<std::string> indicators;
    std::optional<std::string> filters;
    std::optional<std::string> graph_dir; // snapshot from a previous analyze
    std::optional<std::string> matrices;  // input for `roc`
    std::string out_dir = "refgraph-out";

    int max_hops = kDefaultMaxHops;
    HopDirection direction = HopDirection::toward_threat;
    std::optional<std::int64_t> window;
    WindowMode window_mode = WindowMode::automatic;
    FprMode fpr_mode = FprMode::paper;
    ClassifyOptions classify;
    bool dump_paths = false;

    RiskWeights weights;
    RiskThresholds thresholds;

    std::optional<std::string> focus;
    int radius = 2;

    SynthParams synth;
};

/// ingest -> graph -> threat labels -> hop distances -> paths -> per-hop
/// matrices and metrics. Writes confusion.csv, metrics.csv, roc.csv,
/// roc.svg, hops.csv, path_outcomes.csv, nodes.csv, edges.csv, graph.dot and
/// summary.txt (plus paths.csv with dump_paths) under out_dir, and prints
/// the summary to `log`.
void cmd_analyze(const RunConfig& config, std::ostream& log);

/// Writes scores.csv from the traffic inputs, or from graph_dir when no
/// traffic is given.
void cmd_score(const RunConfig& config, std::ostream& log);

/// Writes export.dot, optionally restricted to the neighbourhood of focus.
void cmd_export(const RunConfig& config, std::ostream& log);

/// Writes traffic.jsonl, indicators.txt and manifest.json.
void cmd_synth(const RunConfig& config, std::ostream& log);

/// Re-emits metrics.csv, roc.csv and roc.svg from a confusion CSV.
void cmd_roc(const RunConfig& config, std::ostream& log);

/// Parses arguments (plus the REFGRAPH_CONFIG / --config key=value file)
/// and dispatches. Returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace refgraph::cli
