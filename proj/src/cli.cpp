#include "refgraph/cli.hpp"

#include "refgraph/errors.hpp"
#include "refgraph/ingest.hpp"
#include "refgraph/text.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

namespace refgraph::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path, const char* what)
{
    if (!fs::is_regular_file(path)) {
        throw UsageError(std::string("missing ") + what + " file: " + path);
    }
}

std::string out_path(const RunConfig& config, const char* name)
{
    return (fs::path(config.out_dir) / name).string();
}

void prepare_out_dir(const RunConfig& config)
{
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir)) {
        throw UsageError("cannot create output directory " + config.out_dir);
    }
}

struct Built {
    ReferralGraph graph;
    std::vector<TrafficRecord> records;
    IngestStats stats;
    std::size_t indicators = 0;
    std::size_t indicators_skipped = 0;
};

Built build_from_traffic(const RunConfig& config)
{
    if (config.traffic.empty()) {
        throw UsageError("no traffic input given (--traffic)");
    }
    for (const auto& t : config.traffic) {
        require_file(t, "traffic");
    }
    if (config.indicators) {
        require_file(*config.indicators, "indicators");
    }
    if (config.filters) {
        require_file(*config.filters, "filters");
    }

    Built b;
    std::uint64_t next_seq = 0;
    for (const auto& t : config.traffic) {
        std::ifstream in(t, std::ios::binary);
        IngestStats s;
        auto recs = read_traffic(in, s, next_seq);
        next_seq += s.lines_read;
        b.stats += s;
        b.records.insert(b.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    if (config.filters) {
        const auto rules = parse_filter_rules(text::read_file(*config.filters));
        const auto before = b.records.size();
        b.records = apply_filters(std::move(b.records), rules);
        b.stats.filtered = before - b.records.size();
    }
    if (b.records.empty()) {
        throw DataError("no records");
    }

    for (const auto& r : b.records) {
        b.graph.add_record(r);
    }
    if (config.indicators) {
        auto load = load_indicators(text::read_file(*config.indicators), "blocklist");
        b.indicators = load.indicators.size();
        b.indicators_skipped = load.skipped;
        b.graph.label_threats(load.indicators);
    }
    b.graph.seal();
    return b;
}

ReferralGraph graph_for(const RunConfig& config)
{
    if (!config.traffic.empty()) {
        return build_from_traffic(config).graph;
    }
    if (!config.graph_dir) {
        throw UsageError("missing graph: give --traffic or --graph <analyze output dir>");
    }
    const auto nodes = (fs::path(*config.graph_dir) / "nodes.csv").string();
    const auto edges = (fs::path(*config.graph_dir) / "edges.csv").string();
    require_file(nodes, "graph snapshot");
    require_file(edges, "graph snapshot");
    return load_snapshot(text::read_file(nodes), text::read_file(edges));
}

SessionWindow resolve_window(const RunConfig& config, std::span<const TrafficRecord> records)
{
    switch (config.window_mode) {
    case WindowMode::seq:
        return {config.window.value_or(kDefaultWindowSeq), WindowUnit::seq};
    case WindowMode::seconds:
        return {config.window.value_or(kDefaultWindowSeconds), WindowUnit::seconds};
    case WindowMode::automatic:
        break;
    }
    auto w = default_window(records);
    if (config.window) {
        w.span = *config.window;
    }
    return w;
}

void write_roc_outputs(const RunConfig& config, std::span<const RocMetrics> metrics)
{
    const auto plot = emit_roc(metrics, config.fpr_mode);
    text::write_file(out_path(config, "metrics.csv"), metrics_csv(metrics, config.fpr_mode));
    text::write_file(out_path(config, "roc.csv"), plot.csv);
    text::write_file(out_path(config, "roc.svg"), plot.svg);
}

const char* mode_name(FprMode m) { return m == FprMode::paper ? "paper" : "standard"; }

} // namespace

void cmd_analyze(const RunConfig& config, std::ostream& log)
{
    if (config.max_hops < 1) {
        throw UsageError("--max-hops must be at least 1");
    }
    auto b = build_from_traffic(config);
    prepare_out_dir(config);

    const auto hops = hop_distances(b.graph, config.max_hops, config.direction);
    const auto window = resolve_window(config, b.records);
    const auto paths = reconstruct(b.records, window);

    DomainSet threats;
    for (auto& t : b.graph.threat_domains()) {
        threats.insert(std::move(t));
    }
    const auto matrices = classify(paths, hops, threats, config.max_hops, config.classify);
    std::vector<RocMetrics> metrics_list;
    for (const auto& m : matrices) {
        metrics_list.push_back(metrics(m));
    }

    text::write_file(out_path(config, "confusion.csv"), confusion_csv(matrices));
    write_roc_outputs(config, metrics_list);

    std::string hops_csv = "domain,hop\n";
    std::size_t related = 0;
    for (const auto& [d, h] : hops.distances) {
        hops_csv += d + ',' + std::to_string(h) + '\n';
        related += h >= 1 ? 1 : 0;
    }
    text::write_file(out_path(config, "hops.csv"), hops_csv);

    std::string outcomes = "path_id,reached_threat\n";
    for (const auto& p : paths) {
        outcomes += std::to_string(p.id) + ',' + (reaches_threat(p, 0, threats) ? "true" : "false") + '\n';
    }
    text::write_file(out_path(config, "path_outcomes.csv"), outcomes);
    if (config.dump_paths) {
        text::write_file(out_path(config, "paths.csv"), export_paths_csv(paths));
    }

    text::write_file(out_path(config, "nodes.csv"), export_nodes_csv(b.graph));
    text::write_file(out_path(config, "edges.csv"), export_edges_csv(b.graph));
    text::write_file(out_path(config, "graph.dot"), export_dot(b.graph, hops));

    std::string npv = "NA";
    if (const auto v = metrics(matrices.front()).npv) {
        npv = text::fixed(*v, 4);
    }
    std::string summary;
    summary += "lines_read=" + std::to_string(b.stats.lines_read) + '\n';
    summary += "accepted=" + std::to_string(b.stats.accepted) + '\n';
    summary += "skipped=" + std::to_string(b.stats.skipped) + '\n';
    summary += "filtered=" + std::to_string(b.stats.filtered) + '\n';
    summary += "stored=" + std::to_string(b.records.size()) + '\n';
    summary += "indicators=" + std::to_string(b.indicators) + '\n';
    summary += "indicators_skipped=" + std::to_string(b.indicators_skipped) + '\n';
    summary += "nodes=" + std::to_string(b.graph.node_count()) + '\n';
    summary += "edges=" + std::to_string(b.graph.edge_count()) + '\n';
    summary += "threats=" + std::to_string(threats.size()) + '\n';
    summary += "related=" + std::to_string(related) + '\n';
    summary += "paths=" + std::to_string(paths.size()) + '\n';
    summary += "max_hops=" + std::to_string(config.max_hops) + '\n';
    summary += "window=" + std::to_string(window.span) + (window.unit == WindowUnit::seq ? " seq\n" : " seconds\n");
    summary += std::string("fpr_mode=") + mode_name(config.fpr_mode) + '\n';
    summary += "npv=" + npv + '\n';
    text::write_file(out_path(config, "summary.txt"), summary);
    log << summary;
}

void cmd_score(const RunConfig& config, std::ostream& log)
{
    auto weights = config.weights;
    weights.max_hops = config.max_hops;
    weights.validate();
    config.thresholds.validate();
    const auto graph = graph_for(config);
    prepare_out_dir(config);

    const auto links = threat_links(graph, weights.max_hops, config.direction);
    const auto scores = score_all(graph, links, weights, config.thresholds);
    text::write_file(out_path(config, "scores.csv"), scores_csv(scores));
    std::map<RiskBand, std::size_t> per_band;
    for (const auto& s : scores) {
        ++per_band[s.band];
    }
    log << "scored=" << scores.size() << "\nsilent=" << per_band[RiskBand::silent]
        << "\nwarn=" << per_band[RiskBand::warn] << "\nblock=" << per_band[RiskBand::block] << '\n';
}

void cmd_export(const RunConfig& config, std::ostream& log)
{
    const auto graph = graph_for(config);
    const auto hops = hop_distances(graph, config.max_hops, config.direction);
    const auto dot = export_dot(graph, hops, config.focus, config.radius);
    prepare_out_dir(config);
    const auto path = out_path(config, "export.dot");
    text::write_file(path, dot);
    log << "wrote " << path << '\n';
}

void cmd_synth(const RunConfig& config, std::ostream& log)
{
    auto params = config.synth;
    params.max_hops = config.max_hops;
    const auto ds = generate(params);
    prepare_out_dir(config);
    text::write_file(out_path(config, "traffic.jsonl"), ds.traffic_jsonl);
    text::write_file(out_path(config, "indicators.txt"), ds.indicators);
    text::write_file(out_path(config, "manifest.json"), ds.manifest_json);
    log << "records=" << ds.record_count << "\nout=" << config.out_dir << '\n';
}

void cmd_roc(const RunConfig& config, std::ostream& log)
{
    if (!config.matrices) {
        throw UsageError("roc needs --matrices <confusion.csv>");
    }
    require_file(*config.matrices, "matrices");
    const auto matrices = parse_confusion_csv(text::read_file(*config.matrices));
    std::vector<RocMetrics> metrics_list;
    for (const auto& m : matrices) {
        metrics_list.push_back(metrics(m));
    }
    prepare_out_dir(config);
    write_roc_outputs(config, metrics_list);
    log << "hops=" << matrices.size() << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    RunConfig config;
    CLI::App app{"Referrer-graph proximity analysis of websites to known threats"};
    app.fallthrough();
    app.require_subcommand(1);

    app.set_config("--config", "", "key=value config file (flags override it)")->envname("REFGRAPH_CONFIG");
    app.add_option("--traffic", config.traffic, "traffic JSON Lines file (repeatable)");
    app.add_option("--indicators", config.indicators, "threat indicator list, one domain per line");
    app.add_option("--filters", config.filters, "destination exclusion rules (domain:<d> / suffix:<s>)");
    app.add_option("--graph", config.graph_dir, "directory holding nodes.csv and edges.csv from analyze");
    app.add_option("--matrices", config.matrices, "confusion CSV (hop,fp,fn,tp,tn) for roc");
    app.add_option("--out", config.out_dir, "output directory")->capture_default_str();
    app.add_option("--max-hops", config.max_hops, "hop limit K")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--direction", config.direction, "hop counting direction")
        ->transform(CLI::CheckedTransformer(std::map<std::string, HopDirection>{
            {"toward-threat", HopDirection::toward_threat}, {"threat-outward", HopDirection::threat_outward}}));
    app.add_option("--window", config.window, "session window span (seq units or seconds)")->check(CLI::NonNegativeNumber);
    app.add_option("--window-unit", config.window_mode, "auto, seq or seconds")
        ->transform(CLI::CheckedTransformer(std::map<std::string, WindowMode>{
            {"auto", WindowMode::automatic}, {"seq", WindowMode::seq}, {"seconds", WindowMode::seconds}}));
    app.add_option("--fpr-mode", config.fpr_mode, "paper: fp/(tn+fn); standard: fp/(fp+tn)")
        ->transform(CLI::CheckedTransformer(std::map<std::string, FprMode>{
            {"paper", FprMode::paper}, {"standard", FprMode::standard}}));
    app.add_flag("!--no-hop0-arrivals", config.classify.hop0_referred_arrivals,
                 "do not count referred threat arrivals as hop-0 true positives");
    app.add_flag("--dump-paths", config.dump_paths, "also write paths.csv");
    app.add_option("--risk-base", config.weights.base, "risk weight of a 1-hop threat")->capture_default_str();
    app.add_option("--risk-decay", config.weights.decay, "risk weight factor per extra hop")->capture_default_str();
    app.add_option("--warn-at", config.thresholds.warn_at, "lowest warn score")->capture_default_str();
    app.add_option("--block-at", config.thresholds.block_at, "scores above this block")->capture_default_str();
    app.add_option("--focus", config.focus, "export: centre domain");
    app.add_option("--radius", config.radius, "export: undirected steps around focus")->capture_default_str();
    app.add_option("--seed", config.synth.seed, "synth: RNG seed")->capture_default_str();
    app.add_option("--sites", config.synth.n_sites, "synth: number of sites")->capture_default_str();
    app.add_option("--threats", config.synth.n_threats, "synth: number of threat sites")->capture_default_str();
    app.add_option("--density", config.synth.edge_density, "synth: edge probability")->capture_default_str();
    app.add_option("--paths", config.synth.n_paths, "synth: number of walks")->capture_default_str();
    app.add_option("--click-through", config.synth.click_through, "synth: continue probability")->capture_default_str();
    app.add_option("--max-len", config.synth.max_len, "synth: longest walk")->capture_default_str();

    auto* analyze = app.add_subcommand("analyze", "build the graph and evaluate per-hop predictions");
    auto* score = app.add_subcommand("score", "risk scores with silent/warn/block bands");
    auto* export_cmd = app.add_subcommand("export", "Graphviz DOT of the graph or a neighbourhood");
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with ground truth");
    auto* roc = app.add_subcommand("roc", "re-emit metrics and ROC plot from a confusion CSV");

    if (const char* cfg = std::getenv("REFGRAPH_CONFIG"); cfg != nullptr && *cfg != '\0' && !fs::is_regular_file(cfg)) {
        err << "error: REFGRAPH_CONFIG points at missing file " << cfg << '\n';
        return exit_usage;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (analyze->parsed()) {
            cmd_analyze(config, out);
        } else if (score->parsed()) {
            cmd_score(config, out);
        } else if (export_cmd->parsed()) {
            cmd_export(config, out);
        } else if (synth->parsed()) {
            cmd_synth(config, out);
        } else if (roc->parsed()) {
            cmd_roc(config, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_ok;
}

} // namespace refgraph::cli
