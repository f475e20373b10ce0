#pragma once

#include "refgraph/eval.hpp"
#include "refgraph/graph.hpp"
#include "refgraph/ingest.hpp"
#include "refgraph/paths.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace refgraph {

/// Random site graph plus random walks over it. All randomness comes from
/// std::mt19937_64 seeded with `seed`: a uniform real is the top 53 bits
/// scaled to [0,1) and a choice among n is `draw % n`, so output bytes do
/// not depend on the standard library's distribution classes.
struct SynthParams {
    std::size_t n_sites = 50;
    std::size_t n_threats = 3;
    double edge_density = 0.05;
    std::size_t n_paths = 200;
    double click_through = 0.6;
    std::size_t max_len = 6;
    std::uint64_t seed = 1;
    int max_hops = kDefaultMaxHops;

    void validate() const;
};

struct SynthDataset {
    std::string traffic_jsonl;
    std::string indicators;
    std::string manifest_json;
    std::size_t record_count = 0;
};

/// Walks are emitted back to back, one record per step, each step naming the
/// previous step's site as referrer. The manifest holds the hop distances
/// over the traversed edges, each walk's threat outcome (a threat visited
/// after the first step) and the threat list.
SynthDataset generate(const SynthParams& params);

struct SynthManifest {
    int max_hops = kDefaultMaxHops;
    std::map<std::string, int, std::less<>> distances;
    std::map<std::uint64_t, bool> path_reached_threat;
    std::vector<std::string> threats;
};

SynthManifest parse_manifest(std::string_view json_text);

inline constexpr std::size_t kOracleMaxEdges = 1000;
inline constexpr std::size_t kOracleMaxRecords = 10'000;

using DomainEdge = std::pair<std::string, std::string>;

/// Shortest hop counts by relaxing every edge max_hops times. Independent of
/// the graph module's search. At most kOracleMaxEdges edges.
HopMap oracle_hops(std::span<const DomainEdge> edges, const DomainSet& threats, int max_hops);

/// Restates the per-hop classification directly over records: chains are
/// stitched by scanning earlier records, distances come from relaxation,
/// and each record is then sorted into its cell. At most kOracleMaxRecords
/// records.
std::vector<ConfusionMatrix> oracle_classify(std::span<const TrafficRecord> records, const DomainSet& threats,
                                             int max_hops, SessionWindow window = {});

} // namespace refgraph
