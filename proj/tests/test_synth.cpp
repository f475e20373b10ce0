#include "refgraph/errors.hpp"
#include "refgraph/synth.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

namespace refgraph {
namespace {

using testing::domains;
using testing::visit;

std::vector<TrafficRecord> ingest(const std::string& jsonl, IngestStats& stats)
{
    std::istringstream in(jsonl);
    return read_traffic(in, stats);
}

struct PipelineResult {
    HopMap hops;
    std::vector<ConfusionMatrix> matrices;
};

PipelineResult pipeline(const std::vector<TrafficRecord>& recs, const DomainSet& threats, int k, SessionWindow window)
{
    ReferralGraph g;
    for (const auto& r : recs) {
        g.add_record(r);
    }
    std::vector<ThreatIndicator> ind;
    for (const auto& t : threats) {
        ind.push_back({t, "test", std::nullopt});
    }
    g.label_threats(ind);
    g.seal();
    auto hops = hop_distances(g, k);
    const auto paths = reconstruct(recs, window);
    return {hops, classify(paths, hops, threats, k)};
}

TEST(Generate, SameSeedSameBytes)
{
    SynthParams p;
    p.seed = 1;
    const auto a = generate(p);
    const auto b = generate(p);
    EXPECT_EQ(a.traffic_jsonl, b.traffic_jsonl);
    EXPECT_EQ(a.manifest_json, b.manifest_json);
    EXPECT_EQ(a.indicators, b.indicators);
    p.seed = 2;
    EXPECT_NE(generate(p).traffic_jsonl, a.traffic_jsonl);
}

TEST(Generate, ZeroClickThroughGivesSingleDirectVisits)
{
    SynthParams p;
    p.click_through = 0.0;
    p.n_paths = 40;
    const auto ds = generate(p);
    EXPECT_EQ(ds.record_count, 40u);
    IngestStats stats;
    const auto recs = ingest(ds.traffic_jsonl, stats);
    ASSERT_EQ(recs.size(), 40u);
    for (const auto& r : recs) {
        EXPECT_FALSE(r.referrer);
    }
    EXPECT_EQ(reconstruct(recs, default_window(recs)).size(), 40u);
}

TEST(Generate, NoThreatsNoDistances)
{
    SynthParams p;
    p.n_threats = 0;
    const auto m = parse_manifest(generate(p).manifest_json);
    EXPECT_TRUE(m.distances.empty());
    EXPECT_TRUE(m.threats.empty());
    EXPECT_EQ(m.path_reached_threat.size(), p.n_paths);
}

TEST(Generate, InvalidParams)
{
    auto bad = [](auto mutate) {
        SynthParams p;
        mutate(p);
        return p;
    };
    EXPECT_THROW(generate(bad([](auto& p) { p.n_threats = p.n_sites + 1; })), UsageError);
    EXPECT_THROW(generate(bad([](auto& p) { p.edge_density = 0.0; })), UsageError);
    EXPECT_THROW(generate(bad([](auto& p) { p.edge_density = 1.0; })), UsageError);
    EXPECT_THROW(generate(bad([](auto& p) { p.click_through = 1.5; })), UsageError);
    EXPECT_THROW(generate(bad([](auto& p) { p.max_len = 0; })), UsageError);
    EXPECT_THROW(generate(bad([](auto& p) { p.n_sites = 0; p.n_threats = 0; })), UsageError);
}

TEST(Generate, RecordsIngestWithoutSkips)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthParams p;
        p.seed = seed;
        const auto ds = generate(p);
        IngestStats stats;
        const auto recs = ingest(ds.traffic_jsonl, stats);
        EXPECT_EQ(stats.skipped, 0u);
        EXPECT_EQ(recs.size(), ds.record_count);
        for (const auto& r : recs) {
            EXPECT_EQ(r.path.find_first_of("?#"), std::string::npos);
        }
    }
}

TEST(OracleHops, Examples)
{
    const std::vector<DomainEdge> chain{{"a", "b"}, {"b", "t"}};
    EXPECT_EQ(oracle_hops(chain, domains({"t"}), 4).distances,
              (std::map<std::string, int, std::less<>>{{"a", 2}, {"b", 1}, {"t", 0}}));

    const std::vector<DomainEdge> split{{"a", "t"}, {"x", "y"}};
    EXPECT_FALSE(oracle_hops(split, domains({"t"}), 4).distance("x"));

    const std::vector<DomainEdge> diamond{{"a", "b"}, {"b", "t"}, {"a", "c"}, {"c", "d"}, {"d", "t"}};
    EXPECT_EQ(oracle_hops(diamond, domains({"t"}), 4).distances,
              (std::map<std::string, int, std::less<>>{{"a", 2}, {"b", 1}, {"c", 2}, {"d", 1}, {"t", 0}}));
}

TEST(OracleHops, RejectsOversizeInput)
{
    std::vector<DomainEdge> edges(kOracleMaxEdges + 1, {"a", "b"});
    EXPECT_THROW(oracle_hops(edges, domains({}), 4), UsageError);
}

TEST(OracleClassify, MatchesClassifyExamples)
{
    const auto t = domains({"t"});
    const std::vector chain{visit(1, "a"), visit(2, "b", "a"), visit(3, "t", "b")};
    const auto m = oracle_classify(chain, t, 4);
    EXPECT_EQ(m, pipeline(chain, t, 4, {}).matrices);
    EXPECT_EQ(m[1], (ConfusionMatrix{1, 1, 0, 0, 0}));
    EXPECT_EQ(m[2], (ConfusionMatrix{2, 1, 0, 0, 0}));
    EXPECT_EQ(m[0], (ConfusionMatrix{0, 1, 1, 0, 0}));

    const std::vector direct{visit(1, "t")};
    for (const auto& c : oracle_classify(direct, t, 4)) {
        EXPECT_EQ(c, (ConfusionMatrix{c.hop, 0, 0, 1, 0}));
    }
    const std::vector unrelated{visit(1, "x")};
    for (const auto& c : oracle_classify(unrelated, t, 4)) {
        EXPECT_EQ(c, (ConfusionMatrix{c.hop, 0, 0, 0, 1}));
    }
}

TEST(OracleClassify, EmptyInputAllZero)
{
    const auto m = oracle_classify({}, domains({"t"}), 4);
    ASSERT_EQ(m.size(), 5u);
    for (const auto& c : m) {
        EXPECT_EQ(c, (ConfusionMatrix{c.hop, 0, 0, 0, 0}));
    }
}

TEST(OracleClassify, RejectsOversizeInput)
{
    std::vector<TrafficRecord> recs;
    for (std::uint64_t i = 0; i <= kOracleMaxRecords; ++i) {
        recs.push_back(visit(i, "a"));
    }
    EXPECT_THROW(oracle_classify(recs, domains({}), 4), UsageError);
}

TEST(Pipeline, AgreesWithOraclesOnSeededDatasets)
{
    for (std::uint64_t seed = 100; seed < 115; ++seed) {
        SynthParams p;
        p.seed = seed;
        p.n_sites = 30 + seed % 50;
        p.edge_density = 0.04;
        p.n_paths = 300;
        const auto ds = generate(p);
        IngestStats stats;
        const auto recs = ingest(ds.traffic_jsonl, stats);
        const auto m = parse_manifest(ds.manifest_json);
        DomainSet threats(m.threats.begin(), m.threats.end());

        std::vector<DomainEdge> edges;
        for (const auto& r : recs) {
            if (r.referrer) {
                edges.emplace_back(r.referrer->host, r.host);
            }
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        const auto window = default_window(recs);
        const auto got = pipeline(recs, threats, 4, window);
        ASSERT_EQ(got.hops, oracle_hops(edges, threats, 4)) << "seed " << seed;
        ASSERT_EQ(got.matrices, oracle_classify(recs, threats, 4, window)) << "seed " << seed;
        ASSERT_EQ(got.hops.distances, m.distances) << "seed " << seed;
    }
}

TEST(Classify, HopTotalsMatchVisitCounts)
{
    SynthParams p;
    p.seed = 9;
    p.n_paths = 500;
    const auto ds = generate(p);
    IngestStats stats;
    const auto recs = ingest(ds.traffic_jsonl, stats);
    const auto m = parse_manifest(ds.manifest_json);
    DomainSet threats(m.threats.begin(), m.threats.end());
    const auto res = pipeline(recs, threats, 4, default_window(recs));

    std::vector<std::uint64_t> visits(5, 0);
    for (const auto& r : recs) {
        if (const auto h = res.hops.distance(r.host); h && *h >= 1) {
            ++visits[static_cast<std::size_t>(*h)];
        }
    }
    for (int h = 1; h <= 4; ++h) {
        EXPECT_EQ(res.matrices[h].tp + res.matrices[h].fp, visits[h]) << "hop " << h;
    }
    for (const auto& c : res.matrices) {
        EXPECT_EQ(c.fn, res.matrices[0].fn);
        EXPECT_EQ(c.tn, res.matrices[0].tn);
    }
}

TEST(ParseManifest, RejectsGarbage)
{
    EXPECT_THROW(parse_manifest("[]"), DataError);
    EXPECT_THROW(parse_manifest("{\"distances\":{}}"), DataError);
}

} // namespace
} // namespace refgraph
