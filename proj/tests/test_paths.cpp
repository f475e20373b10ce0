#include "refgraph/errors.hpp"
#include "refgraph/paths.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace refgraph {
namespace {

using testing::domains;
using testing::visit;

constexpr SessionWindow kUnbounded{std::numeric_limits<std::int64_t>::max() / 2, WindowUnit::seq};

std::vector<std::string> domains_of(const NavigationPath& p)
{
    std::vector<std::string> out;
    for (const auto& e : p.events) {
        out.push_back(e.domain);
    }
    return out;
}

using Names = std::vector<std::string>;

TEST(Reconstruct, SingleChain)
{
    const std::vector<TrafficRecord> recs = {visit(1, "a"), visit(2, "b", "a"), visit(3, "t", "b")};
    const auto paths = reconstruct(recs, {});
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(domains_of(paths[0]), (Names{"a", "b", "t"}));
    EXPECT_FALSE(paths[0].events[0].referred);
    EXPECT_TRUE(paths[0].events[2].referred);
}

TEST(Reconstruct, DirectVisitsOpenSeparatePaths)
{
    const std::vector<TrafficRecord> recs = {visit(1, "a"), visit(2, "c")};
    const auto paths = reconstruct(recs, {});
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(domains_of(paths[0]), Names{"a"});
    EXPECT_EQ(domains_of(paths[1]), Names{"c"});
    EXPECT_EQ(paths[0].id, 0u);
    EXPECT_EQ(paths[1].id, 1u);
}

TEST(Reconstruct, UnseenReferrerGetsSyntheticAnchor)
{
    const std::vector<TrafficRecord> recs = {visit(1, "b", "a")};
    const auto paths = reconstruct(recs, {});
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(domains_of(paths[0]), (Names{"a", "b"}));
    EXPECT_TRUE(paths[0].events[0].synthetic);
    EXPECT_FALSE(paths[0].events[0].referred);
    EXPECT_FALSE(paths[0].events[1].synthetic);
}

TEST(Reconstruct, PrefersMostRecentOpenPath)
{
    const std::vector<TrafficRecord> recs = {visit(1, "a"), visit(2, "a"), visit(3, "b", "a"), visit(4, "c", "a")};
    const auto paths = reconstruct(recs, {});
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(domains_of(paths[0]), (Names{"a", "c"}));
    EXPECT_EQ(domains_of(paths[1]), (Names{"a", "b"}));
}

TEST(Reconstruct, WindowInSeqUnits)
{
    const std::vector<TrafficRecord> recs = {visit(1, "a"), visit(20, "b", "a")};
    EXPECT_EQ(reconstruct(recs, {19, WindowUnit::seq}).size(), 1u);
    const auto split = reconstruct(recs, {18, WindowUnit::seq});
    ASSERT_EQ(split.size(), 2u);
    EXPECT_TRUE(split[1].events[0].synthetic);
}

TEST(Reconstruct, WindowInSeconds)
{
    const std::vector<TrafficRecord> recs = {visit(1, "a", std::nullopt, 100), visit(2, "b", "a", 2000)};
    EXPECT_EQ(reconstruct(recs, {1800, WindowUnit::seconds}).size(), 2u);
    EXPECT_EQ(reconstruct(recs, {1900, WindowUnit::seconds}).size(), 1u);
}

TEST(Reconstruct, UsageErrors)
{
    EXPECT_THROW(reconstruct(std::vector{visit(2, "a"), visit(1, "b")}, {}), UsageError);
    EXPECT_THROW(reconstruct(std::vector{visit(1, "a"), visit(1, "b")}, {}), UsageError);
    EXPECT_THROW(reconstruct(std::vector{visit(1, "a")}, {10, WindowUnit::seconds}), UsageError);
    EXPECT_THROW(reconstruct(std::vector{visit(1, "a", std::nullopt, 50), visit(2, "b", std::nullopt, 40)},
                             {10, WindowUnit::seconds}),
                 UsageError);
}

TEST(DefaultWindow, SecondsOnlyWithMonotoneTimestamps)
{
    EXPECT_EQ(default_window(std::vector{visit(1, "a", std::nullopt, 5)}).unit, WindowUnit::seconds);
    EXPECT_EQ(default_window(std::vector{visit(1, "a", std::nullopt, 5)}).span, 1800);
    EXPECT_EQ(default_window(std::vector{visit(1, "a")}).unit, WindowUnit::seq);
    EXPECT_EQ(default_window(std::vector{visit(1, "a")}).span, 10'000);
    EXPECT_EQ(default_window(std::vector{visit(1, "a", std::nullopt, 5), visit(2, "b", std::nullopt, 4)}).unit,
              WindowUnit::seq);
}

TEST(ReachesThreat, Examples)
{
    const NavigationPath abt{0, {{1, "a", false, false}, {2, "b", true, false}, {3, "t", true, false}}};
    const auto threats = domains({"t"});
    EXPECT_TRUE(reaches_threat(abt, 0, threats));
    EXPECT_TRUE(reaches_threat(abt, 1, threats));
    EXPECT_FALSE(reaches_threat(abt, 2, threats));

    const NavigationPath abc{1, {{1, "a", false, false}, {2, "b", true, false}, {3, "c", true, false}}};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_FALSE(reaches_threat(abc, i, threats));
    }
    EXPECT_THROW(reaches_threat(abc, 3, threats), UsageError);
}

std::vector<TrafficRecord> random_records(std::mt19937_64& rng, std::size_t n, std::size_t n_domains)
{
    std::vector<TrafficRecord> recs;
    std::uint64_t seq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        seq += 1 + rng() % 5;
        const auto host = "d" + std::to_string(rng() % n_domains);
        if (rng() % 4 == 0) {
            recs.push_back(visit(seq, host));
        } else {
            recs.push_back(visit(seq, host, "d" + std::to_string(rng() % n_domains)));
        }
    }
    return recs;
}

TEST(Reconstruct, PartitionChainAndDeterminismOnRandomInput)
{
    std::mt19937_64 rng(8);
    for (int round = 0; round < 50; ++round) {
        const auto recs = random_records(rng, 1 + rng() % 300, 1 + rng() % 15);
        const SessionWindow window{static_cast<std::int64_t>(rng() % 40), WindowUnit::seq};
        const auto paths = reconstruct(recs, window);
        ASSERT_EQ(paths, reconstruct(recs, window));

        std::map<std::uint64_t, const TrafficRecord*> by_seq;
        for (const auto& r : recs) {
            by_seq[r.seq] = &r;
        }
        std::multiset<std::uint64_t> seen;
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const auto& ev = paths[p].events;
            ASSERT_EQ(paths[p].id, p);
            ASSERT_FALSE(ev.empty());
            for (std::size_t i = 0; i < ev.size(); ++i) {
                if (ev[i].synthetic) {
                    ASSERT_EQ(i, 0u);
                    ASSERT_FALSE(ev[i].referred);
                    continue;
                }
                seen.insert(ev[i].seq);
                const auto* rec = by_seq.at(ev[i].seq);
                ASSERT_EQ(rec->host, ev[i].domain);
                ASSERT_EQ(rec->referrer.has_value(), ev[i].referred);
                if (i > 0) {
                    ASSERT_LT(ev[i - 1].seq, ev[i].seq + (ev[i - 1].synthetic ? 1 : 0));
                    ASSERT_TRUE(rec->referrer);
                    ASSERT_EQ(rec->referrer->host, ev[i - 1].domain);
                }
            }
        }
        std::multiset<std::uint64_t> all;
        for (const auto& r : recs) {
            all.insert(r.seq);
        }
        ASSERT_EQ(seen, all);
    }
}

// With every domain visited at most once and referred to at most once, the
// chain decomposition that links wherever possible is unique. Find it by
// trying every subset of possible links.
std::set<std::vector<std::string>> brute_force_chains(const std::vector<TrafficRecord>& recs)
{
    const std::size_t n = recs.size();
    std::vector<std::optional<std::size_t>> candidate(n);
    std::vector<std::size_t> linkable;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (recs[i].referrer && recs[j].host == recs[i].referrer->host) {
                candidate[i] = j;
            }
        }
        if (candidate[i]) {
            linkable.push_back(i);
        }
    }
    std::vector<std::set<std::vector<std::string>>> maximal;
    for (std::uint32_t mask = 0; mask < (1u << linkable.size()); ++mask) {
        std::vector<std::optional<std::size_t>> pred(n);
        std::vector<int> used(n, 0);
        bool valid = true;
        for (std::size_t b = 0; b < linkable.size(); ++b) {
            if (mask & (1u << b)) {
                const auto i = linkable[b];
                pred[i] = candidate[i];
                valid = valid && ++used[*candidate[i]] == 1;
            }
        }
        if (!valid) {
            continue;
        }
        bool is_maximal = true;
        for (std::size_t i : linkable) {
            if (!pred[i] && used[*candidate[i]] == 0) {
                is_maximal = false;
            }
        }
        if (!is_maximal) {
            continue;
        }
        std::vector<std::optional<std::size_t>> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i]) {
                next[*pred[i]] = i;
            }
        }
        std::set<std::vector<std::string>> chains;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i]) {
                continue;
            }
            std::vector<std::string> chain;
            if (recs[i].referrer) {
                chain.push_back("~" + recs[i].referrer->host); // implied anchor
            }
            for (std::optional<std::size_t> k = i; k; k = next[*k]) {
                chain.push_back(recs[*k].host);
            }
            chains.insert(chain);
        }
        maximal.push_back(chains);
    }
    EXPECT_EQ(maximal.size(), 1u);
    return maximal.empty() ? std::set<std::vector<std::string>>{} : maximal.front();
}

TEST(Reconstruct, MatchesBruteForceDecompositionWithoutRepeatedDomains)
{
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n + 3; ++i) {
            names.push_back("h" + std::to_string(i));
        }
        std::shuffle(names.begin(), names.end(), rng);
        std::vector<std::string> referable = names; // includes 3 never-visited domains
        std::shuffle(referable.begin(), referable.end(), rng);
        std::vector<TrafficRecord> recs;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng() % 3 == 0 || referable.empty()) {
                recs.push_back(visit(i, names[i]));
            } else {
                auto ref = referable.back();
                referable.pop_back();
                recs.push_back(visit(i, names[i], ref == names[i] ? std::nullopt : std::optional(ref)));
            }
        }
        std::set<std::vector<std::string>> got;
        for (const auto& p : reconstruct(recs, kUnbounded)) {
            std::vector<std::string> chain;
            for (const auto& e : p.events) {
                chain.push_back(e.synthetic ? "~" + e.domain : e.domain);
            }
            got.insert(chain);
        }
        ASSERT_EQ(got, brute_force_chains(recs)) << "round " << round;
    }
}

TEST(ExportPathsCsv, Format)
{
    const auto paths = reconstruct(std::vector{visit(7, "b", "a")}, {});
    EXPECT_EQ(export_paths_csv(paths),
              "path_id,position,seq,domain,referred,synthetic\n"
              "0,0,7,a,false,true\n"
              "0,1,7,b,true,false\n");
}

} // namespace
} // namespace refgraph
