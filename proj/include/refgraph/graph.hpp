#pragma once

#include "refgraph/ingest.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace refgraph {

using NodeId = std::uint32_t;

struct WebsiteNode {
    std::string domain;
    std::uint64_t visit_count = 0;
    bool is_threat = false;
};

/// Referrer -> visited. One edge per ordered pair; weight counts records.
struct ReferralEdge {
    NodeId from = 0;
    NodeId to = 0;
    std::uint64_t weight = 0;
    std::uint64_t first_seq = 0;
    std::uint64_t last_seq = 0;
};

/// Websites and the referrals observed between them. Built with
/// add_record/label_threats, then sealed; adjacency queries and the
/// distance functions require a sealed graph and sealed graphs reject
/// mutation.
class ReferralGraph {
public:
    void add_record(const TrafficRecord& record);

    /// Marks indicator domains as threats, creating zero-visit nodes for
    /// domains never seen in traffic. Returns the number of nodes newly
    /// labeled.
    std::size_t label_threats(const std::vector<ThreatIndicator>& indicators);

    void seal();
    bool sealed() const { return sealed_; }

    std::optional<NodeId> find(std::string_view domain) const;
    const WebsiteNode& node(NodeId id) const { return nodes_.at(id); }
    std::span<const WebsiteNode> nodes() const { return nodes_; }
    std::span<const ReferralEdge> edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    /// Sites a visitor on `id` was referred onward to.
    std::span<const NodeId> successors(NodeId id) const;
    /// Sites that referred visitors to `id`.
    std::span<const NodeId> predecessors(NodeId id) const;

    std::vector<std::string> threat_domains() const;

private:
    friend ReferralGraph load_snapshot(std::string_view nodes_csv, std::string_view edges_csv);

    NodeId ensure_node(std::string_view domain);
    void require_unsealed(const char* op) const;
    void require_sealed(const char* op) const;

    std::vector<WebsiteNode> nodes_;
    std::unordered_map<std::string, NodeId, StringHash, std::equal_to<>> index_;
    std::vector<ReferralEdge> edges_;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_index_;
    bool sealed_ = false;

    // CSR adjacency, filled by seal()
    std::vector<std::uint32_t> out_offsets_, in_offsets_;
    std::vector<NodeId> out_targets_, in_sources_;
};

/// Which way a hop is counted. toward_threat: a site is h hops out if a
/// visitor there can reach a threat in h referral clicks. threat_outward:
/// h is the number of referrals leading away from the threat.
enum class HopDirection { toward_threat, threat_outward };

inline constexpr int kDefaultMaxHops = 4;

struct HopMap {
    int max_hops = kDefaultMaxHops;
    std::map<std::string, int, std::less<>> distances;

    std::optional<int> distance(std::string_view domain) const;
    bool operator==(const HopMap&) const = default;
};

enum class Step { follow_referrals, against_referrals };

/// Breadth-first search from every source at once, stopping at `max_hops`.
/// Returns one entry per node; -1 where unreached.
std::vector<int> bounded_bfs(const ReferralGraph& graph, std::span<const NodeId> sources,
                             int max_hops, Step step);

HopMap hop_distances(const ReferralGraph& graph, int max_hops = kDefaultMaxHops,
                     HopDirection direction = HopDirection::toward_threat);

/// Related (non-threat) sites and their distance, sorted by domain.
std::vector<std::pair<std::string, int>> related_within(const ReferralGraph& graph,
                                                        int max_hops = kDefaultMaxHops,
                                                        HopDirection direction = HopDirection::toward_threat);

struct ThreatLink {
    NodeId threat = 0;
    int hop = 0;

    bool operator==(const ThreatLink&) const = default;
};

/// For every node, each threat within max_hops at its minimum distance,
/// ordered by (hop, threat domain). One bounded search per threat.
std::vector<std::vector<ThreatLink>> threat_links(const ReferralGraph& graph,
                                                  int max_hops = kDefaultMaxHops,
                                                  HopDirection direction = HopDirection::toward_threat);

std::string export_dot(const ReferralGraph& graph, const HopMap& hops,
                       const std::optional<std::string>& focus = std::nullopt, int radius = 2);

std::string export_edges_csv(const ReferralGraph& graph);
std::string export_nodes_csv(const ReferralGraph& graph);

/// Rebuilds a sealed graph from the two snapshot CSVs.
ReferralGraph load_snapshot(std::string_view nodes_csv, std::string_view edges_csv);

} // namespace refgraph
