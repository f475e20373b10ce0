#include "refgraph/graph.hpp"

#include "refgraph/errors.hpp"
#include "refgraph/text.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace refgraph {

namespace {

std::uint64_t edge_key(NodeId from, NodeId to)
{
    return (static_cast<std::uint64_t>(from) << 32) | to;
}

std::string dot_quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void build_csr(std::size_t n, const std::vector<ReferralEdge>& edges, bool outgoing,
               std::vector<std::uint32_t>& offsets, std::vector<NodeId>& targets)
{
    offsets.assign(n + 1, 0);
    for (const auto& e : edges) {
        ++offsets[(outgoing ? e.from : e.to) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] += offsets[i];
    }
    targets.assign(edges.size(), 0);
    auto cursor = offsets;
    for (const auto& e : edges) {
        const NodeId key = outgoing ? e.from : e.to;
        targets[cursor[key]++] = outgoing ? e.to : e.from;
    }
}

std::uint64_t parse_count(std::string_view field, const char* what)
{
    const auto v = text::parse_int(field);
    if (!v || *v < 0) {
        throw DataError(std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    return static_cast<std::uint64_t>(*v);
}

} // namespace

void ReferralGraph::require_unsealed(const char* op) const
{
    if (sealed_) {
        throw UsageError(std::string(op) + " on a sealed graph");
    }
}

void ReferralGraph::require_sealed(const char* op) const
{
    if (!sealed_) {
        throw UsageError(std::string(op) + " requires a sealed graph");
    }
}

NodeId ReferralGraph::ensure_node(std::string_view domain)
{
    if (const auto it = index_.find(domain); it != index_.end()) {
        return it->second;
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({std::string(domain), 0, false});
    index_.emplace(std::string(domain), id);
    return id;
}

void ReferralGraph::add_record(const TrafficRecord& record)
{
    require_unsealed("add_record");
    const NodeId to = ensure_node(record.host);
    ++nodes_[to].visit_count;
    if (!record.referrer || record.referrer->host == record.host) {
        return;
    }
    const NodeId from = ensure_node(record.referrer->host);
    const auto [it, inserted] = edge_index_.try_emplace(edge_key(from, to), static_cast<std::uint32_t>(edges_.size()));
    if (inserted) {
        edges_.push_back({from, to, 1, record.seq, record.seq});
        return;
    }
    auto& e = edges_[it->second];
    ++e.weight;
    e.first_seq = std::min(e.first_seq, record.seq);
    e.last_seq = std::max(e.last_seq, record.seq);
}

std::size_t ReferralGraph::label_threats(const std::vector<ThreatIndicator>& indicators)
{
    require_unsealed("label_threats");
    std::size_t labeled = 0;
    for (const auto& ind : indicators) {
        auto& n = nodes_[ensure_node(ind.domain)];
        if (!n.is_threat) {
            n.is_threat = true;
            ++labeled;
        }
    }
    return labeled;
}

void ReferralGraph::seal()
{
    if (sealed_) {
        return;
    }
    build_csr(nodes_.size(), edges_, true, out_offsets_, out_targets_);
    build_csr(nodes_.size(), edges_, false, in_offsets_, in_sources_);
    sealed_ = true;
}

std::optional<NodeId> ReferralGraph::find(std::string_view domain) const
{
    if (const auto it = index_.find(domain); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::span<const NodeId> ReferralGraph::successors(NodeId id) const
{
    require_sealed("successors");
    return std::span(out_targets_).subspan(out_offsets_.at(id), out_offsets_[id + 1] - out_offsets_[id]);
}

std::span<const NodeId> ReferralGraph::predecessors(NodeId id) const
{
    require_sealed("predecessors");
    return std::span(in_sources_).subspan(in_offsets_.at(id), in_offsets_[id + 1] - in_offsets_[id]);
}

std::vector<std::string> ReferralGraph::threat_domains() const
{
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (n.is_threat) {
            out.push_back(n.domain);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<int> HopMap::distance(std::string_view domain) const
{
    if (const auto it = distances.find(domain); it != distances.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::vector<int> bounded_bfs(const ReferralGraph& graph, std::span<const NodeId> sources,
                             int max_hops, Step step)
{
    std::vector<int> dist(graph.node_count(), -1);
    std::deque<NodeId> queue;
    for (NodeId s : sources) {
        if (dist.at(s) != 0) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const NodeId cur = queue.front();
        queue.pop_front();
        if (dist[cur] >= max_hops) {
            continue;
        }
        const auto next = step == Step::follow_referrals ? graph.successors(cur) : graph.predecessors(cur);
        for (NodeId n : next) {
            if (dist[n] < 0) {
                dist[n] = dist[cur] + 1;
                queue.push_back(n);
            }
        }
    }
    return dist;
}

HopMap hop_distances(const ReferralGraph& graph, int max_hops, HopDirection direction)
{
    if (max_hops < 1) {
        throw UsageError("max hops must be at least 1");
    }
    if (!graph.sealed()) {
        throw UsageError("hop_distances requires a sealed graph");
    }
    std::vector<NodeId> threats;
    for (NodeId id = 0; id < graph.node_count(); ++id) {
        if (graph.node(id).is_threat) {
            threats.push_back(id);
        }
    }
    // toward_threat: d(x) = 1 + min d(successor), so search walks referrals backwards.
    const Step step = direction == HopDirection::toward_threat ? Step::against_referrals : Step::follow_referrals;
    const auto dist = bounded_bfs(graph, threats, max_hops, step);

    HopMap hops;
    hops.max_hops = max_hops;
    for (NodeId id = 0; id < graph.node_count(); ++id) {
        if (dist[id] >= 0) {
            hops.distances.emplace(graph.node(id).domain, dist[id]);
        }
    }
    return hops;
}

std::vector<std::pair<std::string, int>> related_within(const ReferralGraph& graph, int max_hops,
                                                        HopDirection direction)
{
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [domain, h] : hop_distances(graph, max_hops, direction).distances) {
        if (h >= 1) {
            out.emplace_back(domain, h);
        }
    }
    return out;
}

std::vector<std::vector<ThreatLink>> threat_links(const ReferralGraph& graph, int max_hops,
                                                  HopDirection direction)
{
    if (max_hops < 1) {
        throw UsageError("max hops must be at least 1");
    }
    const Step step = direction == HopDirection::toward_threat ? Step::against_referrals : Step::follow_referrals;
    std::vector<std::vector<ThreatLink>> links(graph.node_count());
    for (const auto& domain : graph.threat_domains()) {
        const NodeId t = *graph.find(domain);
        const NodeId src[] = {t};
        const auto dist = bounded_bfs(graph, src, max_hops, step);
        for (NodeId id = 0; id < graph.node_count(); ++id) {
            if (dist[id] >= 1) {
                links[id].push_back({t, dist[id]});
            }
        }
    }
    // threats were visited in domain order, so a stable sort on hop gives (hop, domain)
    for (auto& l : links) {
        std::stable_sort(l.begin(), l.end(), [](const ThreatLink& a, const ThreatLink& b) { return a.hop < b.hop; });
    }
    return links;
}

std::string export_dot(const ReferralGraph& graph, const HopMap& hops,
                       const std::optional<std::string>& focus, int radius)
{
    std::vector<bool> keep(graph.node_count(), true);
    if (focus) {
        const auto id = graph.find(*focus);
        if (!id) {
            throw UsageError("unknown focus domain '" + *focus + "'");
        }
        if (radius < 0) {
            throw UsageError("radius must be non-negative");
        }
        std::vector<int> dist(graph.node_count(), -1);
        std::deque<NodeId> queue{*id};
        dist[*id] = 0;
        while (!queue.empty()) {
            const NodeId cur = queue.front();
            queue.pop_front();
            if (dist[cur] >= radius) {
                continue;
            }
            for (auto nbrs : {graph.successors(cur), graph.predecessors(cur)}) {
                for (NodeId n : nbrs) {
                    if (dist[n] < 0) {
                        dist[n] = dist[cur] + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        for (NodeId i = 0; i < graph.node_count(); ++i) {
            keep[i] = dist[i] >= 0;
        }
    }

    std::vector<std::string> node_lines;
    for (NodeId i = 0; i < graph.node_count(); ++i) {
        if (!keep[i]) {
            continue;
        }
        const auto& n = graph.node(i);
        std::string label = n.domain;
        if (n.is_threat) {
            label += "\\nthreat";
        } else if (const auto h = hops.distance(n.domain)) {
            label += "\\nhop " + std::to_string(*h);
        }
        std::string line = "  " + dot_quote(n.domain) + " [label=\"" + label + "\"";
        if (n.is_threat) {
            line += ", shape=box, style=filled, fillcolor=\"#f4cccc\"";
        }
        line += "];";
        node_lines.push_back(std::move(line));
    }
    std::vector<std::string> edge_lines;
    for (const auto& e : graph.edges()) {
        if (keep[e.from] && keep[e.to]) {
            edge_lines.push_back("  " + dot_quote(graph.node(e.from).domain) + " -> "
                                 + dot_quote(graph.node(e.to).domain) + " [label=\""
                                 + std::to_string(e.weight) + "\"];");
        }
    }
    std::sort(node_lines.begin(), node_lines.end());
    std::sort(edge_lines.begin(), edge_lines.end());

    std::string out = "digraph referrals {\n  rankdir=LR;\n";
    for (const auto& l : node_lines) {
        out += l;
        out += '\n';
    }
    for (const auto& l : edge_lines) {
        out += l;
        out += '\n';
    }
    out += "}\n";
    return out;
}

std::string export_edges_csv(const ReferralGraph& graph)
{
    std::vector<const ReferralEdge*> sorted;
    sorted.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) {
        sorted.push_back(&e);
    }
    std::sort(sorted.begin(), sorted.end(), [&](const ReferralEdge* a, const ReferralEdge* b) {
        const auto& af = graph.node(a->from).domain;
        const auto& bf = graph.node(b->from).domain;
        if (af != bf) {
            return af < bf;
        }
        return graph.node(a->to).domain < graph.node(b->to).domain;
    });
    std::string out = "from,to,weight,first_seq,last_seq\n";
    for (const auto* e : sorted) {
        out += graph.node(e->from).domain + ',' + graph.node(e->to).domain + ','
            + std::to_string(e->weight) + ',' + std::to_string(e->first_seq) + ','
            + std::to_string(e->last_seq) + '\n';
    }
    return out;
}

std::string export_nodes_csv(const ReferralGraph& graph)
{
    std::vector<const WebsiteNode*> sorted;
    for (const auto& n : graph.nodes()) {
        sorted.push_back(&n);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const WebsiteNode* a, const WebsiteNode* b) { return a->domain < b->domain; });
    std::string out = "domain,visit_count,is_threat\n";
    for (const auto* n : sorted) {
        out += n->domain + ',' + std::to_string(n->visit_count) + ',' + (n->is_threat ? "true" : "false") + '\n';
    }
    return out;
}

ReferralGraph load_snapshot(std::string_view nodes_csv, std::string_view edges_csv)
{
    ReferralGraph g;
    auto node_rows = text::lines(nodes_csv);
    if (node_rows.empty() || node_rows.front() != "domain,visit_count,is_threat") {
        throw DataError("nodes snapshot: bad header");
    }
    for (std::size_t i = 1; i < node_rows.size(); ++i) {
        if (node_rows[i].empty()) {
            continue;
        }
        const auto f = text::split(node_rows[i], ',');
        if (f.size() != 3 || (f[2] != "true" && f[2] != "false")) {
            throw DataError("nodes snapshot: bad row " + std::to_string(i + 1));
        }
        const std::string domain = normalize_domain(f[0]);
        if (g.find(domain)) {
            throw DataError("nodes snapshot: duplicate domain " + domain);
        }
        auto& n = g.nodes_[g.ensure_node(domain)];
        n.visit_count = parse_count(f[1], "visit_count");
        n.is_threat = f[2] == "true";
    }

    auto edge_rows = text::lines(edges_csv);
    if (edge_rows.empty() || edge_rows.front() != "from,to,weight,first_seq,last_seq") {
        throw DataError("edges snapshot: bad header");
    }
    for (std::size_t i = 1; i < edge_rows.size(); ++i) {
        if (edge_rows[i].empty()) {
            continue;
        }
        const auto f = text::split(edge_rows[i], ',');
        if (f.size() != 5) {
            throw DataError("edges snapshot: bad row " + std::to_string(i + 1));
        }
        const auto from = g.find(f[0]);
        const auto to = g.find(f[1]);
        if (!from || !to || *from == *to) {
            throw DataError("edges snapshot: bad endpoints on row " + std::to_string(i + 1));
        }
        ReferralEdge e{*from, *to, parse_count(f[2], "weight"), parse_count(f[3], "first_seq"),
                       parse_count(f[4], "last_seq")};
        if (e.weight < 1 || e.first_seq > e.last_seq) {
            throw DataError("edges snapshot: inconsistent row " + std::to_string(i + 1));
        }
        if (!g.edge_index_.try_emplace(edge_key(e.from, e.to), static_cast<std::uint32_t>(g.edges_.size())).second) {
            throw DataError("edges snapshot: duplicate edge on row " + std::to_string(i + 1));
        }
        g.edges_.push_back(e);
    }
    g.seal();
    return g;
}

} // namespace refgraph
