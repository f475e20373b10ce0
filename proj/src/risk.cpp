#include "refgraph/risk.hpp"

#include "refgraph/errors.hpp"
#include "refgraph/text.hpp"

#include <algorithm>
#include <cmath>

namespace refgraph {

namespace {

RiskScore make_score(std::string domain, std::vector<RiskContribution> contributions,
                     const RiskThresholds& thresholds)
{
    double sum = 0.0;
    for (const auto& c : contributions) {
        sum += c.weight;
    }
    RiskScore s{std::move(domain), std::min(kMaxRisk, sum), std::move(contributions), RiskBand::silent};
    s.band = band(s.value, thresholds);
    return s;
}

} // namespace

void RiskWeights::validate() const
{
    if (!(base > 0.0) || !std::isfinite(base)) {
        throw UsageError("risk base must be positive");
    }
    if (!(decay > 0.0 && decay <= 1.0)) {
        throw UsageError("risk decay must be in (0, 1]");
    }
    if (max_hops < 1) {
        throw UsageError("max hops must be at least 1");
    }
}

double RiskWeights::weight(int hop) const
{
    return base * std::pow(decay, hop - 1);
}

void RiskThresholds::validate() const
{
    if (!(0.0 <= warn_at && warn_at <= block_at && block_at <= kMaxRisk)) {
        throw UsageError("thresholds must satisfy 0 <= warn_at <= block_at <= 10");
    }
}

std::string_view to_string(RiskBand band)
{
    switch (band) {
    case RiskBand::silent: return "silent";
    case RiskBand::warn: return "warn";
    case RiskBand::block: return "block";
    }
    return "unknown";
}

RiskBand band(double value, const RiskThresholds& thresholds)
{
    thresholds.validate();
    if (!(value >= 0.0 && value <= kMaxRisk)) {
        throw UsageError("risk value out of range [0, 10]");
    }
    if (value < thresholds.warn_at) {
        return RiskBand::silent;
    }
    return value <= thresholds.block_at ? RiskBand::warn : RiskBand::block;
}

RiskScore score(const ReferralGraph& graph, std::string_view domain, const RiskWeights& weights,
                const RiskThresholds& thresholds, HopDirection direction)
{
    weights.validate();
    const auto id = graph.find(domain);
    if (!id) {
        throw UsageError("unknown domain '" + std::string(domain) + "'");
    }
    if (graph.node(*id).is_threat) {
        return make_score(std::string(domain), {{std::string(domain), 0, kMaxRisk}}, thresholds);
    }
    // From the site's side the search runs opposite to the threat-rooted one.
    const Step step = direction == HopDirection::toward_threat ? Step::follow_referrals : Step::against_referrals;
    const NodeId src[] = {*id};
    const auto dist = bounded_bfs(graph, src, weights.max_hops, step);

    std::vector<RiskContribution> contributions;
    for (NodeId n = 0; n < graph.node_count(); ++n) {
        if (dist[n] >= 1 && graph.node(n).is_threat) {
            contributions.push_back({graph.node(n).domain, dist[n], weights.weight(dist[n])});
        }
    }
    std::sort(contributions.begin(), contributions.end(), [](const auto& a, const auto& b) {
        return a.hop != b.hop ? a.hop < b.hop : a.threat < b.threat;
    });
    return make_score(std::string(domain), std::move(contributions), thresholds);
}

std::vector<RiskScore> score_all(const ReferralGraph& graph, std::span<const std::vector<ThreatLink>> links,
                                 const RiskWeights& weights, const RiskThresholds& thresholds)
{
    weights.validate();
    thresholds.validate();
    if (links.size() != graph.node_count()) {
        throw UsageError("threat links do not match the graph");
    }
    std::vector<RiskScore> out;
    for (NodeId id = 0; id < graph.node_count(); ++id) {
        const auto& n = graph.node(id);
        if (n.is_threat || links[id].empty()) {
            continue;
        }
        std::vector<RiskContribution> contributions;
        for (const auto& l : links[id]) {
            if (l.hop > weights.max_hops) {
                throw UsageError("threat links were built for more hops than the weights allow");
            }
            contributions.push_back({graph.node(l.threat).domain, l.hop, weights.weight(l.hop)});
        }
        out.push_back(make_score(n.domain, std::move(contributions), thresholds));
    }
    std::sort(out.begin(), out.end(), [](const RiskScore& a, const RiskScore& b) {
        return a.value != b.value ? a.value > b.value : a.domain < b.domain;
    });
    return out;
}

std::string scores_csv(std::span<const RiskScore> scores)
{
    std::string out = "domain,score,band,contributions\n";
    for (const auto& s : scores) {
        out += s.domain + ',' + text::fixed(s.value, 3) + ',' + std::string(to_string(s.band)) + ',';
        for (std::size_t i = 0; i < s.contributions.size(); ++i) {
            if (i > 0) {
                out += '|';
            }
            out += s.contributions[i].threat + '@' + std::to_string(s.contributions[i].hop);
        }
        out += '\n';
    }
    return out;
}

} // namespace refgraph
