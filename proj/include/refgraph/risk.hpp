#pragma once

#include "refgraph/graph.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refgraph {

/// Each threat within max_hops adds base * decay^(hop - 1).
struct RiskWeights {
    double base = 4.0;
    double decay = 0.5;
    int max_hops = kDefaultMaxHops;

    void validate() const;
    double weight(int hop) const;
};

struct RiskThresholds {
    double warn_at = 5.0;
    double block_at = 7.0;

    void validate() const;
};

enum class RiskBand { silent, warn, block };

std::string_view to_string(RiskBand band);

struct RiskContribution {
    std::string threat;
    int hop = 0;
    double weight = 0.0;

    bool operator==(const RiskContribution&) const = default;
};

struct RiskScore {
    std::string domain;
    double value = 0.0;
    std::vector<RiskContribution> contributions;
    RiskBand band = RiskBand::silent;

    bool operator==(const RiskScore&) const = default;
};

inline constexpr double kMaxRisk = 10.0;

/// silent below warn_at, warn up to and including block_at, block above.
RiskBand band(double value, const RiskThresholds& thresholds = {});

/// Scores one site by searching outward from it. A threat scores the
/// maximum with a single hop-0 contribution for itself.
RiskScore score(const ReferralGraph& graph, std::string_view domain, const RiskWeights& weights = {},
                const RiskThresholds& thresholds = {},
                HopDirection direction = HopDirection::toward_threat);

/// Every non-threat site with at least one contribution, highest score first
/// and domain order among ties. `links` comes from threat_links with the
/// same max_hops.
std::vector<RiskScore> score_all(const ReferralGraph& graph,
                                 std::span<const std::vector<ThreatLink>> links,
                                 const RiskWeights& weights = {}, const RiskThresholds& thresholds = {});

/// "domain,score,band,contributions" with contributions as "threat@hop|...".
std::string scores_csv(std::span<const RiskScore> scores);

} // namespace refgraph
