#pragma once

#include <cstdint>
#include <istream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace refgraph {

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

using DomainSet = std::unordered_set<std::string, StringHash, std::equal_to<>>;

struct Referrer {
    std::string host;
    std::string path;

    bool operator==(const Referrer&) const = default;
};

/// One sanitized HTTP metadata event. Port is carried along but is not
/// part of a website's identity.
struct TrafficRecord {
    std::uint64_t seq = 0;
    std::optional<std::int64_t> timestamp;
    std::string host;
    int port = 80;
    std::string path = "/";
    std::optional<Referrer> referrer;

    bool operator==(const TrafficRecord&) const = default;
};

struct ThreatIndicator {
    std::string domain;
    std::string source;
    std::optional<std::uint64_t> observed_seq;

    bool operator==(const ThreatIndicator&) const = default;
};

enum class FilterKind { exclude_destination_domain, exclude_destination_suffix };

struct FilterRule {
    FilterKind kind;
    std::string pattern;

    bool matches(std::string_view host) const;
};

/// Lowercases and strips scheme, userinfo-free port suffix and trailing dot.
/// Throws DataError for empty input or anything left that is not a
/// hostname character.
std::string normalize_domain(std::string_view raw);

/// Path component of `raw` with scheme/authority removed and everything from
/// the first '?' or '#' dropped. Never empty, always starts with a single
/// '/'. Idempotent.
std::string sanitize_uri(std::string_view raw);

/// Splits a referrer value (full URL, "//host/path" or bare "host/path")
/// into host and sanitized path. Relative or unparsable referrers give
/// nullopt; the visit is then treated as direct.
std::optional<Referrer> split_referrer(std::string_view raw);

/// Parses one JSON object. Unknown keys are ignored. Throws DataError on
/// malformed JSON, a missing/invalid host, or mistyped known fields.
TrafficRecord parse_record(std::string_view line, std::uint64_t seq);

struct IngestStats {
    std::uint64_t lines_read = 0;
    std::uint64_t accepted = 0;
    std::uint64_t skipped = 0;
    std::uint64_t filtered = 0;

    IngestStats& operator+=(const IngestStats& o);
};

/// Reads JSON Lines. seq is `first_seq` plus the zero-based line offset, so
/// it stays strictly increasing across files when callers chain
/// `first_seq = previous first_seq + lines_read`. Bad lines are skipped and
/// counted.
std::vector<TrafficRecord> read_traffic(std::istream& in, IngestStats& stats,
                                        std::uint64_t first_seq = 0);

std::vector<TrafficRecord> apply_filters(std::vector<TrafficRecord> records,
                                         const std::vector<FilterRule>& rules);

struct IndicatorLoad {
    std::vector<ThreatIndicator> indicators;
    std::size_t skipped = 0;
};

IndicatorLoad load_indicators(std::string_view text,
                              std::string_view source = "blocklist");

/// Lines of "domain:<d>" or "suffix:<s>"; '#' comments and blank lines are
/// ignored. Anything else throws DataError.
std::vector<FilterRule> parse_filter_rules(std::string_view text);

} // namespace refgraph
