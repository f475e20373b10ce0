#pragma once

#include "refgraph/ingest.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace refgraph {

/// One page load within a navigation chain. A synthetic event stands in for
/// a referrer page whose own record was not captured; it carries the seq of
/// the record that implied it and always sits at position 0.
struct VisitEvent {
    std::uint64_t seq = 0;
    std::string domain;
    bool referred = false;
    bool synthetic = false;

    bool operator==(const VisitEvent&) const = default;
};

struct NavigationPath {
    std::uint64_t id = 0;
    std::vector<VisitEvent> events;

    bool operator==(const NavigationPath&) const = default;
};

enum class WindowUnit { seq, seconds };

struct SessionWindow {
    std::int64_t span = 10'000;
    WindowUnit unit = WindowUnit::seq;
};

inline constexpr std::int64_t kDefaultWindowSeconds = 1800;
inline constexpr std::int64_t kDefaultWindowSeq = 10'000;

/// Seconds (1800) when every record has a timestamp and timestamps never go
/// backwards, otherwise seq units (10000).
SessionWindow default_window(std::span<const TrafficRecord> records);

/// Stitches records into referrer chains. A record without a referrer opens
/// a path; a record referred by R extends the most recently extended open
/// path whose latest event is on R and no older than the window, or else
/// opens a new path anchored on a synthetic R event. Path ids follow
/// creation order.
///
/// Throws UsageError when seq is not strictly increasing, or in seconds
/// mode when a timestamp is missing or decreases.
std::vector<NavigationPath> reconstruct(std::span<const TrafficRecord> records, SessionWindow window);

/// True iff some event after `from_index` is on a threat domain.
bool reaches_threat(const NavigationPath& path, std::size_t from_index, const DomainSet& threats);

/// "path_id,position,seq,domain,referred,synthetic"
std::string export_paths_csv(std::span<const NavigationPath> paths);

} // namespace refgraph
