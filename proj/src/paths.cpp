#include "refgraph/paths.hpp"

#include "refgraph/errors.hpp"

#include <unordered_map>

namespace refgraph {

namespace {

struct OpenTail {
    std::uint32_t path;
    std::uint32_t length; // stale once the path has grown past this
};

} // namespace

SessionWindow default_window(std::span<const TrafficRecord> records)
{
    std::optional<std::int64_t> prev;
    for (const auto& r : records) {
        if (!r.timestamp || (prev && *r.timestamp < *prev)) {
            return {kDefaultWindowSeq, WindowUnit::seq};
        }
        prev = r.timestamp;
    }
    return {kDefaultWindowSeconds, WindowUnit::seconds};
}

std::vector<NavigationPath> reconstruct(std::span<const TrafficRecord> records, SessionWindow window)
{
    if (window.span < 0) {
        throw UsageError("session window must be non-negative");
    }
    std::vector<NavigationPath> paths;
    std::vector<std::int64_t> last_time;
    std::unordered_map<std::string, std::vector<OpenTail>, StringHash, std::equal_to<>> open;

    auto push_open = [&](const std::string& domain, std::uint32_t path) {
        const auto len = static_cast<std::uint32_t>(paths[path].events.size());
        auto it = open.find(domain);
        if (it == open.end()) {
            it = open.emplace(domain, std::vector<OpenTail>{}).first;
        }
        it->second.push_back({path, len});
    };

    std::optional<std::uint64_t> prev_seq;
    std::optional<std::int64_t> prev_ts;
    for (const auto& r : records) {
        if (prev_seq && r.seq <= *prev_seq) {
            throw UsageError("records are not in seq order at seq " + std::to_string(r.seq));
        }
        prev_seq = r.seq;
        std::int64_t now = static_cast<std::int64_t>(r.seq);
        if (window.unit == WindowUnit::seconds) {
            if (!r.timestamp) {
                throw UsageError("seconds window needs a timestamp on every record");
            }
            if (prev_ts && *r.timestamp < *prev_ts) {
                throw UsageError("timestamps decrease at seq " + std::to_string(r.seq));
            }
            now = *r.timestamp;
            prev_ts = now;
        }

        std::optional<std::uint32_t> target;
        if (r.referrer) {
            if (const auto it = open.find(r.referrer->host); it != open.end()) {
                auto& tails = it->second;
                while (!tails.empty()) {
                    const OpenTail tail = tails.back();
                    if (paths[tail.path].events.size() != tail.length) {
                        tails.pop_back();
                        continue;
                    }
                    if (now - last_time[tail.path] <= window.span) {
                        target = tail.path;
                        tails.pop_back();
                    } else {
                        tails.clear(); // everything older is out of the window too
                    }
                    break;
                }
            }
        }

        if (!target) {
            target = static_cast<std::uint32_t>(paths.size());
            paths.push_back({paths.size(), {}});
            last_time.push_back(now);
            if (r.referrer) {
                paths.back().events.push_back({r.seq, r.referrer->host, false, true});
            }
        }
        paths[*target].events.push_back({r.seq, r.host, r.referrer.has_value(), false});
        last_time[*target] = now;
        push_open(r.host, *target);
    }
    return paths;
}

bool reaches_threat(const NavigationPath& path, std::size_t from_index, const DomainSet& threats)
{
    if (from_index >= path.events.size()) {
        throw UsageError("event index " + std::to_string(from_index) + " out of range");
    }
    for (std::size_t i = from_index + 1; i < path.events.size(); ++i) {
        if (threats.contains(path.events[i].domain)) {
            return true;
        }
    }
    return false;
}

std::string export_paths_csv(std::span<const NavigationPath> paths)
{
    std::string out = "path_id,position,seq,domain,referred,synthetic\n";
    for (const auto& p : paths) {
        for (std::size_t i = 0; i < p.events.size(); ++i) {
            const auto& e = p.events[i];
            out += std::to_string(p.id) + ',' + std::to_string(i) + ',' + std::to_string(e.seq) + ','
                + e.domain + ',' + (e.referred ? "true" : "false") + ',' + (e.synthetic ? "true" : "false") + '\n';
        }
    }
    return out;
}

} // namespace refgraph
