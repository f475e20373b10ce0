#include "refgraph/synth.hpp"

#include "refgraph/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

namespace refgraph {

namespace {

using json = nlohmann::json;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

// Bellman-Ford style: after round r every distance <= r is final.
std::map<std::string, int, std::less<>> relax_distances(std::span<const DomainEdge> edges,
                                                         const DomainSet& threats, int max_hops)
{
    std::map<std::string, int, std::less<>> dist;
    for (const auto& t : threats) {
        dist[t] = 0;
    }
    for (int round = 0; round < max_hops; ++round) {
        std::vector<std::pair<std::string, int>> updates;
        for (const auto& [from, to] : edges) {
            if (from == to) {
                continue;
            }
            const auto it = dist.find(to);
            if (it == dist.end() || it->second >= max_hops) {
                continue;
            }
            const int candidate = it->second + 1;
            const auto cur = dist.find(from);
            if (cur == dist.end() || candidate < cur->second) {
                updates.emplace_back(from, candidate);
            }
        }
        if (updates.empty()) {
            break;
        }
        for (auto& [d, h] : updates) {
            auto [it, inserted] = dist.try_emplace(d, h);
            if (!inserted) {
                it->second = std::min(it->second, h);
            }
        }
    }
    return dist;
}

std::string site_name(std::size_t i, std::size_t n)
{
    const int width = n <= 1 ? 1 : static_cast<int>(std::to_string(n - 1).size());
    char buf[48];
    std::snprintf(buf, sizeof buf, "site%0*zu.example", width, i);
    return buf;
}

} // namespace

void SynthParams::validate() const
{
    if (n_sites < 1) {
        throw UsageError("n_sites must be at least 1");
    }
    if (n_threats > n_sites) {
        throw UsageError("n_threats cannot exceed n_sites");
    }
    if (!(edge_density > 0.0 && edge_density < 1.0)) {
        throw UsageError("edge_density must be in (0, 1)");
    }
    if (!(click_through >= 0.0 && click_through <= 1.0)) {
        throw UsageError("click_through must be in [0, 1]");
    }
    if (max_len < 1) {
        throw UsageError("max_len must be at least 1");
    }
    if (max_hops < 1) {
        throw UsageError("max_hops must be at least 1");
    }
}

SynthDataset generate(const SynthParams& params)
{
    params.validate();
    Rng rng(params.seed);
    const std::size_t n = params.n_sites;

    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(site_name(i, n));
    }

    std::vector<std::vector<std::size_t>> out_edges(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && rng.uniform() < params.edge_density) {
                out_edges[i].push_back(j);
            }
        }
    }

    // Partial Fisher-Yates for the threat subset.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::vector<bool> is_threat(n, false);
    for (std::size_t k = 0; k < params.n_threats; ++k) {
        std::swap(order[k], order[k + rng.below(n - k)]);
        is_threat[order[k]] = true;
    }
    DomainSet threats;
    std::vector<std::string> threat_list;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_threat[i]) {
            threats.insert(names[i]);
            threat_list.push_back(names[i]);
        }
    }

    SynthDataset ds;
    std::set<std::pair<std::size_t, std::size_t>> walked;
    json outcomes = json::object();
    std::int64_t ts = 1'600'000'000;
    char line[512];

    for (std::size_t p = 0; p < params.n_paths; ++p) {
        std::size_t cur = rng.below(n);
        std::size_t len = 1;
        bool reached = false;
        std::snprintf(line, sizeof line, "{\"host\":\"%s\",\"port\":80,\"uri\":\"/p%zu?sid=%zu\",\"ts\":%lld}\n",
                      names[cur].c_str(), rng.below(50), rng.below(100000), static_cast<long long>(ts));
        ds.traffic_jsonl += line;
        ++ds.record_count;
        while (len < params.max_len && !out_edges[cur].empty() && rng.uniform() < params.click_through) {
            const std::size_t next = out_edges[cur][rng.below(out_edges[cur].size())];
            ts += 1 + static_cast<std::int64_t>(rng.below(30));
            std::snprintf(line, sizeof line,
                          "{\"host\":\"%s\",\"port\":80,\"uri\":\"/p%zu?sid=%zu\",\"referer\":\"http://%s/p%zu?utm=%zu#top\",\"ts\":%lld}\n",
                          names[next].c_str(), rng.below(50), rng.below(100000), names[cur].c_str(), rng.below(50),
                          rng.below(1000), static_cast<long long>(ts));
            ds.traffic_jsonl += line;
            ++ds.record_count;
            walked.emplace(cur, next);
            reached = reached || is_threat[next];
            cur = next;
            ++len;
        }
        outcomes[std::to_string(p)] = reached;
        ts += 60 + static_cast<std::int64_t>(rng.below(600));
    }

    std::vector<DomainEdge> edges;
    edges.reserve(walked.size());
    for (const auto& [a, b] : walked) {
        edges.emplace_back(names[a], names[b]);
    }
    json distances = json::object();
    for (const auto& [d, h] : relax_distances(edges, threats, params.max_hops)) {
        distances[d] = h;
    }

    for (const auto& t : threat_list) {
        ds.indicators += t;
        ds.indicators += '\n';
    }
    json manifest = {
        {"distances", std::move(distances)},
        {"paths", std::move(outcomes)},
        {"threats", threat_list},
        {"max_hops", params.max_hops},
        {"seed", params.seed},
    };
    ds.manifest_json = manifest.dump(1) + "\n";
    return ds;
}

SynthManifest parse_manifest(std::string_view json_text)
{
    const json j = json::parse(json_text.begin(), json_text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw DataError("manifest is not a JSON object");
    }
    SynthManifest m;
    try {
        m.max_hops = j.value("max_hops", kDefaultMaxHops);
        for (const auto& [d, h] : j.at("distances").items()) {
            m.distances.emplace(d, h.get<int>());
        }
        for (const auto& [id, reached] : j.at("paths").items()) {
            m.path_reached_threat.emplace(std::stoull(id), reached.get<bool>());
        }
        m.threats = j.at("threats").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
        throw DataError(std::string("manifest: ") + e.what());
    }
    return m;
}

HopMap oracle_hops(std::span<const DomainEdge> edges, const DomainSet& threats, int max_hops)
{
    if (edges.size() > kOracleMaxEdges) {
        throw UsageError("oracle_hops handles at most " + std::to_string(kOracleMaxEdges) + " edges");
    }
    if (max_hops < 1) {
        throw UsageError("max hops must be at least 1");
    }
    HopMap hops;
    hops.max_hops = max_hops;
    hops.distances = relax_distances(edges, threats, max_hops);
    return hops;
}

std::vector<ConfusionMatrix> oracle_classify(std::span<const TrafficRecord> records, const DomainSet& threats,
                                             int max_hops, SessionWindow window)
{
    if (records.size() > kOracleMaxRecords) {
        throw UsageError("oracle_classify handles at most " + std::to_string(kOracleMaxRecords) + " records");
    }
    if (max_hops < 1) {
        throw UsageError("max hops must be at least 1");
    }
    const std::size_t n = records.size();

    auto time_of = [&](std::size_t i) -> std::int64_t {
        if (window.unit == WindowUnit::seq) {
            return static_cast<std::int64_t>(records[i].seq);
        }
        if (!records[i].timestamp) {
            throw UsageError("seconds window needs timestamps");
        }
        return *records[i].timestamp;
    };

    // Chain stitching: a referred record joins the path of the latest earlier
    // record on the referrer's domain that is still the end of its path.
    std::vector<std::size_t> path_of(n);
    std::vector<bool> is_tail(n, false);
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && records[i].seq <= records[i - 1].seq) {
            throw UsageError("records are not in seq order");
        }
        if (i > 0 && time_of(i) < time_of(i - 1)) {
            throw UsageError("timestamps decrease");
        }
        std::optional<std::size_t> joined;
        if (records[i].referrer) {
            for (std::size_t j = i; j-- > 0;) {
                if (time_of(i) - time_of(j) > window.span) {
                    break;
                }
                if (is_tail[j] && records[j].host == records[i].referrer->host) {
                    joined = j;
                    break;
                }
            }
        }
        if (joined) {
            is_tail[*joined] = false;
            path_of[i] = path_of[*joined];
            members[path_of[i]].push_back(i);
        } else {
            path_of[i] = members.size();
            members.push_back({i});
        }
        is_tail[i] = true;
    }

    std::vector<DomainEdge> edges;
    for (const auto& r : records) {
        if (r.referrer && r.referrer->host != r.host) {
            edges.emplace_back(r.referrer->host, r.host);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const auto dist = relax_distances(edges, threats, max_hops);

    std::vector<ConfusionMatrix> m;
    for (int h = 0; h <= max_hops; ++h) {
        m.push_back({h, 0, 0, 0, 0});
    }
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        const bool referred = r.referrer.has_value();
        if (threats.contains(r.host)) {
            // a referred arrival at a threat, or a direct hit the model cannot see
            referred ? ++m[0].tp : ++fn;
            continue;
        }
        const auto d = dist.find(r.host);
        if (d == dist.end()) {
            ++tn; // not related to any known threat
            continue;
        }
        bool visited_threat_afterwards = false;
        for (std::size_t k : members[path_of[i]]) {
            if (k > i && threats.contains(records[k].host)) {
                visited_threat_afterwards = true;
            }
        }
        visited_threat_afterwards ? ++m[d->second].tp : ++m[d->second].fp;
        if (!referred) {
            ++m[0].fp; // related site reached without referring traffic
        }
    }
    for (auto& c : m) {
        c.fn = fn;
        c.tn = tn;
    }
    return m;
}

} // namespace refgraph
