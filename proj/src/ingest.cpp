#include "refgraph/ingest.hpp"

#include "refgraph/errors.hpp"
#include "refgraph/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <unordered_set>

namespace refgraph {

namespace {

using json = nlohmann::json;

bool is_scheme_char(char c)
{
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '+' || c == '-' || c == '.';
}

// Length of a leading "scheme://" (including the separator), or 0.
std::size_t scheme_prefix(std::string_view s)
{
    const auto p = s.find("://");
    if (p == std::string_view::npos || p == 0) {
        return 0;
    }
    if (!std::isalpha(static_cast<unsigned char>(s[0]))) {
        return 0;
    }
    if (!std::all_of(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(p), is_scheme_char)) {
        return 0;
    }
    return p + 3;
}

bool is_host_char(char c)
{
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '.' || c == '_' || u >= 0x80;
}

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

} // namespace

bool FilterRule::matches(std::string_view host) const
{
    if (kind == FilterKind::exclude_destination_domain) {
        return host == pattern;
    }
    std::string_view suffix = pattern;
    while (!suffix.empty() && suffix.front() == '.') {
        suffix.remove_prefix(1);
    }
    if (host == suffix) {
        return true;
    }
    return host.size() > suffix.size() && host.ends_with(suffix)
        && host[host.size() - suffix.size() - 1] == '.';
}

std::string normalize_domain(std::string_view raw)
{
    std::string_view s = text::trim(raw);
    if (s.empty()) {
        throw DataError("empty domain");
    }
    std::string d = lowercase(s);
    if (const auto n = scheme_prefix(d); n > 0) {
        d.erase(0, n);
    }
    if (const auto colon = d.rfind(':'); colon != std::string::npos) {
        const std::string_view port = std::string_view(d).substr(colon + 1);
        if (!port.empty() && std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); })) {
            d.erase(colon);
        }
    }
    while (!d.empty() && d.back() == '.') {
        d.pop_back();
    }
    if (d.empty()) {
        throw DataError("empty domain in '" + std::string(raw) + "'");
    }
    if (!std::all_of(d.begin(), d.end(), is_host_char)) {
        throw DataError("invalid domain '" + std::string(raw) + "'");
    }
    return d;
}

std::string sanitize_uri(std::string_view raw)
{
    std::string_view s = raw;
    std::size_t authority_start = scheme_prefix(s);
    if (authority_start == 0 && s.starts_with("//")) {
        authority_start = 2;
    }
    if (authority_start > 0) {
        s.remove_prefix(authority_start);
        const auto end = s.find_first_of("/?#");
        s = end == std::string_view::npos ? std::string_view{} : s.substr(end);
    }
    s = s.substr(0, s.find_first_of("?#"));
    while (!s.empty() && s.front() == '/') {
        s.remove_prefix(1);
    }
    std::string out;
    out.reserve(s.size() + 1);
    out.push_back('/');
    out.append(s);
    return out;
}

std::optional<Referrer> split_referrer(std::string_view raw)
{
    std::string_view s = text::trim(raw);
    if (s.empty()) {
        return std::nullopt;
    }
    if (const auto n = scheme_prefix(s); n > 0) {
        s.remove_prefix(n);
    } else if (s.starts_with("//")) {
        s.remove_prefix(2);
    } else if (s.front() == '/' || s.front() == '?' || s.front() == '#' || s.front() == '.') {
        return std::nullopt; // relative reference, no host to attribute
    }
    const auto end = std::min(s.find_first_of("/?#"), s.size());
    std::string_view authority = s.substr(0, end);
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority.remove_prefix(at + 1);
    }
    try {
        return Referrer{normalize_domain(authority), sanitize_uri(s.substr(end))};
    } catch (const DataError&) {
        return std::nullopt;
    }
}

TrafficRecord parse_record(std::string_view line, std::uint64_t seq)
{
    const json obj = json::parse(line.begin(), line.end(), nullptr, false);
    if (obj.is_discarded()) {
        throw DataError("malformed JSON");
    }
    if (!obj.is_object()) {
        throw DataError("record is not a JSON object");
    }

    TrafficRecord rec;
    rec.seq = seq;

    const auto host = obj.find("host");
    if (host == obj.end() || !host->is_string()) {
        throw DataError("missing host");
    }
    rec.host = normalize_domain(host->get_ref<const std::string&>());

    if (const auto port = obj.find("port"); port != obj.end() && !port->is_null()) {
        if (!port->is_number_integer()) {
            throw DataError("port is not an integer");
        }
        const auto p = port->get<std::int64_t>();
        if (p < 0 || p > 65535) {
            throw DataError("port out of range");
        }
        rec.port = static_cast<int>(p);
    }

    if (const auto uri = obj.find("uri"); uri != obj.end() && !uri->is_null()) {
        if (!uri->is_string()) {
            throw DataError("uri is not a string");
        }
        rec.path = sanitize_uri(uri->get_ref<const std::string&>());
    }

    for (const char* key : {"referer", "referrer"}) {
        const auto ref = obj.find(key);
        if (ref == obj.end() || ref->is_null()) {
            continue;
        }
        if (!ref->is_string()) {
            throw DataError(std::string(key) + " is not a string");
        }
        rec.referrer = split_referrer(ref->get_ref<const std::string&>());
        break;
    }

    if (const auto ts = obj.find("ts"); ts != obj.end() && !ts->is_null()) {
        if (!ts->is_number_integer()) {
            throw DataError("ts is not an integer");
        }
        rec.timestamp = ts->get<std::int64_t>();
    }
    return rec;
}

IngestStats& IngestStats::operator+=(const IngestStats& o)
{
    lines_read += o.lines_read;
    accepted += o.accepted;
    skipped += o.skipped;
    filtered += o.filtered;
    return *this;
}

std::vector<TrafficRecord> read_traffic(std::istream& in, IngestStats& stats,
                                        std::uint64_t first_seq)
{
    std::vector<TrafficRecord> out;
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
        ++stats.lines_read;
        const std::uint64_t seq = first_seq + offset++;
        try {
            out.push_back(parse_record(line, seq));
            ++stats.accepted;
        } catch (const DataError&) {
            ++stats.skipped;
        }
    }
    return out;
}

std::vector<TrafficRecord> apply_filters(std::vector<TrafficRecord> records,
                                         const std::vector<FilterRule>& rules)
{
    if (rules.empty()) {
        return records;
    }
    std::erase_if(records, [&](const TrafficRecord& r) {
        return std::any_of(rules.begin(), rules.end(),
                           [&](const FilterRule& rule) { return rule.matches(r.host); });
    });
    return records;
}

IndicatorLoad load_indicators(std::string_view text, std::string_view source)
{
    IndicatorLoad load;
    std::unordered_set<std::string> seen;
    for (auto line : text::lines(text)) {
        line = text::trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        std::string domain;
        try {
            domain = normalize_domain(line);
        } catch (const DataError&) {
            ++load.skipped;
            continue;
        }
        if (seen.insert(domain).second) {
            load.indicators.push_back({std::move(domain), std::string(source), std::nullopt});
        }
    }
    return load;
}

std::vector<FilterRule> parse_filter_rules(std::string_view text)
{
    std::vector<FilterRule> rules;
    for (auto line : text::lines(text)) {
        line = text::trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        FilterRule rule{};
        std::string_view pattern;
        if (line.starts_with("domain:")) {
            rule.kind = FilterKind::exclude_destination_domain;
            pattern = line.substr(7);
        } else if (line.starts_with("suffix:")) {
            rule.kind = FilterKind::exclude_destination_suffix;
            pattern = line.substr(7);
        } else {
            throw DataError("unrecognized filter rule '" + std::string(line) + "'");
        }
        rule.pattern = normalize_domain(pattern);
        if (rule.kind == FilterKind::exclude_destination_suffix
            && rule.pattern.find_first_not_of('.') == std::string::npos) {
            throw DataError("empty suffix pattern");
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

} // namespace refgraph
