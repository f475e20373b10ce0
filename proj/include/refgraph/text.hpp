#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the readers and writers.
namespace refgraph::text {

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits on '\n', dropping a trailing '\r' from each line. A final empty
/// line after the last '\n' is not reported.
std::vector<std::string_view> lines(std::string_view s);

/// Rounds half away from zero to `places` decimals and renders fixed-point.
std::string fixed(double value, int places);

/// `fixed` for a possibly-undefined ratio; undefined renders as "NA".
std::string fixed_or_na(const std::optional<double>& value, int places);

std::optional<long long> parse_int(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace refgraph::text
