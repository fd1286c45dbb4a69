#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aircal {

/// Minimal delimited-text handling. Fields never contain the delimiter, so
/// no quoting is needed anywhere in the pipeline formats.
namespace csv {

struct Table {
    char delimiter = ',';
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index for a header name, or nullopt.
    std::optional<int> column(std::string_view name) const;
};

/// Detect ';' vs ',' from a header line: whichever occurs, ';' wins when both do.
char detect_delimiter(std::string_view header_line);

std::vector<std::string> split_line(std::string_view line, char delimiter);

/// Read a whole file; delimiter auto-detected from the header when 0.
Table read_file(const std::string& path, char delimiter = 0);

void write_file(const std::string& path, const Table& table);

/// Format a double with the given number of significant digits ("%.*g").
std::string format_double(double v, int significant_digits);

/// Strict double parse; empty returns nullopt, garbage throws DataError.
std::optional<double> parse_double(std::string_view field);

std::optional<long long> parse_int(std::string_view field);

} // namespace csv

} // namespace aircal
