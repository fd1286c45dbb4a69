#include "aircal/csv.hpp"

#include "aircal/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace aircal::csv {

std::optional<int> Table::column(std::string_view name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

char detect_delimiter(std::string_view header_line) {
    return header_line.find(';') != std::string_view::npos ? ';' : ',';
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

Table read_file(const std::string& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            table.delimiter = delimiter ? delimiter : detect_delimiter(line);
            table.header = split_line(line, table.delimiter);
            first = false;
            continue;
        }
        if (line.empty()) continue;
        table.rows.push_back(split_line(line, table.delimiter));
    }
    if (first) {
        // empty file: no header at all
        table.delimiter = delimiter ? delimiter : ',';
    }
    return table;
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    auto put_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << table.delimiter;
            out << row[i];
        }
        out << '\n';
    };
    put_row(table.header);
    for (const auto& row : table.rows) put_row(row);
    if (!out) throw DataError("write failed: " + path);
}

std::string format_double(double v, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
    return buf;
}

std::optional<double> parse_double(std::string_view field) {
    if (field.empty()) return std::nullopt;
    std::string s(field);
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) {
        throw DataError("not a number: '" + s + "'");
    }
    return v;
}

std::optional<long long> parse_int(std::string_view field) {
    if (field.empty()) return std::nullopt;
    std::string s(field);
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE) {
        throw DataError("not an integer: '" + s + "'");
    }
    return v;
}

} // namespace aircal::csv
