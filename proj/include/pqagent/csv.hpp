#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "pqagent/error.hpp"

namespace pqagent {

/// Empty, numeric or text field.
using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw Error("Table: row width does not match the header");
        rows.push_back(std::move(row));
    }
};

namespace detail {
inline std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_cell(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return {};
    if (const auto* s = std::get_if<std::string>(&c)) return quote_field(*s);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const double v = std::get<double>(c);
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
}  // namespace detail

/// RFC 4180 quoting, '\n' line endings, '.' decimals.
inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) os << ',';
        os << detail::quote_field(t.columns[i]);
    }
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << detail::format_cell(row[i]);
        }
        os << '\n';
    }
}

/// Writes through a temporary file and renames it into place, so a failed write leaves
/// nothing behind.
inline void write_csv_file(const std::filesystem::path& path, const Table& t) {
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        write_csv(os, t);
        if (!os) {
            os.close();
            std::filesystem::remove(tmp);
            throw Error("failed while writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace pqagent
