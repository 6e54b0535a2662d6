#pragma once

// CSV reading/writing: comma-separated, '.'-decimal, LF line endings.
// Doubles are written with shortest round-trip precision (std::to_chars),
// so write-then-read reproduces values bit for bit.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/linalg.hpp"

namespace shiftlab::csv {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& file, std::size_t line) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw io_error(file + ":" + std::to_string(line) + ": bad numeric cell '" +
                       std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split_row(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return cells;
}

// Cells are kept as raw text; numeric parsing happens on access so tables
// may mix labels and values. Errors name the file and source line.
struct Table {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // source line of each row

    std::size_t col_index(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return j;
        throw validation_error(file + ": no such column: " + name);
    }

    const std::string& text(std::size_t row, const std::string& name) const {
        return rows[row][col_index(name)];
    }

    double number_at(std::size_t row, std::size_t col) const {
        return parse_double(rows[row][col], file, lines[row]);
    }

    double number(std::size_t row, const std::string& name) const {
        return number_at(row, col_index(name));
    }

    Vector column(const std::string& name) const {
        const std::size_t j = col_index(name);
        Vector out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) out[i] = number_at(i, j);
        return out;
    }
};

// Reads a table with a header row; ragged rows are reported with file and
// line number.
inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());

    Table t;
    t.file = path.string();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line.empty()) throw io_error(t.file + ":1: empty header row");
            t.header = split_row(line);
            continue;
        }
        if (line.empty()) continue;  // tolerate a trailing blank line
        auto cells = split_row(line);
        if (cells.size() != t.header.size())
            throw io_error(t.file + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(t.header.size()) + " cells, got " +
                           std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
        t.lines.push_back(lineno);
    }
    if (lineno == 0) throw io_error(t.file + ":1: missing header row");
    return t;
}

inline void write_row(std::ostream& out, std::span<const double> row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ',';
        out << format_double(row[j]);
    }
    out << '\n';
}

inline void write_header(std::ostream& out, std::span<const std::string> names) {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j) out << ',';
        out << names[j];
    }
    out << '\n';
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);  // binary: keep LF on every platform
    if (!out) throw io_error("cannot write " + path.string());
    return out;
}

}  // namespace shiftlab::csv
