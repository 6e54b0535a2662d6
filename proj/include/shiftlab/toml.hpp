#pragma once

// Minimal TOML subset parser for experiment configs: [tables], bare keys,
// strings, integers, floats, booleans, flat arrays, and # comments.
// Keys are flattened to "table.key". Errors carry file and line.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "shiftlab/common.hpp"

namespace shiftlab::toml {

struct Value {
    enum class Kind { boolean, integer, real, string, array };
    Kind kind = Kind::string;
    bool b = false;
    std::int64_t i = 0;
    double d = 0.0;
    std::string s;
    std::vector<Value> items;

    double as_number() const {
        if (kind == Kind::integer) return static_cast<double>(i);
        if (kind == Kind::real) return d;
        throw validation_error("config value is not a number");
    }
};

using Table = std::map<std::string, Value>;

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

inline Value parse_scalar(const std::string& tok, const std::string& where) {
    Value v;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.kind = Value::Kind::string;
        std::string out;
        for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
            if (tok[i] == '\\' && i + 2 < tok.size()) {
                ++i;
                switch (tok[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw validation_error(where + ": bad escape in string");
                }
            } else {
                out += tok[i];
            }
        }
        v.s = std::move(out);
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.kind = Value::Kind::boolean;
        v.b = (tok == "true");
        return v;
    }
    // integer first, then float
    {
        std::int64_t iv = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (res.ec == std::errc{} && res.ptr == tok.data() + tok.size()) {
            v.kind = Value::Kind::integer;
            v.i = iv;
            return v;
        }
    }
    {
        double dv = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
        if (res.ec == std::errc{} && res.ptr == tok.data() + tok.size()) {
            v.kind = Value::Kind::real;
            v.d = dv;
            return v;
        }
    }
    throw validation_error(where + ": cannot parse value '" + tok + "'");
}

inline std::vector<std::string> split_array_items(const std::string& body,
                                                  const std::string& where) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = trim(cur);
    if (!last.empty()) items.push_back(last);
    for (const auto& it : items)
        if (it.empty()) throw validation_error(where + ": empty array element");
    return items;
}

}  // namespace detail

inline Table parse(const std::string& text, const std::string& filename = "<config>") {
    Table out;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = filename + ":" + std::to_string(lineno);
        std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw validation_error(where + ": unterminated table header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!detail::valid_key(section))
                throw validation_error(where + ": bad table name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error(where + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (!detail::valid_key(key)) throw validation_error(where + ": bad key '" + key + "'");
        const std::string val = detail::trim(line.substr(eq + 1));
        if (val.empty()) throw validation_error(where + ": missing value for '" + key + "'");

        Value v;
        if (val.front() == '[') {
            if (val.back() != ']') throw validation_error(where + ": unterminated array");
            v.kind = Value::Kind::array;
            for (const auto& item :
                 detail::split_array_items(val.substr(1, val.size() - 2), where))
                v.items.push_back(detail::parse_scalar(item, where));
        } else {
            v = detail::parse_scalar(val, where);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full)) throw validation_error(where + ": duplicate key '" + full + "'");
        out.emplace(full, std::move(v));
    }
    return out;
}

inline Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

}  // namespace shiftlab::toml
