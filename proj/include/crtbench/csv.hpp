#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crtbench/errors.hpp"

namespace crtbench {

// Raw string table as read from disk: header plus row-major token cells.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> cells;

    std::size_t n_rows() const { return cells.size(); }
    std::size_t n_cols() const { return column_names.size(); }
};

namespace detail {
inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return std::string(s.substr(b, e - b));
}
} // namespace detail

// Shortest round-trip decimal rendering.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Full-token finite parse; anything else (text, inf, nan, partial) is nullopt.
inline std::optional<double> parse_double(std::string_view token) {
    const std::string t = detail::trim(token);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

// State-machine CSV reader: quoted fields (commas, newlines, "" escapes),
// LF/CRLF/CR line breaks, blank lines skipped. Errors carry 1-based line
// numbers of the offending record.
inline RawTable parse_table(std::string_view text) {
    if (text.empty()) throw ParseError("empty input: no header row");

    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;

    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool after_closing_quote = false;
    std::size_t line = 1;
    std::size_t record_start_line = 1;
    bool at_field_start = true;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        at_field_start = true;
        field_was_quoted = false;
        after_closing_quote = false;
    };
    auto end_record = [&] {
        end_field();
        // A lone empty field from a blank line is not a record.
        if (!(record.size() == 1 && record[0].empty())) {
            records.push_back(std::move(record));
            record_lines.push_back(record_start_line);
        }
        record = {};
        record_start_line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                    after_closing_quote = true;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (after_closing_quote && c != ',' && c != '\n' && c != '\r') {
            throw ParseError("line " + std::to_string(line) +
                             ": unexpected character after closing quote");
        }
        if (c == '"' && at_field_start) {
            in_quotes = true;
            field_was_quoted = true;
            at_field_start = false;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            ++line;
            end_record();
        } else if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            ++line;
            end_record();
        } else {
            field += c;
            at_field_start = false;
        }
    }
    if (in_quotes)
        throw ParseError("line " + std::to_string(record_start_line) +
                         ": unterminated quoted field");
    // Final record without trailing newline.
    if (!field.empty() || !record.empty() || field_was_quoted || after_closing_quote)
        end_record();

    if (records.empty()) throw ParseError("empty input: no header row");

    RawTable table;
    table.column_names = records.front();
    for (std::size_t i = 0; i < table.column_names.size(); ++i)
        for (std::size_t j = i + 1; j < table.column_names.size(); ++j)
            if (table.column_names[i] == table.column_names[j])
                throw SchemaError("duplicate column name '" + table.column_names[i] + "'");

    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.column_names.size())
            throw ParseError("line " + std::to_string(record_lines[r]) + ": row has " +
                             std::to_string(records[r].size()) + " fields, expected " +
                             std::to_string(table.column_names.size()));
        table.cells.push_back(std::move(records[r]));
    }
    return table;
}

inline void write_csv_field(std::string& out, std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) {
        out += field;
        return;
    }
    out += '"';
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

inline std::string write_table(const RawTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
        if (c) out += ',';
        write_csv_field(out, table.column_names[c]);
    }
    out += '\n';
    for (const auto& row : table.cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            write_csv_field(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

} // namespace crtbench
