#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "crtbench/csv.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/matrix.hpp"

namespace crtbench {

enum class ColumnRole { input, output, commentary };

inline std::string role_name(ColumnRole r) {
    switch (r) {
        case ColumnRole::input: return "input";
        case ColumnRole::output: return "output";
        case ColumnRole::commentary: return "commentary";
    }
    return "?";
}

inline ColumnRole role_from_name(const std::string& s) {
    if (s == "input") return ColumnRole::input;
    if (s == "output") return ColumnRole::output;
    if (s == "commentary") return ColumnRole::commentary;
    throw SchemaError("unknown column role '" + s + "'");
}

struct ColumnSpec {
    std::string name;
    ColumnRole role = ColumnRole::input;
    // Tokens marking an unusable cell; empty list means the default set
    // {"", "NA", "NaN"}. Matching is case-insensitive on trimmed tokens.
    std::vector<std::string> illegitimate_tokens;
};

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline bool is_illegitimate_token(std::string_view token, const ColumnSpec& spec) {
    const std::string t = lower(detail::trim(token));
    if (spec.illegitimate_tokens.empty()) {
        if (t.empty() || t == "na" || t == "nan") return true;
    } else {
        for (const auto& bad : spec.illegitimate_tokens)
            if (t == lower(detail::trim(bad))) return true;
        if (t.empty()) return true;
    }
    // Numeric columns also reject anything that fails to parse.
    if (spec.role != ColumnRole::commentary && !parse_double(token)) return true;
    return false;
}

// Final analysis-ready dataset: all-numeric features plus binary labels
// (1 = responder).
struct Cohort {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t n_rows() const { return features.rows; }
    std::size_t n_features() const { return features.cols; }
};

// Reorders/validates a spec list against a table: every column must be
// covered exactly once and exactly one column carries the output role.
inline std::vector<ColumnSpec> align_specs(const RawTable& table,
                                           const std::vector<ColumnSpec>& specs) {
    std::vector<ColumnSpec> aligned;
    aligned.reserve(table.n_cols());
    for (const auto& name : table.column_names) {
        const ColumnSpec* found = nullptr;
        for (const auto& s : specs) {
            if (s.name == name) {
                if (found) throw SchemaError("column '" + name + "' specified twice");
                found = &s;
            }
        }
        if (!found) throw SchemaError("no role given for column '" + name + "'");
        aligned.push_back(*found);
    }
    if (specs.size() != table.n_cols())
        throw SchemaError("column spec names a column absent from the table");
    std::size_t outputs = 0;
    for (const auto& s : aligned)
        if (s.role == ColumnRole::output) ++outputs;
    if (outputs != 1)
        throw SchemaError("expected exactly one output column, found " +
                          std::to_string(outputs));
    return aligned;
}

} // namespace crtbench
