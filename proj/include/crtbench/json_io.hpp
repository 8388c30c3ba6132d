#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtbench/cohort.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/metrics.hpp"
#include "crtbench/preprocess.hpp"

namespace crtbench {

using Json = nlohmann::json; // ordered by key -> stable dumps

inline std::string read_text_file(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) throw ConfigError("file not found: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EmissionError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw EmissionError("write failed: " + path);
}

// FNV-1a over the canonical (sorted-key, no-whitespace) dump; hex string.
inline std::string config_hash(const Json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline Json parse_json(const std::string& text, const std::string& what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON in " + what);
    return j;
}

// --- column specs --------------------------------------------------------

inline std::vector<ColumnSpec> column_specs_from_json(const Json& j) {
    if (!j.is_array()) throw SchemaError("column spec: expected a JSON array");
    std::vector<ColumnSpec> specs;
    for (const auto& item : j) {
        if (!item.is_object()) throw SchemaError("column spec: entries must be objects");
        ColumnSpec spec;
        if (!item.contains("name") || !item["name"].is_string())
            throw SchemaError("column spec: entry missing string 'name'");
        spec.name = item["name"].get<std::string>();
        if (!item.contains("role") || !item["role"].is_string())
            throw SchemaError("column spec '" + spec.name + "': missing string 'role'");
        spec.role = role_from_name(item["role"].get<std::string>());
        if (item.contains("illegitimate_tokens")) {
            if (!item["illegitimate_tokens"].is_array())
                throw SchemaError("column spec '" + spec.name +
                                  "': illegitimate_tokens must be an array");
            for (const auto& t : item["illegitimate_tokens"]) {
                if (!t.is_string())
                    throw SchemaError("column spec '" + spec.name +
                                      "': illegitimate_tokens must hold strings");
                spec.illegitimate_tokens.push_back(t.get<std::string>());
            }
        }
        for (const auto& key : item.items())
            if (key.key() != "name" && key.key() != "role" &&
                key.key() != "illegitimate_tokens")
                throw SchemaError("column spec '" + spec.name + "': unknown key '" +
                                  key.key() + "'");
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw SchemaError("column spec: empty array");
    return specs;
}

inline Json column_specs_to_json(const std::vector<ColumnSpec>& specs) {
    Json arr = Json::array();
    for (const auto& s : specs) {
        Json item{{"name", s.name}, {"role", role_name(s.role)}};
        if (!s.illegitimate_tokens.empty())
            item["illegitimate_tokens"] = s.illegitimate_tokens;
        arr.push_back(std::move(item));
    }
    return arr;
}

// --- result serializers ----------------------------------------------------

inline Json to_json(const ConfusionMatrix& cm) {
    return Json{{"true_positive", cm.tp},
                {"false_negative", cm.fn},
                {"true_negative", cm.tn},
                {"false_positive", cm.fp}};
}

inline Json to_json(const EvalResult& r) {
    return Json{{"counts", to_json(r.counts)},
                {"sensitivity", r.sensitivity},
                {"specificity", r.specificity},
                {"accuracy", r.accuracy}};
}

inline Json to_json(const PreprocessReport& r) {
    return Json{{"rows_in", r.rows_in},
                {"rows_dropped_missing", r.rows_dropped_missing},
                {"rows_out", r.rows_out},
                {"cols_in", r.cols_in},
                {"cols_commentary", r.cols_commentary},
                {"cols_constant", r.cols_constant},
                {"cols_duplicate", r.cols_duplicate},
                {"cols_out", r.cols_out},
                {"imputed_cells", r.imputed_cells},
                {"normalization", r.normalization},
                {"fit_on", r.fit_on},
                {"dropped_rows", r.dropped_rows},
                {"dropped_constant_columns", r.dropped_constant_columns},
                {"dropped_duplicate_columns", r.dropped_duplicate_columns},
                {"warnings", r.warnings}};
}

// Envelope shared by every JSON report the tool writes.
inline Json report_envelope(const std::string& kind, const Json& config_json,
                            std::uint64_t master_seed) {
    return Json{{"schema_version", 1},
                {"kind", kind},
                {"config_hash", config_hash(config_json)},
                {"master_seed", master_seed}};
}

} // namespace crtbench
