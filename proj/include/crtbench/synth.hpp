#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "crtbench/cohort.hpp"
#include "crtbench/csv.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/rng.hpp"

namespace crtbench {

// Knobs for a synthetic patient table with known ground truth. Defaults
// mirror the reference shape: 1045 raw rows of 80 columns (18 commentary +
// 55 inputs + 3 constants + 3 affine duplicates + 1 output), 215 rows built
// to fail the missing-value filter, survivors split 412/418 by class.
struct GeneratorConfig {
    std::size_t n_rows = 1045;
    std::size_t n_input_cols = 55;
    std::size_t class0_count = 412; // non-responders among surviving rows
    std::size_t class1_count = 418; // responders among surviving rows
    // Inter-class mean shift, in within-class standard deviations, applied to
    // every informative column.
    double separability = 1.0;
    double missing_cell_rate = 0.01;
    std::size_t n_rows_over_threshold = 215;
    std::size_t missing_threshold = 10;
    std::size_t commentary_cols = 18;
    std::size_t constant_cols = 3;
    std::size_t duplicate_cols = 3;
    std::size_t informative_cols = 10;
    // Fraction of the non-informative input columns quantized to {0,1,2}.
    double categorical_fraction = 0.3;
    std::uint64_t seed = 0;

    std::size_t total_cols() const {
        return commentary_cols + n_input_cols + constant_cols + duplicate_cols + 1;
    }
};

struct SynthCohort {
    std::string csv_text;
    std::string sidecar_json; // column roles, consumed by the preprocessor
    std::string truth_csv;    // row,label for every generated data row
    std::vector<int> labels;  // all rows, aligned with the CSV body
    std::vector<std::size_t> doomed_rows; // rows built to exceed the threshold
    std::vector<std::string> informative_names;
};

namespace detail {

inline void validate_generator_config(const GeneratorConfig& c) {
    if (c.n_input_cols < 1) throw ConfigError("generator: need at least one input column");
    if (c.n_rows_over_threshold > c.n_rows)
        throw ConfigError("generator: more doomed rows than rows");
    if (c.class0_count + c.class1_count != c.n_rows - c.n_rows_over_threshold)
        throw ConfigError("generator: class counts must sum to surviving rows");
    if (c.class0_count == 0 || c.class1_count == 0)
        throw ConfigError("generator: both classes need at least one surviving row");
    if (c.informative_cols > c.n_input_cols)
        throw ConfigError("generator: more informative columns than input columns");
    if (c.duplicate_cols > c.n_input_cols)
        throw ConfigError("generator: more duplicate columns than source columns");
    if (c.n_input_cols < c.missing_threshold + 1)
        throw ConfigError("generator: input columns cannot hold enough missing cells "
                          "to exceed the threshold");
    if (c.separability < 0) throw ConfigError("generator: separability must be >= 0");
    if (!(c.missing_cell_rate >= 0 && c.missing_cell_rate < 1))
        throw ConfigError("generator: missing_cell_rate must lie in [0,1)");
    if (!(c.categorical_fraction >= 0 && c.categorical_fraction <= 1))
        throw ConfigError("generator: categorical_fraction must lie in [0,1]");
}

inline std::string pad2(std::size_t v) {
    return (v < 10 ? "0" : "") + std::to_string(v);
}

} // namespace detail

// Deterministic synthetic table: class-conditional Gaussians on the
// informative columns, noise elsewhere, planted commentary/constant/affine-
// duplicate columns, and missing tokens injected so that exactly
// n_rows_over_threshold rows exceed the filter threshold.
inline SynthCohort generate(const GeneratorConfig& config) {
    detail::validate_generator_config(config);
    const std::size_t n = config.n_rows;
    const std::size_t d = config.n_input_cols;

    Rng layout_rng(derive_seed(config.seed, "layout"));
    Rng value_rng(derive_seed(config.seed, "values"));
    Rng missing_rng(derive_seed(config.seed, "missing"));

    // --- column plan ------------------------------------------------------
    const auto informative = layout_rng.sample_without_replacement(d, config.informative_cols);
    std::vector<bool> is_informative(d, false);
    for (const auto c : informative) is_informative[c] = true;

    std::vector<std::size_t> noise_cols;
    for (std::size_t c = 0; c < d; ++c)
        if (!is_informative[c]) noise_cols.push_back(c);
    const auto n_categorical = static_cast<std::size_t>(
        std::floor(config.categorical_fraction * double(noise_cols.size())));
    std::vector<bool> is_categorical(d, false);
    if (n_categorical > 0) {
        const auto pick = layout_rng.sample_without_replacement(noise_cols.size(), n_categorical);
        for (const auto i : pick) is_categorical[noise_cols[i]] = true;
    }

    // Continuous columns get disparate units (scales spanning decades).
    std::vector<double> col_scale(d, 1.0), col_offset(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        if (is_categorical[c]) continue;
        col_scale[c] = std::exp(layout_rng.uniform(std::log(0.1), std::log(1000.0)));
        col_offset[c] = layout_rng.uniform(-5.0, 5.0) * col_scale[c];
    }

    struct DupPlan {
        std::size_t source;
        double a, b;
    };
    std::vector<DupPlan> dups;
    if (config.duplicate_cols > 0) {
        const auto sources = layout_rng.sample_without_replacement(d, config.duplicate_cols);
        for (const auto s : sources)
            // Positive slope keeps the correlation at +1.
            dups.push_back({s, layout_rng.uniform(0.5, 2.0), layout_rng.uniform(-1.0, 1.0)});
    }
    std::vector<double> constants;
    for (std::size_t i = 0; i < config.constant_cols; ++i)
        constants.push_back(layout_rng.uniform(-10.0, 10.0));

    // --- row plan -----------------------------------------------------------
    SynthCohort out;
    std::vector<bool> doomed(n, false);
    {
        const auto pick = missing_rng.sample_without_replacement(n, config.n_rows_over_threshold);
        out.doomed_rows.assign(pick.begin(), pick.end());
        std::sort(out.doomed_rows.begin(), out.doomed_rows.end());
        for (const auto r : out.doomed_rows) doomed[r] = true;
    }
    out.labels.assign(n, 0);
    {
        std::vector<int> survivor_labels(config.class1_count, 1);
        survivor_labels.resize(config.class0_count + config.class1_count, 0);
        Rng label_rng(derive_seed(config.seed, "labels"));
        label_rng.shuffle(survivor_labels);
        std::size_t next = 0;
        for (std::size_t r = 0; r < n; ++r)
            out.labels[r] = doomed[r] ? static_cast<int>(label_rng.below(2))
                                      : survivor_labels[next++];
    }

    // --- values ---------------------------------------------------------------
    const double tertile = 0.43072729929545756; // standard normal 1/3 quantile
    Matrix values(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double raw = value_rng.normal();
            if (is_categorical[c]) {
                values(r, c) = raw < -tertile ? 0.0 : (raw < tertile ? 1.0 : 2.0);
            } else {
                const double shift =
                    is_informative[c] && out.labels[r] == 1 ? config.separability : 0.0;
                values(r, c) = (raw + shift) * col_scale[c] + col_offset[c];
            }
        }
    }

    // --- missing-cell plan -------------------------------------------------
    // missing[r][c] over input columns only. Duplicate columns mirror their
    // source's holes, so a hole in a duplicated source counts extra toward the
    // per-row total; survivors stay at or under the threshold and every column
    // keeps at least one observed survivor value.
    std::vector<std::size_t> dup_mirrors(d, 0);
    for (const auto& dup : dups) ++dup_mirrors[dup.source];
    std::vector<std::vector<bool>> missing(n, std::vector<bool>(d, false));
    std::vector<std::size_t> col_legit(d, n - config.n_rows_over_threshold);
    const char* tokens[3] = {"", "NA", "NaN"};
    std::vector<std::string> missing_token(3);
    for (int i = 0; i < 3; ++i) missing_token[i] = tokens[i];

    for (std::size_t r = 0; r < n; ++r) {
        if (doomed[r]) {
            const std::size_t k = config.missing_threshold + 1 +
                                  missing_rng.below(std::min<std::uint64_t>(
                                      5, d - config.missing_threshold));
            const auto cols = missing_rng.sample_without_replacement(d, k);
            for (const auto c : cols) missing[r][c] = true;
        } else if (config.missing_cell_rate > 0) {
            std::size_t injected = 0;
            for (std::size_t c = 0; c < d; ++c) {
                const std::size_t cost = 1 + dup_mirrors[c];
                if (injected + cost > config.missing_threshold) continue;
                if (missing_rng.uniform() >= config.missing_cell_rate) continue;
                if (col_legit[c] <= 1) continue; // keep the column imputable
                missing[r][c] = true;
                --col_legit[c];
                injected += cost;
            }
        }
    }

    // --- assemble the table --------------------------------------------------
    RawTable table;
    std::vector<std::string> roles;
    for (std::size_t i = 0; i < config.commentary_cols; ++i) {
        table.column_names.push_back("note_" + detail::pad2(i + 1));
        roles.push_back("commentary");
    }
    std::vector<std::string> input_names(d);
    for (std::size_t c = 0; c < d; ++c) {
        input_names[c] = "p" + detail::pad2(c + 1);
        table.column_names.push_back(input_names[c]);
        roles.push_back("input");
    }
    for (std::size_t i = 0; i < config.constant_cols; ++i) {
        table.column_names.push_back("const_" + std::to_string(i + 1));
        roles.push_back("input");
    }
    for (std::size_t i = 0; i < dups.size(); ++i) {
        table.column_names.push_back("dup_" + std::to_string(i + 1));
        roles.push_back("input");
    }
    table.column_names.push_back("response");
    roles.push_back("output");

    for (const auto c : informative) out.informative_names.push_back(input_names[c]);
    std::sort(out.informative_names.begin(), out.informative_names.end());

    table.cells.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::string> row;
        row.reserve(table.column_names.size());
        for (std::size_t i = 0; i < config.commentary_cols; ++i)
            row.push_back("obs-" + std::to_string(r) + "-w" + std::to_string(i + 1));
        for (std::size_t c = 0; c < d; ++c)
            row.push_back(missing[r][c] ? missing_token[missing_rng.below(3)]
                                        : fmt_double(values(r, c)));
        for (const auto v : constants) row.push_back(fmt_double(v));
        for (const auto& dup : dups)
            row.push_back(missing[r][dup.source]
                              ? missing_token[missing_rng.below(3)]
                              : fmt_double(dup.a * values(r, dup.source) + dup.b));
        row.push_back(std::to_string(out.labels[r]));
        table.cells.push_back(std::move(row));
    }
    out.csv_text = write_table(table);

    // --- sidecar + truth --------------------------------------------------
    std::string sidecar = "[\n";
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
        sidecar += "  {\"name\": \"" + table.column_names[c] + "\", \"role\": \"" +
                   roles[c] + "\"}";
        sidecar += c + 1 < table.column_names.size() ? ",\n" : "\n";
    }
    sidecar += "]\n";
    out.sidecar_json = std::move(sidecar);

    std::string truth = "row,label\n";
    for (std::size_t r = 0; r < n; ++r)
        truth += std::to_string(r) + "," + std::to_string(out.labels[r]) + "\n";
    out.truth_csv = std::move(truth);
    return out;
}

} // namespace crtbench
