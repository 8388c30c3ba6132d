#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crtbench/cohort.hpp"
#include "crtbench/csv.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/matrix.hpp"
#include "crtbench/rng.hpp"

namespace crtbench {

// ---------------------------------------------------------------- row filter

struct RowFilterResult {
    RawTable table;
    std::vector<std::size_t> dropped_rows;
};

// Drops every row whose illegitimate-cell count strictly exceeds the
// threshold; survivor order is preserved.
inline RowFilterResult filter_incomplete_rows(const RawTable& table,
                                              const std::vector<ColumnSpec>& specs,
                                              std::size_t threshold = 10) {
    const auto aligned = align_specs(table, specs);
    RowFilterResult out;
    out.table.column_names = table.column_names;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::size_t bad = 0;
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            if (is_illegitimate_token(table.cells[r][c], aligned[c])) ++bad;
        if (bad > threshold)
            out.dropped_rows.push_back(r);
        else
            out.table.cells.push_back(table.cells[r]);
    }
    return out;
}

// --------------------------------------------------------- commentary columns

struct ColumnDropResult {
    RawTable table;
    std::vector<ColumnSpec> specs;
    std::vector<std::string> dropped_names;
};

inline ColumnDropResult drop_commentary_columns(const RawTable& table,
                                                const std::vector<ColumnSpec>& specs) {
    const auto aligned = align_specs(table, specs);
    ColumnDropResult out;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < aligned.size(); ++c) {
        if (aligned[c].role == ColumnRole::commentary)
            out.dropped_names.push_back(aligned[c].name);
        else {
            keep.push_back(c);
            out.table.column_names.push_back(table.column_names[c]);
            out.specs.push_back(aligned[c]);
        }
    }
    out.table.cells.reserve(table.n_rows());
    for (const auto& row : table.cells) {
        std::vector<std::string> kept;
        kept.reserve(keep.size());
        for (const auto c : keep) kept.push_back(row[c]);
        out.table.cells.push_back(std::move(kept));
    }
    return out;
}

// ------------------------------------------------------------- numeric view

// Numeric projection of the surviving columns; `legit` marks cells that held
// a usable value (everything else awaits imputation).
struct NumericTable {
    std::vector<std::string> names;
    std::vector<ColumnRole> roles;
    Matrix values;
    std::vector<std::vector<bool>> legit; // [row][col]
};

inline NumericTable to_numeric(const RawTable& table, const std::vector<ColumnSpec>& specs) {
    const auto aligned = align_specs(table, specs);
    NumericTable nt;
    nt.names = table.column_names;
    for (const auto& s : aligned) nt.roles.push_back(s.role);
    nt.values = Matrix(table.n_rows(), table.n_cols());
    nt.legit.assign(table.n_rows(), std::vector<bool>(table.n_cols(), false));
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < table.n_cols(); ++c) {
            if (is_illegitimate_token(table.cells[r][c], aligned[c])) continue;
            const auto v = parse_double(table.cells[r][c]);
            nt.values(r, c) = *v;
            nt.legit[r][c] = true;
        }
    }
    return nt;
}

namespace detail {

inline NumericTable keep_columns(const NumericTable& nt, const std::vector<std::size_t>& keep) {
    NumericTable out;
    out.values = Matrix(nt.values.rows, keep.size());
    out.legit.assign(nt.values.rows, std::vector<bool>(keep.size(), false));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.names.push_back(nt.names[keep[i]]);
        out.roles.push_back(nt.roles[keep[i]]);
        for (std::size_t r = 0; r < nt.values.rows; ++r) {
            out.values(r, i) = nt.values(r, keep[i]);
            out.legit[r][i] = nt.legit[r][keep[i]];
        }
    }
    return out;
}

} // namespace detail

struct NumericDropResult {
    NumericTable table;
    std::vector<std::string> dropped_names;
};

// Removes input columns whose observed (legitimate) values are all equal
// within 1e-12. Columns with no observed value at all are left for
// impute_mean to flag with a proper diagnostic.
inline NumericDropResult drop_constant_columns(const NumericTable& nt) {
    NumericDropResult out;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < nt.values.cols; ++c) {
        bool drop = false;
        if (nt.roles[c] == ColumnRole::input) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            std::size_t seen = 0;
            for (std::size_t r = 0; r < nt.values.rows; ++r) {
                if (!nt.legit[r][c]) continue;
                lo = std::min(lo, nt.values(r, c));
                hi = std::max(hi, nt.values(r, c));
                ++seen;
            }
            drop = seen > 0 && (hi - lo) <= 1e-12;
        }
        if (drop)
            out.dropped_names.push_back(nt.names[c]);
        else
            keep.push_back(c);
    }
    out.table = detail::keep_columns(nt, keep);
    return out;
}

// Pearson correlation over rows where both cells are observed; nullopt when
// fewer than two complete pairs exist or either side is constant on them.
inline std::optional<double> pairwise_pearson(const NumericTable& nt, std::size_t a,
                                              std::size_t b) {
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < nt.values.rows; ++r) {
        if (!nt.legit[r][a] || !nt.legit[r][b]) continue;
        sx += nt.values(r, a);
        sy += nt.values(r, b);
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double mx = sx / double(n), my = sy / double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t r = 0; r < nt.values.rows; ++r) {
        if (!nt.legit[r][a] || !nt.legit[r][b]) continue;
        const double dx = nt.values(r, a) - mx;
        const double dy = nt.values(r, b) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

// For every input-column pair correlated at exactly +1 (within 1e-12), the
// higher-index column is removed.
inline NumericDropResult drop_duplicate_columns(const NumericTable& nt) {
    const std::size_t cols = nt.values.cols;
    std::vector<bool> dropped(cols, false);
    for (std::size_t a = 0; a < cols; ++a) {
        if (dropped[a] || nt.roles[a] != ColumnRole::input) continue;
        for (std::size_t b = a + 1; b < cols; ++b) {
            if (dropped[b] || nt.roles[b] != ColumnRole::input) continue;
            const auto r = pairwise_pearson(nt, a, b);
            if (r && std::abs(*r - 1.0) <= 1e-12) dropped[b] = true;
        }
    }
    NumericDropResult out;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < cols; ++c) {
        if (dropped[c])
            out.dropped_names.push_back(nt.names[c]);
        else
            keep.push_back(c);
    }
    out.table = detail::keep_columns(nt, keep);
    return out;
}

struct ImputeResult {
    NumericTable table;
    std::size_t imputed_cells = 0;
};

// Replaces every unusable input cell with its column's mean over observed
// values. The output column must already be complete.
inline ImputeResult impute_mean(const NumericTable& nt) {
    ImputeResult out;
    out.table = nt;
    for (std::size_t c = 0; c < nt.values.cols; ++c) {
        if (nt.roles[c] == ColumnRole::output) {
            for (std::size_t r = 0; r < nt.values.rows; ++r)
                if (!nt.legit[r][c])
                    throw PreprocessError("output column '" + nt.names[c] +
                                          "' has missing values");
            continue;
        }
        double sum = 0;
        std::size_t seen = 0;
        for (std::size_t r = 0; r < nt.values.rows; ++r) {
            if (!nt.legit[r][c]) continue;
            sum += nt.values(r, c);
            ++seen;
        }
        if (seen == 0)
            throw PreprocessError("column '" + nt.names[c] + "' has no usable values");
        const double mean = sum / double(seen);
        for (std::size_t r = 0; r < nt.values.rows; ++r) {
            if (nt.legit[r][c]) continue;
            out.table.values(r, c) = mean;
            out.table.legit[r][c] = true;
            ++out.imputed_cells;
        }
    }
    return out;
}

// ------------------------------------------------------------- normalization

enum class NormMode { min_max, z_score };

inline std::string norm_mode_name(NormMode m) {
    return m == NormMode::min_max ? "min_max" : "z_score";
}

inline NormMode norm_mode_from_name(const std::string& s) {
    if (s == "min_max") return NormMode::min_max;
    if (s == "z_score") return NormMode::z_score;
    throw ConfigError("unknown normalization mode '" + s + "'");
}

enum class FitScope { all, train_only };

inline std::string fit_scope_name(FitScope f) {
    return f == FitScope::all ? "all" : "train_only";
}

inline FitScope fit_scope_from_name(const std::string& s) {
    if (s == "all") return FitScope::all;
    if (s == "train_only") return FitScope::train_only;
    throw ConfigError("unknown fit scope '" + s + "'");
}

// Per-column affine map x' = (x - offset) / scale; degenerate columns map to
// the constant 0 when fitted leniently.
struct ColumnNorm {
    double offset = 0.0;
    double scale = 1.0;
    bool constant = false;
};

struct NormParams {
    NormMode mode = NormMode::min_max;
    std::vector<ColumnNorm> cols;
};

// Fits per-column parameters on the given rows. strict=true turns a
// degenerate column (zero range / zero variance) into an error; otherwise it
// is mapped to constant 0 and a warning is recorded.
inline NormParams fit_normalization(const Matrix& m, std::span<const std::size_t> fit_rows,
                                    NormMode mode, bool strict,
                                    std::vector<std::string>* warnings = nullptr,
                                    const std::vector<std::string>* names = nullptr) {
    if (fit_rows.empty()) throw ContractError("fit_normalization: no fit rows");
    NormParams params;
    params.mode = mode;
    params.cols.resize(m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) {
        auto column_label = [&] {
            return names && c < names->size() ? (*names)[c] : "#" + std::to_string(c);
        };
        ColumnNorm cn;
        if (mode == NormMode::min_max) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto r : fit_rows) {
                lo = std::min(lo, m(r, c));
                hi = std::max(hi, m(r, c));
            }
            if (hi - lo <= 1e-12) {
                if (strict)
                    throw PreprocessError("column '" + column_label() + "' has zero range");
                cn.constant = true;
                if (warnings)
                    warnings->push_back("column '" + column_label() +
                                        "' constant on fit rows; mapped to 0");
            } else {
                cn.offset = lo;
                cn.scale = hi - lo;
            }
        } else {
            double sum = 0;
            for (const auto r : fit_rows) sum += m(r, c);
            const double mean = sum / double(fit_rows.size());
            double ss = 0;
            for (const auto r : fit_rows) {
                const double d = m(r, c) - mean;
                ss += d * d;
            }
            const double sd = std::sqrt(ss / double(fit_rows.size()));
            if (sd <= 1e-12) {
                if (strict)
                    throw PreprocessError("column '" + column_label() +
                                          "' has zero variance");
                cn.constant = true;
                if (warnings)
                    warnings->push_back("column '" + column_label() +
                                        "' constant on fit rows; mapped to 0");
            } else {
                cn.offset = mean;
                cn.scale = sd;
            }
        }
        params.cols[c] = cn;
    }
    return params;
}

inline Matrix apply_normalization(const Matrix& m, const NormParams& params) {
    if (params.cols.size() != m.cols)
        throw ContractError("apply_normalization: column count mismatch");
    Matrix out(m.rows, m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) {
        const auto& cn = params.cols[c];
        for (std::size_t r = 0; r < m.rows; ++r)
            out(r, c) = cn.constant ? 0.0 : (m(r, c) - cn.offset) / cn.scale;
    }
    return out;
}

// --------------------------------------------------------------- pipeline

struct PreprocessOptions {
    std::size_t missing_threshold = 10;
    NormMode normalization = NormMode::min_max;
    // Recorded for downstream protocols: train_only means repeated-split
    // experiments refit normalization on each training fold.
    FitScope fit_on = FitScope::train_only;
};

struct PreprocessReport {
    std::size_t rows_in = 0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_out = 0;
    std::size_t cols_in = 0;
    std::size_t cols_commentary = 0;
    std::size_t cols_constant = 0;
    std::size_t cols_duplicate = 0;
    std::size_t cols_out = 0;
    std::size_t imputed_cells = 0;
    std::string normalization;
    std::string fit_on;
    std::vector<std::size_t> dropped_rows;
    std::vector<std::string> dropped_constant_columns;
    std::vector<std::string> dropped_duplicate_columns;
    std::vector<std::string> warnings;
};

struct PreprocessOutput {
    Cohort cohort;
    PreprocessReport report;
    NormParams norm; // fitted on all surviving rows
};

// Full cleaning sequence: filter rows -> drop commentary -> drop constant ->
// drop duplicate -> impute -> normalize. The emitted cohort is normalized
// with parameters fitted on all surviving rows; fold-wise refits happen in
// the split-protocol helpers.
inline PreprocessOutput preprocess(const RawTable& table, const std::vector<ColumnSpec>& specs,
                                   const PreprocessOptions& options = {}) {
    PreprocessOutput out;
    out.report.rows_in = table.n_rows();
    out.report.cols_in = table.n_cols();
    out.report.normalization = norm_mode_name(options.normalization);
    out.report.fit_on = fit_scope_name(options.fit_on);

    auto filtered = filter_incomplete_rows(table, specs, options.missing_threshold);
    out.report.rows_dropped_missing = filtered.dropped_rows.size();
    out.report.dropped_rows = std::move(filtered.dropped_rows);

    auto no_commentary = drop_commentary_columns(filtered.table, specs);
    out.report.cols_commentary = no_commentary.dropped_names.size();

    auto numeric = to_numeric(no_commentary.table, no_commentary.specs);

    auto no_constant = drop_constant_columns(numeric);
    out.report.cols_constant = no_constant.dropped_names.size();
    out.report.dropped_constant_columns = std::move(no_constant.dropped_names);

    auto no_duplicate = drop_duplicate_columns(no_constant.table);
    out.report.cols_duplicate = no_duplicate.dropped_names.size();
    out.report.dropped_duplicate_columns = std::move(no_duplicate.dropped_names);

    auto imputed = impute_mean(no_duplicate.table);
    out.report.imputed_cells = imputed.imputed_cells;

    const auto& nt = imputed.table;
    out.report.rows_out = nt.values.rows;
    out.report.cols_out = nt.values.cols;

    // Separate features from the output column.
    std::vector<std::size_t> input_cols;
    std::size_t output_col = 0;
    for (std::size_t c = 0; c < nt.values.cols; ++c) {
        if (nt.roles[c] == ColumnRole::output)
            output_col = c;
        else
            input_cols.push_back(c);
    }
    if (input_cols.empty()) throw PreprocessError("no input columns survived preprocessing");

    Matrix features(nt.values.rows, input_cols.size());
    for (std::size_t r = 0; r < nt.values.rows; ++r)
        for (std::size_t i = 0; i < input_cols.size(); ++i)
            features(r, i) = nt.values(r, input_cols[i]);
    for (const auto c : input_cols) out.cohort.feature_names.push_back(nt.names[c]);

    out.cohort.labels.resize(nt.values.rows);
    for (std::size_t r = 0; r < nt.values.rows; ++r) {
        const double v = nt.values(r, output_col);
        if (std::abs(v) <= 1e-9)
            out.cohort.labels[r] = 0;
        else if (std::abs(v - 1.0) <= 1e-9)
            out.cohort.labels[r] = 1;
        else
            throw PreprocessError("output column '" + nt.names[output_col] +
                                  "' has non-binary value " + fmt_double(v));
    }

    std::vector<std::size_t> all_rows(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r) all_rows[r] = r;
    out.norm = fit_normalization(features, all_rows, options.normalization,
                                 /*strict=*/true, &out.report.warnings,
                                 &out.cohort.feature_names);
    out.cohort.features = apply_normalization(features, out.norm);
    return out;
}

// ------------------------------------------------------------- split

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded per-class shuffle; floor(fraction * class_count) rows to train,
// remainder to test; both sides returned in ascending order.
inline SplitIndices stratified_split_indices(std::span<const int> labels,
                                             double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ContractError("train_fraction must lie in (0,1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ContractError("labels must be 0 or 1");
        by_class[labels[i]].push_back(i);
    }
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < 2)
            throw SplitError("class " + std::to_string(c) + " has fewer than 2 members");
    Rng rng(seed);
    SplitIndices out;
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        rng.shuffle(idx);
        const auto n_train =
            static_cast<std::size_t>(std::floor(train_fraction * double(idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? out.train : out.test).push_back(idx[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

inline Cohort select_cohort_rows(const Cohort& cohort, std::span<const std::size_t> rows) {
    Cohort out;
    out.features = select_rows(cohort.features, rows);
    out.feature_names = cohort.feature_names;
    out.labels.reserve(rows.size());
    for (const auto r : rows) out.labels.push_back(cohort.labels[r]);
    return out;
}

inline std::pair<Cohort, Cohort> stratified_split(const Cohort& cohort, double train_fraction,
                                                  std::uint64_t seed) {
    const auto idx = stratified_split_indices(cohort.labels, train_fraction, seed);
    return {select_cohort_rows(cohort, idx.train), select_cohort_rows(cohort, idx.test)};
}

} // namespace crtbench
