#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crtbench/cohort.hpp"
#include "crtbench/csv.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/matrix.hpp"
#include "crtbench/metrics.hpp"
#include "crtbench/preprocess.hpp"
#include "crtbench/rng.hpp"

namespace crtbench {

struct TreeConfig {
    std::size_t min_samples_leaf = 1;
    std::optional<std::size_t> max_depth;
};

// Shannon entropy in bits of a binary class distribution.
inline double entropy(std::size_t c0, std::size_t c1) {
    const std::size_t total = c0 + c1;
    if (total == 0) throw ContractError("entropy: empty distribution");
    double h = 0;
    for (const double count : {double(c0), double(c1)}) {
        if (count == 0) continue;
        const double p = count / double(total);
        h -= p * std::log2(p);
    }
    return h;
}

struct TreeNode {
    std::size_t n_samples = 0;
    std::array<std::size_t, 2> class_counts = {0, 0};
    int leaf_class = -1; // >= 0 marks a leaf
    std::size_t feature_index = 0;
    double threshold = 0.0;
    double gain = 0.0;
    std::unique_ptr<TreeNode> left, right;

    bool is_leaf() const { return leaf_class >= 0; }
};

struct Tree {
    std::size_t n_features = 0;
    TreeConfig config;
    std::unique_ptr<TreeNode> root;
};

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best information-gain split over midpoint thresholds between consecutive
// distinct values, subject to both children holding at least
// min_samples_leaf rows. Left branch takes values <= threshold. Ties break
// to the lowest feature index, then the lowest threshold. Gains below 1e-12
// are treated as zero to keep float noise from forcing degenerate splits.
inline std::optional<SplitChoice> best_split(const Matrix& X, std::span<const int> y,
                                             std::span<const std::size_t> rows,
                                             const TreeConfig& config) {
    const std::size_t n = rows.size();
    if (n < 2 * config.min_samples_leaf) return std::nullopt;
    std::size_t parent[2] = {0, 0};
    for (const auto r : rows) ++parent[y[r]];
    if (parent[0] == 0 || parent[1] == 0) return std::nullopt;
    const double parent_entropy = entropy(parent[0], parent[1]);

    std::optional<SplitChoice> best;
    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(n);
    for (std::size_t f = 0; f < X.cols; ++f) {
        sorted.clear();
        for (const auto r : rows) sorted.emplace_back(X(r, f), y[r]);
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::size_t left[2] = {0, 0};
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left[sorted[i].second];
            if (sorted[i].first == sorted[i + 1].first) continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < config.min_samples_leaf || nr < config.min_samples_leaf) continue;
            const std::size_t right0 = parent[0] - left[0], right1 = parent[1] - left[1];
            const double child =
                (double(nl) * entropy(left[0], left[1]) +
                 double(nr) * entropy(right0, right1)) /
                double(n);
            const double gain = parent_entropy - child;
            if (gain <= 1e-12) continue;
            const double threshold = sorted[i].first + (sorted[i + 1].first - sorted[i].first) / 2.0;
            const bool better =
                !best || gain > best->gain ||
                (gain == best->gain &&
                 (f < best->feature || (f == best->feature && threshold < best->threshold)));
            if (better) best = SplitChoice{f, threshold, gain};
        }
    }
    return best;
}

namespace detail {

inline std::unique_ptr<TreeNode> grow_tree(const Matrix& X, std::span<const int> y,
                                           std::vector<std::size_t>& rows,
                                           const TreeConfig& config, std::size_t depth) {
    auto node = std::make_unique<TreeNode>();
    node->n_samples = rows.size();
    for (const auto r : rows) ++node->class_counts[y[r]];

    const bool pure = node->class_counts[0] == 0 || node->class_counts[1] == 0;
    const bool depth_capped = config.max_depth && depth >= *config.max_depth;
    std::optional<SplitChoice> split;
    if (!pure && !depth_capped) split = best_split(X, y, rows, config);

    if (!split) {
        // Majority class; ties go to class 0.
        node->leaf_class = node->class_counts[1] > node->class_counts[0] ? 1 : 0;
        return node;
    }

    node->feature_index = split->feature;
    node->threshold = split->threshold;
    node->gain = split->gain;
    std::vector<std::size_t> left_rows, right_rows;
    for (const auto r : rows)
        (X(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    node->left = grow_tree(X, y, left_rows, config, depth + 1);
    node->right = grow_tree(X, y, right_rows, config, depth + 1);
    return node;
}

} // namespace detail

inline Tree fit_tree(const Matrix& X, std::span<const int> y, TreeConfig config = {}) {
    if (X.rows == 0 || X.rows != y.size())
        throw ContractError("fit_tree: empty training set or label mismatch");
    if (config.min_samples_leaf < 1)
        throw ContractError("fit_tree: min_samples_leaf must be >= 1");
    for (const auto l : y)
        if (l != 0 && l != 1) throw ContractError("fit_tree: labels must be 0 or 1");
    Tree tree;
    tree.n_features = X.cols;
    tree.config = config;
    std::vector<std::size_t> rows(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) rows[r] = r;
    tree.root = detail::grow_tree(X, y, rows, config, 0);
    return tree;
}

inline Tree fit_tree(const Cohort& cohort, TreeConfig config = {}) {
    return fit_tree(cohort.features, cohort.labels, config);
}

inline int predict_tree(const Tree& tree, std::span<const double> row) {
    if (row.size() != tree.n_features)
        throw ContractError("predict_tree: row width mismatch");
    const TreeNode* node = tree.root.get();
    while (!node->is_leaf())
        node = row[node->feature_index] <= node->threshold ? node->left.get()
                                                           : node->right.get();
    return node->leaf_class;
}

inline std::vector<int> predict_tree(const Tree& tree, const Matrix& X) {
    std::vector<int> out;
    out.reserve(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) out.push_back(predict_tree(tree, X.row(r)));
    return out;
}

// ------------------------------------------------------------------ rules

struct RuleCondition {
    std::size_t feature = 0;
    bool is_leq = true; // feature <= threshold, else feature > threshold
    double threshold = 0.0;
};

struct Rule {
    std::vector<RuleCondition> conditions;
    int predicted_class = 0;
    std::size_t n_samples = 0;
};

namespace detail {

inline void collect_rules(const TreeNode* node, std::vector<RuleCondition>& path,
                          std::vector<Rule>& out) {
    if (node->is_leaf()) {
        out.push_back({path, node->leaf_class, node->n_samples});
        return;
    }
    path.push_back({node->feature_index, true, node->threshold});
    collect_rules(node->left.get(), path, out);
    path.back().is_leq = false;
    collect_rules(node->right.get(), path, out);
    path.pop_back();
}

} // namespace detail

// One rule per leaf, in left-to-right leaf order; the rules are mutually
// exclusive and cover the whole feature space.
inline std::vector<Rule> extract_rules(const Tree& tree) {
    std::vector<Rule> rules;
    std::vector<RuleCondition> path;
    detail::collect_rules(tree.root.get(), path, rules);
    return rules;
}

inline std::string rules_to_text(const std::vector<Rule>& rules,
                                 const std::vector<std::string>& feature_names = {}) {
    std::string out;
    for (const auto& rule : rules) {
        out += "IF ";
        if (rule.conditions.empty()) out += "always";
        for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
            const auto& c = rule.conditions[i];
            if (i) out += " AND ";
            out += c.feature < feature_names.size() ? feature_names[c.feature]
                                                    : "x" + std::to_string(c.feature);
            out += c.is_leq ? " <= " : " > ";
            out += fmt_double(c.threshold);
        }
        out += " THEN " + std::to_string(rule.predicted_class) + "  [n=" +
               std::to_string(rule.n_samples) + "]\n";
    }
    return out;
}

inline int predict_rules(const std::vector<Rule>& rules, std::span<const double> row) {
    for (const auto& rule : rules) {
        bool match = true;
        for (const auto& c : rule.conditions) {
            const bool holds = c.is_leq ? row[c.feature] <= c.threshold
                                        : row[c.feature] > c.threshold;
            if (!holds) {
                match = false;
                break;
            }
        }
        if (match) return rule.predicted_class;
    }
    throw ContractError("predict_rules: no rule matched (rules not exhaustive)");
}

// Per-feature sum of (sample fraction x information gain) over the feature's
// internal nodes, normalized to sum to 1 when any split exists.
inline std::vector<double> feature_importance(const Tree& tree) {
    std::vector<double> scores(tree.n_features, 0.0);
    const double n_root = double(tree.root->n_samples);
    std::vector<const TreeNode*> stack = {tree.root.get()};
    while (!stack.empty()) {
        const TreeNode* node = stack.back();
        stack.pop_back();
        if (node->is_leaf()) continue;
        scores[node->feature_index] += (double(node->n_samples) / n_root) * node->gain;
        stack.push_back(node->right.get());
        stack.push_back(node->left.get());
    }
    double total = 0;
    for (const auto s : scores) total += s;
    if (total > 0)
        for (auto& s : scores) s /= total;
    return scores;
}

// ------------------------------------------------------------------ sweep

struct SweepPointTree {
    std::size_t min_samples_leaf = 0;
    std::vector<EvalResult> per_rep;
    EvalResult average;
};

struct SweepCurve {
    std::vector<SweepPointTree> points;
    double accuracy_floor = 0.85;
    // Largest leaf size whose averaged accuracy still meets the floor.
    std::optional<std::size_t> selected_leaf_size;
};

// Repeated-split evaluation across a grid of leaf-size floors. Every grid
// point reuses the same per-repetition split seeds so the constraint is the
// only thing that varies.
inline SweepCurve pruning_sweep(const Cohort& cohort, std::span<const std::size_t> leaf_sizes,
                                std::size_t repeats, double split_fraction,
                                std::uint64_t master_seed, double accuracy_floor = 0.85) {
    if (leaf_sizes.empty()) throw ContractError("pruning_sweep: empty leaf-size grid");
    for (std::size_t i = 1; i < leaf_sizes.size(); ++i)
        if (leaf_sizes[i] <= leaf_sizes[i - 1])
            throw ContractError("pruning_sweep: leaf sizes must be strictly increasing");
    if (repeats < 1) throw ContractError("pruning_sweep: repeats must be >= 1");

    SweepCurve curve;
    curve.accuracy_floor = accuracy_floor;
    for (const auto ls : leaf_sizes) {
        SweepPointTree point;
        point.min_samples_leaf = ls;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            const auto split_seed = derive_seed(master_seed, "split", rep);
            const auto idx = stratified_split_indices(cohort.labels, split_fraction, split_seed);
            const auto train = select_cohort_rows(cohort, idx.train);
            const auto test = select_cohort_rows(cohort, idx.test);
            const auto tree = fit_tree(train, TreeConfig{ls, std::nullopt});
            const auto pred = predict_tree(tree, test.features);
            point.per_rep.push_back(evaluate(pred, test.labels));
        }
        point.average = average_results(point.per_rep);
        if (point.average.accuracy >= accuracy_floor)
            curve.selected_leaf_size = ls; // grid is increasing: keeps the largest
        curve.points.push_back(std::move(point));
    }
    return curve;
}

} // namespace crtbench
