#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crtbench/cohort.hpp"
#include "crtbench/csv.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/hierarchical.hpp"
#include "crtbench/json_io.hpp"
#include "crtbench/kmeans.hpp"
#include "crtbench/metrics.hpp"
#include "crtbench/mlp.hpp"
#include "crtbench/preprocess.hpp"
#include "crtbench/rng.hpp"
#include "crtbench/search.hpp"
#include "crtbench/svg.hpp"
#include "crtbench/synth.hpp"
#include "crtbench/tree.hpp"

namespace crtbench {

// ---------------------------------------------------------------- config

struct ProtocolSection {
    std::size_t repeats = 5;
    double train_fraction = 0.70;
    std::uint64_t master_seed = 0;
};

struct TreeSection {
    std::size_t min_samples_leaf = 20;
    std::size_t max_depth = 0; // 0 = unlimited
    std::vector<std::size_t> sweep_leaf_sizes = {1, 2, 5, 10, 15, 20, 25, 30, 40, 50};
    double split_fraction = 0.80;
    double accuracy_floor = 0.85;
};

struct ClusteringSection {
    std::size_t k = 2;
    DistanceMetric metric = DistanceMetric::euclidean;
    Linkage linkage = Linkage::average;
    std::size_t restarts = 10;
    std::size_t max_iterations = 300;
    double tolerance = 1e-6;
    std::size_t dendrogram_max_leaves = 30;
};

struct NnSection {
    std::vector<std::size_t> hidden = {20, 14};
    Activation hidden_activation = Activation::linear;
    double learning_rate = 0.01;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double init_scale = 0.1;
    bool search = false; // run the two-phase architecture search first
};

struct SearchSection {
    std::size_t phase1_start = 5;
    std::size_t phase1_step = 5;
    std::vector<std::size_t> first_sizes = {10, 20, 30, 40};
    std::size_t second_start = 2;
    std::size_t second_step = 2;
    std::size_t patience = 2;
};

struct SynthSection {
    std::size_t n_rows = 1045;
    std::size_t n_input_cols = 55;
    std::size_t class0_count = 412;
    std::size_t class1_count = 418;
    double separability = 1.0;
    double missing_cell_rate = 0.01;
    std::size_t n_rows_over_threshold = 215;
    std::size_t missing_threshold = 10;
    std::size_t commentary_cols = 18;
    std::size_t constant_cols = 3;
    std::size_t duplicate_cols = 3;
    std::size_t informative_cols = 10;
    double categorical_fraction = 0.3;
};

struct AppConfig {
    std::string input_csv;
    std::string column_spec; // sidecar JSON; empty -> last column is the output
    std::string output_dir;
    PreprocessOptions preprocess;
    ProtocolSection protocol;
    TreeSection tree;
    ClusteringSection clustering;
    NnSection nn;
    SearchSection search;
    SynthSection synth;
};

namespace cfg_detail {

// Strict section reader: every key must be consumed or the config is rejected.
class Section {
public:
    Section(const Json* j, std::string name) : j_(j), name_(std::move(name)) {}

    template <typename T>
    void read(const char* key, T& out) {
        known_.push_back(key);
        if (!j_ || !j_->contains(key)) return;
        try {
            out = j_->at(key).get<T>();
        } catch (const Json::exception&) {
            throw ConfigError("config: bad value for " + name_ + "." + key);
        }
    }

    void read_enum(const char* key, const std::function<void(const std::string&)>& apply) {
        std::string raw;
        bool present = j_ && j_->contains(key);
        read(key, raw);
        if (present) apply(raw);
    }

    void finish() const {
        if (!j_) return;
        for (const auto& item : j_->items())
            if (std::find(known_.begin(), known_.end(), item.key()) == known_.end())
                throw ConfigError("config: unknown key " + name_ + "." + item.key());
    }

private:
    const Json* j_;
    std::string name_;
    std::vector<std::string> known_;
};

inline const Json* subsection(const Json& j, const char* key) {
    if (!j.contains(key)) return nullptr;
    if (!j.at(key).is_object())
        throw ConfigError(std::string("config: '") + key + "' must be an object");
    return &j.at(key);
}

inline void check_fraction(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0))
        throw ConfigError(std::string("config: ") + what + " must lie in (0,1)");
}

} // namespace cfg_detail

inline AppConfig app_config_from_json(const Json& j) {
    using cfg_detail::Section;
    using cfg_detail::subsection;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    AppConfig c;

    Section top(&j, "config");
    top.read("input_csv", c.input_csv);
    top.read("column_spec", c.column_spec);
    top.read("output_dir", c.output_dir);

    Section pre(subsection(j, "preprocess"), "preprocess");
    pre.read("missing_threshold", c.preprocess.missing_threshold);
    pre.read_enum("normalization", [&](const std::string& s) {
        c.preprocess.normalization = norm_mode_from_name(s);
    });
    pre.read_enum("fit_on", [&](const std::string& s) {
        c.preprocess.fit_on = fit_scope_from_name(s);
    });
    pre.finish();

    Section proto(subsection(j, "protocol"), "protocol");
    proto.read("repeats", c.protocol.repeats);
    proto.read("train_fraction", c.protocol.train_fraction);
    proto.read("master_seed", c.protocol.master_seed);
    proto.finish();
    if (c.protocol.repeats < 1) throw ConfigError("config: protocol.repeats must be >= 1");
    cfg_detail::check_fraction(c.protocol.train_fraction, "protocol.train_fraction");

    Section tree(subsection(j, "tree"), "tree");
    tree.read("min_samples_leaf", c.tree.min_samples_leaf);
    tree.read("max_depth", c.tree.max_depth);
    tree.read("sweep_leaf_sizes", c.tree.sweep_leaf_sizes);
    tree.read("split_fraction", c.tree.split_fraction);
    tree.read("accuracy_floor", c.tree.accuracy_floor);
    tree.finish();
    if (c.tree.min_samples_leaf < 1)
        throw ConfigError("config: tree.min_samples_leaf must be >= 1");
    cfg_detail::check_fraction(c.tree.split_fraction, "tree.split_fraction");
    if (c.tree.sweep_leaf_sizes.empty())
        throw ConfigError("config: tree.sweep_leaf_sizes must not be empty");
    for (std::size_t i = 0; i < c.tree.sweep_leaf_sizes.size(); ++i) {
        if (c.tree.sweep_leaf_sizes[i] < 1)
            throw ConfigError("config: tree.sweep_leaf_sizes entries must be >= 1");
        if (i > 0 && c.tree.sweep_leaf_sizes[i] <= c.tree.sweep_leaf_sizes[i - 1])
            throw ConfigError("config: tree.sweep_leaf_sizes must be strictly increasing");
    }

    Section clu(subsection(j, "clustering"), "clustering");
    clu.read("k", c.clustering.k);
    clu.read_enum("metric", [&](const std::string& s) {
        c.clustering.metric = metric_from_name(s);
    });
    clu.read_enum("linkage", [&](const std::string& s) {
        c.clustering.linkage = linkage_from_name(s);
    });
    clu.read("restarts", c.clustering.restarts);
    clu.read("max_iterations", c.clustering.max_iterations);
    clu.read("tolerance", c.clustering.tolerance);
    clu.read("dendrogram_max_leaves", c.clustering.dendrogram_max_leaves);
    clu.finish();
    if (c.clustering.k < 2) throw ConfigError("config: clustering.k must be >= 2");
    if (c.clustering.restarts < 1)
        throw ConfigError("config: clustering.restarts must be >= 1");
    if (c.clustering.dendrogram_max_leaves < 2)
        throw ConfigError("config: clustering.dendrogram_max_leaves must be >= 2");

    Section nn(subsection(j, "nn"), "nn");
    nn.read("hidden", c.nn.hidden);
    nn.read_enum("hidden_activation", [&](const std::string& s) {
        c.nn.hidden_activation = activation_from_name(s);
    });
    nn.read("learning_rate", c.nn.learning_rate);
    nn.read("epochs", c.nn.epochs);
    nn.read("batch_size", c.nn.batch_size);
    nn.read("init_scale", c.nn.init_scale);
    nn.read("search", c.nn.search);
    nn.finish();
    if (c.nn.learning_rate <= 0) throw ConfigError("config: nn.learning_rate must be > 0");
    if (c.nn.batch_size < 1) throw ConfigError("config: nn.batch_size must be >= 1");
    for (const auto h : c.nn.hidden)
        if (h < 1) throw ConfigError("config: nn.hidden sizes must be >= 1");

    Section search(subsection(j, "search"), "search");
    search.read("phase1_start", c.search.phase1_start);
    search.read("phase1_step", c.search.phase1_step);
    search.read("first_sizes", c.search.first_sizes);
    search.read("second_start", c.search.second_start);
    search.read("second_step", c.search.second_step);
    search.read("patience", c.search.patience);
    search.finish();
    if (c.search.phase1_start < 1 || c.search.phase1_step < 1 ||
        c.search.second_start < 1 || c.search.second_step < 1 || c.search.patience < 1)
        throw ConfigError("config: search sizes, steps, and patience must be >= 1");
    if (c.search.first_sizes.empty())
        throw ConfigError("config: search.first_sizes must not be empty");

    Section synth(subsection(j, "synth"), "synth");
    synth.read("n_rows", c.synth.n_rows);
    synth.read("n_input_cols", c.synth.n_input_cols);
    synth.read("class0_count", c.synth.class0_count);
    synth.read("class1_count", c.synth.class1_count);
    synth.read("separability", c.synth.separability);
    synth.read("missing_cell_rate", c.synth.missing_cell_rate);
    synth.read("n_rows_over_threshold", c.synth.n_rows_over_threshold);
    synth.read("missing_threshold", c.synth.missing_threshold);
    synth.read("commentary_cols", c.synth.commentary_cols);
    synth.read("constant_cols", c.synth.constant_cols);
    synth.read("duplicate_cols", c.synth.duplicate_cols);
    synth.read("informative_cols", c.synth.informative_cols);
    synth.read("categorical_fraction", c.synth.categorical_fraction);
    synth.finish();

    for (const auto& item : j.items()) {
        static const std::vector<std::string> allowed = {
            "input_csv", "column_spec", "output_dir", "preprocess", "protocol",
            "tree",      "clustering",  "nn",         "search",     "synth"};
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigError("config: unknown key " + item.key());
    }
    return c;
}

// Canonical experiment identity: everything that affects results. The output
// directory is deliberately absent so reruns into different directories hash
// identically.
inline Json app_config_to_json(const AppConfig& c) {
    Json j;
    j["input_csv"] = c.input_csv;
    j["column_spec"] = c.column_spec;
    j["preprocess"] = {{"missing_threshold", c.preprocess.missing_threshold},
                       {"normalization", norm_mode_name(c.preprocess.normalization)},
                       {"fit_on", fit_scope_name(c.preprocess.fit_on)}};
    j["protocol"] = {{"repeats", c.protocol.repeats},
                     {"train_fraction", c.protocol.train_fraction},
                     {"master_seed", c.protocol.master_seed}};
    j["tree"] = {{"min_samples_leaf", c.tree.min_samples_leaf},
                 {"max_depth", c.tree.max_depth},
                 {"sweep_leaf_sizes", c.tree.sweep_leaf_sizes},
                 {"split_fraction", c.tree.split_fraction},
                 {"accuracy_floor", c.tree.accuracy_floor}};
    j["clustering"] = {{"k", c.clustering.k},
                       {"metric", metric_name(c.clustering.metric)},
                       {"linkage", linkage_name(c.clustering.linkage)},
                       {"restarts", c.clustering.restarts},
                       {"max_iterations", c.clustering.max_iterations},
                       {"tolerance", c.clustering.tolerance},
                       {"dendrogram_max_leaves", c.clustering.dendrogram_max_leaves}};
    j["nn"] = {{"hidden", c.nn.hidden},
               {"hidden_activation", activation_name(c.nn.hidden_activation)},
               {"learning_rate", c.nn.learning_rate},
               {"epochs", c.nn.epochs},
               {"batch_size", c.nn.batch_size},
               {"init_scale", c.nn.init_scale},
               {"search", c.nn.search}};
    j["search"] = {{"phase1_start", c.search.phase1_start},
                   {"phase1_step", c.search.phase1_step},
                   {"first_sizes", c.search.first_sizes},
                   {"second_start", c.search.second_start},
                   {"second_step", c.search.second_step},
                   {"patience", c.search.patience}};
    j["synth"] = {{"n_rows", c.synth.n_rows},
                  {"n_input_cols", c.synth.n_input_cols},
                  {"class0_count", c.synth.class0_count},
                  {"class1_count", c.synth.class1_count},
                  {"separability", c.synth.separability},
                  {"missing_cell_rate", c.synth.missing_cell_rate},
                  {"n_rows_over_threshold", c.synth.n_rows_over_threshold},
                  {"missing_threshold", c.synth.missing_threshold},
                  {"commentary_cols", c.synth.commentary_cols},
                  {"constant_cols", c.synth.constant_cols},
                  {"duplicate_cols", c.synth.duplicate_cols},
                  {"informative_cols", c.synth.informative_cols},
                  {"categorical_fraction", c.synth.categorical_fraction}};
    return j;
}

inline AppConfig load_app_config(const std::string& path) {
    return app_config_from_json(parse_json(read_text_file(path), "config file " + path));
}

// -------------------------------------------------------------- run context

struct RunContext {
    AppConfig config;
    Json config_json;
    std::string hash;
    std::string out_dir;

    Json envelope(const std::string& kind) const {
        return report_envelope(kind, config_json, config.protocol.master_seed);
    }
    void write(const std::string& name, const std::string& content) const {
        write_text_file(out_dir + "/" + name, content);
    }
    void write_json(const std::string& name, const Json& j) const {
        write(name, j.dump(2) + "\n");
    }
};

inline RunContext make_run_context(const AppConfig& config, const std::string& out_dir) {
    if (out_dir.empty()) throw ConfigError("output directory is required");
    RunContext ctx;
    ctx.config = config;
    ctx.config.output_dir = out_dir;
    ctx.config_json = app_config_to_json(ctx.config);
    ctx.hash = config_hash(ctx.config_json);
    ctx.out_dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw EmissionError("cannot create output directory: " + out_dir);
    return ctx;
}

// ------------------------------------------------------------------ inputs

inline std::vector<ColumnSpec> default_column_specs(const RawTable& table) {
    std::vector<ColumnSpec> specs;
    std::size_t output_at = table.column_names.size() - 1;
    for (std::size_t i = 0; i < table.column_names.size(); ++i)
        if (lower(table.column_names[i]) == "response") output_at = i;
    for (std::size_t i = 0; i < table.column_names.size(); ++i) {
        ColumnSpec s;
        s.name = table.column_names[i];
        s.role = i == output_at ? ColumnRole::output : ColumnRole::input;
        specs.push_back(std::move(s));
    }
    return specs;
}

struct LoadedInput {
    RawTable table;
    std::vector<ColumnSpec> specs;
};

inline LoadedInput load_input(const AppConfig& config) {
    if (config.input_csv.empty())
        throw ConfigError("config: input_csv is required for this command");
    LoadedInput in;
    in.table = parse_table(read_text_file(config.input_csv));
    if (!config.column_spec.empty())
        in.specs = column_specs_from_json(
            parse_json(read_text_file(config.column_spec), "column spec"));
    else
        in.specs = default_column_specs(in.table);
    return in;
}

inline PreprocessOutput prepare_cohort(const RunContext& ctx) {
    const auto in = load_input(ctx.config);
    return preprocess(in.table, in.specs, ctx.config.preprocess);
}

// ------------------------------------------------------------------ runners

inline void run_synth(const RunContext& ctx) {
    const auto& s = ctx.config.synth;
    GeneratorConfig g;
    g.n_rows = s.n_rows;
    g.n_input_cols = s.n_input_cols;
    g.class0_count = s.class0_count;
    g.class1_count = s.class1_count;
    g.separability = s.separability;
    g.missing_cell_rate = s.missing_cell_rate;
    g.n_rows_over_threshold = s.n_rows_over_threshold;
    g.missing_threshold = s.missing_threshold;
    g.commentary_cols = s.commentary_cols;
    g.constant_cols = s.constant_cols;
    g.duplicate_cols = s.duplicate_cols;
    g.informative_cols = s.informative_cols;
    g.categorical_fraction = s.categorical_fraction;
    g.seed = derive_seed(ctx.config.protocol.master_seed, "synth");

    const auto cohort = generate(g);
    ctx.write("cohort.csv", cohort.csv_text);
    ctx.write("columns.json", cohort.sidecar_json);
    ctx.write("truth.csv", cohort.truth_csv);

    Json report = ctx.envelope("synth");
    report["rows"] = g.n_rows;
    report["columns"] = g.total_cols();
    report["class0_count"] = g.class0_count;
    report["class1_count"] = g.class1_count;
    report["rows_over_threshold"] = cohort.doomed_rows.size();
    report["informative_columns"] = cohort.informative_names;
    ctx.write_json("synth_report.json", report);
}

inline std::string cohort_to_csv(const Cohort& cohort) {
    RawTable t;
    t.column_names = cohort.feature_names;
    t.column_names.push_back("response");
    for (std::size_t r = 0; r < cohort.n_rows(); ++r) {
        std::vector<std::string> row;
        for (std::size_t c = 0; c < cohort.n_features(); ++c)
            row.push_back(fmt_double(cohort.features(r, c)));
        row.push_back(std::to_string(cohort.labels[r]));
        t.cells.push_back(std::move(row));
    }
    return write_table(t);
}

inline PreprocessOutput run_preprocess(const RunContext& ctx) {
    auto out = prepare_cohort(ctx);
    ctx.write("cohort.csv", cohort_to_csv(out.cohort));
    Json report = ctx.envelope("preprocess");
    report["report"] = to_json(out.report);
    ctx.write_json("preprocess_report.json", report);
    return out;
}

inline Json cluster_eval_json(const ClusterEval& ce) {
    Json j = to_json(ce.eval);
    j["cluster_to_class"] = {ce.mapping[0], ce.mapping[1]};
    return j;
}

inline void run_cluster(const RunContext& ctx) {
    const auto prep = prepare_cohort(ctx);
    const auto& cohort = prep.cohort;
    const auto& clu = ctx.config.clustering;

    const auto km = kmeans(cohort.features, clu.k,
                           derive_seed(ctx.config.protocol.master_seed, "kmeans"),
                           clu.max_iterations, clu.tolerance, clu.restarts);
    Json km_json{{"inertia", km.inertia},
                 {"iterations", km.iterations},
                 {"restarts", clu.restarts},
                 {"k", clu.k}};
    if (clu.k == 2)
        km_json["scored"] = cluster_eval_json(cluster_eval(km.assignment, cohort.labels));

    const auto dendro = agglomerative(cohort.features, clu.metric, clu.linkage);
    const auto cut = cut_dendrogram(dendro, clu.k);
    Json hc_json{{"metric", metric_name(clu.metric)},
                 {"linkage", linkage_name(clu.linkage)},
                 {"k", clu.k}};
    if (clu.k == 2)
        hc_json["scored"] = cluster_eval_json(cluster_eval(cut, cohort.labels));

    Json report = ctx.envelope("cluster");
    report["rows"] = cohort.n_rows();
    report["kmeans"] = km_json;
    report["hierarchical"] = hc_json;
    ctx.write_json("cluster_report.json", report);

    Json dj = ctx.envelope("dendrogram");
    dj["n_leaves"] = dendro.n_leaves;
    Json merges = Json::array();
    for (const auto& m : dendro.merges)
        merges.push_back({{"a", m.a}, {"b", m.b}, {"distance", m.distance},
                          {"size", m.size}});
    dj["merges"] = merges;
    ctx.write_json("dendrogram.json", dj);

    const auto trunc = truncate_dendrogram(dendro, clu.dendrogram_max_leaves);
    std::vector<double> share(trunc.n_display_leaves, 0.0);
    for (std::size_t i = 0; i < trunc.n_display_leaves; ++i) {
        std::size_t ones = 0;
        for (const auto row : trunc.leaf_members[i])
            ones += cohort.labels[row] == 1 ? 1u : 0u;
        share[i] = trunc.leaf_members[i].empty()
                       ? 0.0
                       : double(ones) / double(trunc.leaf_members[i].size());
    }
    ctx.write("dendrogram.svg",
              svg_dendrogram("agglomerative merges (" + metric_name(clu.metric) + ", " +
                                 linkage_name(clu.linkage) + ")",
                             trunc, share));
}

namespace tree_detail {

inline Json node_to_json(const TreeNode& node, const std::vector<std::string>& names) {
    Json j{{"n_samples", node.n_samples},
           {"counts", {node.class_counts[0], node.class_counts[1]}}};
    if (node.is_leaf()) {
        j["leaf_class"] = node.leaf_class;
        return j;
    }
    j["feature_index"] = node.feature_index;
    if (node.feature_index < names.size()) j["feature"] = names[node.feature_index];
    j["threshold"] = node.threshold;
    j["gain"] = node.gain;
    j["left"] = node_to_json(*node.left, names);
    j["right"] = node_to_json(*node.right, names);
    return j;
}

inline void count_nodes(const TreeNode& node, std::size_t& nodes, std::size_t& leaves) {
    ++nodes;
    if (node.is_leaf()) {
        ++leaves;
        return;
    }
    count_nodes(*node.left, nodes, leaves);
    count_nodes(*node.right, nodes, leaves);
}

} // namespace tree_detail

inline void emit_sweep_artifacts(const RunContext& ctx, const Cohort& cohort) {
    const auto& tc = ctx.config.tree;
    const auto curve = pruning_sweep(cohort, tc.sweep_leaf_sizes, ctx.config.protocol.repeats,
                                     tc.split_fraction, ctx.config.protocol.master_seed,
                                     tc.accuracy_floor);

    Json report = ctx.envelope("sweep");
    report["accuracy_floor"] = curve.accuracy_floor;
    report["split_fraction"] = tc.split_fraction;
    report["repeats"] = ctx.config.protocol.repeats;
    if (curve.selected_leaf_size)
        report["selected_leaf_size"] = *curve.selected_leaf_size;
    else
        report["selected_leaf_size"] = nullptr;
    Json points = Json::array();
    for (const auto& p : curve.points) {
        Json per_rep = Json::array();
        for (const auto& r : p.per_rep) per_rep.push_back(to_json(r));
        points.push_back({{"min_samples_leaf", p.min_samples_leaf},
                          {"per_rep", per_rep},
                          {"average", to_json(p.average)}});
    }
    report["points"] = points;
    ctx.write_json("sweep_report.json", report);

    std::string csv = "min_samples_leaf";
    for (std::size_t r = 0; r < ctx.config.protocol.repeats; ++r)
        csv += ",acc_rep_" + std::to_string(r + 1);
    csv += ",acc_avg,se_avg,sp_avg\n";
    for (const auto& p : curve.points) {
        csv += std::to_string(p.min_samples_leaf);
        for (const auto& r : p.per_rep) csv += "," + fmt_double(r.accuracy);
        csv += "," + fmt_double(p.average.accuracy) + "," +
               fmt_double(p.average.sensitivity) + "," + fmt_double(p.average.specificity) +
               "\n";
    }
    ctx.write("sweep.csv", csv);

    ChartSeries acc{"test accuracy (avg)", {}};
    ChartSeries floor{"accuracy floor", {}};
    for (const auto& p : curve.points) {
        acc.points.emplace_back(double(p.min_samples_leaf), p.average.accuracy);
        floor.points.emplace_back(double(p.min_samples_leaf), curve.accuracy_floor);
    }
    ctx.write("sweep.svg", svg_line_chart("leaf-size sweep", "minimum samples per leaf",
                                          "accuracy", {acc, floor}));
}

inline void run_tree(const RunContext& ctx, bool with_sweep) {
    const auto prep = prepare_cohort(ctx);
    const auto& cohort = prep.cohort;
    const auto& tc = ctx.config.tree;

    const auto split_seed = derive_seed(ctx.config.protocol.master_seed, "split", 0);
    const auto [train, test] = stratified_split(cohort, tc.split_fraction, split_seed);

    TreeConfig config;
    config.min_samples_leaf = tc.min_samples_leaf;
    if (tc.max_depth > 0) config.max_depth = tc.max_depth;
    const auto tree = fit_tree(train, config);

    const auto train_eval = evaluate(predict_tree(tree, train.features), train.labels);
    const auto test_eval = evaluate(predict_tree(tree, test.features), test.labels);

    std::size_t n_nodes = 0, n_leaves = 0;
    tree_detail::count_nodes(*tree.root, n_nodes, n_leaves);

    Json report = ctx.envelope("tree");
    report["min_samples_leaf"] = tc.min_samples_leaf;
    report["split_fraction"] = tc.split_fraction;
    report["train_rows"] = train.n_rows();
    report["test_rows"] = test.n_rows();
    report["train"] = to_json(train_eval);
    report["test"] = to_json(test_eval);
    report["n_nodes"] = n_nodes;
    report["n_leaves"] = n_leaves;
    const auto importance = feature_importance(tree);
    Json imp = Json::object();
    for (std::size_t f = 0; f < importance.size(); ++f)
        if (importance[f] > 0) imp[cohort.feature_names[f]] = importance[f];
    report["feature_importance"] = imp;
    ctx.write_json("tree_report.json", report);

    Json tj = ctx.envelope("tree_structure");
    tj["n_features"] = tree.n_features;
    tj["root"] = tree_detail::node_to_json(*tree.root, cohort.feature_names);
    ctx.write_json("tree.json", tj);

    ctx.write("rules.txt", rules_to_text(extract_rules(tree), cohort.feature_names));

    if (with_sweep) emit_sweep_artifacts(ctx, cohort);
}

inline void run_sweep(const RunContext& ctx) {
    const auto prep = prepare_cohort(ctx);
    emit_sweep_artifacts(ctx, prep.cohort);
}

inline Json repeated_eval_json(const RepeatedEval& ev) {
    Json per_rep = Json::array();
    for (const auto& r : ev.per_rep) per_rep.push_back(to_json(r));
    return Json{{"per_rep", per_rep}, {"average", to_json(ev.average)}};
}

inline Json mlp_to_json(const Mlp& mlp) {
    Json j{{"layer_sizes", mlp.arch.layer_sizes},
           {"hidden_activation", activation_name(mlp.arch.hidden_activation)}};
    Json layers = Json::array();
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        Json rows = Json::array();
        for (std::size_t r = 0; r < mlp.weights[l].rows; ++r) {
            Json row = Json::array();
            for (std::size_t c = 0; c < mlp.weights[l].cols; ++c)
                row.push_back(mlp.weights[l](r, c));
            rows.push_back(std::move(row));
        }
        layers.push_back({{"weights", rows}, {"biases", mlp.biases[l]}});
    }
    j["layers"] = layers;
    return j;
}

inline Protocol build_protocol(const RunContext& ctx) {
    Protocol p;
    p.repeats = ctx.config.protocol.repeats;
    p.train_fraction = ctx.config.protocol.train_fraction;
    p.master_seed = ctx.config.protocol.master_seed;
    p.refit_normalization = ctx.config.preprocess.fit_on == FitScope::train_only;
    p.norm_mode = ctx.config.preprocess.normalization;
    return p;
}

inline TrainConfig build_train_config(const RunContext& ctx) {
    TrainConfig tc;
    tc.learning_rate = ctx.config.nn.learning_rate;
    tc.epochs = ctx.config.nn.epochs;
    tc.batch_size = ctx.config.nn.batch_size;
    tc.init_scale = ctx.config.nn.init_scale;
    return tc;
}

inline void emit_search_artifacts(const RunContext& ctx, const SearchReport& report) {
    Json j = ctx.envelope("search");
    j["input_width"] = report.input_width;
    Json p1 = Json::array();
    for (const auto& p : report.phase1)
        p1.push_back({{"hidden_size", p.size}, {"average", to_json(p.average)}});
    j["phase1"] = p1;
    Json p2 = Json::array();
    for (const auto& [first, points] : report.phase2) {
        Json list = Json::array();
        for (const auto& p : points)
            list.push_back({{"second_size", p.size}, {"average", to_json(p.average)}});
        p2.push_back({{"first_size", first}, {"points", list}});
    }
    j["phase2"] = p2;
    if (report.selected) j["selected_layer_sizes"] = report.selected->layer_sizes;
    ctx.write_json("search_report.json", j);

    std::string csv1 = "hidden_size,acc_avg,se_avg,sp_avg\n";
    for (const auto& p : report.phase1)
        csv1 += std::to_string(p.size) + "," + fmt_double(p.average.accuracy) + "," +
                fmt_double(p.average.sensitivity) + "," + fmt_double(p.average.specificity) +
                "\n";
    ctx.write("search_phase1.csv", csv1);

    std::string csv2 = "first_size,second_size,acc_avg,se_avg,sp_avg\n";
    for (const auto& [first, points] : report.phase2)
        for (const auto& p : points)
            csv2 += std::to_string(first) + "," + std::to_string(p.size) + "," +
                    fmt_double(p.average.accuracy) + "," + fmt_double(p.average.sensitivity) +
                    "," + fmt_double(p.average.specificity) + "\n";
    ctx.write("search_phase2.csv", csv2);

    std::vector<ChartSeries> series;
    ChartSeries s1{"one hidden layer", {}};
    for (const auto& p : report.phase1)
        s1.points.emplace_back(double(p.size), p.average.accuracy);
    series.push_back(std::move(s1));
    for (const auto& [first, points] : report.phase2) {
        ChartSeries s{"first layer " + std::to_string(first), {}};
        for (const auto& p : points)
            s.points.emplace_back(double(p.size), p.average.accuracy);
        series.push_back(std::move(s));
    }
    ctx.write("search.svg",
              svg_line_chart("architecture search", "layer size under sweep",
                             "test accuracy (avg)", series));
}

// `arch_override`: hidden sizes from the command line; empty means use the
// config (or the search result when search is enabled).
inline void run_nn(const RunContext& ctx, const std::vector<std::size_t>& arch_override,
                   bool force_search) {
    const auto prep = prepare_cohort(ctx);
    const auto& cohort = prep.cohort;
    const auto protocol = build_protocol(ctx);
    const auto train_config = build_train_config(ctx);

    std::vector<std::size_t> hidden = ctx.config.nn.hidden;
    std::string source = "config";
    if (!arch_override.empty()) {
        hidden = arch_override;
        source = "override";
    } else if (ctx.config.nn.search || force_search) {
        SearchGrid grid;
        grid.phase1_start = ctx.config.search.phase1_start;
        grid.phase1_step = ctx.config.search.phase1_step;
        grid.first_sizes = ctx.config.search.first_sizes;
        grid.second_start = ctx.config.search.second_start;
        grid.second_step = ctx.config.search.second_step;
        grid.patience = ctx.config.search.patience;
        const auto report = run_arch_search(cohort, protocol, train_config, grid,
                                            ctx.config.nn.hidden_activation);
        emit_search_artifacts(ctx, report);
        hidden.assign(report.selected->layer_sizes.begin() + 1,
                      report.selected->layer_sizes.end() - 1);
        source = "search";
    }

    MlpArchitecture arch;
    arch.hidden_activation = ctx.config.nn.hidden_activation;
    arch.layer_sizes.push_back(cohort.n_features());
    for (const auto h : hidden) arch.layer_sizes.push_back(h);
    arch.layer_sizes.push_back(1);

    const auto ev = repeated_eval(cohort, arch, protocol, train_config);

    Json report = ctx.envelope("nn");
    report["layer_sizes"] = arch.layer_sizes;
    report["hidden_activation"] = activation_name(arch.hidden_activation);
    report["architecture_source"] = source;
    report["protocol"] = {{"repeats", protocol.repeats},
                          {"train_fraction", protocol.train_fraction}};
    report["evaluation"] = repeated_eval_json(ev);
    ctx.write_json("nn_report.json", report);

    std::string curve = "epoch,mean_loss\n";
    for (std::size_t e = 0; e < ev.models[0].loss_curve.size(); ++e)
        curve += std::to_string(e + 1) + "," + fmt_double(ev.models[0].loss_curve[e]) + "\n";
    ctx.write("loss_curve.csv", curve);

    Json model = ctx.envelope("model");
    model["model"] = mlp_to_json(ev.models[0]);
    ctx.write_json("model.json", model);

    if (!ev.models[0].loss_curve.empty()) {
        ChartSeries s{"training loss (rep 1)", {}};
        for (std::size_t e = 0; e < ev.models[0].loss_curve.size(); ++e)
            s.points.emplace_back(double(e + 1), ev.models[0].loss_curve[e]);
        ctx.write("loss_curve.svg",
                  svg_line_chart("training loss", "epoch", "mean batch loss", {s}));
    }
}

// Tree arm of the comparison: repeated holdout at the tree split fraction,
// same derived split seeds as the sweep.
inline RepeatedEval tree_protocol_eval(const RunContext& ctx, const Cohort& cohort) {
    const auto& tc = ctx.config.tree;
    TreeConfig config;
    config.min_samples_leaf = tc.min_samples_leaf;
    if (tc.max_depth > 0) config.max_depth = tc.max_depth;
    RepeatedEval out;
    for (std::size_t rep = 0; rep < ctx.config.protocol.repeats; ++rep) {
        const auto seed = derive_seed(ctx.config.protocol.master_seed, "split", rep);
        const auto [train, test] = stratified_split(cohort, tc.split_fraction, seed);
        const auto tree = fit_tree(train, config);
        out.per_rep.push_back(evaluate(predict_tree(tree, test.features), test.labels));
    }
    out.average = average_results(out.per_rep);
    return out;
}

inline void run_compare(const RunContext& ctx) {
    const auto prep = prepare_cohort(ctx);
    const auto& cohort = prep.cohort;
    const auto& clu = ctx.config.clustering;
    if (clu.k != 2)
        throw ConfigError("compare: clustering.k must be 2 so clusters map onto classes");

    // clustering arm: both algorithms, headline entry takes the better accuracy
    const auto km = kmeans(cohort.features, 2,
                           derive_seed(ctx.config.protocol.master_seed, "kmeans"),
                           clu.max_iterations, clu.tolerance, clu.restarts);
    const auto km_eval = cluster_eval(km.assignment, cohort.labels);
    const auto cut = cut_dendrogram(agglomerative(cohort.features, clu.metric, clu.linkage), 2);
    const auto hc_eval = cluster_eval(cut, cohort.labels);
    const bool km_wins = km_eval.eval.accuracy >= hc_eval.eval.accuracy;
    const auto& clu_best = km_wins ? km_eval : hc_eval;

    Json clustering_entry{{"method", "clustering"},
                          {"algorithm", km_wins ? "kmeans" : "agglomerative"},
                          {"result", to_json(clu_best.eval)},
                          {"config_hash", ctx.hash}};
    clustering_entry["detail"] = {{"kmeans", cluster_eval_json(km_eval)},
                                  {"agglomerative", cluster_eval_json(hc_eval)}};

    const auto tree_ev = tree_protocol_eval(ctx, cohort);
    Json tree_entry{{"method", "tree"},
                    {"result", to_json(tree_ev.average)},
                    {"config_hash", ctx.hash},
                    {"detail", repeated_eval_json(tree_ev)}};

    MlpArchitecture arch;
    arch.hidden_activation = ctx.config.nn.hidden_activation;
    arch.layer_sizes.push_back(cohort.n_features());
    for (const auto h : ctx.config.nn.hidden) arch.layer_sizes.push_back(h);
    arch.layer_sizes.push_back(1);
    const auto nn_ev = repeated_eval(cohort, arch, build_protocol(ctx), build_train_config(ctx));
    Json nn_entry{{"method", "network"},
                  {"result", to_json(nn_ev.average)},
                  {"config_hash", ctx.hash},
                  {"detail", repeated_eval_json(nn_ev)}};

    // every arm must have been produced from the same effective configuration
    for (const auto* entry : {&clustering_entry, &tree_entry, &nn_entry})
        if ((*entry)["config_hash"].get<std::string>() != ctx.hash)
            throw ConsistencyError("compare: method entries disagree on config hash");

    Json report = ctx.envelope("compare");
    report["rows"] = cohort.n_rows();
    report["methods"] = Json::array({clustering_entry, tree_entry, nn_entry});
    ctx.write_json("comparison.json", report);

    std::vector<BarGroup> groups;
    for (const auto* entry : {&clustering_entry, &tree_entry, &nn_entry}) {
        const auto& r = (*entry)["result"];
        groups.push_back({(*entry)["method"].get<std::string>(),
                          {r["sensitivity"].get<double>(), r["specificity"].get<double>(),
                           r["accuracy"].get<double>()}});
    }
    ctx.write("comparison.svg",
              svg_grouped_bars("classification performance by method", "rate",
                               {"sensitivity", "specificity", "accuracy"}, groups));
}

} // namespace crtbench
