// Command-line workbench: synthetic cohorts, preprocessing, clustering,
// decision trees, networks, and the cross-method comparison.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crtbench/experiment.hpp"

namespace {

std::vector<std::size_t> parse_arch(const std::string& csv) {
    std::vector<std::size_t> out;
    std::string token;
    std::istringstream ss(csv);
    while (std::getline(ss, token, ',')) {
        try {
            const auto v = std::stoull(token);
            if (v < 1) throw std::invalid_argument("zero");
            out.push_back(v);
        } catch (const std::exception&) {
            throw crtbench::ConfigError("--arch: bad layer size '" + token + "'");
        }
    }
    if (out.empty()) throw crtbench::ConfigError("--arch: no layer sizes given");
    return out;
}

void dispatch(const std::string& method, const crtbench::RunContext& ctx, bool tree_sweep,
              const std::vector<std::size_t>& arch, bool nn_search) {
    if (method == "synth")
        crtbench::run_synth(ctx);
    else if (method == "preprocess")
        crtbench::run_preprocess(ctx);
    else if (method == "cluster")
        crtbench::run_cluster(ctx);
    else if (method == "tree")
        crtbench::run_tree(ctx, tree_sweep);
    else if (method == "sweep")
        crtbench::run_sweep(ctx);
    else if (method == "nn")
        crtbench::run_nn(ctx, arch, nn_search);
    else if (method == "compare")
        crtbench::run_compare(ctx);
    else
        throw crtbench::ConfigError("unknown method '" + method +
                                    "' (expected synth, preprocess, cluster, tree, sweep, "
                                    "nn, or compare)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular binary-classification workbench"};
    app.require_subcommand(0, 1);
    app.fallthrough(); // global options may follow the subcommand

    std::string config_path, out_dir, input_csv, column_spec, method;
    std::uint64_t seed_value = 0;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "output directory (overrides config output_dir)");
    auto* seed_opt =
        app.add_option("--seed", seed_value, "master seed (overrides config)");
    app.add_option("--input", input_csv, "cohort CSV (overrides config input_csv)");
    app.add_option("--columns", column_spec, "column-role JSON (overrides config)");
    app.add_option("--method", method, "command to run, as an option instead of a subcommand");

    auto* cmd_synth =
        app.add_subcommand("synth", "generate a synthetic cohort with known truth");
    auto* cmd_pre = app.add_subcommand("preprocess", "run the preprocessing pipeline");
    auto* cmd_cluster =
        app.add_subcommand("cluster", "k-means and agglomerative clustering scored "
                                      "against labels");
    auto* cmd_tree = app.add_subcommand("tree", "fit and score a decision tree");
    bool tree_sweep = false;
    cmd_tree->add_flag("--sweep", tree_sweep, "also emit the leaf-size sweep");
    auto* cmd_sweep = app.add_subcommand("sweep", "leaf-size pruning sweep");
    auto* cmd_nn = app.add_subcommand("nn", "train and score a feedforward network");
    std::string arch_csv;
    cmd_nn->add_option("--arch", arch_csv, "hidden layer sizes, e.g. 20,14");
    bool nn_search = false;
    cmd_nn->add_flag("--search", nn_search, "run the two-phase architecture search first");
    auto* cmd_compare =
        app.add_subcommand("compare", "all three method families on one cohort");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::string chosen = method;
        for (const auto* cmd : {cmd_synth, cmd_pre, cmd_cluster, cmd_tree, cmd_sweep,
                                cmd_nn, cmd_compare}) {
            if (!cmd->parsed()) continue;
            if (!chosen.empty() && chosen != cmd->get_name())
                throw crtbench::ConfigError("give either a subcommand or --method, not both");
            chosen = cmd->get_name();
        }
        if (chosen.empty())
            throw crtbench::ConfigError("no command given (try --help)");

        crtbench::AppConfig config;
        if (!config_path.empty()) config = crtbench::load_app_config(config_path);
        if (!input_csv.empty()) config.input_csv = input_csv;
        if (!column_spec.empty()) config.column_spec = column_spec;
        if (seed_opt->count() > 0) config.protocol.master_seed = seed_value;
        if (out_dir.empty()) out_dir = config.output_dir;

        std::vector<std::size_t> arch;
        if (!arch_csv.empty()) arch = parse_arch(arch_csv);

        const auto ctx = crtbench::make_run_context(config, out_dir);
        dispatch(chosen, ctx, tree_sweep, arch, nn_search);
        return 0;
    } catch (const crtbench::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const crtbench::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const crtbench::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
