#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "crtbench/cohort.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/metrics.hpp"
#include "crtbench/mlp.hpp"
#include "crtbench/preprocess.hpp"
#include "crtbench/rng.hpp"

namespace crtbench {

// Shared repeated-holdout protocol: every caller in a sweep uses the same
// repeats, fraction, and derived seeds, so architecture is the only thing
// that varies between grid points.
struct Protocol {
    std::size_t repeats = 5;
    double train_fraction = 0.70;
    std::uint64_t master_seed = 0;
    // Refit normalization on each training fold (matches fit_on=train_only).
    bool refit_normalization = true;
    NormMode norm_mode = NormMode::min_max;
};

struct RepeatedEval {
    std::vector<EvalResult> per_rep;
    EvalResult average;
    std::vector<Mlp> models; // one trained model per repetition
};

// Per repetition: fresh stratified split, optional per-fold normalization
// refit, fresh init, train, evaluate on the held-out rows.
inline RepeatedEval repeated_eval(const Cohort& cohort, const MlpArchitecture& arch,
                                  const Protocol& protocol, const TrainConfig& base_config) {
    validate_architecture(arch);
    if (arch.layer_sizes.front() != cohort.n_features())
        throw ContractError("repeated_eval: architecture input width mismatch");
    if (protocol.repeats < 1) throw ContractError("repeated_eval: repeats must be >= 1");

    RepeatedEval out;
    for (std::size_t rep = 0; rep < protocol.repeats; ++rep) {
        const auto split_seed = derive_seed(protocol.master_seed, "split", rep);
        const auto idx = stratified_split_indices(cohort.labels, protocol.train_fraction,
                                                  split_seed);
        Matrix train_x = select_rows(cohort.features, idx.train);
        Matrix test_x = select_rows(cohort.features, idx.test);
        std::vector<int> train_y, test_y;
        for (const auto r : idx.train) train_y.push_back(cohort.labels[r]);
        for (const auto r : idx.test) test_y.push_back(cohort.labels[r]);

        if (protocol.refit_normalization) {
            std::vector<std::size_t> all(train_x.rows);
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            const auto params = fit_normalization(train_x, all, protocol.norm_mode,
                                                  /*strict=*/false);
            train_x = apply_normalization(train_x, params);
            test_x = apply_normalization(test_x, params);
        }

        const auto train_seed = derive_seed(protocol.master_seed, "train", rep);
        TrainConfig config = base_config;
        config.seed = train_seed;
        auto mlp = init_mlp(arch, derive_seed(train_seed, "init"), config.init_scale);
        mlp = train(std::move(mlp), train_x, train_y, config);
        const auto pred = predict_mlp(mlp, test_x);
        out.per_rep.push_back(evaluate(pred, test_y));
        out.models.push_back(std::move(mlp));
    }
    out.average = average_results(out.per_rep);
    return out;
}

// ------------------------------------------------------------------ sweeps

struct SweepPoint {
    std::size_t size = 0;
    EvalResult average;
};

struct SearchReport {
    std::size_t input_width = 0;
    std::vector<SweepPoint> phase1;
    std::vector<std::pair<std::size_t, std::vector<SweepPoint>>> phase2;
    std::optional<MlpArchitecture> selected;
};

// Evaluates a candidate set of hidden-layer sizes under the shared protocol.
using ArchEvaluator = std::function<EvalResult(const std::vector<std::size_t>& hidden)>;

// Grid start, start+step, ... capped at the largest value <= max_size.
inline std::vector<SweepPoint> single_layer_sweep(const ArchEvaluator& eval_arch,
                                                  std::size_t start = 5, std::size_t step = 5,
                                                  std::size_t max_size = 55) {
    if (start < 1 || step < 1) throw ContractError("single_layer_sweep: bad grid");
    if (start > max_size) throw ContractError("single_layer_sweep: empty grid");
    std::vector<SweepPoint> out;
    for (std::size_t size = start; size <= max_size; size += step)
        out.push_back({size, eval_arch({size})});
    return out;
}

// Grows the second layer from second_start in steps of second_step until
// `patience` consecutive evaluations fail to strictly beat the running best
// accuracy.
inline std::vector<SweepPoint> second_layer_growth(const ArchEvaluator& eval_arch,
                                                   std::size_t first_size,
                                                   std::size_t second_start = 2,
                                                   std::size_t second_step = 2,
                                                   std::size_t patience = 2) {
    if (second_start < 1 || second_step < 1 || patience < 1)
        throw ContractError("second_layer_growth: bad grid");
    std::vector<SweepPoint> out;
    double best = -1.0;
    std::size_t stale = 0;
    for (std::size_t size = second_start; stale < patience; size += second_step) {
        const auto eval = eval_arch({first_size, size});
        out.push_back({size, eval});
        if (eval.accuracy > best) {
            best = eval.accuracy;
            stale = 0;
        } else {
            ++stale;
        }
    }
    return out;
}

inline std::vector<std::pair<std::size_t, std::vector<SweepPoint>>> two_layer_sweep(
    const ArchEvaluator& eval_arch, const std::vector<std::size_t>& first_sizes,
    std::size_t second_start = 2, std::size_t second_step = 2, std::size_t patience = 2) {
    std::vector<std::pair<std::size_t, std::vector<SweepPoint>>> out;
    for (const auto first : first_sizes)
        out.emplace_back(first, second_layer_growth(eval_arch, first, second_start,
                                                    second_step, patience));
    return out;
}

// Highest averaged accuracy wins; ties fall to fewer total hidden neurons,
// then fewer hidden layers, then the smaller first layer.
inline MlpArchitecture select_architecture(const SearchReport& report,
                                           Activation hidden_activation = Activation::linear) {
    struct Candidate {
        double accuracy;
        std::size_t total_hidden;
        std::size_t n_layers;
        std::size_t first;
        std::vector<std::size_t> hidden;
    };
    std::vector<Candidate> candidates;
    for (const auto& p : report.phase1)
        candidates.push_back({p.average.accuracy, p.size, 1, p.size, {p.size}});
    for (const auto& [first, points] : report.phase2)
        for (const auto& p : points)
            candidates.push_back(
                {p.average.accuracy, first + p.size, 2, first, {first, p.size}});
    if (candidates.empty()) throw ContractError("select_architecture: empty report");

    const Candidate* best = &candidates.front();
    for (const auto& c : candidates) {
        const bool wins =
            c.accuracy > best->accuracy ||
            (c.accuracy == best->accuracy &&
             (c.total_hidden < best->total_hidden ||
              (c.total_hidden == best->total_hidden &&
               (c.n_layers < best->n_layers ||
                (c.n_layers == best->n_layers && c.first < best->first)))));
        if (wins) best = &c;
    }
    MlpArchitecture arch;
    arch.hidden_activation = hidden_activation;
    arch.layer_sizes.push_back(report.input_width);
    for (const auto h : best->hidden) arch.layer_sizes.push_back(h);
    arch.layer_sizes.push_back(1);
    return arch;
}

struct SearchGrid {
    std::size_t phase1_start = 5;
    std::size_t phase1_step = 5;
    std::vector<std::size_t> first_sizes = {10, 20, 30, 40};
    std::size_t second_start = 2;
    std::size_t second_step = 2;
    std::size_t patience = 2;
};

// Both phases end to end on a real cohort, then the selection rule.
inline SearchReport run_arch_search(const Cohort& cohort, const Protocol& protocol,
                                    const TrainConfig& config, const SearchGrid& grid = {},
                                    Activation activation = Activation::linear) {
    SearchReport report;
    report.input_width = cohort.n_features();
    ArchEvaluator eval_arch = [&](const std::vector<std::size_t>& hidden) {
        MlpArchitecture arch;
        arch.hidden_activation = activation;
        arch.layer_sizes.push_back(cohort.n_features());
        for (const auto h : hidden) arch.layer_sizes.push_back(h);
        arch.layer_sizes.push_back(1);
        return repeated_eval(cohort, arch, protocol, config).average;
    };
    report.phase1 = single_layer_sweep(eval_arch, grid.phase1_start, grid.phase1_step,
                                       std::max(grid.phase1_start, cohort.n_features()));
    report.phase2 = two_layer_sweep(eval_arch, grid.first_sizes, grid.second_start,
                                    grid.second_step, grid.patience);
    report.selected = select_architecture(report, activation);
    return report;
}

} // namespace crtbench
