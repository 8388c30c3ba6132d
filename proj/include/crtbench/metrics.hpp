#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crtbench/errors.hpp"

namespace crtbench {

// Binary confusion counts. Class 1 is the positive class throughout.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;

    std::size_t total() const { return tp + fn + tn + fp; }
    bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const int> predicted,
                                 std::span<const int> actual) {
    if (predicted.size() != actual.size())
        throw ContractError("confusion: prediction/label length mismatch");
    if (predicted.empty()) throw ContractError("confusion: empty inputs");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i];
        const int a = actual[i];
        if ((p != 0 && p != 1) || (a != 0 && a != 1))
            throw ContractError("confusion: labels must be 0 or 1");
        if (a == 1)
            (p == 1 ? cm.tp : cm.fn)++;
        else
            (p == 0 ? cm.tn : cm.fp)++;
    }
    return cm;
}

// True positive rate: fraction of actual positives that were flagged.
inline double sensitivity(const ConfusionMatrix& cm) {
    const std::size_t denom = cm.tp + cm.fn;
    if (denom == 0) throw UndefinedRateError("sensitivity undefined: no positive cases");
    return static_cast<double>(cm.tp) / static_cast<double>(denom);
}

// True negative rate: fraction of actual negatives that were cleared.
inline double specificity(const ConfusionMatrix& cm) {
    const std::size_t denom = cm.tn + cm.fp;
    if (denom == 0) throw UndefinedRateError("specificity undefined: no negative cases");
    return static_cast<double>(cm.tn) / static_cast<double>(denom);
}

inline double accuracy(const ConfusionMatrix& cm) {
    const std::size_t denom = cm.total();
    if (denom == 0) throw UndefinedRateError("accuracy undefined: no cases");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(denom);
}

struct EvalResult {
    ConfusionMatrix counts;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double accuracy = 0.0;
};

inline EvalResult evaluate(std::span<const int> predicted, std::span<const int> actual) {
    EvalResult r;
    r.counts = confusion(predicted, actual);
    r.sensitivity = sensitivity(r.counts);
    r.specificity = specificity(r.counts);
    r.accuracy = accuracy(r.counts);
    return r;
}

// Averages the rates over repetitions and sums the raw counts, which is the
// usual way a repeated-split protocol is reported.
inline EvalResult average_results(std::span<const EvalResult> results) {
    if (results.empty()) throw ContractError("average_results: empty input");
    EvalResult avg;
    for (const auto& r : results) {
        avg.counts.tp += r.counts.tp;
        avg.counts.fn += r.counts.fn;
        avg.counts.tn += r.counts.tn;
        avg.counts.fp += r.counts.fp;
        avg.sensitivity += r.sensitivity;
        avg.specificity += r.specificity;
        avg.accuracy += r.accuracy;
    }
    const double n = static_cast<double>(results.size());
    avg.sensitivity /= n;
    avg.specificity /= n;
    avg.accuracy /= n;
    return avg;
}

} // namespace crtbench
