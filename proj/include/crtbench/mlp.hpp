#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crtbench/errors.hpp"
#include "crtbench/matrix.hpp"
#include "crtbench/rng.hpp"

namespace crtbench {

enum class Activation { linear, logistic, rectified };

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::logistic: return "logistic";
        case Activation::rectified: return "rectified";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "linear") return Activation::linear;
    if (s == "logistic") return Activation::logistic;
    if (s == "rectified") return Activation::rectified;
    throw ConfigError("unknown activation '" + s + "'");
}

// Layer sizes run [input, hidden..., 1]; the output unit is always logistic,
// hidden units use the configured activation.
struct MlpArchitecture {
    std::vector<std::size_t> layer_sizes;
    Activation hidden_activation = Activation::linear;
};

inline void validate_architecture(const MlpArchitecture& arch) {
    if (arch.layer_sizes.size() < 2)
        throw ContractError("architecture needs at least input and output layers");
    if (arch.layer_sizes.back() != 1)
        throw ContractError("output layer must have exactly 1 unit");
    for (const auto s : arch.layer_sizes)
        if (s < 1) throw ContractError("layer sizes must be >= 1");
}

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double init_scale = 0.1;
};

struct Mlp {
    MlpArchitecture arch;
    // weights[l] is (layer_sizes[l+1] x layer_sizes[l]); biases[l] matches rows.
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> loss_curve;

    std::size_t n_layers() const { return weights.size(); }
    std::size_t input_size() const { return arch.layer_sizes.front(); }
};

inline Mlp init_mlp(const MlpArchitecture& arch, std::uint64_t seed, double init_scale = 0.1) {
    validate_architecture(arch);
    Mlp mlp;
    mlp.arch = arch;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        Matrix w(arch.layer_sizes[l + 1], arch.layer_sizes[l]);
        for (auto& v : w.data) v = rng.uniform(-init_scale, init_scale);
        mlp.weights.push_back(std::move(w));
        mlp.biases.emplace_back(arch.layer_sizes[l + 1], 0.0);
    }
    return mlp;
}

inline double logistic_fn(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace detail {

inline double activate(double z, Activation a) {
    switch (a) {
        case Activation::linear: return z;
        case Activation::logistic: return logistic_fn(z);
        case Activation::rectified: return z > 0 ? z : 0.0;
    }
    return z;
}

inline double activate_grad(double z, double fz, Activation a) {
    switch (a) {
        case Activation::linear: return 1.0;
        case Activation::logistic: return fz * (1.0 - fz);
        case Activation::rectified: return z > 0 ? 1.0 : 0.0;
    }
    (void)fz;
    return 1.0;
}

// Activations per layer (index 0 = input row) plus pre-activations.
struct ForwardTrace {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> z;
};

inline ForwardTrace forward_trace(const Mlp& mlp, std::span<const double> row) {
    ForwardTrace t;
    t.a.emplace_back(row.begin(), row.end());
    for (std::size_t l = 0; l < mlp.n_layers(); ++l) {
        const auto& w = mlp.weights[l];
        const auto& prev = t.a.back();
        std::vector<double> z(w.rows);
        for (std::size_t i = 0; i < w.rows; ++i) {
            double s = mlp.biases[l][i];
            const auto wr = w.row(i);
            for (std::size_t j = 0; j < w.cols; ++j) s += wr[j] * prev[j];
            z[i] = s;
        }
        const bool is_output = l + 1 == mlp.n_layers();
        std::vector<double> a(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            a[i] = is_output ? logistic_fn(z[i])
                             : activate(z[i], mlp.arch.hidden_activation);
        t.z.push_back(std::move(z));
        t.a.push_back(std::move(a));
    }
    return t;
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    explicit Gradients(const Mlp& mlp) {
        for (std::size_t l = 0; l < mlp.n_layers(); ++l) {
            weights.emplace_back(mlp.weights[l].rows, mlp.weights[l].cols);
            biases.emplace_back(mlp.biases[l].size(), 0.0);
        }
    }
};

// Accumulates one row's gradient of the BCE loss into `g`.
inline void backprop_row(const Mlp& mlp, std::span<const double> row, int y, Gradients& g) {
    const auto trace = forward_trace(mlp, row);
    const std::size_t L = mlp.n_layers();
    // dL/dz for the logistic-output + cross-entropy pair is p - y.
    std::vector<double> delta = {trace.a.back()[0] - double(y)};
    for (std::size_t l = L; l-- > 0;) {
        const auto& a_prev = trace.a[l];
        for (std::size_t i = 0; i < delta.size(); ++i) {
            g.biases[l][i] += delta[i];
            auto gr = g.weights[l].row(i);
            for (std::size_t j = 0; j < a_prev.size(); ++j) gr[j] += delta[i] * a_prev[j];
        }
        if (l == 0) break;
        const auto& w = mlp.weights[l];
        std::vector<double> next(w.cols, 0.0);
        for (std::size_t j = 0; j < w.cols; ++j) {
            double s = 0;
            for (std::size_t i = 0; i < w.rows; ++i) s += w(i, j) * delta[i];
            next[j] = s * activate_grad(trace.z[l - 1][j], trace.a[l][j],
                                        mlp.arch.hidden_activation);
        }
        delta = std::move(next);
    }
}

} // namespace detail

inline double forward(const Mlp& mlp, std::span<const double> row) {
    if (row.size() != mlp.input_size()) throw ContractError("forward: row width mismatch");
    return detail::forward_trace(mlp, row).a.back()[0];
}

// Cross-entropy with the prediction clamped to [1e-12, 1 - 1e-12].
inline double bce_loss(double prediction, int y) {
    const double eps = 1e-12;
    const double p = std::clamp(prediction, eps, 1.0 - eps);
    return -(double(y) * std::log(p) + (1.0 - double(y)) * std::log(1.0 - p));
}

inline int predict_mlp(const Mlp& mlp, std::span<const double> row, double threshold = 0.5) {
    return forward(mlp, row) >= threshold ? 1 : 0;
}

inline std::vector<int> predict_mlp(const Mlp& mlp, const Matrix& X, double threshold = 0.5) {
    std::vector<int> out;
    out.reserve(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r)
        out.push_back(predict_mlp(mlp, X.row(r), threshold));
    return out;
}

// The row visit order for an epoch — a pure function of (seed, epoch, n), so
// training order is auditable and reproducible from outside.
inline std::vector<std::size_t> epoch_permutation(std::uint64_t seed, std::size_t epoch,
                                                  std::size_t n) {
    Rng rng(derive_seed(seed, "epoch_shuffle", epoch));
    return rng.permutation(n);
}

// Mini-batch gradient descent on mean BCE with an injectable visit order per
// epoch (the plain train() below wires in epoch_permutation).
inline Mlp train_with_order(
    Mlp mlp, const Matrix& X, std::span<const int> y, const TrainConfig& config,
    const std::function<std::vector<std::size_t>(std::size_t)>& order_for_epoch) {
    if (X.rows == 0 || X.rows != y.size())
        throw ContractError("train: empty training set or label mismatch");
    if (X.cols != mlp.input_size()) throw ContractError("train: feature width mismatch");
    if (config.learning_rate <= 0) throw ContractError("train: learning rate must be > 0");
    if (config.batch_size < 1) throw ContractError("train: batch size must be >= 1");

    const std::size_t n = X.rows;
    mlp.loss_curve.clear();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = order_for_epoch(epoch);
        if (order.size() != n) throw ContractError("train: bad epoch order length");
        double epoch_loss = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const double batch_n = double(stop - start);
            detail::Gradients grads(mlp);
            for (std::size_t i = start; i < stop; ++i) {
                const auto r = order[i];
                epoch_loss += bce_loss(detail::forward_trace(mlp, X.row(r)).a.back()[0],
                                       y[r]);
                detail::backprop_row(mlp, X.row(r), y[r], grads);
            }
            const double step = config.learning_rate / batch_n;
            for (std::size_t l = 0; l < mlp.n_layers(); ++l) {
                for (std::size_t i = 0; i < mlp.weights[l].data.size(); ++i)
                    mlp.weights[l].data[i] -= step * grads.weights[l].data[i];
                for (std::size_t i = 0; i < mlp.biases[l].size(); ++i)
                    mlp.biases[l][i] -= step * grads.biases[l][i];
            }
            if (!std::isfinite(epoch_loss))
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(batch_index));
        }
        mlp.loss_curve.push_back(epoch_loss / double(n));
    }
    return mlp;
}

inline Mlp train(Mlp mlp, const Matrix& X, std::span<const int> y, const TrainConfig& config) {
    const std::size_t n = X.rows;
    const auto seed = config.seed;
    return train_with_order(std::move(mlp), X, y, config, [seed, n](std::size_t epoch) {
        return epoch_permutation(seed, epoch, n);
    });
}

// Max relative disagreement between backpropagated and central-difference
// gradients of the batch-mean loss. Works on its own copy of the model.
inline double gradient_check(Mlp mlp, const Matrix& X, std::span<const int> y,
                             double step = 1e-5) {
    if (X.rows == 0 || X.rows > 8) throw ContractError("gradient_check: batch must be 1..8 rows");
    if (X.rows != y.size()) throw ContractError("gradient_check: label mismatch");

    const double n = double(X.rows);
    detail::Gradients analytic(mlp);
    for (std::size_t r = 0; r < X.rows; ++r)
        detail::backprop_row(mlp, X.row(r), y[r], analytic);

    auto batch_loss = [&] {
        double s = 0;
        for (std::size_t r = 0; r < X.rows; ++r)
            s += bce_loss(detail::forward_trace(mlp, X.row(r)).a.back()[0], y[r]);
        return s / n;
    };

    double worst = 0;
    auto check_param = [&](double& param, double analytic_sum) {
        const double saved = param;
        param = saved + step;
        const double up = batch_loss();
        param = saved - step;
        const double down = batch_loss();
        param = saved;
        const double numeric = (up - down) / (2 * step);
        const double a = analytic_sum / n;
        const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
        worst = std::max(worst, rel);
    };

    for (std::size_t l = 0; l < mlp.n_layers(); ++l) {
        for (std::size_t i = 0; i < mlp.weights[l].data.size(); ++i)
            check_param(mlp.weights[l].data[i], analytic.weights[l].data[i]);
        for (std::size_t i = 0; i < mlp.biases[l].size(); ++i)
            check_param(mlp.biases[l][i], analytic.biases[l][i]);
    }
    return worst;
}

} // namespace crtbench
