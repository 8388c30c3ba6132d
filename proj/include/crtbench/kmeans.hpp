#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "crtbench/distance.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/matrix.hpp"
#include "crtbench/metrics.hpp"
#include "crtbench/rng.hpp"

namespace crtbench {

struct KMeansResult {
    Matrix centroids;
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
    std::size_t iterations = 0;
    // Inertia recorded after every assignment pass; non-increasing.
    std::vector<double> inertia_history;
};

namespace detail {

inline std::size_t nearest_centroid(const Matrix& data, std::size_t row,
                                    const Matrix& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids.rows; ++k) {
        const double d = squared_euclidean(data.row(row), centroids.row(k));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

} // namespace detail

// Lloyd iterations from explicit starting centroids. An emptied cluster is
// re-seeded at the point currently farthest from its own centroid.
inline KMeansResult kmeans_from_init(const Matrix& data, Matrix centroids,
                                     std::size_t max_iter = 300, double tol = 1e-6) {
    const std::size_t n = data.rows;
    const std::size_t k = centroids.rows;
    if (k < 1 || k > n) throw ContractError("kmeans: k must satisfy 1 <= k <= n_rows");
    if (centroids.cols != data.cols) throw ContractError("kmeans: centroid width mismatch");

    KMeansResult res;
    res.assignment.assign(n, 0);

    auto assign_all = [&]() {
        double inertia = 0;
        for (std::size_t r = 0; r < n; ++r) {
            res.assignment[r] = detail::nearest_centroid(data, r, centroids);
            inertia += squared_euclidean(data.row(r), centroids.row(res.assignment[r]));
        }
        return inertia;
    };

    std::size_t iter = 0;
    while (iter < max_iter) {
        ++iter;
        res.inertia = assign_all();
        res.inertia_history.push_back(res.inertia);

        std::vector<std::size_t> counts(k, 0);
        for (const auto a : res.assignment) ++counts[a];
        bool reseeded = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            // Farthest point from its own centroid takes over the empty slot.
            std::size_t far_row = 0;
            double far_d = -1.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double d =
                    squared_euclidean(data.row(r), centroids.row(res.assignment[r]));
                if (d > far_d) {
                    far_d = d;
                    far_row = r;
                }
            }
            auto dst = centroids.row(c);
            auto src = data.row(far_row);
            for (std::size_t j = 0; j < data.cols; ++j) dst[j] = src[j];
            reseeded = true;
        }

        Matrix next(k, data.cols);
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto c = res.assignment[r];
            ++sizes[c];
            auto dst = next.row(c);
            auto src = data.row(r);
            for (std::size_t j = 0; j < data.cols; ++j) dst[j] += src[j];
        }
        double movement = 0;
        for (std::size_t c = 0; c < k; ++c) {
            auto dst = next.row(c);
            if (sizes[c] == 0) {
                // Keep the re-seeded position.
                auto cur = centroids.row(c);
                for (std::size_t j = 0; j < data.cols; ++j) dst[j] = cur[j];
            } else {
                for (std::size_t j = 0; j < data.cols; ++j) dst[j] /= double(sizes[c]);
            }
            movement = std::max(movement,
                                std::sqrt(squared_euclidean(centroids.row(c), next.row(c))));
        }
        centroids = std::move(next);
        if (movement < tol && !reseeded) break;
    }

    // Final pass so every row ends up on its nearest final centroid.
    res.inertia = assign_all();
    res.inertia_history.push_back(res.inertia);
    res.iterations = iter;
    res.centroids = std::move(centroids);
    return res;
}

// Seeded k-means with restarts; the lowest-inertia restart wins (ties go to
// the earliest restart).
inline KMeansResult kmeans(const Matrix& data, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 300, double tol = 1e-6,
                           std::size_t n_restarts = 10) {
    if (k < 1 || k > data.rows) throw ContractError("kmeans: k must satisfy 1 <= k <= n_rows");
    if (n_restarts < 1) throw ContractError("kmeans: need at least one restart");
    KMeansResult best;
    bool have_best = false;
    for (std::size_t restart = 0; restart < n_restarts; ++restart) {
        Rng rng(derive_seed(seed, "kmeans_restart", restart));
        const auto pick = rng.sample_without_replacement(data.rows, k);
        Matrix init(k, data.cols);
        for (std::size_t c = 0; c < k; ++c) {
            auto dst = init.row(c);
            auto src = data.row(pick[c]);
            for (std::size_t j = 0; j < data.cols; ++j) dst[j] = src[j];
        }
        auto res = kmeans_from_init(data, std::move(init), max_iter, tol);
        if (!have_best || res.inertia < best.inertia) {
            best = std::move(res);
            have_best = true;
        }
    }
    return best;
}

// ------------------------------------------------------- scoring against labels

struct ClusterEval {
    std::array<int, 2> mapping = {0, 1}; // cluster index -> class
    EvalResult eval;
};

// Scores a 2-cluster assignment against binary labels under the better of
// the two cluster-to-class bijections (tie: cluster 0 -> class 0).
inline ClusterEval cluster_eval(std::span<const std::size_t> assignment,
                                std::span<const int> labels) {
    if (assignment.size() != labels.size() || assignment.empty())
        throw ContractError("cluster_eval: length mismatch or empty");
    bool has[2] = {false, false};
    for (const auto l : labels) {
        if (l != 0 && l != 1) throw ContractError("cluster_eval: labels must be 0 or 1");
        has[l] = true;
    }
    if (!has[0] || !has[1])
        throw ContractError("cluster_eval: labels must contain both classes");
    for (const auto a : assignment)
        if (a > 1) throw ContractError("cluster_eval: supports exactly two clusters");

    std::vector<int> direct(assignment.size()), flipped(assignment.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        direct[i] = static_cast<int>(assignment[i]);
        flipped[i] = 1 - direct[i];
    }
    const auto ed = evaluate(direct, labels);
    const auto ef = evaluate(flipped, labels);
    ClusterEval out;
    if (ef.accuracy > ed.accuracy) {
        out.mapping = {1, 0};
        out.eval = ef;
    } else {
        out.mapping = {0, 1};
        out.eval = ed;
    }
    return out;
}

} // namespace crtbench
