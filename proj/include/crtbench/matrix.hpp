#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crtbench/errors.hpp"

namespace crtbench {

// Dense row-major matrix of doubles. Small and value-semantic; every
// algorithm in this library works on views of its rows.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    bool operator==(const Matrix&) const = default;
};

inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= m.rows) throw ContractError("select_rows: index out of range");
        auto src = m.row(indices[i]);
        auto dst = out.row(i);
        for (std::size_t c = 0; c < m.cols; ++c) dst[c] = src[c];
    }
    return out;
}

} // namespace crtbench
