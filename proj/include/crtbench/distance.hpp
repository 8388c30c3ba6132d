#pragma once

#include <cmath>
#include <span>
#include <string>

#include "crtbench/errors.hpp"

namespace crtbench {

enum class DistanceMetric { euclidean, manhattan, cosine };

inline std::string metric_name(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::euclidean: return "euclidean";
        case DistanceMetric::manhattan: return "manhattan";
        case DistanceMetric::cosine: return "cosine";
    }
    return "?";
}

inline DistanceMetric metric_from_name(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "manhattan") return DistanceMetric::manhattan;
    if (s == "cosine") return DistanceMetric::cosine;
    throw ConfigError("unknown distance metric '" + s + "'");
}

// Cosine distance is 1 - cos similarity, fixed at 1 when either vector has
// zero norm (a real case after min-max scaling).
inline double distance(std::span<const double> a, std::span<const double> b,
                       DistanceMetric metric) {
    if (a.size() != b.size() || a.empty())
        throw ContractError("distance: dimension mismatch or empty vectors");
    switch (metric) {
        case DistanceMetric::euclidean: {
            double s = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
        case DistanceMetric::manhattan: {
            double s = 0;
            for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
            return s;
        }
        case DistanceMetric::cosine: {
            double dot = 0, na = 0, nb = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            if (na == 0.0 || nb == 0.0) return 1.0;
            const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
            return std::max(0.0, 1.0 - sim);
        }
    }
    throw ContractError("distance: bad metric");
}

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace crtbench
