#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "crtbench/distance.hpp"
#include "crtbench/errors.hpp"
#include "crtbench/matrix.hpp"

namespace crtbench {

enum class Linkage { average, single, complete };

inline std::string linkage_name(Linkage l) {
    switch (l) {
        case Linkage::average: return "average";
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
    }
    return "?";
}

inline Linkage linkage_from_name(const std::string& s) {
    if (s == "average") return Linkage::average;
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    throw ConfigError("unknown linkage '" + s + "'");
}

// One agglomeration step: clusters a and b (a < b) joined at the given
// linkage distance into a cluster holding `size` leaves. Cluster ids follow
// the usual convention: leaves are 0..n-1, the t-th merge creates id n+t.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double distance = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;
};

// Bottom-up clustering via Lance-Williams distance updates. Ties on the
// minimum pick the lexicographically smallest (id_a, id_b) pair, which keeps
// the merge history deterministic.
inline Dendrogram agglomerative(const Matrix& data, DistanceMetric metric,
                                Linkage linkage = Linkage::average) {
    const std::size_t n = data.rows;
    if (n < 2) throw ContractError("agglomerative: need at least 2 rows");

    // Slot-addressed working distance matrix; merged clusters collapse into
    // the lower slot.
    Matrix dist(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(data.row(i), data.row(j), metric);
            dist(i, j) = d;
            dist(j, i) = d;
        }

    std::vector<bool> alive(n, true);
    std::vector<std::size_t> cluster_id(n), cluster_size(n, 1);
    std::iota(cluster_id.begin(), cluster_id.end(), 0);

    Dendrogram out;
    out.n_leaves = n;
    out.merges.reserve(n - 1);

    for (std::size_t step = 0; step < n - 1; ++step) {
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        std::size_t best_ida = 0, best_idb = 0;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                const double d = dist(i, j);
                std::size_t ida = cluster_id[i], idb = cluster_id[j];
                if (ida > idb) std::swap(ida, idb);
                const bool better =
                    !found || d < best_d ||
                    (d == best_d && (ida < best_ida || (ida == best_ida && idb < best_idb)));
                if (better) {
                    best_d = d;
                    bi = i;
                    bj = j;
                    best_ida = ida;
                    best_idb = idb;
                    found = true;
                }
            }
        }

        const std::size_t ni = cluster_size[bi], nj = cluster_size[bj];
        out.merges.push_back({best_ida, best_idb, best_d, ni + nj});

        // Update distances from the merged cluster (slot bi) to survivors.
        for (std::size_t t = 0; t < n; ++t) {
            if (!alive[t] || t == bi || t == bj) continue;
            double d = 0;
            switch (linkage) {
                case Linkage::average:
                    d = (double(ni) * dist(bi, t) + double(nj) * dist(bj, t)) /
                        double(ni + nj);
                    break;
                case Linkage::single: d = std::min(dist(bi, t), dist(bj, t)); break;
                case Linkage::complete: d = std::max(dist(bi, t), dist(bj, t)); break;
            }
            dist(bi, t) = d;
            dist(t, bi) = d;
        }
        alive[bj] = false;
        cluster_size[bi] = ni + nj;
        cluster_id[bi] = n + step;
    }
    return out;
}

namespace detail {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Replays the first `count` merges and groups leaves; groups are ordered and
// labeled by their smallest leaf index.
inline std::vector<std::vector<std::size_t>> groups_after(const Dendrogram& d,
                                                          std::size_t count) {
    const std::size_t n = d.n_leaves;
    UnionFind uf(n + count);
    for (std::size_t t = 0; t < count; ++t) {
        uf.unite(d.merges[t].a, n + t);
        uf.unite(d.merges[t].b, n + t);
    }
    std::vector<std::vector<std::size_t>> by_root(n + count);
    for (std::size_t leaf = 0; leaf < n; ++leaf) by_root[uf.find(leaf)].push_back(leaf);
    std::vector<std::vector<std::size_t>> groups;
    for (auto& g : by_root)
        if (!g.empty()) groups.push_back(std::move(g));
    std::sort(groups.begin(), groups.end(),
              [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return groups;
}

} // namespace detail

// Undoes the last k-1 merges; the resulting k groups are labeled 0..k-1 in
// order of their smallest leaf index.
inline std::vector<std::size_t> cut_dendrogram(const Dendrogram& d, std::size_t k) {
    const std::size_t n = d.n_leaves;
    if (k < 1 || k > n) throw ContractError("cut_dendrogram: k out of range");
    const auto groups = detail::groups_after(d, n - k);
    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const auto leaf : groups[g]) assignment[leaf] = g;
    return assignment;
}

// Display-oriented collapse of the bottom of a dendrogram: at most
// max_leaves displayed leaves, each annotated with how many original samples
// it already combines. Displayed ids: leaves 0..k-1, merge t -> k+t.
struct TruncatedDendrogram {
    std::size_t n_display_leaves = 0;
    std::size_t n_total_leaves = 0;
    std::vector<Merge> merges;
    std::vector<std::vector<std::size_t>> leaf_members;
};

inline TruncatedDendrogram truncate_dendrogram(const Dendrogram& d, std::size_t max_leaves) {
    if (max_leaves < 2) throw ContractError("truncate_dendrogram: max_leaves must be >= 2");
    const std::size_t n = d.n_leaves;
    const std::size_t k = std::min(max_leaves, n);
    const std::size_t collapsed = n - k;

    TruncatedDendrogram out;
    out.n_display_leaves = k;
    out.n_total_leaves = n;
    out.leaf_members = detail::groups_after(d, collapsed);

    // Current dendrogram id of each group: its leaf id while a singleton,
    // else the id of the last merge that formed it.
    detail::UnionFind uf(n + d.merges.size());
    std::vector<std::size_t> root_id(n + d.merges.size());
    std::iota(root_id.begin(), root_id.end(), 0);
    for (std::size_t t = 0; t < collapsed; ++t) {
        uf.unite(d.merges[t].a, n + t);
        uf.unite(d.merges[t].b, n + t);
        root_id[uf.find(n + t)] = n + t;
    }
    std::vector<std::size_t> display_of(n + d.merges.size(),
                                        std::numeric_limits<std::size_t>::max());
    for (std::size_t g = 0; g < out.leaf_members.size(); ++g)
        display_of[root_id[uf.find(out.leaf_members[g].front())]] = g;

    for (std::size_t t = collapsed; t < d.merges.size(); ++t) {
        const auto& m = d.merges[t];
        std::size_t da = display_of[m.a];
        std::size_t db = display_of[m.b];
        if (da > db) std::swap(da, db);
        out.merges.push_back({da, db, m.distance, m.size});
        display_of[n + t] = k + (t - collapsed);
    }
    return out;
}

} // namespace crtbench
