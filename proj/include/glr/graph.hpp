#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glr/csr.hpp"

namespace glr {

/// Immutable attributed graph: symmetric binary adjacency with empty
/// diagonal, sparse feature matrix, dense class labels in {0..C-1}.
struct SparseGraph {
    CsrMatrix adjacency;                      // n×n
    CsrMatrix features;                       // n×L
    std::vector<std::size_t> labels;          // length n, values < class_count
    std::size_t class_count = 0;
    std::string name;
    std::map<std::int64_t, std::size_t> label_map;  // original label -> dense id

    std::size_t node_count() const { return adjacency.n_rows; }
    std::size_t feature_count() const { return features.n_cols; }
};

/// degrees[u] = number of stored neighbours of u.
inline std::vector<std::size_t> degree_vector(const SparseGraph& g) {
    std::vector<std::size_t> d(g.node_count());
    for (std::size_t u = 0; u < d.size(); ++u) d[u] = g.adjacency.row_nnz(u);
    return d;
}

/// Canonicalizing constructor: symmetrizes edges, drops self-loops,
/// collapses duplicates, fixes adjacency values at 1.0 and remaps labels to
/// a dense {0..C-1} range (mapping recorded on the graph).
inline SparseGraph build_graph(const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                               const std::vector<Triplet>& feature_triplets,
                               const std::vector<std::int64_t>& raw_labels,
                               std::size_t n, std::size_t feature_dim,
                               std::string name = "") {
    if (n == 0) throw std::invalid_argument("build_graph: graph must have at least one node");
    if (raw_labels.size() != n)
        throw std::invalid_argument("build_graph: labels length " + std::to_string(raw_labels.size()) +
                                    " != node count " + std::to_string(n));

    std::vector<Triplet> adj;
    adj.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n)
            throw std::out_of_range("build_graph: edge endpoint out of range (" + std::to_string(u) +
                                    "," + std::to_string(v) + ")");
        if (u == v) continue;  // self-loop
        adj.push_back({u, v, 1.0});
        adj.push_back({v, u, 1.0});
    }
    CsrMatrix adjacency = from_triplets(n, n, std::move(adj));
    for (double& v : adjacency.values) v = 1.0;  // collapse duplicate edges

    for (const auto& t : feature_triplets)
        if (t.col >= feature_dim)
            throw std::out_of_range("build_graph: feature column out of range");
    CsrMatrix features = from_triplets(n, feature_dim, feature_triplets);

    SparseGraph g;
    g.adjacency = std::move(adjacency);
    g.features = std::move(features);
    g.name = std::move(name);

    for (std::int64_t lab : raw_labels) g.label_map.emplace(lab, 0);
    std::size_t next_id = 0;
    for (auto& [orig, id] : g.label_map) id = next_id++;
    g.class_count = next_id;
    g.labels.reserve(n);
    for (std::int64_t lab : raw_labels) g.labels.push_back(g.label_map.at(lab));
    if (g.class_count == 0) throw std::invalid_argument("build_graph: no labels");
    return g;
}

/// Graph-level statistics behind the `stats` subcommand.
struct StatsReport {
    std::string name;
    std::size_t n = 0;
    std::size_t m = 0;  // stored directed entries = nnz(adjacency)
    std::size_t feature_dim = 0;
    std::size_t feature_nnz = 0;
    std::size_t class_count = 0;
    double density_n2 = 0.0;     // nnz / n^2
    double density_pairs = 0.0;  // nnz / (n (n-1))
    std::vector<std::size_t> per_class_counts;
    // (degree, number of nodes with degree <= that) pairs, degree ascending.
    std::vector<std::pair<std::size_t, std::size_t>> cumulative_degree_counts;
};

/// Density is reported under both the n² and the n(n−1) denominator; the two
/// conventions coexist in published tables and only one of them is ever
/// reproducible for a given source.
inline StatsReport dataset_stats(const SparseGraph& g) {
    StatsReport s;
    s.name = g.name;
    s.n = g.node_count();
    s.m = g.adjacency.nnz();
    s.feature_dim = g.features.n_cols;
    s.feature_nnz = g.features.nnz();
    s.class_count = g.class_count;
    const double n = static_cast<double>(s.n);
    s.density_n2 = static_cast<double>(s.m) / (n * n);
    s.density_pairs = s.n > 1 ? static_cast<double>(s.m) / (n * (n - 1.0)) : 0.0;

    s.per_class_counts.assign(g.class_count, 0);
    for (std::size_t lab : g.labels) s.per_class_counts[lab]++;

    std::map<std::size_t, std::size_t> degree_hist;
    for (std::size_t u = 0; u < s.n; ++u) degree_hist[g.adjacency.row_nnz(u)]++;
    std::size_t cum = 0;
    for (const auto& [deg, count] : degree_hist) {
        cum += count;
        s.cumulative_degree_counts.emplace_back(deg, cum);
    }
    return s;
}

/// Full structural validation of a constructed graph (used by loaders and
/// tests): canonical CSR, symmetry, empty diagonal, binary values, dense
/// label range with no empty class.
inline void validate_graph(const SparseGraph& g) {
    validate_csr(g.adjacency);
    validate_csr(g.features);
    const std::size_t n = g.node_count();
    if (g.adjacency.n_cols != n) throw std::invalid_argument("graph: adjacency not square");
    if (g.features.n_rows != n) throw std::invalid_argument("graph: feature row count != n");
    if (g.labels.size() != n) throw std::invalid_argument("graph: labels length != n");
    if (transpose(g.adjacency) != g.adjacency) throw std::invalid_argument("graph: adjacency not symmetric");
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t c : g.adjacency.row_cols(u))
            if (c == u) throw std::invalid_argument("graph: self-loop present");
    for (double v : g.adjacency.values)
        if (v != 1.0) throw std::invalid_argument("graph: adjacency value != 1.0");
    std::vector<bool> seen(g.class_count, false);
    for (std::size_t lab : g.labels) {
        if (lab >= g.class_count) throw std::invalid_argument("graph: label out of class range");
        seen[lab] = true;
    }
    for (std::size_t c = 0; c < g.class_count; ++c)
        if (!seen[c]) throw std::invalid_argument("graph: empty class " + std::to_string(c));
}

}  // namespace glr
