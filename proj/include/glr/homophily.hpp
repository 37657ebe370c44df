#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glr/csr.hpp"
#include "glr/graph.hpp"

namespace glr {

/// Per-node and graph-level homophily. Isolated nodes have no defined value
/// (the formulas divide by the degree); their per-node entries are NaN and
/// they are excluded from the graph averages.
struct HomophilyProfile {
    std::vector<double> per_node_label;    // in [0,1], NaN where degree = 0
    std::vector<double> per_node_feature;  // in [-1,1], NaN where degree = 0
    double graph_label = 0.0;
    double graph_feature = 0.0;
    std::size_t excluded_isolated = 0;
};

/// Fraction of each node's neighbourhood sharing its label, and the mean
/// over non-isolated nodes.
inline std::pair<std::vector<double>, double> label_homophily(const SparseGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> per_node(n, std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t u = 0; u < n; ++u) {
        auto neighbors = g.adjacency.row_cols(u);
        if (neighbors.empty()) continue;
        std::size_t same = 0;
        for (std::size_t v : neighbors) same += g.labels[v] == g.labels[u];
        per_node[u] = static_cast<double>(same) / static_cast<double>(neighbors.size());
        total += per_node[u];
        ++counted;
    }
    return {std::move(per_node), counted ? total / static_cast<double>(counted) : 0.0};
}

/// Mean cosine similarity between each node's features and its neighbours'.
/// Cosine against a zero vector is defined as 0.
inline std::pair<std::vector<double>, double> feature_homophily(const SparseGraph& g) {
    const std::size_t n = g.node_count();
    const CsrMatrix normalized = l2_normalize_rows(g.features);
    std::vector<double> per_node(n, std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    std::size_t counted = 0;

    // sparse dot of two normalized rows via merge
    auto cosine = [&](std::size_t u, std::size_t v) {
        auto uc = normalized.row_cols(u), vc = normalized.row_cols(v);
        auto uv = normalized.row_values(u), vv = normalized.row_values(v);
        double s = 0.0;
        std::size_t i = 0, j = 0;
        while (i < uc.size() && j < vc.size()) {
            if (uc[i] == vc[j]) s += uv[i++] * vv[j++];
            else if (uc[i] < vc[j]) ++i;
            else ++j;
        }
        return s;
    };

    for (std::size_t u = 0; u < n; ++u) {
        auto neighbors = g.adjacency.row_cols(u);
        if (neighbors.empty()) continue;
        double acc = 0.0;
        for (std::size_t v : neighbors) acc += cosine(u, v);
        per_node[u] = acc / static_cast<double>(neighbors.size());
        total += per_node[u];
        ++counted;
    }
    return {std::move(per_node), counted ? total / static_cast<double>(counted) : 0.0};
}

inline HomophilyProfile homophily_profile(const SparseGraph& g) {
    HomophilyProfile p;
    auto [label_values, label_graph] = label_homophily(g);
    auto [feature_values, feature_graph] = feature_homophily(g);
    p.per_node_label = std::move(label_values);
    p.per_node_feature = std::move(feature_values);
    p.graph_label = label_graph;
    p.graph_feature = feature_graph;
    for (std::size_t u = 0; u < g.node_count(); ++u)
        if (g.adjacency.row_nnz(u) == 0) ++p.excluded_isolated;
    return p;
}

/// One line of the high-feature-homophily ranking table.
struct RankedModel {
    std::string model;
    double average_rank = 0.0;
    std::size_t dataset_count = 0;
};

/// Median over the values as given (mean of the middle pair for even sizes).
inline double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

/// Average model rank restricted to datasets whose graph feature homophily
/// is at least the median over all datasets present. per_dataset_ranks maps
/// dataset -> (model -> rank); ranks come from the evaluation module so the
/// timed-out convention is already applied there.
inline std::vector<RankedModel> high_feature_homophily_ranking(
    const std::map<std::string, std::map<std::string, double>>& per_dataset_ranks,
    const std::map<std::string, double>& graph_feature_homophily) {
    if (per_dataset_ranks.size() < 2)
        throw std::invalid_argument("ranking requires at least two datasets");

    std::vector<double> values;
    for (const auto& [dataset, ranks] : per_dataset_ranks) {
        auto it = graph_feature_homophily.find(dataset);
        if (it == graph_feature_homophily.end())
            throw std::invalid_argument("missing homophily profile for dataset " + dataset);
        values.push_back(it->second);
    }
    const double threshold = median(values);

    std::map<std::string, std::pair<double, std::size_t>> totals;  // model -> (rank sum, count)
    std::size_t qualifying = 0;
    for (const auto& [dataset, ranks] : per_dataset_ranks) {
        if (graph_feature_homophily.at(dataset) < threshold) continue;
        ++qualifying;
        for (const auto& [model, rank] : ranks) {
            totals[model].first += rank;
            totals[model].second += 1;
        }
    }
    if (qualifying == 0) throw std::runtime_error("no datasets qualify at the homophily median");

    std::vector<RankedModel> out;
    for (const auto& [model, sums] : totals)
        out.push_back({model, sums.first / static_cast<double>(sums.second), sums.second});
    std::sort(out.begin(), out.end(), [](const RankedModel& a, const RankedModel& b) {
        return a.average_rank != b.average_rank ? a.average_rank < b.average_rank : a.model < b.model;
    });
    return out;
}

}  // namespace glr
