#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "glr/evaluation.hpp"
#include "glr/homophily.hpp"

namespace glr {

/// Accuracy/time tradeoff table: one row per (model, dataset) cell with the
/// mean accuracy and the mean total (fit + predict) seconds. Plot-ready; no
/// rendering here.
inline std::string tradeoff_csv(const BenchmarkSummary& summary) {
    std::ostringstream out;
    out << "model,dataset,mean_accuracy,mean_total_seconds\n";
    for (const auto& model : summary.models) {
        for (const auto& dataset : summary.datasets) {
            auto it = summary.cells.find({dataset, model});
            if (it == summary.cells.end()) continue;
            const CellStats& cell = it->second;
            out << model << "," << dataset << ",";
            if (cell.accuracy_count > 0 && !cell.timed_out)
                out << std::setprecision(6) << cell.mean_accuracy;
            // timed-out or failed cells leave the accuracy field empty
            out << "," << std::setprecision(6)
                << cell.mean_fit_seconds + cell.mean_predict_seconds << "\n";
        }
    }
    return out.str();
}

/// Ranking table restricted to the high-feature-homophily datasets.
inline std::string ranking_csv(const std::vector<RankedModel>& ranking) {
    std::ostringstream out;
    out << "model,average_rank,qualifying_datasets\n";
    for (const auto& row : ranking)
        out << row.model << "," << std::setprecision(4) << row.average_rank << ","
            << row.dataset_count << "\n";
    return out.str();
}

/// Per-node homophily rows for one dataset, the data behind distribution
/// plots. Isolated nodes print empty homophily fields.
inline std::string homophily_csv(const SparseGraph& g, const HomophilyProfile& profile) {
    std::ostringstream out;
    out << "node,label_homophily,feature_homophily,degree\n";
    out << std::setprecision(12);
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        out << u << ",";
        if (!std::isnan(profile.per_node_label[u])) out << profile.per_node_label[u];
        out << ",";
        if (!std::isnan(profile.per_node_feature[u])) out << profile.per_node_feature[u];
        out << "," << g.adjacency.row_nnz(u) << "\n";
    }
    return out.str();
}

/// Concatenation of per-dataset homophily rows with a leading dataset column.
inline std::string homophily_distributions_csv(
    const std::vector<std::pair<std::string, std::string>>& per_dataset_csv) {
    std::ostringstream out;
    out << "dataset,node,label_homophily,feature_homophily,degree\n";
    for (const auto& [dataset, csv] : per_dataset_csv) {
        std::istringstream in(csv);
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (header) {
                header = false;
                continue;
            }
            if (!line.empty()) out << dataset << "," << line << "\n";
        }
    }
    return out.str();
}

/// Sweep results: one row per tested fraction.
inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << "test_fraction,accuracy,fit_seconds,predict_seconds\n";
    out << std::setprecision(6);
    for (const auto& p : points) {
        out << p.test_fraction << ",";
        if (p.record.accuracy) out << *p.record.accuracy;
        out << "," << p.record.fit_seconds << "," << p.record.predict_seconds << "\n";
    }
    return out.str();
}

}  // namespace glr
