#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "glr/csr.hpp"
#include "glr/graph.hpp"
#include "glr/softmax.hpp"
#include "glr/spectral.hpp"

namespace glr {

/// The seven non-neural classifiers. -A variants consume the adjacency
/// matrix, -X variants the feature matrix; GLR concatenates both.
enum class ModelKind {
    kGlr,
    kLrA,
    kLrX,
    kDiffusionA,
    kDiffusionX,
    kKnnSpectralA,
    kKnnSpectralX,
};

inline const std::vector<std::pair<ModelKind, std::string>>& model_kind_names() {
    static const std::vector<std::pair<ModelKind, std::string>> names = {
        {ModelKind::kGlr, "glr"},
        {ModelKind::kLrA, "lr_a"},
        {ModelKind::kLrX, "lr_x"},
        {ModelKind::kDiffusionA, "diffusion_a"},
        {ModelKind::kDiffusionX, "diffusion_x"},
        {ModelKind::kKnnSpectralA, "knn_spectral_a"},
        {ModelKind::kKnnSpectralX, "knn_spectral_x"},
    };
    return names;
}

inline std::string to_string(ModelKind kind) {
    for (const auto& [k, name] : model_kind_names())
        if (k == kind) return name;
    throw std::logic_error("unknown model kind");
}

inline std::string valid_model_kinds() {
    std::string out;
    for (const auto& [k, name] : model_kind_names()) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

inline ModelKind model_kind_from_string(const std::string& name) {
    for (const auto& [k, n] : model_kind_names())
        if (n == name) return k;
    throw std::invalid_argument("unknown model kind '" + name + "' (valid: " + valid_model_kinds() + ")");
}

inline bool is_lr_family(ModelKind k) {
    return k == ModelKind::kGlr || k == ModelKind::kLrA || k == ModelKind::kLrX;
}
inline bool is_diffusion(ModelKind k) {
    return k == ModelKind::kDiffusionA || k == ModelKind::kDiffusionX;
}
inline bool is_knn(ModelKind k) {
    return k == ModelKind::kKnnSpectralA || k == ModelKind::kKnnSpectralX;
}

/// The hyperparameters a model kind accepts, with their default values.
inline std::map<std::string, double> default_hyperparams(ModelKind kind) {
    if (is_lr_family(kind))
        return {{"l2_penalty", 1.0}, {"max_iter", 1000}, {"grad_tol", 1e-5}, {"row_normalize", 0}};
    if (is_diffusion(kind)) return {{"diffusion_alpha", 0.9}, {"diffusion_iters", 50}};
    return {{"k_neighbors", 5}, {"embed_dim", 16}};
}

namespace detail {

inline void check_hyperparam_range(const std::string& key, double value) {
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("hyperparameter " + key + "=" + std::to_string(value) + " " + why);
    };
    if (key == "l2_penalty" && value < 0) fail("must be >= 0");
    if (key == "max_iter" && value < 1) fail("must be >= 1");
    if (key == "grad_tol" && value <= 0) fail("must be > 0");
    if (key == "row_normalize" && value != 0 && value != 1) fail("must be 0 or 1");
    if (key == "diffusion_alpha" && (value <= 0 || value >= 1)) fail("must be in (0,1)");
    if (key == "diffusion_iters" && value < 1) fail("must be >= 1");
    if (key == "k_neighbors" && value < 1) fail("must be >= 1");
    if (key == "embed_dim" && value < 1) fail("must be >= 1");
}

}  // namespace detail

/// Declarative model configuration: a kind plus validated hyperparameters.
/// Unspecified hyperparameters take the documented defaults.
struct ModelSpec {
    ModelKind kind = ModelKind::kGlr;
    std::map<std::string, double> hyperparams;

    static ModelSpec make(ModelKind kind, const std::map<std::string, double>& overrides = {}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.hyperparams = default_hyperparams(kind);
        for (const auto& [key, value] : overrides) {
            auto it = spec.hyperparams.find(key);
            if (it == spec.hyperparams.end())
                throw std::invalid_argument("hyperparameter '" + key + "' not valid for model " +
                                            to_string(kind));
            detail::check_hyperparam_range(key, value);
            it->second = value;
        }
        return spec;
    }

    double param(const std::string& key) const { return hyperparams.at(key); }

    bool operator==(const ModelSpec&) const = default;
};

inline void to_json(nlohmann::json& j, const ModelSpec& spec) {
    j = nlohmann::json{{"kind", to_string(spec.kind)}, {"hyperparams", spec.hyperparams}};
}

inline void from_json(const nlohmann::json& j, ModelSpec& spec) {
    ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    std::map<std::string, double> overrides;
    if (j.contains("hyperparams")) overrides = j.at("hyperparams").get<std::map<std::string, double>>();
    spec = ModelSpec::make(kind, overrides);
}

/// FNV-1a hash of the canonical JSON encoding; identifies a configuration in
/// run records.
inline std::string config_hash(const ModelSpec& spec) {
    nlohmann::json j = spec;
    std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Fitted state variants.
struct LrState {
    SoftmaxParams params;
    ModelKind design_layout;  // which blocks the design matrix carried
    bool row_normalized = false;
};
struct DiffusionState {
    DenseMatrix scores;  // n × C, final temperature of every node
};
struct KnnState {
    DenseMatrix embedding;  // n × embed_dim
    std::vector<std::size_t> train_nodes;
    std::vector<std::size_t> train_labels;
    std::size_t k_neighbors = 5;
};

/// A fitted model. The engaged state variant always matches spec.kind.
struct TrainedModel {
    ModelSpec spec;
    std::variant<LrState, DiffusionState, KnnState> state;
    double fit_seconds = 0.0;
    std::size_t class_count = 0;
    std::size_t node_count = 0;
};

namespace detail {

inline CsrMatrix design_matrix(ModelKind kind, const SparseGraph& g,
                               std::span<const std::size_t> rows) {
    switch (kind) {
        case ModelKind::kGlr:
            return hconcat(row_submatrix(g.adjacency, rows), row_submatrix(g.features, rows));
        case ModelKind::kLrA:
            return row_submatrix(g.adjacency, rows);
        case ModelKind::kLrX:
            return row_submatrix(g.features, rows);
        default:
            throw std::logic_error("design_matrix: not an LR-family model");
    }
}

inline std::vector<std::size_t> all_nodes(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

/// One diffusion step target = alpha·P·F + (1-alpha)·F0 with P the
/// row-normalized operator. The -A variant scales a single spmm by inverse
/// degree; the -X variant applies the cosine-kernel operator Xn·Xnᵀ as two
/// sparse products, never forming the n×n kernel.
struct DiffusionOperator {
    const CsrMatrix* adjacency = nullptr;     // A-variant
    CsrMatrix features_normalized;            // X-variant
    CsrMatrix features_normalized_t;
    std::vector<double> inv_row_sum;          // 0 where the operator row is empty

    static DiffusionOperator from_adjacency(const CsrMatrix& a) {
        DiffusionOperator op;
        op.adjacency = &a;
        op.inv_row_sum = row_sums(a);
        for (double& v : op.inv_row_sum) v = v > 0 ? 1.0 / v : 0.0;
        return op;
    }

    static DiffusionOperator from_features(const CsrMatrix& x) {
        DiffusionOperator op;
        op.features_normalized = l2_normalize_rows(x);
        op.features_normalized_t = transpose(op.features_normalized);
        // row sums of Xn·Xnᵀ = Xn · (Xnᵀ · 1)
        std::vector<double> ones(x.n_rows, 1.0);
        std::vector<double> col_mass = spmv(op.features_normalized_t, ones);
        op.inv_row_sum = spmv(op.features_normalized, col_mass);
        for (double& v : op.inv_row_sum) v = v > 0 ? 1.0 / v : 0.0;
        return op;
    }

    DenseMatrix apply_normalized(const DenseMatrix& f) const {
        DenseMatrix out = adjacency != nullptr
                              ? spmm_dense(*adjacency, f)
                              : spmm_dense(features_normalized, spmm_dense(features_normalized_t, f));
        for (std::size_t r = 0; r < out.rows; ++r) {
            const double scale = inv_row_sum[r];
            for (std::size_t c = 0; c < out.cols; ++c) out.at(r, c) *= scale;
        }
        return out;
    }
};

inline DenseMatrix run_diffusion(const DiffusionOperator& op, std::size_t n, std::size_t class_count,
                                 std::span<const std::size_t> train_nodes,
                                 std::span<const std::size_t> labels, double alpha,
                                 std::size_t max_iters) {
    DenseMatrix seed(n, class_count);
    for (std::size_t t : train_nodes) seed.at(t, labels[t]) = 1.0;
    DenseMatrix f = seed;

    bool converged = false;
    for (std::size_t it = 0; it < max_iters && !converged; ++it) {
        DenseMatrix next = op.apply_normalized(f);
        for (std::size_t i = 0; i < next.data.size(); ++i)
            next.data[i] = alpha * next.data[i] + (1.0 - alpha) * seed.data[i];
        for (std::size_t t : train_nodes) {
            auto row = next.row(t);
            std::fill(row.begin(), row.end(), 0.0);
            row[labels[t]] = 1.0;
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < next.data.size(); ++i)
            delta = std::max(delta, std::abs(next.data[i] - f.data[i]));
        f = std::move(next);
        converged = delta < 1e-6;
    }
    if (!converged)
        std::cerr << "diffusion: no convergence within " << max_iters
                  << " iterations, returning last iterate\n";
    return f;
}

inline void check_node_list(std::span<const std::size_t> nodes, std::size_t n, const char* what) {
    if (nodes.empty()) throw std::invalid_argument(std::string(what) + ": empty node list");
    std::vector<std::size_t> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.back() >= n) throw std::out_of_range(std::string(what) + ": node index out of range");
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument(std::string(what) + ": duplicate node index");
}

}  // namespace detail

/// Train a model on the graph. Transductive contract: the structure and
/// features of every node may be read, the labels of train_nodes only.
inline TrainedModel fit(const ModelSpec& spec, const SparseGraph& g,
                        std::span<const std::size_t> train_nodes, std::uint64_t seed) {
    detail::check_node_list(train_nodes, g.node_count(), "fit");

    TrainedModel model;
    model.spec = spec;
    model.class_count = g.class_count;
    model.node_count = g.node_count();

    const auto start = std::chrono::steady_clock::now();

    if (is_lr_family(spec.kind)) {
        FitConfig cfg;
        cfg.l2_penalty = spec.param("l2_penalty");
        cfg.max_iter = static_cast<std::size_t>(spec.param("max_iter"));
        cfg.grad_tol = spec.param("grad_tol");
        cfg.seed = seed;
        const bool normalize = spec.param("row_normalize") != 0;
        CsrMatrix design = detail::design_matrix(spec.kind, g, train_nodes);
        if (normalize) design = l2_normalize_rows(design);
        std::vector<std::size_t> targets;
        targets.reserve(train_nodes.size());
        for (std::size_t t : train_nodes) targets.push_back(g.labels[t]);
        LrState state;
        state.params = fit_softmax(design, targets, g.class_count, cfg);
        state.design_layout = spec.kind;
        state.row_normalized = normalize;
        model.state = std::move(state);
    } else if (is_diffusion(spec.kind)) {
        auto op = spec.kind == ModelKind::kDiffusionA
                      ? detail::DiffusionOperator::from_adjacency(g.adjacency)
                      : detail::DiffusionOperator::from_features(g.features);
        DiffusionState state;
        state.scores = detail::run_diffusion(op, g.node_count(), g.class_count, train_nodes,
                                             g.labels, spec.param("diffusion_alpha"),
                                             static_cast<std::size_t>(spec.param("diffusion_iters")));
        model.state = std::move(state);
    } else {
        KnnState state;
        const std::size_t dim = static_cast<std::size_t>(spec.param("embed_dim"));
        state.embedding = spec.kind == ModelKind::kKnnSpectralA
                              ? spectral_embed(g.adjacency, dim, seed)
                              : spectral_embed(g.features, dim, seed);
        state.train_nodes.assign(train_nodes.begin(), train_nodes.end());
        state.train_labels.reserve(train_nodes.size());
        for (std::size_t t : train_nodes) state.train_labels.push_back(g.labels[t]);
        state.k_neighbors = static_cast<std::size_t>(spec.param("k_neighbors"));
        model.state = std::move(state);
    }

    model.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return model;
}

/// Predict classes for the given nodes. Tie-breaking is pinned everywhere:
/// score and vote ties resolve to the smallest class id, equal KNN distances
/// to the smallest node id.
inline std::vector<std::size_t> predict(const TrainedModel& model, const SparseGraph& g,
                                        std::span<const std::size_t> test_nodes) {
    detail::check_node_list(test_nodes, g.node_count(), "predict");
    if (model.node_count != g.node_count() || model.class_count != g.class_count)
        throw std::invalid_argument("predict: model was fitted on a different graph shape");

    std::vector<std::size_t> out(test_nodes.size(), 0);

    if (const auto* lr = std::get_if<LrState>(&model.state)) {
        CsrMatrix design = detail::design_matrix(lr->design_layout, g, test_nodes);
        if (lr->row_normalized) design = l2_normalize_rows(design);
        out = predict_softmax(lr->params, design).first;
    } else if (const auto* diffusion = std::get_if<DiffusionState>(&model.state)) {
        for (std::size_t i = 0; i < test_nodes.size(); ++i) {
            auto row = diffusion->scores.row(test_nodes[i]);
            std::size_t best = 0;
            for (std::size_t c = 1; c < row.size(); ++c)
                if (row[c] > row[best]) best = c;
            out[i] = best;
        }
    } else {
        const auto& knn = std::get<KnnState>(model.state);
        const std::size_t k = std::min(knn.k_neighbors, knn.train_nodes.size());
        const std::size_t dim = knn.embedding.cols;
        struct Neighbor {
            double d2;
            std::size_t node;
            std::size_t label;
        };
        std::vector<Neighbor> dist(knn.train_nodes.size());
        const auto closer = [](const Neighbor& a, const Neighbor& b) {
            return a.d2 != b.d2 ? a.d2 < b.d2 : a.node < b.node;
        };
        for (std::size_t i = 0; i < test_nodes.size(); ++i) {
            auto point = knn.embedding.row(test_nodes[i]);
            for (std::size_t j = 0; j < knn.train_nodes.size(); ++j) {
                auto other = knn.embedding.row(knn.train_nodes[j]);
                double d2 = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    double diff = point[c] - other[c];
                    d2 += diff * diff;
                }
                dist[j] = {d2, knn.train_nodes[j], knn.train_labels[j]};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end(),
                              closer);
            std::vector<std::size_t> votes(model.class_count, 0);
            for (std::size_t j = 0; j < k; ++j) votes[dist[j].label]++;
            std::size_t best = 0;
            for (std::size_t c = 1; c < votes.size(); ++c)
                if (votes[c] > votes[best]) best = c;
            out[i] = best;
        }
    }
    return out;
}

}  // namespace glr
