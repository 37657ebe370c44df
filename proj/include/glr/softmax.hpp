#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <iostream>
#include <limits>
#include <span>
#include <vector>

#include "glr/csr.hpp"
#include "glr/dense.hpp"

namespace glr {

/// Multinomial logistic regression trainer configuration. The penalty is
/// applied per training sample: objective = mean-CE + l2_penalty/(2n)·‖W‖²,
/// bias unpenalized. Zero initialization makes the fit seed-independent.
struct FitConfig {
    double l2_penalty = 1.0;
    std::size_t max_iter = 1000;
    double grad_tol = 1e-5;
    std::uint64_t seed = 0;
};

/// Fitted softmax parameters: ŷ = softmax(weights·x + bias).
struct SoftmaxParams {
    DenseMatrix weights;        // class_count × feature_dim
    std::vector<double> bias;   // class_count

    std::size_t class_count() const { return bias.size(); }
    std::size_t feature_dim() const { return weights.cols; }
};

/// Objective and gradient for a flattened parameter vector laid out as
/// [W^T row-major (D×C), bias (C)]. The transposed weight layout keeps the
/// class loop contiguous inside the sparse row traversal. Returns the loss:
/// mean cross-entropy over rows + l2_penalty/(2n)·‖W‖². grad may be empty
/// (loss-only evaluation) or a span of the same length as theta.
inline double softmax_objective(const CsrMatrix& design, std::span<const std::size_t> targets,
                                std::size_t class_count, double l2_penalty,
                                std::span<const double> theta, std::span<double> grad) {
    const std::size_t n = design.n_rows;
    const std::size_t d = design.n_cols;
    const std::size_t c_n = class_count;
    const double* wt = theta.data();          // D×C
    const double* bias = theta.data() + d * c_n;
    const bool with_grad = !grad.empty();
    if (with_grad) std::fill(grad.begin(), grad.end(), 0.0);
    double* gwt = with_grad ? grad.data() : nullptr;
    double* gbias = with_grad ? grad.data() + d * c_n : nullptr;

    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    std::vector<double> logits(c_n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < c_n; ++c) logits[c] = bias[c];
        for (std::size_t k = design.row_ptr[r]; k < design.row_ptr[r + 1]; ++k) {
            const double v = design.values[k];
            const double* wrow = wt + design.col_idx[k] * c_n;
            for (std::size_t c = 0; c < c_n; ++c) logits[c] += v * wrow[c];
        }
        double mx = logits[0];
        for (std::size_t c = 1; c < c_n; ++c) mx = std::max(mx, logits[c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < c_n; ++c) {
            logits[c] = std::exp(logits[c] - mx);
            denom += logits[c];
        }
        const std::size_t y = targets[r];
        loss -= std::log(logits[y] / denom) * inv_n;
        if (with_grad) {
            // logits now holds unnormalized probabilities; residual = (p - onehot)/n
            const double inv_denom = inv_n / denom;
            for (std::size_t c = 0; c < c_n; ++c) logits[c] *= inv_denom;
            logits[y] -= inv_n;
            for (std::size_t k = design.row_ptr[r]; k < design.row_ptr[r + 1]; ++k) {
                const double v = design.values[k];
                double* grow = gwt + design.col_idx[k] * c_n;
                for (std::size_t c = 0; c < c_n; ++c) grow[c] += v * logits[c];
            }
            for (std::size_t c = 0; c < c_n; ++c) gbias[c] += logits[c];
        }
    }

    const double reg = l2_penalty * inv_n;
    double reg_loss = 0.0;
    for (std::size_t i = 0; i < d * c_n; ++i) {
        reg_loss += wt[i] * wt[i];
        if (with_grad) gwt[i] += reg * wt[i];
    }
    loss += 0.5 * reg * reg_loss;
    return loss;
}

namespace detail {

/// Limited-memory BFGS with Armijo backtracking. Two-loop recursion,
/// history m = 10, gradient sup-norm stopping rule. Objective must be
/// smooth; every accepted iterate strictly decreases the loss.
template <typename Objective>
std::size_t lbfgs_minimize(Objective&& objective, std::vector<double>& theta,
                           std::size_t max_iter, double grad_tol) {
    constexpr std::size_t kHistory = 10;
    constexpr double kArmijo = 1e-4;
    const std::size_t dim = theta.size();

    std::vector<double> grad(dim), grad_next(dim), direction(dim), trial(dim);
    std::deque<std::pair<std::vector<double>, std::vector<double>>> history;  // (s, y)

    double loss = objective(std::span<const double>(theta), std::span<double>(grad));
    if (!std::isfinite(loss)) throw std::runtime_error("fit_softmax: non-finite loss, check input scaling");

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        if (max_abs(grad) < grad_tol) break;

        // Two-loop recursion for d = -H·g.
        direction = grad;
        std::vector<double> alpha(history.size());
        for (std::size_t i = history.size(); i-- > 0;) {
            const auto& [s, y] = history[i];
            double rho = 1.0 / dot(y, s);
            alpha[i] = rho * dot(s, direction);
            for (std::size_t j = 0; j < dim; ++j) direction[j] -= alpha[i] * y[j];
        }
        if (!history.empty()) {
            const auto& [s, y] = history.back();
            double gamma = dot(s, y) / dot(y, y);
            for (double& v : direction) v *= gamma;
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const auto& [s, y] = history[i];
            double rho = 1.0 / dot(y, s);
            double beta = rho * dot(y, direction);
            for (std::size_t j = 0; j < dim; ++j) direction[j] += (alpha[i] - beta) * s[j];
        }
        for (double& v : direction) v = -v;

        double slope = dot(grad, direction);
        if (slope >= 0.0) {  // not a descent direction; restart from steepest descent
            history.clear();
            for (std::size_t j = 0; j < dim; ++j) direction[j] = -grad[j];
            slope = dot(grad, direction);
        }

        double step = 1.0;
        double trial_loss = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = theta[j] + step * direction[j];
            trial_loss = objective(std::span<const double>(trial), std::span<double>());
            if (std::isfinite(trial_loss) && trial_loss <= loss + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no further progress representable

        trial_loss = objective(std::span<const double>(trial), std::span<double>(grad_next));

        std::vector<double> s(dim), y(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            s[j] = trial[j] - theta[j];
            y[j] = grad_next[j] - grad[j];
        }
        double sy = dot(s, y);
        if (sy > 1e-10 * norm2(s) * norm2(y)) {
            history.emplace_back(std::move(s), std::move(y));
            if (history.size() > kHistory) history.pop_front();
        }

        theta.swap(trial);
        grad.swap(grad_next);
        loss = trial_loss;
        if (!std::isfinite(loss)) throw std::runtime_error("fit_softmax: non-finite loss, check input scaling");
    }
    return iter;
}

}  // namespace detail

/// Train multinomial logistic regression on the given design matrix.
/// Deterministic: zero initialization and a full-batch quasi-Newton path make
/// the result independent of cfg.seed and identical across runs.
inline SoftmaxParams fit_softmax(const CsrMatrix& design, std::span<const std::size_t> targets,
                                 std::size_t class_count, const FitConfig& cfg = {}) {
    if (targets.size() != design.n_rows)
        throw std::invalid_argument("fit_softmax: targets length != design rows");
    if (design.n_rows == 0) throw std::invalid_argument("fit_softmax: empty training set");
    if (cfg.max_iter < 1 || cfg.grad_tol <= 0.0 || cfg.l2_penalty < 0.0)
        throw std::invalid_argument("fit_softmax: invalid config");
    for (std::size_t y : targets)
        if (y >= class_count) throw std::invalid_argument("fit_softmax: target class out of range");

    const std::size_t d = design.n_cols;

    bool single_class = true;
    for (std::size_t i = 1; i < targets.size(); ++i)
        if (targets[i] != targets[0]) { single_class = false; break; }
    if (single_class) {
        std::cerr << "fit_softmax: single-class training set, fitting constant predictor\n";
        SoftmaxParams constant;
        constant.weights = DenseMatrix(class_count, d);
        constant.bias.assign(class_count, 0.0);
        constant.bias[targets.empty() ? 0 : targets[0]] = 1.0;
        return constant;
    }

    std::vector<double> theta(d * class_count + class_count, 0.0);
    detail::lbfgs_minimize(
        [&](std::span<const double> t, std::span<double> g) {
            return softmax_objective(design, targets, class_count, cfg.l2_penalty, t, g);
        },
        theta, cfg.max_iter, cfg.grad_tol);

    SoftmaxParams params;
    params.weights = DenseMatrix(class_count, d);
    params.bias.assign(theta.begin() + static_cast<std::ptrdiff_t>(d * class_count), theta.end());
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t c = 0; c < class_count; ++c)
            params.weights.at(c, j) = theta[j * class_count + c];
    return params;
}

/// Class predictions and the full probability matrix for the given rows.
/// Ties in the argmax resolve to the smallest class id.
inline std::pair<std::vector<std::size_t>, DenseMatrix> predict_softmax(const SoftmaxParams& params,
                                                                        const CsrMatrix& design) {
    if (design.n_cols != params.feature_dim())
        throw std::invalid_argument("predict_softmax: design has " + std::to_string(design.n_cols) +
                                    " columns, model expects " + std::to_string(params.feature_dim()));
    const std::size_t n = design.n_rows;
    const std::size_t c_n = params.class_count();
    DenseMatrix probs(n, c_n);
    std::vector<std::size_t> classes(n, 0);

    for (std::size_t r = 0; r < n; ++r) {
        auto row = probs.row(r);
        for (std::size_t c = 0; c < c_n; ++c) row[c] = params.bias[c];
        for (std::size_t k = design.row_ptr[r]; k < design.row_ptr[r + 1]; ++k) {
            const double v = design.values[k];
            for (std::size_t c = 0; c < c_n; ++c) row[c] += v * params.weights.at(c, design.col_idx[k]);
        }
        double mx = row[0];
        for (std::size_t c = 1; c < c_n; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < c_n; ++c) {
            row[c] = std::exp(row[c] - mx);
            denom += row[c];
        }
        std::size_t best = 0;
        for (std::size_t c = 0; c < c_n; ++c) {
            row[c] /= denom;
            if (row[c] > row[best]) best = c;
        }
        classes[r] = best;
    }
    return {std::move(classes), std::move(probs)};
}

}  // namespace glr
