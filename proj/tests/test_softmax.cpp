#include <doctest.h>

#include <cmath>

#include "glr/softmax.hpp"
#include "oracles.hpp"

using glr::CsrMatrix;
using glr::FitConfig;

namespace {

// 2-feature, 2-class, linearly separable.
CsrMatrix separable_design() {
    return glr::from_triplets(4, 2, {{0, 0, 1.0}, {1, 0, 2.0}, {2, 1, 1.0}, {3, 1, 2.0}});
}
const std::vector<std::size_t> kSeparableTargets{0, 0, 1, 1};

}  // namespace

TEST_CASE("separable toy problem reaches training accuracy 1.0") {
    auto params = glr::fit_softmax(separable_design(), kSeparableTargets, 2);
    auto [classes, probs] = glr::predict_softmax(params, separable_design());
    CHECK(classes == kSeparableTargets);
}

TEST_CASE("all-zero design converges to the empirical class frequencies") {
    CsrMatrix zeros = glr::from_triplets(6, 3, {});
    std::vector<std::size_t> targets{0, 0, 0, 1, 1, 2};  // frequencies 1/2, 1/3, 1/6
    auto params = glr::fit_softmax(zeros, targets, 3);
    auto [classes, probs] = glr::predict_softmax(params, zeros);
    for (std::size_t r = 0; r < 6; ++r) {
        CHECK(probs.at(r, 0) == doctest::Approx(0.5).epsilon(1e-4));
        CHECK(probs.at(r, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
        CHECK(probs.at(r, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    glr::SplitMix64 rng(123);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng.bounded(26);
        const std::size_t d = 2 + rng.bounded(9);
        const std::size_t classes = 2 + rng.bounded(3);
        std::vector<glr::Triplet> triplets;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c)
                if (rng.uniform() < 0.5) triplets.push_back({r, c, rng.normal()});
        CsrMatrix design = glr::from_triplets(n, d, triplets);
        std::vector<std::size_t> targets(n);
        for (auto& t : targets) t = rng.bounded(classes);

        std::vector<double> theta(d * classes + classes);
        for (auto& v : theta) v = 0.5 * rng.normal();

        std::vector<double> analytic(theta.size());
        glr::softmax_objective(design, targets, classes, 0.7, theta, analytic);
        auto numeric = oracles::fd_gradient(
            [&](const std::vector<double>& t) {
                return glr::softmax_objective(design, targets, classes, 0.7, t, {});
            },
            theta);

        double worst = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
            worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("accepted iterates decrease the loss monotonically") {
    glr::SplitMix64 rng(77);
    const std::size_t n = 20, d = 6, classes = 3;
    std::vector<glr::Triplet> triplets;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c)
            if (rng.uniform() < 0.5) triplets.push_back({r, c, rng.normal()});
    CsrMatrix design = glr::from_triplets(n, d, triplets);
    std::vector<std::size_t> targets(n);
    for (auto& t : targets) t = rng.bounded(classes);

    std::vector<double> accepted_losses;
    std::vector<double> theta(d * classes + classes, 0.0);
    glr::detail::lbfgs_minimize(
        [&](std::span<const double> t, std::span<double> g) {
            double loss = glr::softmax_objective(design, targets, classes, 1.0, t, g);
            if (!g.empty()) accepted_losses.push_back(loss);  // gradient evals = accepted points
            return loss;
        },
        theta, 200, 1e-8);

    REQUIRE(accepted_losses.size() > 2);
    for (std::size_t i = 1; i < accepted_losses.size(); ++i)
        CHECK(accepted_losses[i] <= accepted_losses[i - 1]);
}

TEST_CASE("fits are bit-identical across runs") {
    auto raw = oracles::random_graph(5, 25, 8, 3, 0.3);
    CsrMatrix design = glr::from_triplets(raw.n, raw.feature_dim, raw.features);
    std::vector<std::size_t> targets(raw.labels.begin(), raw.labels.end());
    auto a = glr::fit_softmax(design, targets, 3);
    auto b = glr::fit_softmax(design, targets, 3);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
}

TEST_CASE("column scaling with zero penalty keeps separable predictions") {
    FitConfig cfg;
    cfg.l2_penalty = 0.0;
    auto base = glr::fit_softmax(separable_design(), kSeparableTargets, 2, cfg);

    CsrMatrix scaled = separable_design();
    for (std::size_t r = 0; r < scaled.n_rows; ++r)
        for (std::size_t k = scaled.row_ptr[r]; k < scaled.row_ptr[r + 1]; ++k)
            if (scaled.col_idx[k] == 0) scaled.values[k] *= 100.0;
    auto rescaled = glr::fit_softmax(scaled, kSeparableTargets, 2, cfg);

    CHECK(glr::predict_softmax(base, separable_design()).first ==
          glr::predict_softmax(rescaled, scaled).first);
}

TEST_CASE("zero parameters predict the uniform distribution") {
    glr::SoftmaxParams params;
    params.weights = glr::DenseMatrix(4, 3);
    params.bias.assign(4, 0.0);
    CsrMatrix design = glr::from_triplets(2, 3, {{0, 1, 2.5}});
    auto [classes, probs] = glr::predict_softmax(params, design);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 4; ++c) CHECK(probs.at(r, c) == doctest::Approx(0.25));
    CHECK(classes == std::vector<std::size_t>{0, 0});  // tie -> smallest class id
}

TEST_CASE("probability rows sum to one within 1e-12") {
    auto raw = oracles::random_graph(11, 30, 6, 3, 0.4);
    CsrMatrix design = glr::from_triplets(raw.n, raw.feature_dim, raw.features);
    std::vector<std::size_t> targets(raw.labels.begin(), raw.labels.end());
    auto params = glr::fit_softmax(design, targets, 3);
    auto [classes, probs] = glr::predict_softmax(params, design);
    for (std::size_t r = 0; r < probs.rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < probs.cols; ++c) sum += probs.at(r, c);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("single-class training set falls back to a constant predictor") {
    CsrMatrix design = glr::from_triplets(3, 2, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, -1.0}});
    std::vector<std::size_t> targets{1, 1, 1};
    auto params = glr::fit_softmax(design, targets, 3);
    auto classes = glr::predict_softmax(params, design).first;
    CHECK(classes == std::vector<std::size_t>{1, 1, 1});
}

TEST_CASE("input validation") {
    CsrMatrix design = separable_design();
    std::vector<std::size_t> short_targets{0, 1};
    CHECK_THROWS_AS(glr::fit_softmax(design, short_targets, 2), std::invalid_argument);
    std::vector<std::size_t> bad_class{0, 0, 1, 9};
    CHECK_THROWS_AS(glr::fit_softmax(design, bad_class, 2), std::invalid_argument);
    FitConfig bad_cfg;
    bad_cfg.grad_tol = 0.0;
    CHECK_THROWS_AS(glr::fit_softmax(design, kSeparableTargets, 2, bad_cfg), std::invalid_argument);

    auto params = glr::fit_softmax(design, kSeparableTargets, 2);
    CsrMatrix wrong_width = glr::from_triplets(1, 5, {});
    CHECK_THROWS_AS(glr::predict_softmax(params, wrong_width), std::invalid_argument);
}
