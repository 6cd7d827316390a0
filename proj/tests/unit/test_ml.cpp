#include "cogspeech/fixtures.hpp"
#include "cogspeech/ml.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cogspeech;
using namespace cogspeech::ml;

namespace {
std::vector<double> as_double(const std::vector<int>& y) { return {y.begin(), y.end()}; }

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

// Two well separated Gaussian clouds in 4 dimensions.
std::pair<Matrix, std::vector<int>> separable(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> nd;
    Matrix X(n, 4);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < 4; ++j) X(i, j) = nd(rng) + (y[i] ? 4.0 : -4.0);
    }
    return {X, y};
}
}  // namespace

TEST_CASE("top-k selection ordering") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> s{1.0, 3.0, nan, 3.0, std::numeric_limits<double>::infinity(), 0.0};
    CHECK(select_top_k(s, 3) == std::vector<std::size_t>{4, 1, 3});
    CHECK(select_top_k(s, 6).back() == 2u);
    CHECK_THROWS_AS(select_top_k(s, 0), ConfigError);
    CHECK_THROWS_AS(select_top_k(s, 7), ConfigError);
}

TEST_CASE("anova F edge cases") {
    Matrix X(4, 3);
    const std::vector<int> y{0, 0, 1, 1};
    for (std::size_t r = 0; r < 4; ++r) {
        X(r, 0) = 2.0;                // constant
        X(r, 1) = y[r] ? 5.0 : 1.0;   // zero within-group variance, different means
        X(r, 2) = static_cast<double>(r);
    }
    const auto f = anova_f_classif(X, y);
    CHECK(f[0] == 0.0);
    CHECK(std::isinf(f[1]));
    CHECK(f[2] == doctest::Approx(8.0));
}

TEST_CASE("standardizer uses population sd and guards constants") {
    Matrix X(2, 2);
    X(0, 0) = 1;
    X(1, 0) = 3;
    X(0, 1) = 7;
    X(1, 1) = 7;
    const auto s = Standardizer::fit(X);
    const auto Z = s.apply(X);
    CHECK(Z(0, 0) == doctest::Approx(-1.0));
    CHECK(Z(1, 0) == doctest::Approx(1.0));
    CHECK(Z(0, 1) == 0.0);
}

TEST_CASE("classifiers on separable data") {
    const auto [X, y] = separable(80, 4);
    const auto [T, t] = separable(40, 5);
    CHECK(accuracy(GaussianNB::fit(X, y).predict(T), t) >= 0.99);
    CHECK(accuracy(fit_svm_rbf(X, y, {1.0, 0.1}).predict(T), t) >= 0.99);
    CHECK(accuracy(fit_random_forest(X, y, {25}, 3).predict(T), t) >= 0.99);
    MlpParams mp;
    mp.epochs = 400;
    mp.learning_rate = 1e-2;
    const auto net = fit_mlp(X, y, mp, 1);
    CHECK(accuracy(net.predict(T), t) >= 0.99);
    CHECK(net.loss_history.back() < net.loss_history.front());
}

TEST_CASE("forest is deterministic for a seed") {
    const auto [X, y] = separable(40, 8);
    const auto a = fit_random_forest(X, y, {15}, 42).vote_fraction(X);
    const auto b = fit_random_forest(X, y, {15}, 42).vote_fraction(X);
    CHECK(a == b);
}

TEST_CASE("ridge and ols") {
    Matrix X(4, 1);
    const std::vector<double> y{1, 3, 5, 7};
    for (std::size_t i = 0; i < 4; ++i) X(i, 0) = static_cast<double>(i);
    const auto ols = fit_ols(X, y);
    CHECK(ols.weights[0] == doctest::Approx(2.0));
    CHECK(ols.intercept == doctest::Approx(1.0));
    const auto ridge = fit_ridge(X, y, 5.0);
    // Centered closed form: w = Sxy / (Sxx + alpha) = 10 / (5 + 5).
    CHECK(ridge.weights[0] == doctest::Approx(1.0));
    CHECK(ridge.intercept == doctest::Approx(4.0 - 1.5));

    Matrix dup(4, 2);
    for (std::size_t i = 0; i < 4; ++i) dup(i, 0) = dup(i, 1) = static_cast<double>(i);
    CHECK_THROWS_AS(fit_ols(dup, y), DataError);
    CHECK_NOTHROW(fit_ridge(dup, y, 1.0));

    LinearModel big{{100.0}, 0.0};
    CHECK(big.predict_clipped(X)[3] == kMmseMax);
    CHECK(clip_mmse(-3.0) == kMmseMin);
}

TEST_CASE("cholesky rejects indefinite systems") {
    Matrix A(2, 2);
    A(0, 0) = 1;
    A(0, 1) = A(1, 0) = 2;
    A(1, 1) = 1;
    CHECK_THROWS_AS(cholesky_solve(A, {1, 1}), DataError);
    A(1, 1) = 5;
    const auto x = cholesky_solve(A, {3, 7});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("pipeline JSON round trip reproduces predictions") {
    const auto d = fixtures::discriminability_dataset(20, 5, 30, 1.0, 2);
    const auto y = as_double(d.label_vector());
    for (auto kind : {ModelKind::Svm, ModelKind::Nb, ModelKind::Rf, ModelKind::Nn}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.k_features = 5;
        spec.forest.n_trees = 10;
        spec.mlp.epochs = 20;
        const auto p = Pipeline::fit(d.X, y, spec, d.feature_names);
        CHECK(p.selected().size() == 5);
        const auto q = Pipeline::from_json(p.to_json());
        CHECK(q.predict(d.X) == p.predict(d.X));
        CHECK(q.selected() == p.selected());
    }
    ModelSpec ridge;
    ridge.kind = ModelKind::Ridge;
    const auto r = fixtures::regression_dataset();
    const auto p = Pipeline::fit(r.X, r.mmse_vector(), ridge, r.feature_names);
    REQUIRE(p.linear());
    CHECK(Pipeline::from_json(p.to_json()).predict(r.X) == p.predict(r.X));
}

TEST_CASE("model names") {
    for (auto k : {ModelKind::Svm, ModelKind::Nn, ModelKind::Rf, ModelKind::Nb, ModelKind::Ols, ModelKind::Ridge})
        CHECK(model_from_name(model_name(k)) == k);
    CHECK_THROWS_AS(model_from_name("xgboost"), ConfigError);
    CHECK(is_regression(ModelKind::Ridge));
    CHECK_FALSE(is_regression(ModelKind::Nb));
}
