#pragma once

#include "cogspeech/common.hpp"
#include "cogspeech/featureset.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace cogspeech::ml {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from 53 random bits (toolchain independent).
double uniform01(Rng& rng);
/// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);
/// Derives an independent stream seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// --- feature selection --------------------------------------------------

/// One-way ANOVA F per column for a two-class problem. Zero within-group
/// variance gives +inf when the class means differ and 0 otherwise.
std::vector<double> anova_f_classif(const Matrix& X, const std::vector<int>& y);
/// F = r^2 / (1 - r^2) * (n - 2) from the Pearson correlation with `y`.
std::vector<double> f_regression_scores(const Matrix& X, const std::vector<double>& y);
/// Indices of the k highest scores, by descending score then ascending index.
std::vector<std::size_t> select_top_k(const std::vector<double>& scores, std::size_t k);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& X);
    Matrix apply(const Matrix& X) const;
};

// --- classifiers --------------------------------------------------------

struct GaussianNB {
    std::vector<double> mean[2];
    std::vector<double> var[2];
    double prior[2] = {0.5, 0.5};
    double epsilon = 0.0;

    static GaussianNB fit(const Matrix& X, const std::vector<int>& y, double smoothing = 1e-10);
    /// Rows of class posteriors (non-AD, AD).
    Matrix predict_proba(const Matrix& X) const;
    std::vector<int> predict(const Matrix& X) const;
};

struct SvmParams {
    double C = 100.0;
    double gamma = 0.001;
    double tol = 1e-3;
    std::size_t max_iter = 1000000;
};

struct SvmModel {
    Matrix support;                 // support vectors (rows)
    std::vector<double> coef;       // alpha_i * y_i for each support vector
    double bias = 0.0;
    double gamma = 0.001;
    std::vector<double> alpha;      // full dual vector over the training rows
    std::size_t iterations = 0;
    double final_gap = 0.0;

    double decision(std::span<const double> x) const;
    std::vector<double> decision_function(const Matrix& X) const;
    std::vector<int> predict(const Matrix& X) const;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);
/// Dual objective 1/2 a'Qa - sum(a) (the quantity SMO minimizes).
double svm_dual_objective(const Matrix& X, const std::vector<int>& y, const std::vector<double>& alpha, double gamma);
/// SMO with maximal-violating-pair selection. Throws ConvergenceError when
/// the KKT gap stays above `tol` after `max_iter` updates.
SvmModel fit_svm_rbf(const Matrix& X, const std::vector<int>& y, const SvmParams& p = {});

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p1 = 0.0;  // class-1 fraction at the node
    std::size_t samples = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    double predict_p1(std::span<const double> x) const;
};

struct ForestParams {
    std::size_t n_trees = 200;
    std::size_t max_features = 0;  // 0 = floor(sqrt(d))
    std::size_t min_split = 2;
    std::size_t min_leaf = 2;
    bool bootstrap = true;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    std::vector<std::optional<int>> oob_predictions;

    std::vector<int> predict(const Matrix& X) const;
    /// Fraction of trees voting AD.
    std::vector<double> vote_fraction(const Matrix& X) const;
};

DecisionTree fit_tree(const Matrix& X, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                      const ForestParams& p, Rng& rng);
RandomForest fit_random_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& p, std::uint64_t seed);

struct MlpParams {
    std::vector<std::size_t> hidden = {10, 10};
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 200;
};

/// Fully connected ReLU network with a 2-way softmax output. Parameters
/// are stored flat: per layer, the weight matrix (out x in, row-major) then biases.
struct Mlp {
    std::vector<std::size_t> sizes;  // input, hidden..., 2
    std::vector<double> params;
    std::vector<double> loss_history;

    static Mlp init(std::size_t inputs, const std::vector<std::size_t>& hidden, Rng& rng);
    std::size_t layer_offset(std::size_t layer) const;

    Matrix predict_proba(const Matrix& X) const;
    std::vector<int> predict(const Matrix& X) const;
    /// Mean cross-entropy loss.
    double loss(const Matrix& X, const std::vector<int>& y) const;
    /// Gradient of `loss` with respect to `params`.
    std::vector<double> gradient(const Matrix& X, const std::vector<int>& y) const;
};

Mlp fit_mlp(const Matrix& X, const std::vector<int>& y, const MlpParams& p, std::uint64_t seed);

// --- regression ---------------------------------------------------------

struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;

    std::vector<double> predict_raw(const Matrix& X) const;
    /// Predictions clipped to the MMSE range [0, 30].
    std::vector<double> predict_clipped(const Matrix& X) const;
};

inline constexpr double kMmseMin = 0.0;
inline constexpr double kMmseMax = 30.0;
double clip_mmse(double v);

/// Closed form with an unpenalized intercept (centering). alpha = 0 is OLS and
/// throws DataError when the centered Gram matrix is singular.
LinearModel fit_ridge(const Matrix& X, const std::vector<double>& y, double alpha);
inline LinearModel fit_ols(const Matrix& X, const std::vector<double>& y) { return fit_ridge(X, y, 0.0); }

/// Cholesky solve of a symmetric positive definite system. Throws DataError when not SPD.
std::vector<double> cholesky_solve(const Matrix& A, const std::vector<double>& b);

// --- pipeline -----------------------------------------------------------

enum class ModelKind { Svm, Nn, Rf, Nb, Ols, Ridge };
std::string_view model_name(ModelKind k);
ModelKind model_from_name(std::string_view name);
bool is_regression(ModelKind k);

struct ModelSpec {
    ModelKind kind = ModelKind::Svm;
    std::size_t k_features = 0;  // 0 = all
    SvmParams svm;
    ForestParams forest;
    MlpParams mlp;
    double nb_smoothing = 1e-10;
    double alpha = 10.0;
    std::optional<bool> standardize;  // default: on for svm/nn/ols/ridge
    std::uint64_t seed = 0;

    bool uses_standardization() const;
};

/// Imputation, top-k selection, optional standardization and the model,
/// fit on one training split.
class Pipeline {
public:
    static Pipeline fit(const Matrix& X, const std::vector<double>& targets, const ModelSpec& spec,
                        const std::vector<std::string>& feature_names = {});
    /// Class labels (0/1) or clipped MMSE predictions.
    std::vector<double> predict(const Matrix& X) const;

    const ModelSpec& spec() const noexcept { return spec_; }
    const std::vector<std::size_t>& selected() const noexcept { return selected_; }
    const std::vector<double>& scores() const noexcept { return scores_; }
    const features::Imputer& imputer() const noexcept { return imputer_; }
    /// Linear weights in selected-feature order (regression models only).
    const LinearModel* linear() const;

    std::string registry_hash;
    std::vector<std::string> feature_names;

    std::string to_json() const;
    static Pipeline from_json(std::string_view text);

private:
    ModelSpec spec_;
    features::Imputer imputer_;
    std::vector<double> scores_;
    std::vector<std::size_t> selected_;
    std::optional<Standardizer> standardizer_;
    std::variant<std::monostate, SvmModel, Mlp, RandomForest, GaussianNB, LinearModel> model_;

    Matrix transform(const Matrix& X) const;
};

}  // namespace cogspeech::ml
