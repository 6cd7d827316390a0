#pragma once

#include "cogspeech/common.hpp"
#include "cogspeech/featureset.hpp"
#include "cogspeech/ml.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cogspeech::eval {

// --- folds ----------------------------------------------------------------

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    bool operator==(const Fold&) const = default;
};

std::vector<Fold> loso_folds(std::size_t n);
/// Stratified k-fold: each class is shuffled with `seed` and dealt round-robin
/// across folds. With k = n the folds are singletons in index order.
std::vector<Fold> stratified_kfold(const std::vector<int>& labels, std::size_t k, std::uint64_t seed);
/// Unstratified shuffled k-fold (used for regression targets).
std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

enum class Protocol { Loso, KFold };
struct ProtocolSpec {
    Protocol kind = Protocol::Loso;
    std::size_t k = 10;

    std::string name() const;
    /// "loso", "kfold" or "kfold:K".
    static ProtocolSpec parse(std::string_view text);
};

// --- metrics ----------------------------------------------------------------

struct BinaryMetrics {
    double accuracy = 0.0;
    MaybeValue precision;
    MaybeValue recall;
    MaybeValue specificity;
    MaybeValue f1;
};

/// AD (label 1) is the positive class; zero denominators give missing values.
BinaryMetrics binary_metrics(const std::vector<int>& truth, const std::vector<int>& pred);

struct RegressionMetrics {
    double rmse = 0.0;
    double mae = 0.0;
};
RegressionMetrics regression_metrics(const std::vector<double>& truth, const std::vector<double>& pred);

/// Element-wise mode over an odd number of aligned label vectors.
std::vector<int> majority_vote(const std::vector<std::vector<int>>& sets);

// --- cross-validation -------------------------------------------------------

enum class Task { Classify, Regress };
std::string_view task_name(Task t);
Task task_from_name(std::string_view s);

struct PredictionRecord {
    std::uint64_t seed = 0;
    std::size_t fold = 0;
    std::string id;
    double truth = 0.0;
    double prediction = 0.0;
};

using MetricMap = std::map<std::string, MaybeValue>;

struct CvReport {
    std::string protocol;
    std::string model;
    Task task = Task::Classify;
    std::vector<std::uint64_t> seeds;
    std::vector<PredictionRecord> predictions;
    std::map<std::uint64_t, MetricMap> per_seed;
    MetricMap mean;  // mean over seeds of the per-seed pooled metrics

    /// Metric names for the task, in report order.
    static std::vector<std::string> metric_names(Task t);
};

/// Computes metrics from pooled predictions for one seed.
MetricMap pooled_metrics(Task task, const std::vector<double>& truth, const std::vector<double>& pred);

/// Fills per-seed and mean metrics from `predictions`.
void summarize(CvReport& report);

/// Trains on `train` rows and predicts `test` rows.
using FitPredict = std::function<std::vector<double>(const std::vector<std::size_t>& train,
                                                     const std::vector<std::size_t>& test, std::uint64_t seed)>;

/// Generic driver: folds per seed, pooled predictions, seed-averaged metrics.
CvReport run_cv(const std::vector<std::string>& ids, const std::vector<double>& targets, Task task,
                const ProtocolSpec& protocol, const std::vector<std::uint64_t>& seeds, const FitPredict& fit_predict,
                const std::string& model_label);

/// Cross-validates a full pipeline (imputation, selection, scaling refit per fold).
CvReport cross_validate(const features::Dataset& data, const ml::ModelSpec& spec, Task task,
                        const ProtocolSpec& protocol, const std::vector<std::uint64_t>& seeds);

struct GridPoint {
    ml::ModelSpec spec;
    CvReport report;
};

struct GridResult {
    std::vector<GridPoint> points;
    std::size_t best = 0;
};

/// Searches k (and alpha for ridge). Best = highest mean accuracy (classify)
/// or lowest mean RMSE (regress); ties go to the earlier grid point.
GridResult grid_search(const features::Dataset& data, const ml::ModelSpec& base, Task task,
                       const ProtocolSpec& protocol, const std::vector<std::uint64_t>& seeds,
                       const std::vector<std::size_t>& k_grid, const std::vector<double>& alpha_grid);

inline const std::vector<std::size_t> kDefaultKGrid = {10, 25, 35, 50, 80, 509};
inline const std::vector<double> kDefaultAlphaGrid = {1, 10, 12, 100};

// CvReport CSV: header kind,protocol,model,task,seed,fold,id,y_true,y_pred,metric,value.
// "prediction" rows fill seed..y_pred; "metric" rows fill seed (or "mean"), metric, value.
std::string report_to_csv(const CvReport& r);
CvReport report_from_csv(std::string_view text);
/// Checks fold partitions and recomputes every metric; returns problems found.
std::vector<std::string> validate_report(const CvReport& r, double tol = 1e-9);
/// Fixed-width human-readable summary.
std::string report_table(const CvReport& r);

// --- statistics -------------------------------------------------------------

double log_beta(double a, double b);
/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
/// Two-sided p-value for a t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

struct TTest {
    MaybeValue t;
    MaybeValue df;
    MaybeValue p;
};
/// Welch's unequal-variance t-test of mean(a) - mean(b).
TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

std::vector<double> average_ranks(const std::vector<double>& x);

struct Correlation {
    MaybeValue rho;
    MaybeValue p;
};
Correlation spearman(const std::vector<double>& x, const std::vector<double>& y);

struct KruskalWallis {
    double H = 0.0;
    double p = 1.0;
};
KruskalWallis kruskal_wallis(const std::vector<double>& a, const std::vector<double>& b);

struct FeatureStat {
    std::string name;
    MaybeValue mean_ad;
    MaybeValue mean_nonad;
    TTest test;
    bool significant = false;
    Correlation mmse;
    bool mmse_significant = false;
    MaybeValue ridge_weight;
};

struct StatsReport {
    std::vector<FeatureStat> features;
    std::size_t n_tests = 0;
    double threshold = 0.0;

    std::vector<std::size_t> significant_indices() const;
};

inline double bonferroni_threshold(std::size_t n_tests, double alpha = 0.05) {
    return alpha / static_cast<double>(n_tests);
}

/// Per-feature Welch tests (AD vs non-AD) and Spearman correlation with MMSE.
/// `n_tests` defaults to the feature count.
StatsReport feature_differentiation(const features::Dataset& data, std::optional<std::size_t> n_tests = {});

/// Ridge weights averaged over LOSO folds (standardized features, all columns).
std::vector<double> loso_ridge_weights(const features::Dataset& data, double alpha);

std::string stats_to_csv(const StatsReport& r);

// --- t-SNE ------------------------------------------------------------------

struct TsneParams {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 0.0;  // 0 = max(n / early_exaggeration / 4, 50)
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch = 250;
    double perplexity_tol = 1e-5;
    std::uint64_t seed = 0;
};

struct TsneResult {
    Matrix Y;
    std::vector<double> kl_history;  // KL(P||Q) after every iteration, unexaggerated P
};

/// Row-conditional affinities p(j|i) calibrated to the target perplexity.
Matrix conditional_affinities(const Matrix& X, double perplexity, double tol = 1e-5);
double perplexity_of_row(std::span<const double> p);

TsneResult tsne_embed(const Matrix& X, const TsneParams& p = {});

std::string tsne_to_csv(const Matrix& Y, const std::vector<std::string>& ids, const std::vector<std::optional<int>>& labels);
std::string tsne_svg(const Matrix& Y, const std::vector<std::optional<int>>& labels);

}  // namespace cogspeech::eval
