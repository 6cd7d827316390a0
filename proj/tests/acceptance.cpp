// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails; skipped criteria do not fail the run.

#include "oracles.hpp"

#include "cogspeech/acoustics.hpp"
#include "cogspeech/config.hpp"
#include "cogspeech/eval.hpp"
#include "cogspeech/featureset.hpp"
#include "cogspeech/fixtures.hpp"
#include "cogspeech/lexical.hpp"
#include "cogspeech/ml.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

using namespace cogspeech;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }

std::string num(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- feature completeness ------------------------------------------------

Outcome feature_completeness() {
    const auto dir = fs::temp_directory_path() / "cogspeech_acceptance_corpus";
    fs::remove_all(dir);
    const auto layout = fixtures::write_corpus(dir.string());
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = config::load_config(layout.config_path);
    const auto res = config::load_resources(cfg);
    const auto registry = features::FeatureRegistry::build(res.productions);
    std::size_t masked = 0, rows = 0;
    for (const auto& id : layout.ids) {
        const auto base = fs::path(layout.corpus_dir) / id;
        const auto t = chat::parse_chat(features::read_text_file(base.string() + ".cha"), id);
        const auto trees = treebank::parse_trees_file(features::read_text_file(base.string() + ".trees"));
        const auto audio = acoustics::read_wav(base.string() + ".wav");
        const auto fv = features::extract_all(t, &trees, &audio, res, registry);
        if (fv.values.size() != registry.size()) return fail("row width " + std::to_string(fv.values.size()));
        masked += fv.masked_count();
        ++rows;
    }
    const double elapsed = seconds_since(t0);
    fs::remove_all(dir);
    const auto lex = registry.group_count(features::Group::LexicoSyntactic);
    const auto ac = registry.group_count(features::Group::Acoustic);
    const auto sem = registry.group_count(features::Group::Semantic);
    const auto names = registry.names();
    const bool unique = std::set<std::string>(names.begin(), names.end()).size() == names.size();
    const std::string detail = std::to_string(rows) + " transcripts, " + std::to_string(registry.size()) + " features (" +
                               std::to_string(lex) + "/" + std::to_string(ac) + "/" + std::to_string(sem) + "), " +
                               std::to_string(masked) + " masked, " + num(elapsed, 3) + " s";
    const bool ok = rows == 12 && registry.size() == 509 && lex == 297 && ac == 187 && sem == 25 && unique && masked == 0 &&
                    elapsed < 60.0;
    return ok ? pass(detail) : fail(detail);
}

// --- formula oracles -----------------------------------------------------

Outcome formula_oracles() {
    std::mt19937_64 rng(20240601);
    constexpr int kInstances = 200;
    constexpr double tol = 1e-9;
    double worst = 0.0;
    std::string worst_name;
    auto check = [&](const char* name, double got, double want) {
        const double e = oracle::rel_err(got, want);
        if (e > worst || std::isnan(e)) {
            worst = std::isnan(e) ? INFINITY : e;
            worst_name = name;
        }
    };
    std::uniform_int_distribution<std::size_t> len(10, 200), vocab(3, 60), win(5, 30);
    int honore_instances = 0;
    for (int k = 0; k < kInstances; ++k) {
        const auto toks = oracle::random_tokens(rng, len(rng), vocab(rng));
        const auto c = oracle::counts(toks);
        if (c.v1 < c.v) {
            const auto h = lexical::honore_statistic(c.n, c.v, c.v1);
            check("honore", h ? *h : NAN, oracle::honore(toks));
            ++honore_instances;
        }
        check("brunet", lexical::brunet_index(c.n, c.v), oracle::brunet(toks));
        check("ttr", lexical::type_token_ratio(toks), oracle::ttr(toks));
        const auto w = win(rng);
        check("mattr", lexical::moving_average_ttr(toks, w), oracle::mattr(toks, w));
    }
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> rows(6, 60), coin(0, 1);
    for (int k = 0; k < kInstances; ++k) {
        const auto n = rows(rng);
        Matrix X(n, 3);
        std::vector<int> y(n);
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(coin(rng));
            t[i] = z(rng) * 5 + 20;
            for (std::size_t c = 0; c < 3; ++c) X(i, c) = z(rng) + (c == 0 ? y[i] : 0.0) + (c == 1 ? 0.3 * t[i] : 0.0);
        }
        if (std::count(y.begin(), y.end(), 1) < 2 || std::count(y.begin(), y.end(), 0) < 2) y[2] = 1 - y[2];
        const auto f = ml::anova_f_classif(X, y);
        const auto fr = ml::f_regression_scores(X, t);
        for (std::size_t c = 0; c < 3; ++c) {
            check("anova_f", f[c], oracle::anova_f(X.column(c), y));
            check("regression_f", fr[c], oracle::regression_f(X.column(c), t));
        }
        std::vector<int> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(coin(rng));
        // Guarantee nonzero denominators so every metric is defined.
        y[0] = 1; p[0] = 1; y[1] = 0; p[1] = 0;
        const auto b = eval::binary_metrics(y, p);
        const auto o = oracle::binary(y, p);
        check("accuracy", b.accuracy, o.accuracy);
        check("precision", b.precision.value_or(NAN), o.precision);
        check("recall", b.recall.value_or(NAN), o.recall);
        check("specificity", b.specificity.value_or(NAN), o.specificity);
        check("f1", b.f1.value_or(NAN), o.f1);
        std::vector<double> pred(n);
        for (std::size_t i = 0; i < n; ++i) pred[i] = t[i] + z(rng);
        const auto r = eval::regression_metrics(t, pred);
        check("rmse", r.rmse, oracle::rmse(t, pred));
        check("mae", r.mae, oracle::mae(t, pred));
    }
    const std::string detail = std::to_string(kInstances) + " instances per formula (" + std::to_string(honore_instances) +
                               " for Honore), worst relative error " + num(worst, 3) +
                               (worst_name.empty() ? "" : " (" + worst_name + ")");
    return worst <= tol && honore_instances >= 100 ? pass(detail) : fail(detail);
}

// --- ML correctness --------------------------------------------------------

double svm_kkt_gap(const Matrix& X, const std::vector<int>& y01, const std::vector<double>& a, double C, double gamma) {
    const std::size_t n = X.rows();
    double up = -INFINITY, low = INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const double yi = y01[i] ? 1.0 : -1.0;
        double qa = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            qa += yi * (y01[j] ? 1.0 : -1.0) * ml::rbf_kernel(X.row(i), X.row(j), gamma) * a[j];
        const double v = -yi * (qa - 1.0);
        const bool in_up = (yi > 0 && a[i] < C) || (yi < 0 && a[i] > 0);
        const bool in_low = (yi < 0 && a[i] < C) || (yi > 0 && a[i] > 0);
        if (in_up) up = std::max(up, v);
        if (in_low) low = std::min(low, v);
    }
    return up - low;
}

Outcome ml_correctness() {
    std::vector<std::string> notes;
    bool ok = true;

    // Naive Bayes, 4 points: class 0 at {0, 2}, class 1 at {4, 6}.
    {
        Matrix X(4, 1);
        X(0, 0) = 0; X(1, 0) = 2; X(2, 0) = 4; X(3, 0) = 6;
        const auto nb = ml::GaussianNB::fit(X, {0, 0, 1, 1});
        // Population variance 1 per class plus 1e-10 * overall variance 5.
        const double v = 1.0 + 5e-10;
        Matrix Q(3, 1);
        Q(0, 0) = 1; Q(1, 0) = 3; Q(2, 0) = 5;
        const auto P = nb.predict_proba(Q);
        const double want[3] = {1.0 / (1.0 + std::exp(8.0 / v)), 0.5, 1.0 / (1.0 + std::exp(-8.0 / v))};
        double err = 0;
        for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(P(static_cast<std::size_t>(i), 1) - want[i]));
        const bool nb_ok = err <= 1e-15 && nb.mean[0][0] == 1.0 && nb.mean[1][0] == 5.0;
        ok &= nb_ok;
        notes.push_back("NB max err " + num(err, 2));
    }

    // SVM against a cyclic pair-sweep dual solver.
    {
        auto ds = fixtures::discriminability_dataset(15, 3, 2, 0.8, 99);
        const auto y = ds.label_vector();
        ml::SvmParams p;
        p.C = 10.0;
        p.gamma = 0.5;
        const auto m = ml::fit_svm_rbf(ds.X, y, p);
        const double gap = svm_kkt_gap(ds.X, y, m.alpha, p.C, p.gamma);
        const auto ref = oracle::svm_dual_by_sweeps(ds.X, y, p.C, p.gamma);
        const double obj = ml::svm_dual_objective(ds.X, y, m.alpha, p.gamma);
        const double ref_obj = ml::svm_dual_objective(ds.X, y, ref, p.gamma);
        const bool svm_ok = gap <= 1e-3 && std::abs(obj - ref_obj) <= 1e-3;
        ok &= svm_ok;
        notes.push_back("SVM KKT gap " + num(gap, 2) + ", objective diff " + num(std::abs(obj - ref_obj), 2));
    }

    // Ridge: gradient-descent oracle, and alpha = 0 against elimination OLS.
    {
        const auto ds = fixtures::regression_dataset(40, 6, 3, 0.5, 17);
        const auto y = ds.mmse_vector();
        const auto m = ml::fit_ridge(ds.X, y, 10.0);
        const auto [w, b] = oracle::ridge_by_descent(ds.X, y, 10.0);
        double err = oracle::rel_err(m.intercept, b);
        for (std::size_t c = 0; c < w.size(); ++c) err = std::max(err, oracle::rel_err(m.weights[c], w[c]));
        const auto ols = ml::fit_ridge(ds.X, y, 0.0);
        const auto [w0, b0] = oracle::ols_by_elimination(ds.X, y);
        double err0 = oracle::rel_err(ols.intercept, b0);
        for (std::size_t c = 0; c < w0.size(); ++c) err0 = std::max(err0, oracle::rel_err(ols.weights[c], w0[c]));
        const bool ridge_ok = err <= 1e-6 && err0 <= 1e-9;
        ok &= ridge_ok;
        notes.push_back("ridge err " + num(err, 2) + ", OLS err " + num(err0, 2));
    }

    // MLP gradient against central differences.
    {
        const auto ds = fixtures::discriminability_dataset(10, 3, 2, 1.0, 5);
        const auto y = ds.label_vector();
        ml::Rng rng(3);
        auto net = ml::Mlp::init(ds.X.cols(), {10, 10}, rng);
        const auto g = net.gradient(ds.X, y);
        const double h = 1e-6;
        double num2 = 0, den2 = 0, ref2 = 0;
        for (std::size_t k = 0; k < net.params.size(); ++k) {
            const double keep = net.params[k];
            net.params[k] = keep + h;
            const double lp = net.loss(ds.X, y);
            net.params[k] = keep - h;
            const double lm = net.loss(ds.X, y);
            net.params[k] = keep;
            const double fd = (lp - lm) / (2 * h);
            num2 += (g[k] - fd) * (g[k] - fd);
            den2 += g[k] * g[k];
            ref2 += fd * fd;
        }
        const double rel = std::sqrt(num2) / std::max(std::sqrt(den2), std::sqrt(ref2));
        ok &= rel < 1e-4;
        notes.push_back("MLP grad rel err " + num(rel, 2));
    }

    // Random forest determinism.
    {
        const auto ds = fixtures::discriminability_dataset(20, 4, 6, 0.8, 8);
        const auto y = ds.label_vector();
        ml::ForestParams fp;
        fp.n_trees = 50;
        const auto a = ml::fit_random_forest(ds.X, y, fp, 42);
        const auto b = ml::fit_random_forest(ds.X, y, fp, 42);
        const auto c = ml::fit_random_forest(ds.X, y, fp, 43);
        bool same = a.trees.size() == b.trees.size() && a.oob_predictions == b.oob_predictions;
        for (std::size_t t = 0; same && t < a.trees.size(); ++t) {
            const auto& na = a.trees[t].nodes;
            const auto& nb = b.trees[t].nodes;
            same = na.size() == nb.size();
            for (std::size_t k = 0; same && k < na.size(); ++k)
                same = na[k].feature == nb[k].feature && na[k].threshold == nb[k].threshold && na[k].p1 == nb[k].p1;
        }
        same &= a.vote_fraction(ds.X) == b.vote_fraction(ds.X);
        const bool differs = a.vote_fraction(ds.X) != c.vote_fraction(ds.X) || a.oob_predictions != c.oob_predictions;
        ok &= same && differs;
        notes.push_back(std::string("RF ") + (same ? "deterministic" : "NOT deterministic"));
    }

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return ok ? pass(detail) : fail(detail);
}

// --- DSP -----------------------------------------------------------------

Outcome dsp() {
    bool ok = true;
    std::vector<std::string> notes;
    acoustics::AudioSignal sine;
    for (int i = 0; i < 16000; ++i) sine.samples.push_back(0.5 * std::sin(2 * M_PI * 220.0 * i / 16000.0));
    const auto f0 = acoustics::f0_stats(sine);
    double f0_err = 0;
    for (const auto& nv : f0) f0_err = std::max(f0_err, nv.value ? std::abs(*nv.value - 220.0) : INFINITY);
    ok &= f0_err <= 3.0;
    notes.push_back("F0 max |err| " + num(f0_err, 3) + " Hz");

    acoustics::AudioSignal noisy;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 0.05);
    for (int i = 0; i < 16000; ++i)
        noisy.samples.push_back(0.3 * std::sin(2 * M_PI * 310.0 * i / 16000.0) + 0.2 * std::sin(2 * M_PI * 1250.0 * i / 16000.0) + z(rng));
    auto quiet = noisy;
    for (auto& x : quiet.samples) x *= 0.25;
    const auto a = acoustics::mfcc_block(noisy), b = acoustics::mfcc_block(quiet);
    double gain_err = 0;
    for (std::size_t k = 0; k < a.size(); ++k) gain_err = std::max(gain_err, oracle::rel_err(*a[k].value, *b[k].value));
    ok &= gain_err <= 1e-6;
    notes.push_back("MFCC gain err " + num(gain_err, 2));

    double dur_err = 0;
    acoustics::FrameConfig fc;
    for (const auto& s : fixtures::make_samples({2, 2, 6, 3, 16000})) {
        const auto sum = acoustics::detect_silences(s.audio, fc);
        dur_err = std::max(dur_err, std::abs(sum.spoken_seconds + sum.silent_seconds - sum.total_seconds));
    }
    ok &= dur_err <= fc.hop_ms / 1000.0;
    notes.push_back("duration residual " + num(dur_err, 2) + " s");

    double dct_err = 0;
    std::uniform_int_distribution<std::size_t> len(2, 64);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(len(rng));
        for (auto& v : x) v = z(rng) * 20;
        const auto got = acoustics::dct_ortho(x);
        const auto want = oracle::dct2(x);
        for (std::size_t i = 0; i < x.size(); ++i) dct_err = std::max(dct_err, std::abs(got[i] - want[i]));
    }
    ok &= dct_err <= 1e-9;
    notes.push_back("DCT err " + num(dct_err, 2));

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return ok ? pass(detail) : fail(detail);
}

// --- protocol --------------------------------------------------------------

Outcome protocol() {
    bool ok = true;
    std::vector<std::string> notes;
    bool folds_equal = true;
    for (std::size_t n : {4, 7, 12, 25}) {
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = i % 3 == 0 ? 1 : 0;
        for (std::uint64_t seed : {0, 1, 2, 99}) folds_equal &= eval::stratified_kfold(labels, n, seed) == eval::loso_folds(n);
    }
    const auto ds = fixtures::discriminability_dataset(10, 3, 5, 0.8, 21);
    ml::ModelSpec nb;
    nb.kind = ml::ModelKind::Nb;
    const auto r_loso = eval::cross_validate(ds, nb, eval::Task::Classify, eval::ProtocolSpec{eval::Protocol::Loso, 0}, {0, 1, 2});
    const auto r_kn = eval::cross_validate(ds, nb, eval::Task::Classify, eval::ProtocolSpec{eval::Protocol::KFold, ds.size()}, {0, 1, 2});
    bool same_preds = r_loso.predictions.size() == r_kn.predictions.size();
    for (std::size_t i = 0; same_preds && i < r_loso.predictions.size(); ++i) {
        const auto& a = r_loso.predictions[i];
        const auto& b = r_kn.predictions[i];
        same_preds = a.id == b.id && a.fold == b.fold && a.seed == b.seed && a.prediction == b.prediction;
    }
    ok &= folds_equal && same_preds;
    notes.push_back(std::string("k=n folds ") + (folds_equal && same_preds ? "identical to LOSO" : "DIFFER from LOSO"));

    // Balanced fixtures: accuracy equals the mean of recall and specificity.
    double bal_err = 0;
    std::size_t reports = 0;
    for (auto kind : {ml::ModelKind::Nb, ml::ModelKind::Svm, ml::ModelKind::Rf}) {
        ml::ModelSpec spec;
        spec.kind = kind;
        spec.forest.n_trees = 30;
        for (auto proto : {eval::ProtocolSpec{eval::Protocol::Loso, 0}, eval::ProtocolSpec{eval::Protocol::KFold, 5}}) {
            const auto r = eval::cross_validate(ds, spec, eval::Task::Classify, proto, {0, 1, 2});
            std::vector<eval::MetricMap> maps;
            for (const auto& [s, m] : r.per_seed) maps.push_back(m);
            maps.push_back(r.mean);
            for (const auto& m : maps) {
                const double acc = *m.at("accuracy");
                const double half = 0.5 * (*m.at("recall") + *m.at("specificity"));
                bal_err = std::max(bal_err, std::abs(acc - half));
            }
            ++reports;
        }
    }
    ok &= bal_err <= 1e-12;
    notes.push_back(std::to_string(reports) + " balanced reports, |acc - (rec+spec)/2| <= " + num(bal_err, 2));

    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> bit(0, 1);
    bool vote_ok = true;
    for (int k = 0; k < 200; ++k) {
        std::vector<std::vector<int>> sets(3, std::vector<int>(17));
        for (auto& s : sets)
            for (auto& v : s) v = bit(rng);
        vote_ok &= eval::majority_vote(sets) == oracle::majority_by_counting(sets);
    }
    ok &= vote_ok;
    notes.push_back(std::string("3-seed majority ") + (vote_ok ? "matches" : "DIFFERS from") + " counting oracle");

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return ok ? pass(detail) : fail(detail);
}

// --- end-to-end discriminability -------------------------------------------

Outcome discriminability() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ds = fixtures::discriminability_dataset();
    ml::ModelSpec spec;
    spec.kind = ml::ModelKind::Svm;
    const eval::ProtocolSpec proto{eval::Protocol::KFold, 10};
    const auto grid = eval::grid_search(ds, spec, eval::Task::Classify, proto, {0, 1, 2}, eval::kDefaultKGrid, {});
    const auto& best = grid.points[grid.best];
    double all_acc = NAN;
    for (const auto& p : grid.points)
        if (p.spec.k_features == ds.feature_names.size()) all_acc = *p.report.mean.at("accuracy");
    const double best_acc = *best.report.mean.at("accuracy");
    const double elapsed = seconds_since(t0);
    const std::string detail = "best k=" + std::to_string(best.spec.k_features) + " accuracy " + num(best_acc) +
                               ", all 509 features " + num(all_acc) + ", gain " + num(best_acc - all_acc) + ", " +
                               num(elapsed, 3) + " s";
    const bool ok = best.spec.k_features <= 50 && best_acc - all_acc >= 0.05 && elapsed < 300.0;
    return ok ? pass(detail) : fail(detail);
}

// --- statistics --------------------------------------------------------------

Outcome statistics() {
    const auto ds = fixtures::planted_dataset();
    const auto report = eval::feature_differentiation(ds);
    const auto sig = report.significant_indices();
    const auto want = fixtures::planted_columns();
    const auto kw = eval::kruskal_wallis({0.81, 0.79, 0.85, 0.80}, {0.81, 0.79, 0.85, 0.80});
    const std::string detail = std::to_string(sig.size()) + " flagged at p < " + num(report.threshold, 3) +
                               (sig == want ? " (exactly the planted set)" : " (planted set differs)") +
                               "; Kruskal-Wallis H on identical samples = " + num(kw.H);
    return sig == want && kw.H == 0.0 ? pass(detail) : fail(detail);
}

// --- t-SNE -------------------------------------------------------------------

Outcome tsne() {
    const auto ds = fixtures::blobs_dataset();
    eval::TsneParams p;
    p.seed = 0;
    const auto r = eval::tsne_embed(ds.X, p);
    std::size_t rises = 0;
    double worst_rise = 0;
    const auto& kl = r.kl_history;
    for (std::size_t i = kl.size() - 100; i < kl.size(); ++i) {
        const double rise = kl[i] - kl[i - 1];
        if (rise > 0) {
            ++rises;
            worst_rise = std::max(worst_rise, rise);
        }
    }
    const double agree = oracle::two_means_agreement(r.Y, ds.label_vector());
    const std::string detail = "KL " + num(kl[kl.size() - 101], 6) + " -> " + num(kl.back(), 6) + ", " +
                               std::to_string(rises) + " increases in final 100 (max " + num(worst_rise, 2) +
                               "); 2-means agreement " + num(agree);
    return rises == 0 && agree >= 0.95 ? pass(detail) : fail(detail);
}

// --- conditional: challenge data -----------------------------------------

Outcome challenge_data() {
    const char* path = std::getenv("COGSPEECH_CHALLENGE_MATRIX");
    if (!path || !fs::exists(path))
        return {Status::Skip, "set COGSPEECH_CHALLENGE_MATRIX to an extracted challenge feature matrix to run"};
    const auto ds = features::read_matrix(path);
    const eval::ProtocolSpec loso{eval::Protocol::Loso, 0};
    const std::vector<std::uint64_t> seeds = {0, 1, 2};
    auto acc = [&](ml::ModelKind kind, std::size_t k) {
        ml::ModelSpec s;
        s.kind = kind;
        s.k_features = k;
        return *eval::cross_validate(ds, s, eval::Task::Classify, loso, seeds).mean.at("accuracy");
    };
    const double svm = acc(ml::ModelKind::Svm, 10);
    const double nn = acc(ml::ModelKind::Nn, 10), rf = acc(ml::ModelKind::Rf, 10), nb = acc(ml::ModelKind::Nb, 10);
    ml::ModelSpec ridge;
    ridge.kind = ml::ModelKind::Ridge;
    ridge.k_features = 25;
    ridge.alpha = 10;
    const double rmse = *eval::cross_validate(ds, ridge, eval::Task::Regress, loso, seeds).mean.at("rmse");
    const bool ok = std::abs(svm - 0.870) <= 0.05 && std::abs(rmse - 4.56) <= 0.5 && svm > nn && svm > rf && svm > nb;
    const std::string detail = "SVM " + num(svm) + ", NN " + num(nn) + ", RF " + num(rf) + ", NB " + num(nb) +
                               ", ridge RMSE " + num(rmse);
    return ok ? pass(detail) : fail(detail);
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"feature completeness", feature_completeness},
        {"formula oracles", formula_oracles},
        {"ML correctness", ml_correctness},
        {"DSP", dsp},
        {"protocol", protocol},
        {"end-to-end discriminability", discriminability},
        {"statistics", statistics},
        {"t-SNE", tsne},
        {"challenge-data reproduction (conditional)", challenge_data},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        failures += o.status == Status::Fail;
        std::printf("[%s] %s: %s\n", tag, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criterion/criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
