#include "cogspeech/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace cogspeech::eval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Fold> folds_from_assignment(const std::vector<std::size_t>& fold_of, std::size_t k) {
    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    // Canonical order: by smallest test index.
    std::sort(folds.begin(), folds.end(), [](const Fold& a, const Fold& b) {
        if (a.test.empty() || b.test.empty()) return !a.test.empty() && b.test.empty();
        return a.test.front() < b.test.front();
    });
    return folds;
}

void shuffle(std::vector<std::size_t>& v, ml::Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[ml::uniform_index(rng, i)]);
}

MaybeValue mean_present(const std::vector<MaybeValue>& xs) {
    double s = 0;
    std::size_t n = 0;
    for (const auto& x : xs)
        if (x) {
            s += *x;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
}

std::string fmt(MaybeValue v) { return v ? features::format_double(*v) : "NA"; }

MaybeValue parse_maybe(const std::string& s) {
    if (s.empty() || s == "NA" || s == "nan") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError("bad numeric field '" + s + "'");
    }
}

double sq_dist_rows(const Matrix& X, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        const double d = X(a, c) - X(b, c);
        s += d * d;
    }
    return s;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return kNaN;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

// --- folds ------------------------------------------------------------------

std::vector<Fold> loso_folds(std::size_t n) {
    std::vector<std::size_t> fold_of(n);
    std::iota(fold_of.begin(), fold_of.end(), 0);
    return folds_from_assignment(fold_of, n);
}

std::vector<Fold> stratified_kfold(const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (k < 2 || k > n) throw ConfigError("k-fold needs 2 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    ml::Rng rng(seed);
    std::vector<std::size_t> fold_of(n);
    std::size_t next = 0;
    for (int cls : {1, 0}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == cls) members.push_back(i);
        shuffle(members, rng);
        for (auto i : members) fold_of[i] = next++ % k;
    }
    return folds_from_assignment(fold_of, k);
}

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) throw ConfigError("k-fold needs 2 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    ml::Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t p = 0; p < n; ++p) fold_of[order[p]] = p % k;
    return folds_from_assignment(fold_of, k);
}

std::string ProtocolSpec::name() const { return kind == Protocol::Loso ? "loso" : "kfold:" + std::to_string(k); }

ProtocolSpec ProtocolSpec::parse(std::string_view text) {
    const auto s = to_lower(trim(text));
    if (s == "loso") return {Protocol::Loso, 0};
    if (s == "kfold") return {Protocol::KFold, 10};
    if (s.rfind("kfold:", 0) == 0) {
        try {
            std::size_t used = 0;
            const auto k = std::stoul(s.substr(6), &used);
            if (used == s.size() - 6 && k >= 2) return {Protocol::KFold, k};
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("protocol must be loso or kfold:K, got '" + std::string(text) + "'");
}

// --- metrics ----------------------------------------------------------------

BinaryMetrics binary_metrics(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size() || truth.empty()) throw DataError("metric inputs must be nonempty and aligned");
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i] == 1) (truth[i] == 1 ? tp : fp) += 1;
        else (truth[i] == 1 ? fn : tn) += 1;
    }
    BinaryMetrics m;
    m.accuracy = (tp + tn) / static_cast<double>(truth.size());
    m.precision = safe_ratio(tp, tp + fp);
    m.recall = safe_ratio(tp, tp + fn);
    m.specificity = safe_ratio(tn, tn + fp);
    m.f1 = safe_ratio(2 * tp, 2 * tp + fp + fn);
    return m;
}

RegressionMetrics regression_metrics(const std::vector<double>& truth, const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty()) throw DataError("metric inputs must be nonempty and aligned");
    double se = 0, ae = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double r = pred[i] - truth[i];
        se += r * r;
        ae += std::abs(r);
    }
    const double n = static_cast<double>(truth.size());
    return {std::sqrt(se / n), ae / n};
}

std::vector<int> majority_vote(const std::vector<std::vector<int>>& sets) {
    if (sets.empty() || sets.size() % 2 == 0) throw ConfigError("majority vote needs an odd number of prediction sets");
    const std::size_t n = sets[0].size();
    for (const auto& s : sets)
        if (s.size() != n) throw DataError("prediction sets have different lengths");
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ones = 0;
        for (const auto& s : sets) ones += s[i] == 1;
        out[i] = 2 * ones > sets.size() ? 1 : 0;
    }
    return out;
}

// --- CV ---------------------------------------------------------------------

std::string_view task_name(Task t) { return t == Task::Classify ? "classify" : "regress"; }

Task task_from_name(std::string_view s) {
    if (s == "classify") return Task::Classify;
    if (s == "regress") return Task::Regress;
    throw ConfigError("task must be classify or regress, got '" + std::string(s) + "'");
}

std::vector<std::string> CvReport::metric_names(Task t) {
    if (t == Task::Classify) return {"accuracy", "precision", "recall", "specificity", "f1"};
    return {"rmse", "mae"};
}

MetricMap pooled_metrics(Task task, const std::vector<double>& truth, const std::vector<double>& pred) {
    MetricMap m;
    if (task == Task::Classify) {
        std::vector<int> t, p;
        for (double v : truth) t.push_back(static_cast<int>(std::lround(v)));
        for (double v : pred) p.push_back(static_cast<int>(std::lround(v)));
        const auto b = binary_metrics(t, p);
        m["accuracy"] = b.accuracy;
        m["precision"] = b.precision;
        m["recall"] = b.recall;
        m["specificity"] = b.specificity;
        m["f1"] = b.f1;
    } else {
        const auto r = regression_metrics(truth, pred);
        m["rmse"] = r.rmse;
        m["mae"] = r.mae;
    }
    return m;
}

void summarize(CvReport& report) {
    report.per_seed.clear();
    report.mean.clear();
    for (auto seed : report.seeds) {
        std::vector<double> t, p;
        for (const auto& r : report.predictions)
            if (r.seed == seed) {
                t.push_back(r.truth);
                p.push_back(r.prediction);
            }
        if (t.empty()) throw DataError("report has no predictions for seed " + std::to_string(seed));
        report.per_seed[seed] = pooled_metrics(report.task, t, p);
    }
    for (const auto& name : CvReport::metric_names(report.task)) {
        std::vector<MaybeValue> vals;
        for (const auto& [seed, m] : report.per_seed) vals.push_back(m.at(name));
        report.mean[name] = mean_present(vals);
    }
}

CvReport run_cv(const std::vector<std::string>& ids, const std::vector<double>& targets, Task task,
                const ProtocolSpec& protocol, const std::vector<std::uint64_t>& seeds, const FitPredict& fit_predict,
                const std::string& model_label) {
    const std::size_t n = ids.size();
    if (n < 2) throw DataError("cross-validation needs at least 2 samples");
    if (targets.size() != n) throw DataError("target count differs from sample count");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    CvReport report;
    report.protocol = protocol.name();
    report.model = model_label;
    report.task = task;
    report.seeds = seeds;
    std::vector<int> labels;
    if (task == Task::Classify)
        for (double t : targets) labels.push_back(static_cast<int>(std::lround(t)));
    for (auto seed : seeds) {
        std::vector<Fold> folds;
        if (protocol.kind == Protocol::Loso) folds = loso_folds(n);
        else if (task == Task::Classify) folds = stratified_kfold(labels, protocol.k, seed);
        else folds = kfold(n, protocol.k, seed);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const auto pred = fit_predict(folds[f].train, folds[f].test, seed);
            if (pred.size() != folds[f].test.size()) throw Error("model returned the wrong number of predictions");
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const auto row = folds[f].test[i];
                report.predictions.push_back({seed, f, ids[row], targets[row], pred[i]});
            }
        }
    }
    summarize(report);
    return report;
}

namespace {

std::vector<double> task_targets(const features::Dataset& data, Task task) {
    if (task == Task::Classify) {
        if (!data.has_labels()) throw DataError("classification needs labels for every row");
        const auto l = data.label_vector();
        return {l.begin(), l.end()};
    }
    if (!data.has_mmse()) throw DataError("regression needs MMSE targets for every row");
    return data.mmse_vector();
}

}  // namespace

CvReport cross_validate(const features::Dataset& data, const ml::ModelSpec& spec, Task task,
                        const ProtocolSpec& protocol, const std::vector<std::uint64_t>& seeds) {
    data.validate();
    if ((task == Task::Regress) != ml::is_regression(spec.kind))
        throw ConfigError("model " + std::string(ml::model_name(spec.kind)) + " does not fit task " +
                          std::string(task_name(task)));
    const auto targets = task_targets(data, task);
    FitPredict fp = [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, std::uint64_t seed) {
        ml::ModelSpec s = spec;
        s.seed = seed;
        std::vector<double> yt;
        for (auto i : train) yt.push_back(targets[i]);
        const auto pipe = ml::Pipeline::fit(data.X.select_rows(train), yt, s, data.feature_names);
        return pipe.predict(data.X.select_rows(test));
    };
    std::string label(ml::model_name(spec.kind));
    label += ":k=" + std::to_string(spec.k_features == 0 ? data.X.cols() : std::min(spec.k_features, data.X.cols()));
    if (spec.kind == ml::ModelKind::Ridge) label += ":alpha=" + features::format_double(spec.alpha);
    return run_cv(data.ids, targets, task, protocol, seeds, fp, label);
}

GridResult grid_search(const features::Dataset& data, const ml::ModelSpec& base, Task task,
                       const ProtocolSpec& protocol, const std::vector<std::uint64_t>& seeds,
                       const std::vector<std::size_t>& k_grid, const std::vector<double>& alpha_grid) {
    std::vector<std::size_t> ks;
    for (auto k : k_grid) {
        const auto kc = std::min(k, data.X.cols());
        if (kc >= 1 && std::find(ks.begin(), ks.end(), kc) == ks.end()) ks.push_back(kc);
    }
    if (ks.empty()) throw ConfigError("empty k grid");
    std::vector<double> alphas = base.kind == ml::ModelKind::Ridge ? alpha_grid : std::vector<double>{base.alpha};
    GridResult g;
    for (auto k : ks)
        for (double a : alphas) {
            ml::ModelSpec s = base;
            s.k_features = k;
            s.alpha = a;
            g.points.push_back({s, cross_validate(data, s, task, protocol, seeds)});
        }
    auto score = [&](const CvReport& r) {
        const auto v = r.mean.at(task == Task::Classify ? "accuracy" : "rmse");
        if (!v) return -std::numeric_limits<double>::infinity();
        return task == Task::Classify ? *v : -*v;
    };
    for (std::size_t i = 1; i < g.points.size(); ++i)
        if (score(g.points[i].report) > score(g.points[g.best].report)) g.best = i;
    return g;
}

// --- report files -------------------------------------------------------------

namespace {
const std::vector<std::string> kReportHeader = {"kind", "protocol", "model", "task", "seed", "fold",
                                                "id",   "y_true",   "y_pred", "metric", "value"};
}

std::string report_to_csv(const CvReport& r) {
    using features::csv_escape;
    std::ostringstream os;
    for (std::size_t i = 0; i < kReportHeader.size(); ++i) os << (i ? "," : "") << kReportHeader[i];
    os << '\n';
    const std::string prefix = csv_escape(r.protocol) + ',' + csv_escape(r.model) + ',' + std::string(task_name(r.task)) + ',';
    for (const auto& p : r.predictions)
        os << "prediction," << prefix << p.seed << ',' << p.fold << ',' << csv_escape(p.id) << ','
           << features::format_double(p.truth) << ',' << features::format_double(p.prediction) << ",,\n";
    const auto names = CvReport::metric_names(r.task);
    for (auto seed : r.seeds) {
        auto it = r.per_seed.find(seed);
        if (it == r.per_seed.end()) continue;
        for (const auto& n : names) os << "metric," << prefix << seed << ",,,,," << n << ',' << fmt(it->second.at(n)) << '\n';
    }
    for (const auto& n : names) os << "metric," << prefix << "mean,,,,," << n << ',' << fmt(r.mean.at(n)) << '\n';
    return os.str();
}

CvReport report_from_csv(std::string_view text) {
    const auto rows = features::parse_csv(text);
    if (rows.empty() || rows[0] != kReportHeader) throw DataError("report CSV header does not match the CvReport schema");
    CvReport r;
    bool first = true;
    auto parse_seed = [](const std::string& s) -> std::uint64_t {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw DataError("bad seed '" + s + "'");
    };
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != kReportHeader.size()) throw ParseError("report row has the wrong field count", i + 1);
        if (first) {
            r.protocol = row[1];
            ProtocolSpec::parse(r.protocol);
            r.model = row[2];
            r.task = task_from_name(row[3]);
            first = false;
        } else if (row[1] != r.protocol || row[2] != r.model || row[3] != task_name(r.task)) {
            throw ParseError("report mixes protocols, models or tasks", i + 1);
        }
        if (row[0] == "prediction") {
            PredictionRecord p;
            p.seed = parse_seed(row[4]);
            p.fold = static_cast<std::size_t>(parse_seed(row[5]));
            p.id = row[6];
            const auto t = parse_maybe(row[7]), y = parse_maybe(row[8]);
            if (!t || !y) throw ParseError("prediction row lacks y_true or y_pred", i + 1);
            p.truth = *t;
            p.prediction = *y;
            if (std::find(r.seeds.begin(), r.seeds.end(), p.seed) == r.seeds.end()) r.seeds.push_back(p.seed);
            r.predictions.push_back(std::move(p));
        } else if (row[0] == "metric") {
            const auto v = parse_maybe(row[10]);
            if (row[4] == "mean") {
                r.mean[row[9]] = v;
            } else {
                const auto seed = parse_seed(row[4]);
                r.per_seed[seed][row[9]] = v;
                if (std::find(r.seeds.begin(), r.seeds.end(), seed) == r.seeds.end()) r.seeds.push_back(seed);
            }
        } else {
            throw ParseError("unknown report row kind '" + row[0] + "'", i + 1);
        }
    }
    if (first) throw DataError("report has no rows");
    return r;
}

std::vector<std::string> validate_report(const CvReport& r, double tol) {
    std::vector<std::string> problems;
    ProtocolSpec proto;
    try {
        proto = ProtocolSpec::parse(r.protocol);
    } catch (const Error& e) {
        problems.push_back(e.what());
    }
    std::set<std::string> reference_ids;
    bool have_reference = false;
    for (auto seed : r.seeds) {
        std::map<std::string, int> seen;
        std::map<std::size_t, int> fold_sizes;
        std::vector<double> t, p;
        for (const auto& pr : r.predictions) {
            if (pr.seed != seed) continue;
            ++seen[pr.id];
            ++fold_sizes[pr.fold];
            t.push_back(pr.truth);
            p.push_back(pr.prediction);
            if (r.task == Task::Classify && ((pr.truth != 0 && pr.truth != 1) || (pr.prediction != 0 && pr.prediction != 1)))
                problems.push_back("seed " + std::to_string(seed) + ": non-binary label for " + pr.id);
            if (r.task == Task::Regress && (pr.prediction < ml::kMmseMin || pr.prediction > ml::kMmseMax))
                problems.push_back("seed " + std::to_string(seed) + ": prediction outside [0,30] for " + pr.id);
        }
        if (t.empty()) {
            problems.push_back("seed " + std::to_string(seed) + " has no predictions");
            continue;
        }
        std::set<std::string> ids;
        for (const auto& [id, c] : seen) {
            ids.insert(id);
            if (c != 1) problems.push_back("seed " + std::to_string(seed) + ": id " + id + " predicted " + std::to_string(c) + " times");
        }
        if (!have_reference) {
            reference_ids = ids;
            have_reference = true;
        } else if (ids != reference_ids) {
            problems.push_back("seed " + std::to_string(seed) + " covers a different id set");
        }
        if (proto.kind == Protocol::Loso) {
            for (const auto& [f, c] : fold_sizes)
                if (c != 1) problems.push_back("LOSO fold " + std::to_string(f) + " has " + std::to_string(c) + " test samples");
        } else if (fold_sizes.size() != proto.k) {
            problems.push_back("seed " + std::to_string(seed) + " has " + std::to_string(fold_sizes.size()) + " folds, expected " +
                               std::to_string(proto.k));
        }
        const auto expect = pooled_metrics(r.task, t, p);
        auto it = r.per_seed.find(seed);
        if (it == r.per_seed.end()) {
            problems.push_back("seed " + std::to_string(seed) + " lacks metric rows");
            continue;
        }
        for (const auto& [name, v] : expect) {
            auto m = it->second.find(name);
            if (m == it->second.end()) problems.push_back("seed " + std::to_string(seed) + " lacks metric " + name);
            else if (m->second.has_value() != v.has_value() || (v && std::abs(*v - *m->second) > tol))
                problems.push_back("seed " + std::to_string(seed) + " metric " + name + " is " + fmt(m->second) +
                                   ", recomputed " + fmt(v));
        }
    }
    for (const auto& name : CvReport::metric_names(r.task)) {
        std::vector<MaybeValue> vals;
        for (auto seed : r.seeds) {
            auto it = r.per_seed.find(seed);
            if (it != r.per_seed.end() && it->second.contains(name)) vals.push_back(it->second.at(name));
        }
        const auto expect = mean_present(vals);
        auto m = r.mean.find(name);
        if (m == r.mean.end()) problems.push_back("missing mean metric " + name);
        else if (m->second.has_value() != expect.has_value() || (expect && std::abs(*expect - *m->second) > tol))
            problems.push_back("mean metric " + name + " disagrees with the per-seed values");
    }
    return problems;
}

std::string report_table(const CvReport& r) {
    std::ostringstream os;
    os << "protocol " << r.protocol << "  model " << r.model << "  task " << task_name(r.task) << "  seeds";
    for (auto s : r.seeds) os << ' ' << s;
    os << '\n';
    os << std::left << std::setw(14) << "metric";
    for (auto s : r.seeds) os << std::setw(12) << ("seed " + std::to_string(s));
    os << std::setw(12) << "mean" << '\n';
    for (const auto& name : CvReport::metric_names(r.task)) {
        os << std::setw(14) << name;
        for (auto s : r.seeds) {
            const auto v = r.per_seed.at(s).at(name);
            std::ostringstream cell;
            if (v) cell << std::fixed << std::setprecision(4) << *v;
            else cell << "NA";
            os << std::setw(12) << cell.str();
        }
        std::ostringstream cell;
        if (r.mean.at(name)) cell << std::fixed << std::setprecision(4) << *r.mean.at(name);
        else cell << "NA";
        os << std::setw(12) << cell.str() << '\n';
    }
    return os.str();
}

// --- statistics -------------------------------------------------------------

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

namespace {

double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16, kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) throw DataError("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
    if (std::isnan(t) || !(df > 0)) return kNaN;
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    TTest out;
    if (a.size() < 2 || b.size() < 2) return out;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean_of(a), mb = mean_of(b);
    double va = 0, vb = 0;
    for (double x : a) va += (x - ma) * (x - ma);
    for (double x : b) vb += (x - mb) * (x - mb);
    va /= na - 1;
    vb /= nb - 1;
    const double sa = va / na, sb = vb / nb;
    const double se2 = sa + sb;
    if (se2 == 0.0) return out;
    out.t = (ma - mb) / std::sqrt(se2);
    out.df = se2 * se2 / (sa * sa / (na - 1) + sb * sb / (nb - 1));
    out.p = t_two_sided_p(*out.t, *out.df);
    return out;
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
    Correlation c;
    if (x.size() != y.size()) throw DataError("spearman inputs differ in length");
    if (x.size() < 3) return c;
    const double r = pearson(average_ranks(x), average_ranks(y));
    if (std::isnan(r)) return c;
    c.rho = r;
    const double n = static_cast<double>(x.size());
    if (std::abs(r) >= 1.0) c.p = 0.0;
    else c.p = t_two_sided_p(r * std::sqrt((n - 2.0) / (1.0 - r * r)), n - 2.0);
    return c;
}

KruskalWallis kruskal_wallis(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DataError("Kruskal-Wallis needs two nonempty samples");
    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    const auto ranks = average_ranks(all);
    const double N = static_cast<double>(all.size());
    double ra = 0, rb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ra += ranks[i];
    for (std::size_t i = a.size(); i < all.size(); ++i) rb += ranks[i];
    double h = 12.0 / (N * (N + 1.0)) * (ra * ra / static_cast<double>(a.size()) + rb * rb / static_cast<double>(b.size())) -
               3.0 * (N + 1.0);
    // Tie correction.
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double corr = 1.0 - ties / (N * N * N - N);
    KruskalWallis kw;
    if (corr <= 0.0) return kw;
    kw.H = std::max(0.0, h / corr);
    kw.p = std::erfc(std::sqrt(kw.H / 2.0));
    return kw;
}

std::vector<std::size_t> StatsReport::significant_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].significant) out.push_back(i);
    return out;
}

StatsReport feature_differentiation(const features::Dataset& data, std::optional<std::size_t> n_tests) {
    data.validate();
    const auto labels = data.label_vector();
    if (std::count(labels.begin(), labels.end(), 1) == 0 || std::count(labels.begin(), labels.end(), 0) == 0)
        throw DataError("feature differentiation needs both classes");
    StatsReport rep;
    rep.n_tests = n_tests.value_or(data.X.cols());
    if (rep.n_tests == 0) throw ConfigError("number of tests must be positive");
    rep.threshold = bonferroni_threshold(rep.n_tests);
    const bool with_mmse = data.has_mmse();
    for (std::size_t c = 0; c < data.X.cols(); ++c) {
        FeatureStat fs;
        fs.name = data.feature_names[c];
        std::vector<double> ad, non, x, y;
        for (std::size_t r = 0; r < data.size(); ++r) {
            const double v = data.X(r, c);
            if (std::isnan(v)) continue;
            (labels[r] == 1 ? ad : non).push_back(v);
            if (with_mmse) {
                x.push_back(v);
                y.push_back(*data.mmse[r]);
            }
        }
        if (!ad.empty()) fs.mean_ad = mean_of(ad);
        if (!non.empty()) fs.mean_nonad = mean_of(non);
        fs.test = welch_t_test(ad, non);
        fs.significant = fs.test.p && *fs.test.p < rep.threshold;
        if (with_mmse) {
            fs.mmse = spearman(x, y);
            fs.mmse_significant = fs.mmse.p && *fs.mmse.p < rep.threshold;
        }
        rep.features.push_back(std::move(fs));
    }
    return rep;
}

std::vector<double> loso_ridge_weights(const features::Dataset& data, double alpha) {
    const auto y = data.mmse_vector();
    const std::size_t d = data.X.cols();
    std::vector<double> sum(d, 0.0);
    const auto folds = loso_folds(data.size());
    ml::ModelSpec spec;
    spec.kind = ml::ModelKind::Ridge;
    spec.alpha = alpha;
    for (const auto& f : folds) {
        std::vector<double> yt;
        for (auto i : f.train) yt.push_back(y[i]);
        const auto p = ml::Pipeline::fit(data.X.select_rows(f.train), yt, spec, data.feature_names);
        const auto* lm = p.linear();
        for (std::size_t j = 0; j < p.selected().size(); ++j) sum[p.selected()[j]] += lm->weights[j];
    }
    for (auto& v : sum) v /= static_cast<double>(folds.size());
    return sum;
}

std::string stats_to_csv(const StatsReport& r) {
    // Rank flags for the five highest and five lowest ridge weights.
    std::vector<std::size_t> with_w;
    for (std::size_t i = 0; i < r.features.size(); ++i)
        if (r.features[i].ridge_weight) with_w.push_back(i);
    std::stable_sort(with_w.begin(), with_w.end(),
                     [&](std::size_t a, std::size_t b) { return *r.features[a].ridge_weight > *r.features[b].ridge_weight; });
    std::map<std::size_t, std::string> flag;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, with_w.size()); ++i) flag[with_w[i]] = "top5";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, with_w.size()); ++i)
        if (!flag.contains(with_w[with_w.size() - 1 - i])) flag[with_w[with_w.size() - 1 - i]] = "bottom5";

    std::ostringstream os;
    os << "feature,mean_ad,mean_nonad,t,df,p,significant,spearman_rho,spearman_p,spearman_significant,ridge_weight,"
          "weight_rank,threshold,n_tests\n";
    for (std::size_t i = 0; i < r.features.size(); ++i) {
        const auto& f = r.features[i];
        os << features::csv_escape(f.name) << ',' << fmt(f.mean_ad) << ',' << fmt(f.mean_nonad) << ',' << fmt(f.test.t) << ','
           << fmt(f.test.df) << ',' << fmt(f.test.p) << ',' << (f.significant ? 1 : 0) << ',' << fmt(f.mmse.rho) << ','
           << fmt(f.mmse.p) << ',' << (f.mmse_significant ? 1 : 0) << ',' << fmt(f.ridge_weight) << ','
           << (flag.contains(i) ? flag[i] : "") << ',' << features::format_double(r.threshold) << ',' << r.n_tests << '\n';
    }
    return os.str();
}

// --- t-SNE ------------------------------------------------------------------

double perplexity_of_row(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return std::exp(h);
}

Matrix conditional_affinities(const Matrix& X, double perplexity, double tol) {
    const std::size_t n = X.rows();
    if (!(perplexity > 0) || static_cast<double>(n) < 3.0 * perplexity)
        throw ConfigError("perplexity " + features::format_double(perplexity) + " is too large for " + std::to_string(n) +
                          " points (need n >= 3 * perplexity)");
    Matrix D(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) D(i, j) = D(j, i) = sq_dist_rows(X, i, j);
    Matrix P(n, n);
    const double target = std::log(perplexity);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0, lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        // Shift by the nearest distance for numerical range.
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dmin = std::min(dmin, D(i, j));
        for (int it = 0; it < 200; ++it) {
            double sum = 0.0, wsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = j == i ? 0.0 : std::exp(-beta * (D(i, j) - dmin));
                sum += row[j];
                wsum += row[j] * (D(i, j) - dmin);
            }
            const double H = std::log(sum) + beta * wsum / sum;
            for (std::size_t j = 0; j < n; ++j) P(i, j) = row[j] / sum;
            const double diff = H - target;
            if (std::abs(diff) < tol) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
            }
        }
    }
    return P;
}

TsneResult tsne_embed(const Matrix& X, const TsneParams& p) {
    const std::size_t n = X.rows();
    const Matrix C = conditional_affinities(X, p.perplexity, p.perplexity_tol);
    Matrix P(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) P(i, j) = std::max((C(i, j) + C(j, i)) / (2.0 * static_cast<double>(n)), 1e-12);

    ml::Rng rng(p.seed);
    TsneResult res;
    res.Y = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            const double u1 = std::max(ml::uniform01(rng), 1e-300), u2 = ml::uniform01(rng);
            res.Y(i, k) = 1e-4 * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }
    const double lr = p.learning_rate > 0.0
                          ? p.learning_rate
                          : std::max(static_cast<double>(n) / std::max(p.early_exaggeration, 1.0) / 4.0, 50.0);
    Matrix update(n, 2), gains(n, 2, 1.0), num(n, n), grad(n, 2);
    for (std::size_t it = 0; it < p.iterations; ++it) {
        const double exag = it < p.exaggeration_iters ? p.early_exaggeration : 1.0;
        const double momentum = it < p.momentum_switch ? p.initial_momentum : p.final_momentum;
        double zsum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = res.Y(i, 0) - res.Y(j, 0), dy = res.Y(i, 1) - res.Y(j, 1);
                num(i, j) = num(j, i) = 1.0 / (1.0 + dx * dx + dy * dy);
                zsum += 2.0 * num(i, j);
            }
        for (std::size_t i = 0; i < n; ++i) {
            double g0 = 0, g1 = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double m = (exag * P(i, j) - num(i, j) / zsum) * num(i, j);
                g0 += m * (res.Y(i, 0) - res.Y(j, 0));
                g1 += m * (res.Y(i, 1) - res.Y(j, 1));
            }
            grad(i, 0) = 4.0 * g0;
            grad(i, 1) = 4.0 * g1;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 2; ++k) {
                const bool same = (grad(i, k) > 0) == (update(i, k) > 0);
                gains(i, k) = same ? std::max(gains(i, k) * 0.8, 0.01) : gains(i, k) + 0.2;
                update(i, k) = momentum * update(i, k) - lr * gains(i, k) * grad(i, k);
                res.Y(i, k) += update(i, k);
            }
        for (std::size_t k = 0; k < 2; ++k) {
            double m = 0;
            for (std::size_t i = 0; i < n; ++i) m += res.Y(i, k);
            m /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) res.Y(i, k) -= m;
        }
        // KL at the updated positions.
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = res.Y(i, 0) - res.Y(j, 0), dy = res.Y(i, 1) - res.Y(j, 1);
                num(i, j) = num(j, i) = 1.0 / (1.0 + dx * dx + dy * dy);
                z += 2.0 * num(i, j);
            }
        double kl = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) kl += P(i, j) * std::log(P(i, j) / std::max(num(i, j) / z, 1e-300));
        res.kl_history.push_back(kl);
    }
    return res;
}

std::string tsne_to_csv(const Matrix& Y, const std::vector<std::string>& ids, const std::vector<std::optional<int>>& labels) {
    std::ostringstream os;
    os << "id,label,x,y\n";
    for (std::size_t i = 0; i < Y.rows(); ++i)
        os << features::csv_escape(i < ids.size() ? ids[i] : std::to_string(i)) << ','
           << (i < labels.size() && labels[i] ? std::to_string(*labels[i]) : "NA") << ',' << features::format_double(Y(i, 0))
           << ',' << features::format_double(Y(i, 1)) << '\n';
    return os.str();
}

std::string tsne_svg(const Matrix& Y, const std::vector<std::optional<int>>& labels) {
    constexpr double size = 480.0, margin = 30.0;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (Y.rows() > 0) {
        x0 = x1 = Y(0, 0);
        y0 = y1 = Y(0, 1);
        for (std::size_t i = 0; i < Y.rows(); ++i) {
            x0 = std::min(x0, Y(i, 0));
            x1 = std::max(x1, Y(i, 0));
            y0 = std::min(y0, Y(i, 1));
            y1 = std::max(y1, Y(i, 1));
        }
    }
    const double sx = (size - 2 * margin) / std::max(x1 - x0, 1e-12), sy = (size - 2 * margin) / std::max(y1 - y0, 1e-12);
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 " << size
       << ' ' << size << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < Y.rows(); ++i) {
        const auto l = i < labels.size() ? labels[i] : std::nullopt;
        const char* color = !l ? "#7f7f7f" : (*l == 1 ? "#d62728" : "#1f77b4");
        os << "<circle cx=\"" << margin + (Y(i, 0) - x0) * sx << "\" cy=\"" << size - margin - (Y(i, 1) - y0) * sy
           << "\" r=\"5\" fill=\"" << color << "\"/>\n";
    }
    os << "<text x=\"10\" y=\"20\" font-size=\"12\" fill=\"#d62728\">AD</text>\n";
    os << "<text x=\"40\" y=\"20\" font-size=\"12\" fill=\"#1f77b4\">non-AD</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace cogspeech::eval
