#include "cogspeech/ml.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cogspeech::ml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_binary(const std::vector<int>& y, std::size_t rows) {
    if (y.size() != rows) throw DataError("label count differs from row count");
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
        has0 |= v == 0;
        has1 |= v == 1;
    }
    if (!has0 || !has1) throw DataError("both classes must be present");
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double gini(double n1, double n) {
    if (n <= 0) return 0.0;
    const double p = n1 / n;
    return 2.0 * p * (1.0 - p);
}

}  // namespace

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) return 0;
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do r = rng();
    while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// --- selection ----------------------------------------------------------

std::vector<double> anova_f_classif(const Matrix& X, const std::vector<int>& y) {
    check_binary(y, X.rows());
    const double n = static_cast<double>(X.rows());
    std::vector<double> out(X.cols(), 0.0);
    for (std::size_t c = 0; c < X.cols(); ++c) {
        double sum[2] = {0, 0}, cnt[2] = {0, 0};
        bool constant = true;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            sum[y[r]] += X(r, c);
            cnt[y[r]] += 1;
            constant &= X(r, c) == X(0, c);
        }
        if (constant) continue;
        const double m[2] = {sum[0] / cnt[0], sum[1] / cnt[1]};
        const double grand = (sum[0] + sum[1]) / n;
        double ssw = 0.0;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            const double d = X(r, c) - m[y[r]];
            ssw += d * d;
        }
        const double ssb = cnt[0] * (m[0] - grand) * (m[0] - grand) + cnt[1] * (m[1] - grand) * (m[1] - grand);
        if (ssw == 0.0) out[c] = ssb > 0.0 ? kInf : 0.0;
        else out[c] = ssb / (ssw / (n - 2.0));
    }
    return out;
}

std::vector<double> f_regression_scores(const Matrix& X, const std::vector<double>& y) {
    if (y.size() != X.rows()) throw DataError("target count differs from row count");
    if (X.rows() < 3) throw DataError("f_regression needs at least 3 samples");
    const double n = static_cast<double>(X.rows());
    const double ym = mean_of(y);
    double syy = 0.0;
    for (double v : y) syy += (v - ym) * (v - ym);
    std::vector<double> out(X.cols(), 0.0);
    if (syy == 0.0) return out;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        double xm = 0.0;
        for (std::size_t r = 0; r < X.rows(); ++r) xm += X(r, c);
        xm /= n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            const double dx = X(r, c) - xm;
            sxx += dx * dx;
            sxy += dx * (y[r] - ym);
        }
        if (sxx == 0.0) continue;
        const double r = sxy / std::sqrt(sxx * syy);
        const double r2 = r * r;
        out[c] = r2 >= 1.0 ? kInf : r2 / (1.0 - r2) * (n - 2.0);
    }
    return out;
}

std::vector<std::size_t> select_top_k(const std::vector<double>& scores, std::size_t k) {
    if (k < 1 || k > scores.size())
        throw ConfigError("k must lie in [1, " + std::to_string(scores.size()) + "], got " + std::to_string(k));
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto key = [&](std::size_t i) { return std::isnan(scores[i]) ? -kInf : scores[i]; };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
    idx.resize(k);
    return idx;
}

Standardizer Standardizer::fit(const Matrix& X) {
    Standardizer s;
    s.mean.assign(X.cols(), 0.0);
    s.scale.assign(X.cols(), 1.0);
    if (X.rows() == 0) return s;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        const auto col = X.column(c);
        const auto m = compute_moments(col);
        s.mean[c] = m.mean;
        const double sd = std::sqrt(m.variance);
        s.scale[c] = sd > 1e-12 * std::max(1.0, std::abs(m.mean)) ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
    if (X.cols() != mean.size()) throw DataError("standardizer width disagrees with matrix");
    Matrix out = X;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - mean[c]) / scale[c];
    return out;
}

// --- naive Bayes --------------------------------------------------------

GaussianNB GaussianNB::fit(const Matrix& X, const std::vector<int>& y, double smoothing) {
    check_binary(y, X.rows());
    GaussianNB nb;
    const std::size_t d = X.cols();
    double max_var = 0.0;
    for (std::size_t c = 0; c < d; ++c) max_var = std::max(max_var, compute_moments(X.column(c)).variance);
    nb.epsilon = smoothing * max_var;
    for (int k = 0; k < 2; ++k) {
        nb.mean[k].assign(d, 0.0);
        nb.var[k].assign(d, 0.0);
        std::vector<double> vals;
        for (std::size_t c = 0; c < d; ++c) {
            vals.clear();
            for (std::size_t r = 0; r < X.rows(); ++r)
                if (y[r] == k) vals.push_back(X(r, c));
            const auto m = compute_moments(vals);
            nb.mean[k][c] = m.mean;
            nb.var[k][c] = m.variance + nb.epsilon;
            if (nb.var[k][c] <= 0.0) nb.var[k][c] = std::numeric_limits<double>::min();
        }
    }
    return nb;
}

Matrix GaussianNB::predict_proba(const Matrix& X) const {
    Matrix out(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double lj[2];
        for (int k = 0; k < 2; ++k) {
            double s = std::log(prior[k]);
            for (std::size_t c = 0; c < X.cols(); ++c) {
                const double d = X(r, c) - mean[k][c];
                s -= 0.5 * (std::log(2.0 * std::numbers::pi * var[k][c]) + d * d / var[k][c]);
            }
            lj[k] = s;
        }
        const double mx = std::max(lj[0], lj[1]);
        const double e0 = std::exp(lj[0] - mx), e1 = std::exp(lj[1] - mx);
        out(r, 0) = e0 / (e0 + e1);
        out(r, 1) = e1 / (e0 + e1);
    }
    return out;
}

std::vector<int> GaussianNB::predict(const Matrix& X) const {
    const auto p = predict_proba(X);
    std::vector<int> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = p(r, 1) > p(r, 0) ? 1 : 0;
    return out;
}

// --- SVM ------------------------------------------------------------------

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    return std::exp(-gamma * sq_dist(a, b));
}

double svm_dual_objective(const Matrix& X, const std::vector<int>& y, const std::vector<double>& alpha, double gamma) {
    const std::size_t n = X.rows();
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        lin += alpha[i];
        const double yi = y[i] == 1 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (alpha[j] == 0.0) continue;
            const double yj = y[j] == 1 ? 1.0 : -1.0;
            quad += alpha[i] * alpha[j] * yi * yj * rbf_kernel(X.row(i), X.row(j), gamma);
        }
    }
    return 0.5 * quad - lin;
}

double SvmModel::decision(std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < support.rows(); ++i) s += coef[i] * rbf_kernel(support.row(i), x, gamma);
    return s;
}

std::vector<double> SvmModel::decision_function(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = decision(X.row(r));
    return out;
}

std::vector<int> SvmModel::predict(const Matrix& X) const {
    std::vector<int> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = decision(X.row(r)) > 0.0 ? 1 : 0;
    return out;
}

SvmModel fit_svm_rbf(const Matrix& X, const std::vector<int>& labels, const SvmParams& p) {
    check_binary(labels, X.rows());
    if (!(p.C > 0.0) || !(p.gamma > 0.0)) throw ConfigError("SVM needs C > 0 and gamma > 0");
    const std::size_t n = X.rows();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;
    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) K(i, j) = K(j, i) = rbf_kernel(X.row(i), X.row(j), p.gamma);

    const double C = p.C;
    constexpr double tau = 1e-12;
    std::vector<double> a(n, 0.0), G(n, -1.0);
    auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < C) || (y[t] < 0 && a[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < C); };

    SvmModel model;
    std::size_t iter = 0;
    double gap = kInf;
    for (;;) {
        std::size_t i = n, j = n;
        double gmax = -kInf, gmin = kInf;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * G[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        gap = gmax - gmin;
        if (i == n || j == n || gap < p.tol) break;
        if (iter >= p.max_iter)
            throw ConvergenceError("SMO did not converge after " + std::to_string(iter) + " iterations (KKT gap " +
                                   std::to_string(gap) + ", tolerance " + std::to_string(p.tol) + ")");
        ++iter;

        const double old_i = a[i], old_j = a[j];
        const double Qij = y[i] * y[j] * K(i, j);
        if (y[i] != y[j]) {
            double quad = K(i, i) + K(j, j) + 2.0 * Qij;
            if (quad <= 0) quad = tau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) {
                    a[j] = 0;
                    a[i] = diff;
                }
            } else if (a[i] < 0) {
                a[i] = 0;
                a[j] = -diff;
            }
            if (diff > 0) {
                if (a[i] > C) {
                    a[i] = C;
                    a[j] = C - diff;
                }
            } else if (a[j] > C) {
                a[j] = C;
                a[i] = C + diff;
            }
        } else {
            double quad = K(i, i) + K(j, j) - 2.0 * Qij;
            if (quad <= 0) quad = tau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) {
                    a[i] = C;
                    a[j] = sum - C;
                }
                if (a[j] > C) {
                    a[j] = C;
                    a[i] = sum - C;
                }
            } else {
                if (a[j] < 0) {
                    a[j] = 0;
                    a[i] = sum;
                }
                if (a[i] < 0) {
                    a[i] = 0;
                    a[j] = sum;
                }
            }
        }
        const double di = a[i] - old_i, dj = a[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) G[t] += y[t] * (y[i] * K(t, i) * di + y[j] * K(t, j) * dj);
    }

    // Offset from free vectors, else the midpoint of the feasible interval.
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yG = y[t] * G[t];
        if (a[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else if (a[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else {
            sum_free += yG;
            ++n_free;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    model.gamma = p.gamma;
    model.bias = -rho;
    model.alpha = a;
    model.iterations = iter;
    model.final_gap = gap;
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t)
        if (a[t] > 0) sv.push_back(t);
    model.support = X.select_rows(sv);
    for (auto t : sv) model.coef.push_back(a[t] * y[t]);
    return model;
}

// --- random forest --------------------------------------------------------

double DecisionTree::predict_p1(std::span<const double> x) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0)
        node = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[node].feature)] <= nodes[node].threshold
                                            ? nodes[node].left
                                            : nodes[node].right);
    return nodes[node].p1;
}

DecisionTree fit_tree(const Matrix& X, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                      const ForestParams& p, Rng& rng) {
    const std::size_t d = X.cols();
    const std::size_t max_features =
        p.max_features == 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))))
                            : std::min(p.max_features, d);
    const std::size_t min_leaf = std::max<std::size_t>(1, p.min_leaf);
    DecisionTree tree;
    struct Task {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Task> stack;
    tree.nodes.push_back({});
    stack.push_back({0, rows});
    std::vector<std::size_t> order, features(d);
    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();
        const auto& r = task.rows;
        const double n = static_cast<double>(r.size());
        double n1 = 0;
        for (auto i : r) n1 += y[i];
        tree.nodes[task.node].p1 = n > 0 ? n1 / n : 0.0;
        tree.nodes[task.node].samples = r.size();
        const double parent = gini(n1, n);
        if (r.size() < p.min_split || parent == 0.0 || r.size() < 2 * min_leaf) continue;

        std::iota(features.begin(), features.end(), 0);
        double best_imp = kInf, best_thr = 0.0;
        int best_f = -1;
        std::size_t visited = 0;
        for (std::size_t k = 0; k < d && visited < max_features; ++k) {
            const std::size_t pick = k + uniform_index(rng, d - k);
            std::swap(features[k], features[pick]);
            const std::size_t f = features[k];
            order = r;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X(a, f) < X(b, f) || (X(a, f) == X(b, f) && a < b);
            });
            if (X(order.front(), f) == X(order.back(), f)) continue;  // constant here; draw another
            ++visited;
            double left1 = 0;
            for (std::size_t s = 0; s + 1 < order.size(); ++s) {
                left1 += y[order[s]];
                const std::size_t nl = s + 1, nr = order.size() - nl;
                if (X(order[s], f) == X(order[s + 1], f) || nl < min_leaf || nr < min_leaf) continue;
                const double imp = (static_cast<double>(nl) * gini(left1, static_cast<double>(nl)) +
                                    static_cast<double>(nr) * gini(n1 - left1, static_cast<double>(nr))) /
                                   n;
                if (imp < best_imp) {
                    best_imp = imp;
                    best_f = static_cast<int>(f);
                    best_thr = 0.5 * (X(order[s], f) + X(order[s + 1], f));
                    if (best_thr == X(order[s + 1], f)) best_thr = X(order[s], f);
                }
            }
        }
        if (best_f < 0) continue;
        std::vector<std::size_t> lrows, rrows;
        for (auto i : r) (X(i, static_cast<std::size_t>(best_f)) <= best_thr ? lrows : rrows).push_back(i);
        const auto left = tree.nodes.size();
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        tree.nodes[task.node].feature = best_f;
        tree.nodes[task.node].threshold = best_thr;
        tree.nodes[task.node].left = static_cast<int>(left);
        tree.nodes[task.node].right = static_cast<int>(left + 1);
        stack.push_back({left + 1, std::move(rrows)});
        stack.push_back({left, std::move(lrows)});
    }
    return tree;
}

RandomForest fit_random_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& p, std::uint64_t seed) {
    if (X.rows() < 2) throw DataError("random forest needs at least 2 samples");
    if (y.size() != X.rows()) throw DataError("label count differs from row count");
    if (p.n_trees == 0) throw ConfigError("random forest needs at least one tree");
    const std::size_t n = X.rows();
    RandomForest forest;
    std::vector<int> oob_votes(n, 0), oob_count(n, 0);
    for (std::size_t t = 0; t < p.n_trees; ++t) {
        Rng rng(derive_seed(seed, t));
        std::vector<std::size_t> rows(n);
        std::vector<char> in_bag(n, 0);
        if (p.bootstrap) {
            for (auto& r : rows) {
                r = uniform_index(rng, n);
                in_bag[r] = 1;
            }
        } else {
            std::iota(rows.begin(), rows.end(), 0);
            std::fill(in_bag.begin(), in_bag.end(), 1);
        }
        forest.trees.push_back(fit_tree(X, y, rows, p, rng));
        for (std::size_t i = 0; i < n; ++i)
            if (!in_bag[i]) {
                oob_votes[i] += forest.trees.back().predict_p1(X.row(i)) > 0.5 ? 1 : 0;
                ++oob_count[i];
            }
    }
    forest.oob_predictions.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        if (oob_count[i] > 0) forest.oob_predictions[i] = 2 * oob_votes[i] > oob_count[i] ? 1 : 0;
    return forest;
}

std::vector<double> RandomForest::vote_fraction(const Matrix& X) const {
    std::vector<double> out(X.rows(), 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double votes = 0;
        for (const auto& t : trees) votes += t.predict_p1(X.row(r)) > 0.5 ? 1 : 0;
        out[r] = votes / static_cast<double>(trees.size());
    }
    return out;
}

std::vector<int> RandomForest::predict(const Matrix& X) const {
    const auto v = vote_fraction(X);
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.5) {
            out[i] = v[i] > 0.5 ? 1 : 0;
            continue;
        }
        // Tied vote: fall back to mean leaf probability.
        double s = 0;
        for (const auto& t : trees) s += t.predict_p1(X.row(i));
        out[i] = s / static_cast<double>(trees.size()) > 0.5 ? 1 : 0;
    }
    return out;
}

// --- MLP ------------------------------------------------------------------

Mlp Mlp::init(std::size_t inputs, const std::vector<std::size_t>& hidden, Rng& rng) {
    Mlp m;
    m.sizes.push_back(inputs);
    for (auto h : hidden) m.sizes.push_back(h);
    m.sizes.push_back(2);
    for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
        const std::size_t in = m.sizes[l], out = m.sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(in, 1)));
        for (std::size_t k = 0; k < in * out; ++k) m.params.push_back((2.0 * uniform01(rng) - 1.0) * bound);
        for (std::size_t k = 0; k < out; ++k) m.params.push_back(0.0);
    }
    return m;
}

std::size_t Mlp::layer_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += sizes[l] * sizes[l + 1] + sizes[l + 1];
    return off;
}

namespace {

// Activations per layer for one sample; the last entry holds softmax output.
std::vector<std::vector<double>> mlp_forward(const Mlp& m, std::span<const double> x) {
    const std::size_t L = m.sizes.size() - 1;
    std::vector<std::vector<double>> acts;
    acts.emplace_back(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = m.sizes[l], out = m.sizes[l + 1];
        const double* W = m.params.data() + off;
        const double* b = W + in * out;
        std::vector<double> z(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            for (std::size_t i = 0; i < in; ++i) s += W[o * in + i] * acts.back()[i];
            z[o] = s;
        }
        if (l + 1 < L) {
            for (auto& v : z) v = std::max(0.0, v);
        } else {
            const double mx = *std::max_element(z.begin(), z.end());
            double tot = 0;
            for (auto& v : z) tot += (v = std::exp(v - mx));
            for (auto& v : z) v /= tot;
        }
        acts.push_back(std::move(z));
        off += in * out + out;
    }
    return acts;
}

}  // namespace

Matrix Mlp::predict_proba(const Matrix& X) const {
    Matrix out(X.rows(), 2);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto acts = mlp_forward(*this, X.row(r));
        out(r, 0) = acts.back()[0];
        out(r, 1) = acts.back()[1];
    }
    return out;
}

std::vector<int> Mlp::predict(const Matrix& X) const {
    const auto p = predict_proba(X);
    std::vector<int> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = p(r, 1) > p(r, 0) ? 1 : 0;
    return out;
}

double Mlp::loss(const Matrix& X, const std::vector<int>& y) const {
    double s = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto acts = mlp_forward(*this, X.row(r));
        s -= std::log(std::max(acts.back()[static_cast<std::size_t>(y[r])], 1e-300));
    }
    return s / static_cast<double>(X.rows());
}

std::vector<double> Mlp::gradient(const Matrix& X, const std::vector<int>& y) const {
    const std::size_t L = sizes.size() - 1;
    std::vector<double> grad(params.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto acts = mlp_forward(*this, X.row(r));
        std::vector<double> delta = acts.back();
        delta[static_cast<std::size_t>(y[r])] -= 1.0;
        for (std::size_t l = L; l-- > 0;) {
            const std::size_t in = sizes[l], out = sizes[l + 1];
            const std::size_t off = layer_offset(l);
            const double* W = params.data() + off;
            double* gW = grad.data() + off;
            double* gb = gW + in * out;
            const auto& prev = acts[l];
            for (std::size_t o = 0; o < out; ++o) {
                gb[o] += delta[o] * inv_n;
                for (std::size_t i = 0; i < in; ++i) gW[o * in + i] += delta[o] * prev[i] * inv_n;
            }
            if (l == 0) break;
            std::vector<double> next(in, 0.0);
            for (std::size_t i = 0; i < in; ++i) {
                if (prev[i] <= 0.0) continue;  // ReLU gate
                double s = 0.0;
                for (std::size_t o = 0; o < out; ++o) s += W[o * in + i] * delta[o];
                next[i] = s;
            }
            delta = std::move(next);
        }
    }
    return grad;
}

Mlp fit_mlp(const Matrix& X, const std::vector<int>& y, const MlpParams& p, std::uint64_t seed) {
    check_binary(y, X.rows());
    Rng rng(seed);
    Mlp m = Mlp::init(X.cols(), p.hidden, rng);
    std::vector<double> mom(m.params.size(), 0.0), vel(m.params.size(), 0.0);
    double b1t = 1.0, b2t = 1.0;
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        const auto g = m.gradient(X, y);
        b1t *= p.beta1;
        b2t *= p.beta2;
        for (std::size_t k = 0; k < m.params.size(); ++k) {
            mom[k] = p.beta1 * mom[k] + (1.0 - p.beta1) * g[k];
            vel[k] = p.beta2 * vel[k] + (1.0 - p.beta2) * g[k] * g[k];
            const double mh = mom[k] / (1.0 - b1t), vh = vel[k] / (1.0 - b2t);
            m.params[k] -= p.learning_rate * mh / (std::sqrt(vh) + p.epsilon);
        }
        const double l = m.loss(X, y);
        if (!std::isfinite(l))
            throw ConvergenceError("MLP loss became non-finite at epoch " + std::to_string(epoch + 1));
        m.loss_history.push_back(l);
    }
    return m;
}

// --- regression -----------------------------------------------------------

double clip_mmse(double v) { return std::clamp(v, kMmseMin, kMmseMax); }

std::vector<double> LinearModel::predict_raw(const Matrix& X) const {
    if (X.cols() != weights.size()) throw DataError("linear model width disagrees with matrix");
    std::vector<double> out(X.rows(), intercept);
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < X.cols(); ++c) out[r] += weights[c] * X(r, c);
    return out;
}

std::vector<double> LinearModel::predict_clipped(const Matrix& X) const {
    auto out = predict_raw(X);
    for (auto& v : out) v = clip_mmse(v);
    return out;
}

std::vector<double> cholesky_solve(const Matrix& A, const std::vector<double>& b) {
    const std::size_t n = A.rows();
    Matrix L(n, n);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(A(i, i)));
    const double tol = 1e-12 * std::max(max_diag, 1e-300);
    for (std::size_t j = 0; j < n; ++j) {
        double s = A(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
        if (!(s > tol)) throw DataError("matrix is singular or not positive definite");
        L(j, j) = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = A(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= L(i, k) * L(j, k);
            L(i, j) = t / L(j, j);
        }
    }
    std::vector<double> z(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * z[k];
        z[i] = s / L(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
        x[i] = s / L(i, i);
    }
    return x;
}

LinearModel fit_ridge(const Matrix& X, const std::vector<double>& y, double alpha) {
    if (y.size() != X.rows()) throw DataError("target count differs from row count");
    if (X.rows() == 0) throw DataError("regression needs at least one sample");
    if (alpha < 0.0) throw ConfigError("ridge alpha must be non-negative");
    const std::size_t n = X.rows(), d = X.cols();
    std::vector<double> xm(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) xm[c] += X(r, c);
    for (auto& v : xm) v /= static_cast<double>(n);
    const double ym = mean_of(y);
    Matrix G(d, d);
    std::vector<double> rhs(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t a = 0; a < d; ++a) {
            const double xa = X(r, a) - xm[a];
            rhs[a] += xa * (y[r] - ym);
            for (std::size_t b = a; b < d; ++b) G(a, b) += xa * (X(r, b) - xm[b]);
        }
    }
    for (std::size_t a = 0; a < d; ++a) {
        G(a, a) += alpha;
        for (std::size_t b = 0; b < a; ++b) G(a, b) = G(b, a);
    }
    LinearModel m;
    try {
        m.weights = d > 0 ? cholesky_solve(G, rhs) : std::vector<double>{};
    } catch (const DataError&) {
        throw DataError(alpha == 0.0 ? "OLS system is singular; reduce the feature count with --k-features or use ridge"
                                     : "ridge system is singular");
    }
    m.intercept = ym;
    for (std::size_t c = 0; c < d; ++c) m.intercept -= m.weights[c] * xm[c];
    return m;
}

// --- pipeline -------------------------------------------------------------

std::string_view model_name(ModelKind k) {
    switch (k) {
    case ModelKind::Svm: return "svm";
    case ModelKind::Nn: return "nn";
    case ModelKind::Rf: return "rf";
    case ModelKind::Nb: return "nb";
    case ModelKind::Ols: return "ols";
    case ModelKind::Ridge: return "ridge";
    }
    return "";
}

ModelKind model_from_name(std::string_view name) {
    for (auto k : {ModelKind::Svm, ModelKind::Nn, ModelKind::Rf, ModelKind::Nb, ModelKind::Ols, ModelKind::Ridge})
        if (model_name(k) == name) return k;
    throw ConfigError("unknown model '" + std::string(name) + "' (expected svm, nn, rf, nb, ols or ridge)");
}

bool is_regression(ModelKind k) { return k == ModelKind::Ols || k == ModelKind::Ridge; }

bool ModelSpec::uses_standardization() const {
    if (standardize) return *standardize;
    return kind == ModelKind::Svm || kind == ModelKind::Nn || kind == ModelKind::Ols || kind == ModelKind::Ridge;
}

Matrix Pipeline::transform(const Matrix& X) const {
    Matrix Z = imputer_.apply(X).select_cols(selected_);
    if (standardizer_) Z = standardizer_->apply(Z);
    return Z;
}

Pipeline Pipeline::fit(const Matrix& X, const std::vector<double>& targets, const ModelSpec& spec,
                       const std::vector<std::string>& feature_names) {
    if (targets.size() != X.rows()) throw DataError("target count differs from row count");
    if (X.cols() == 0) throw DataError("no features to fit");
    Pipeline p;
    p.spec_ = spec;
    p.feature_names = feature_names;
    p.registry_hash = feature_names.empty() ? std::string{} : features::names_hash(feature_names);
    p.imputer_ = features::Imputer::fit(X, feature_names);
    const Matrix Xi = p.imputer_.apply(X);
    const bool regress = is_regression(spec.kind);
    std::vector<int> labels;
    if (regress) {
        p.scores_ = f_regression_scores(Xi, targets);
    } else {
        for (double t : targets) labels.push_back(static_cast<int>(std::lround(t)));
        p.scores_ = anova_f_classif(Xi, labels);
    }
    const std::size_t k = spec.k_features == 0 ? X.cols() : std::min(spec.k_features, X.cols());
    p.selected_ = select_top_k(p.scores_, k);
    Matrix Z = Xi.select_cols(p.selected_);
    if (spec.uses_standardization()) {
        p.standardizer_ = Standardizer::fit(Z);
        Z = p.standardizer_->apply(Z);
    }
    switch (spec.kind) {
    case ModelKind::Svm: p.model_ = fit_svm_rbf(Z, labels, spec.svm); break;
    case ModelKind::Nn: p.model_ = fit_mlp(Z, labels, spec.mlp, spec.seed); break;
    case ModelKind::Rf: p.model_ = fit_random_forest(Z, labels, spec.forest, spec.seed); break;
    case ModelKind::Nb: p.model_ = GaussianNB::fit(Z, labels, spec.nb_smoothing); break;
    case ModelKind::Ols: p.model_ = fit_ridge(Z, targets, 0.0); break;
    case ModelKind::Ridge: p.model_ = fit_ridge(Z, targets, spec.alpha); break;
    }
    return p;
}

std::vector<double> Pipeline::predict(const Matrix& X) const {
    const Matrix Z = transform(X);
    std::vector<double> out;
    auto from_labels = [&](const std::vector<int>& l) { out.assign(l.begin(), l.end()); };
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, std::monostate>) throw Error("pipeline is not fitted");
            else if constexpr (std::is_same_v<T, LinearModel>) out = m.predict_clipped(Z);
            else from_labels(m.predict(Z));
        },
        model_);
    return out;
}

const LinearModel* Pipeline::linear() const { return std::get_if<LinearModel>(&model_); }

// --- model files ----------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

Matrix matrix_from(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data() = j.at("data").get<std::vector<double>>();
    if (m.data().size() != m.rows() * m.cols()) throw DataError("model matrix has wrong size");
    return m;
}

// JSON has no infinity; scores may contain it.
json doubles_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        if (std::isfinite(x)) a.push_back(x);
        else a.push_back(std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
    }
    return a;
}

std::vector<double> doubles_from(const json& a) {
    std::vector<double> v;
    for (const auto& x : a) {
        if (x.is_string()) {
            const auto s = x.get<std::string>();
            v.push_back(s == "inf" ? kInf : s == "-inf" ? -kInf : std::numeric_limits<double>::quiet_NaN());
        } else {
            v.push_back(x.get<double>());
        }
    }
    return v;
}

json spec_json(const ModelSpec& s) {
    json j;
    j["kind"] = std::string(model_name(s.kind));
    j["k_features"] = s.k_features;
    j["svm"] = {{"C", s.svm.C}, {"gamma", s.svm.gamma}, {"tol", s.svm.tol}, {"max_iter", s.svm.max_iter}};
    j["forest"] = {{"n_trees", s.forest.n_trees},
                   {"max_features", s.forest.max_features},
                   {"min_split", s.forest.min_split},
                   {"min_leaf", s.forest.min_leaf},
                   {"bootstrap", s.forest.bootstrap}};
    j["mlp"] = {{"hidden", s.mlp.hidden},
                {"learning_rate", s.mlp.learning_rate},
                {"beta1", s.mlp.beta1},
                {"beta2", s.mlp.beta2},
                {"epsilon", s.mlp.epsilon},
                {"epochs", s.mlp.epochs}};
    j["nb_smoothing"] = s.nb_smoothing;
    j["alpha"] = s.alpha;
    j["standardize"] = s.uses_standardization();
    j["seed"] = s.seed;
    return j;
}

ModelSpec spec_from(const json& j) {
    ModelSpec s;
    s.kind = model_from_name(j.at("kind").get<std::string>());
    s.k_features = j.at("k_features").get<std::size_t>();
    const auto& v = j.at("svm");
    s.svm = {v.at("C"), v.at("gamma"), v.at("tol"), v.at("max_iter")};
    const auto& f = j.at("forest");
    s.forest = {f.at("n_trees"), f.at("max_features"), f.at("min_split"), f.at("min_leaf"), f.at("bootstrap")};
    const auto& m = j.at("mlp");
    s.mlp.hidden = m.at("hidden").get<std::vector<std::size_t>>();
    s.mlp.learning_rate = m.at("learning_rate");
    s.mlp.beta1 = m.at("beta1");
    s.mlp.beta2 = m.at("beta2");
    s.mlp.epsilon = m.at("epsilon");
    s.mlp.epochs = m.at("epochs");
    s.nb_smoothing = j.at("nb_smoothing");
    s.alpha = j.at("alpha");
    s.standardize = j.at("standardize").get<bool>();
    s.seed = j.at("seed");
    return s;
}

}  // namespace

std::string Pipeline::to_json() const {
    json j;
    j["format"] = "cogspeech-model";
    j["version"] = 1;
    j["registry_hash"] = registry_hash;
    j["feature_names"] = feature_names;
    j["spec"] = spec_json(spec_);
    j["imputer"] = imputer_.fill;
    j["scores"] = doubles_json(scores_);
    j["selected"] = selected_;
    if (standardizer_) j["standardizer"] = {{"mean", standardizer_->mean}, {"scale", standardizer_->scale}};
    json model;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, SvmModel>) {
                model = {{"support", matrix_json(m.support)}, {"coef", m.coef}, {"bias", m.bias}, {"gamma", m.gamma}};
            } else if constexpr (std::is_same_v<T, Mlp>) {
                model = {{"sizes", m.sizes}, {"params", m.params}};
            } else if constexpr (std::is_same_v<T, RandomForest>) {
                json trees = json::array();
                for (const auto& t : m.trees) {
                    json nodes = json::array();
                    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p1});
                    trees.push_back(nodes);
                }
                model = {{"trees", trees}};
            } else if constexpr (std::is_same_v<T, GaussianNB>) {
                model = {{"mean0", m.mean[0]}, {"mean1", m.mean[1]}, {"var0", m.var[0]}, {"var1", m.var[1]},
                         {"prior", {m.prior[0], m.prior[1]}}, {"epsilon", m.epsilon}};
            } else if constexpr (std::is_same_v<T, LinearModel>) {
                model = {{"weights", m.weights}, {"intercept", m.intercept}};
            }
        },
        model_);
    j["model"] = model;
    return j.dump(1);
}

Pipeline Pipeline::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "cogspeech-model" || j.at("version") != 1) throw DataError("unsupported model file version");
        Pipeline p;
        p.registry_hash = j.at("registry_hash");
        p.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        p.spec_ = spec_from(j.at("spec"));
        p.imputer_.fill = j.at("imputer").get<std::vector<double>>();
        p.scores_ = doubles_from(j.at("scores"));
        p.selected_ = j.at("selected").get<std::vector<std::size_t>>();
        if (j.contains("standardizer"))
            p.standardizer_ = Standardizer{j["standardizer"].at("mean").get<std::vector<double>>(),
                                           j["standardizer"].at("scale").get<std::vector<double>>()};
        const auto& m = j.at("model");
        switch (p.spec_.kind) {
        case ModelKind::Svm: {
            SvmModel s;
            s.support = matrix_from(m.at("support"));
            s.coef = m.at("coef").get<std::vector<double>>();
            s.bias = m.at("bias");
            s.gamma = m.at("gamma");
            p.model_ = std::move(s);
            break;
        }
        case ModelKind::Nn: {
            Mlp n;
            n.sizes = m.at("sizes").get<std::vector<std::size_t>>();
            n.params = m.at("params").get<std::vector<double>>();
            p.model_ = std::move(n);
            break;
        }
        case ModelKind::Rf: {
            RandomForest f;
            for (const auto& t : m.at("trees")) {
                DecisionTree tree;
                for (const auto& n : t) tree.nodes.push_back({n[0], n[1], n[2], n[3], n[4], 0});
                f.trees.push_back(std::move(tree));
            }
            p.model_ = std::move(f);
            break;
        }
        case ModelKind::Nb: {
            GaussianNB nb;
            nb.mean[0] = m.at("mean0").get<std::vector<double>>();
            nb.mean[1] = m.at("mean1").get<std::vector<double>>();
            nb.var[0] = m.at("var0").get<std::vector<double>>();
            nb.var[1] = m.at("var1").get<std::vector<double>>();
            nb.prior[0] = m.at("prior")[0];
            nb.prior[1] = m.at("prior")[1];
            nb.epsilon = m.at("epsilon");
            p.model_ = std::move(nb);
            break;
        }
        case ModelKind::Ols:
        case ModelKind::Ridge: {
            LinearModel lm;
            lm.weights = m.at("weights").get<std::vector<double>>();
            lm.intercept = m.at("intercept");
            p.model_ = std::move(lm);
            break;
        }
        }
        return p;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace cogspeech::ml
