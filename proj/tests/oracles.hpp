#pragma once
// Brute-force reference implementations shared by the unit and acceptance
// tests. They deliberately use different formulations from the library.

#include "cogspeech/common.hpp"
#include "cogspeech/fixtures.hpp"
#include "cogspeech/ml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using cogspeech::Matrix;

inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<std::string> out;
    std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(pick(rng)));
    return out;
}

inline double ttr(std::vector<std::string> toks) {
    std::sort(toks.begin(), toks.end());
    const auto types = static_cast<double>(std::unique(toks.begin(), toks.end()) - toks.begin());
    return types / static_cast<double>(toks.size());
}

inline double mattr(const std::vector<std::string>& toks, std::size_t window) {
    const std::size_t w = std::min(window, toks.size());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s + w <= toks.size(); ++s) {
        sum += ttr({toks.begin() + static_cast<std::ptrdiff_t>(s), toks.begin() + static_cast<std::ptrdiff_t>(s + w)});
        ++count;
    }
    return sum / static_cast<double>(count);
}

struct Counts {
    double n = 0, v = 0, v1 = 0;
};

inline Counts counts(const std::vector<std::string>& toks) {
    Counts c;
    c.n = static_cast<double>(toks.size());
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) {
        c.v += 1;
        if (std::count(toks.begin(), toks.end(), t) == 1) c.v1 += 1;
    }
    return c;
}

inline double brunet(const std::vector<std::string>& toks) {
    const auto c = counts(toks);
    return std::exp(std::log(c.n) * std::exp(-0.165 * std::log(c.v)));
}

inline double honore(const std::vector<std::string>& toks) {
    const auto c = counts(toks);
    return 100.0 * std::log(c.n) * c.v / (c.v - c.v1);
}

// Two-group ANOVA via the squared pooled-variance t statistic.
inline double anova_f(const std::vector<double>& x, const std::vector<int>& y) {
    std::vector<double> g[2];
    for (std::size_t i = 0; i < x.size(); ++i) g[y[i]].push_back(x[i]);
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double a : v) s += a;
        return s / static_cast<double>(v.size());
    };
    const double m0 = mean(g[0]), m1 = mean(g[1]);
    double ss = 0;
    for (double a : g[0]) ss += (a - m0) * (a - m0);
    for (double a : g[1]) ss += (a - m1) * (a - m1);
    const double n0 = static_cast<double>(g[0].size()), n1 = static_cast<double>(g[1].size());
    const double sp2 = ss / (n0 + n1 - 2.0);
    const double t = (m1 - m0) / std::sqrt(sp2 * (1.0 / n0 + 1.0 / n1));
    return t * t;
}

// Simple linear regression F from explained and residual sums of squares.
inline double regression_f(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double a = (sy - b * sx) / n;
    const double ybar = sy / n;
    double ssr = 0, sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yh = a + b * x[i];
        ssr += (yh - ybar) * (yh - ybar);
        sse += (y[i] - yh) * (y[i] - yh);
    }
    return ssr / (sse / (n - 2.0));
}

struct Binary {
    double accuracy, precision, recall, specificity, f1;
};

inline Binary binary(const std::vector<int>& t, const std::vector<int>& p) {
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == 1 && p[i] == 1) ++tp;
        else if (t[i] == 0 && p[i] == 0) ++tn;
        else if (t[i] == 0) ++fp;
        else ++fn;
    }
    Binary b{};
    b.accuracy = (tp + tn) / static_cast<double>(t.size());
    b.precision = tp / (tp + fp);
    b.recall = tp / (tp + fn);
    b.specificity = tn / (tn + fp);
    b.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    return b;
}

inline double rmse(const std::vector<double>& t, const std::vector<double>& p) {
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += (t[i] - p[i]) * (t[i] - p[i]);
    return std::sqrt(s / static_cast<double>(t.size()));
}

inline double mae(const std::vector<double>& t, const std::vector<double>& p) {
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += std::abs(t[i] - p[i]);
    return s / static_cast<double>(t.size());
}

// O(n^2) orthonormal DCT-II.
inline std::vector<double> dct2(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i] * std::cos(M_PI * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
        out[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    }
    return out;
}

// Dual SVM solved by cyclic sweeps over all index pairs, each pair
// optimized analytically, until a sweep changes nothing.
inline std::vector<double> svm_dual_by_sweeps(const Matrix& X, const std::vector<int>& y01, double C, double gamma) {
    const std::size_t n = X.rows();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = y01[i] == 1 ? 1.0 : -1.0;
    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double d = 0;
            for (std::size_t c = 0; c < X.cols(); ++c) d += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
            K(i, j) = std::exp(-gamma * d);
        }
    std::vector<double> a(n, 0.0), f(n, 0.0);  // f_i = sum_j a_j y_j K_ij
    for (int sweep = 0; sweep < 20000; ++sweep) {
        double moved = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                // Move along a_i += y_i t, a_j -= y_j t (keeps sum a y fixed).
                const double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
                if (eta <= 1e-15) continue;
                const double gi = y[i] * f[i] - 1.0, gj = y[j] * f[j] - 1.0;
                double t = -(y[i] * gi - y[j] * gj) / eta;
                // Box constraints for both coordinates.
                double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
                auto bound = [&](double ak, double s) {  // 0 <= ak + s t <= C
                    if (s > 0) { lo = std::max(lo, -ak / s); hi = std::min(hi, (C - ak) / s); }
                    else { lo = std::max(lo, (C - ak) / s); hi = std::min(hi, -ak / s); }
                };
                bound(a[i], y[i]);
                bound(a[j], -y[j]);
                t = std::clamp(t, lo, hi);
                if (std::abs(t) < 1e-14) continue;
                a[i] += y[i] * t;
                a[j] -= y[j] * t;
                for (std::size_t k = 0; k < n; ++k) f[k] += t * (K(i, k) - K(j, k));
                moved = std::max(moved, std::abs(t));
            }
        if (moved < 1e-10) break;
    }
    return a;
}

// Ridge weights by plain gradient descent on
// 1/2 ||yc - Xc w||^2 + alpha/2 ||w||^2, returning (w, intercept).
inline std::pair<std::vector<double>, double> ridge_by_descent(const Matrix& X, const std::vector<double>& y, double alpha) {
    const std::size_t n = X.rows(), d = X.cols();
    std::vector<double> xm(d, 0.0);
    double ym = 0;
    for (std::size_t r = 0; r < n; ++r) {
        ym += y[r];
        for (std::size_t c = 0; c < d; ++c) xm[c] += X(r, c);
    }
    ym /= static_cast<double>(n);
    for (auto& v : xm) v /= static_cast<double>(n);
    // Step size from a Frobenius bound on the Hessian's largest eigenvalue.
    double fro = 0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) fro += (X(r, c) - xm[c]) * (X(r, c) - xm[c]);
    const double step = 1.0 / (fro + alpha);
    std::vector<double> w(d, 0.0), g(d);
    for (int it = 0; it < 2000000; ++it) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double e = -(y[r] - ym);
            for (std::size_t c = 0; c < d; ++c) e += (X(r, c) - xm[c]) * w[c];
            for (std::size_t c = 0; c < d; ++c) g[c] += e * (X(r, c) - xm[c]);
        }
        double gn = 0;
        for (std::size_t c = 0; c < d; ++c) {
            g[c] += alpha * w[c];
            gn = std::max(gn, std::abs(g[c]));
            w[c] -= step * g[c];
        }
        if (gn < 1e-11) break;
    }
    double b = ym;
    for (std::size_t c = 0; c < d; ++c) b -= w[c] * xm[c];
    return {w, b};
}

// Least squares with an intercept column via Gaussian elimination with
// partial pivoting on the normal equations. Returns (w, intercept).
inline std::pair<std::vector<double>, double> ols_by_elimination(const Matrix& X, const std::vector<double>& y) {
    const std::size_t n = X.rows(), d = X.cols() + 1;
    std::vector<std::vector<double>> A(d, std::vector<double>(d + 1, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> z(d);
        z[0] = 1.0;
        for (std::size_t c = 1; c < d; ++c) z[c] = X(r, c - 1);
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) A[a][b] += z[a] * z[b];
            A[a][d] += z[a] * y[r];
        }
    }
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (std::size_t k = col; k <= d; ++k) A[r][k] -= f * A[col][k];
        }
    }
    std::vector<double> w(d - 1);
    for (std::size_t c = 1; c < d; ++c) w[c - 1] = A[c][d] / A[c][c];
    return {w, A[0][d] / A[0][0]};
}

// Fraction of points whose 2-means cluster matches their label (best of
// the two assignments). Deterministic farthest-point initialization.
inline double two_means_agreement(const Matrix& Y, const std::vector<int>& labels) {
    const std::size_t n = Y.rows(), d = Y.cols();
    auto dist = [&](std::size_t i, const std::vector<double>& c) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k) s += (Y(i, k) - c[k]) * (Y(i, k) - c[k]);
        return s;
    };
    std::vector<double> c0(Y.row(0).begin(), Y.row(0).end()), c1;
    double far = -1;
    for (std::size_t i = 0; i < n; ++i)
        if (dist(i, c0) > far) {
            far = dist(i, c0);
            c1.assign(Y.row(i).begin(), Y.row(i).end());
        }
    std::vector<int> assign(n, 0);
    for (int it = 0; it < 100; ++it) {
        for (std::size_t i = 0; i < n; ++i) assign[i] = dist(i, c1) < dist(i, c0) ? 1 : 0;
        std::vector<double> s0(d, 0.0), s1(d, 0.0);
        double n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = assign[i] ? s1 : s0;
            for (std::size_t k = 0; k < d; ++k) s[k] += Y(i, k);
            (assign[i] ? n1 : n0) += 1;
        }
        for (std::size_t k = 0; k < d; ++k) {
            if (n0 > 0) c0[k] = s0[k] / n0;
            if (n1 > 0) c1[k] = s1[k] / n1;
        }
    }
    double agree = 0;
    for (std::size_t i = 0; i < n; ++i) agree += assign[i] == labels[i] ? 1 : 0;
    return std::max(agree, static_cast<double>(n) - agree) / static_cast<double>(n);
}

inline std::vector<int> majority_by_counting(const std::vector<std::vector<int>>& sets) {
    std::vector<int> out(sets.front().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        int ones = 0;
        for (const auto& s : sets) ones += s[i];
        out[i] = 2 * ones > static_cast<int>(sets.size()) ? 1 : 0;
    }
    return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace oracle
