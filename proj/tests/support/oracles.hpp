#pragma once

// Independent reference computations for the tests.  Nothing here calls the
// library's recursions or solvers: each quantity is rebuilt from its
// definition with plain loops.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// W_t and L by direct evaluation of the model definition, t = 1..n, in
/// long double:
///   W_t = x_t' beta + sum_{j=1}^{min(q, t-1)} gamma_j E_{t-j}
///   E_t = Y_t exp(-W_t) - 1
///   L   = sum_t (Y_t W_t - exp(W_t))
struct Unrolled {
    std::vector<long double> W, E;
    long double L = 0.0L;
};

inline Unrolled unrolled(const Vec& y, const Mat& X, const Eigen::Matrix<long double, Eigen::Dynamic, 1>& beta,
                         const Eigen::Matrix<long double, Eigen::Dynamic, 1>& gamma) {
    const long n = y.size();
    const long q = gamma.size();
    Unrolled u;
    u.W.assign(static_cast<std::size_t>(n), 0.0L);
    u.E.assign(static_cast<std::size_t>(n), 0.0L);
    for (long t = 1; t <= n; ++t) {
        long double w = 0.0L;
        for (long c = 0; c < X.cols(); ++c) w += static_cast<long double>(X(t - 1, c)) * beta[c];
        for (long j = 1; j <= std::min(q, t - 1); ++j) w += gamma[j - 1] * u.E[static_cast<std::size_t>(t - 1 - j)];
        u.W[static_cast<std::size_t>(t - 1)] = w;
        u.E[static_cast<std::size_t>(t - 1)] = static_cast<long double>(y[t - 1]) * std::exp(-w) - 1.0L;
        u.L += static_cast<long double>(y[t - 1]) * w - std::exp(w);
    }
    return u;
}

inline Unrolled unrolled(const Vec& y, const Mat& X, const Vec& beta, const Vec& gamma) {
    return unrolled(y, X, beta.cast<long double>().eval(), gamma.cast<long double>().eval());
}

using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// delta = (beta, gamma) stacked.
inline long double loglik(const Vec& y, const Mat& X, const LVec& delta, long q) {
    const long P = X.cols();
    return unrolled(y, X, delta.head(P).eval(), delta.tail(q).eval()).L;
}

/// Central differences with one Richardson step (error O(h^4)).
inline Vec fd_gradient(const Vec& y, const Mat& X, const Vec& delta, long q, double h = 1e-3) {
    const LVec d0 = delta.cast<long double>();
    Vec g(delta.size());
    for (long k = 0; k < delta.size(); ++k) {
        auto D = [&](long double s) {
            LVec a = d0, b = d0;
            a[k] += s;
            b[k] -= s;
            return (loglik(y, X, a, q) - loglik(y, X, b, q)) / (2.0L * s);
        };
        const long double s = h * std::max(1.0, std::abs(delta[k]));
        g[k] = static_cast<double>((4.0L * D(s / 2) - D(s)) / 3.0L);
    }
    return g;
}

/// Four-point mixed partials with one Richardson step.
inline Mat fd_hessian(const Vec& y, const Mat& X, const Vec& delta, long q, double h = 1e-3) {
    const LVec d0 = delta.cast<long double>();
    const long m = delta.size();
    Mat H(m, m);
    for (long i = 0; i < m; ++i) {
        for (long j = i; j < m; ++j) {
            auto D = [&](long double si, long double sj) {
                auto f = [&](long double di, long double dj) {
                    LVec d = d0;
                    d[i] += di;
                    d[j] += dj;
                    return loglik(y, X, d, q);
                };
                return (f(si, sj) - f(si, -sj) - f(-si, sj) + f(-si, -sj)) / (4.0L * si * sj);
            };
            const long double si = h * std::max(1.0, std::abs(delta[i]));
            const long double sj = h * std::max(1.0, std::abs(delta[j]));
            H(i, j) = H(j, i) = static_cast<double>((4.0L * D(si / 2, sj / 2) - D(si, sj)) / 3.0L);
        }
    }
    return H;
}

/// Poisson GLM log-likelihood kernel, score and Hessian.
struct Glm {
    double L = 0.0;
    Vec score;
    Mat hess;
};

inline Glm poisson_glm(const Vec& y, const Mat& X, const Vec& beta) {
    Glm g;
    g.score = Vec::Zero(X.cols());
    g.hess = Mat::Zero(X.cols(), X.cols());
    for (long t = 0; t < X.rows(); ++t) {
        double eta = 0.0;
        for (long c = 0; c < X.cols(); ++c) eta += X(t, c) * beta[c];
        const double mu = std::exp(eta);
        g.L += y[t] * eta - mu;
        for (long a = 0; a < X.cols(); ++a) {
            g.score[a] += (y[t] - mu) * X(t, a);
            for (long b = 0; b < X.cols(); ++b) g.hess(a, b) -= mu * X(t, a) * X(t, b);
        }
    }
    return g;
}

/// min 1/2 ||Y - X b||^2 + lambda ||b||_1 by enumerating every sign pattern
/// s in {-1, 0, +1}^P and solving the stationarity equations on the support.
struct BruteLasso {
    Vec beta;
    double objective = std::numeric_limits<double>::infinity();
};

inline double lasso_objective(const Mat& X, const Vec& Y, const Vec& b, double lambda) {
    return 0.5 * (Y - X * b).squaredNorm() + lambda * b.lpNorm<1>();
}

inline BruteLasso brute_force_lasso(const Mat& X, const Vec& Y, double lambda) {
    const long P = X.cols();
    const Mat G = X.transpose() * X;
    const Vec c = X.transpose() * Y;
    BruteLasso best;
    best.beta = Vec::Zero(P);
    best.objective = lasso_objective(X, Y, best.beta, lambda);
    long total = 1;
    for (long k = 0; k < P; ++k) total *= 3;
    for (long code = 1; code < total; ++code) {
        std::vector<int> s(static_cast<std::size_t>(P));
        long rem = code;
        std::vector<long> A;
        for (long k = 0; k < P; ++k) {
            s[static_cast<std::size_t>(k)] = static_cast<int>(rem % 3) - 1;
            rem /= 3;
            if (s[static_cast<std::size_t>(k)] != 0) A.push_back(k);
        }
        if (A.empty()) continue;
        const long m = static_cast<long>(A.size());
        Mat GA(m, m);
        Vec rhs(m);
        for (long i = 0; i < m; ++i) {
            rhs[i] = c[A[static_cast<std::size_t>(i)]] - lambda * s[static_cast<std::size_t>(A[static_cast<std::size_t>(i)])];
            for (long j = 0; j < m; ++j) GA(i, j) = G(A[static_cast<std::size_t>(i)], A[static_cast<std::size_t>(j)]);
        }
        const Eigen::FullPivLU<Mat> lu(GA);
        if (!lu.isInvertible()) continue;
        const Vec bA = lu.solve(rhs);
        Vec b = Vec::Zero(P);
        bool ok = true;
        for (long i = 0; i < m; ++i) {
            const long k = A[static_cast<std::size_t>(i)];
            if (bA[i] * s[static_cast<std::size_t>(k)] <= 0.0) ok = false;
            b[k] = bA[i];
        }
        if (!ok) continue;
        const double f = lasso_objective(X, Y, b, lambda);
        if (f < best.objective) {
            best.objective = f;
            best.beta = b;
        }
    }
    return best;
}

/// Largest KKT violation of b for the lasso, relative to max(||X'Y||_inf, 1):
///   b_k != 0: X_k'(Y - Xb) = lambda sign(b_k)
///   b_k == 0: |X_k'(Y - Xb)| <= lambda
inline double kkt_violation(const Mat& X, const Vec& Y, const Vec& b, double lambda) {
    const Vec r = X.transpose() * (Y - X * b);
    double worst = 0.0;
    for (long k = 0; k < b.size(); ++k) {
        const double v = b[k] != 0.0 ? std::abs(r[k] - lambda * (b[k] > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(r[k]) - lambda);
        worst = std::max(worst, v);
    }
    return worst / std::max((X.transpose() * Y).lpNorm<Eigen::Infinity>(), 1.0);
}

/// Random instance for derivative checks: design with an intercept, counts
/// drawn from a moderate Poisson, and (beta, gamma) kept small so W stays
/// far from the clamp.
struct Instance {
    Vec y;
    Mat X;
    Vec beta;
    Vec gamma;
};

inline Instance random_instance(std::mt19937_64& gen, long n, long p, long q) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    Instance in;
    in.X.resize(n, p + 1);
    for (long t = 0; t < n; ++t) {
        in.X(t, 0) = 1.0;
        for (long c = 1; c <= p; ++c) in.X(t, c) = 0.5 * N(gen);
    }
    in.beta.resize(p + 1);
    in.beta[0] = 1.0 + 0.3 * N(gen);
    for (long c = 1; c <= p; ++c) in.beta[c] = 0.3 * N(gen);
    in.gamma.resize(q);
    for (long j = 0; j < q; ++j) in.gamma[j] = U(gen);
    in.y.resize(n);
    for (long t = 0; t < n; ++t) {
        double eta = 0.0;
        for (long c = 0; c <= p; ++c) eta += in.X(t, c) * in.beta[c];
        std::poisson_distribution<int> pois(std::exp(eta));
        in.y[t] = pois(gen);
    }
    // evaluate away from the generating point
    for (long c = 0; c <= p; ++c) in.beta[c] += 0.1 * N(gen);
    // negative feedback can blow W up; such draws are rejected
    const auto u = unrolled(in.y, in.X, in.beta, in.gamma);
    for (long t = 0; t < n; ++t)
        if (!(std::abs(u.W[t]) < 20.0L)) return random_instance(gen, n, p, q);
    return in;
}

/// Elementwise agreement |a - b| <= max(rel * |b|, abs_floor); returns the
/// worst ratio |a - b| / max(rel * |b|, abs_floor) (<= 1 means pass).
inline double worst_ratio(const Mat& a, const Mat& b, double rel, double abs_floor) {
    double worst = 0.0;
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j) {
            const double tol = std::max(rel * std::abs(b(i, j)), abs_floor);
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / tol);
        }
    return worst;
}

}  // namespace oracle
