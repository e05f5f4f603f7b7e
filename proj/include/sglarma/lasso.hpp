#pragma once

// Quadratic approximation of L in beta and its l1-penalized minimization.
//
// At (beta0, gamma_hat) let g = dL/dbeta and H = -d2L/dbeta dbeta' = U diag(lambda) U'.
// Up to a constant, -L(beta) ~ 1/2 || Y - X beta ||^2 with pseudo-data
//
//   X = diag(lambda)^{1/2} U',   Y = diag(lambda)^{1/2} U' beta0 + diag(lambda)^{-1/2} U' g.
//
// The penalized criterion is 1/2 ||Y - X beta||^2 + lambda_pen * sum_{k=0..p} |beta_k|.
// Note that the intercept beta_0 is penalized like every other coefficient.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sglarma/derivatives.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/rng.hpp"

namespace sglarma {

struct PseudoData {
    Vector Y;              ///< length p+1
    Matrix X;              ///< (p+1) x (p+1)
    Matrix U;              ///< eigenvectors of the negative beta Hessian
    Vector lambda_eigs;    ///< eigenvalues after flooring
    int floored = 0;       ///< number of eigenvalues raised to the floor
    Vector grad;           ///< dL/dbeta at the expansion point
    Vector beta0;          ///< expansion point
    bool clamped = false;  ///< the expansion point drove some W_t into the exp() clamp
};

/// Floor applied to eigenvalues of the negative Hessian before taking Lambda^{-1/2}.
inline double eigen_floor(const Vector& eigs) {
    const double top = eigs.size() > 0 ? eigs.maxCoeff() : 1.0;
    return 1e-8 * std::max(top, 1.0);
}

/// Pseudo-data from an explicit gradient g and negative Hessian H at beta0.
inline PseudoData pseudo_data_from(const Vector& grad, const Matrix& neg_hess, const Vector& beta0) {
    const Eigen::Index P = beta0.size();
    if (grad.size() != P || neg_hess.rows() != P || neg_hess.cols() != P)
        throw DimensionError("pseudo-data inputs have inconsistent sizes");
    Eigen::SelfAdjointEigenSolver<Matrix> es(neg_hess);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the negative Hessian failed");

    PseudoData pd;
    pd.U = es.eigenvectors();
    pd.lambda_eigs = es.eigenvalues();
    const double floor = eigen_floor(pd.lambda_eigs);
    for (Eigen::Index k = 0; k < P; ++k) {
        if (!(pd.lambda_eigs[k] >= floor)) {
            pd.lambda_eigs[k] = floor;
            ++pd.floored;
        }
    }
    const Vector sqrt_l = pd.lambda_eigs.array().sqrt();
    pd.X = sqrt_l.asDiagonal() * pd.U.transpose();
    const Vector ut_beta = pd.U.transpose() * beta0;
    const Vector ut_grad = pd.U.transpose() * grad;
    pd.Y = sqrt_l.cwiseProduct(ut_beta) + ut_grad.cwiseQuotient(sqrt_l);
    pd.grad = grad;
    pd.beta0 = beta0;
    if (!pd.X.allFinite() || !pd.Y.allFinite()) throw NumericalError("non-finite pseudo-data");
    return pd;
}

/// Pseudo-data of the quadratic expansion of L(., gamma_hat) around beta0.
inline PseudoData build_pseudo_data(const CountSeries& y, const Design& design, const Vector& beta0,
                                    const Vector& gamma_hat) {
    const Params at{beta0, gamma_hat};
    const ScoreHessian sh = score_and_hessian(y, design, at, DerivScope::beta_only(design));
    PseudoData pd = pseudo_data_from(sh.grad, -sh.hess, beta0);
    pd.clamped = sh.clamped;
    return pd;
}

// ---------------------------------------------------------------------------
// Coordinate descent

struct LassoOptions {
    double tol = 1e-9;  ///< stop when max_k sqrt(G_kk) |change in b_k| over a full sweep is below tol * ||Y||
    long max_sweeps = 100000;
    std::vector<double>* objective_trace = nullptr;  ///< if set, objective after each sweep is appended
};

inline double soft_threshold(double z, double t) noexcept {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/// Covariance-form coordinate descent for
///   1/2 ||Y - X b||^2 + lambda * sum_k w_k |b_k|
/// built once per (X, Y) and reused along a lambda path.
class GramLasso {
public:
    GramLasso(const Matrix& X, const Vector& Y)
        : gram_(X.transpose() * X), xty_(X.transpose() * Y), yty_(Y.squaredNorm()) {}

    GramLasso(Matrix gram, Vector xty, double yty) : gram_(std::move(gram)), xty_(std::move(xty)), yty_(yty) {}

    Eigen::Index dim() const noexcept { return xty_.size(); }
    const Matrix& gram() const noexcept { return gram_; }
    const Vector& xty() const noexcept { return xty_; }

    /// 1/2 ||Y - X b||^2 expanded through the Gram matrix.
    double loss(const Vector& b) const { return 0.5 * (yty_ - 2.0 * xty_.dot(b) + b.dot(gram_ * b)); }

    double objective(const Vector& b, double lambda, const Vector* weights = nullptr) const {
        const double pen = weights ? weights->cwiseProduct(b.cwiseAbs()).sum() : b.lpNorm<1>();
        return loss(b) + lambda * pen;
    }

    /// Solves at one lambda starting from `b` (updated in place).  Returns the number of sweeps.
    long solve(double lambda, Vector& b, const LassoOptions& opt = {}, const Vector* weights = nullptr) const {
        const Eigen::Index P = dim();
        if (b.size() != P) b = Vector::Zero(P);
        Vector r = xty_ - gram_ * b;  // r_k = (X'(Y - Xb))_k
        std::vector<char> active(static_cast<std::size_t>(P), 0);
        long sweeps = 0;
        // changes are measured in fitted-value units, relative to ||Y||
        const double thr = opt.tol * (yty_ > 0.0 ? std::sqrt(yty_) : 1.0);

        auto update = [&](Eigen::Index k) -> double {
            const double gkk = gram_(k, k);
            if (gkk <= 0.0) {
                // zero column: the penalty pins the coefficient at 0
                if (b[k] != 0.0) {
                    r.noalias() += gram_.col(k) * b[k];
                    const double d = std::abs(b[k]);
                    b[k] = 0.0;
                    return d;
                }
                return 0.0;
            }
            const double w = weights ? (*weights)[k] : 1.0;
            const double z = r[k] + gkk * b[k];
            const double nb = soft_threshold(z, lambda * w) / gkk;
            const double delta = nb - b[k];
            if (delta != 0.0) {
                r.noalias() -= gram_.col(k) * delta;
                b[k] = nb;
            }
            return std::sqrt(gkk) * std::abs(delta);
        };
        auto trace = [&] {
            if (opt.objective_trace) opt.objective_trace->push_back(objective(b, lambda, weights));
        };

        for (;;) {
            // full sweep
            double max_change = 0.0;
            for (Eigen::Index k = 0; k < P; ++k) {
                max_change = std::max(max_change, update(k));
                if (b[k] != 0.0) active[static_cast<std::size_t>(k)] = 1;
            }
            ++sweeps;
            trace();
            if (max_change < thr) break;
            if (sweeps >= opt.max_sweeps) throw NonConvergenceError("coordinate descent exceeded the sweep limit");

            // iterate on the active set until it settles
            for (long inner = 1;; ++inner) {
                double active_change = 0.0;
                for (Eigen::Index k = 0; k < P; ++k)
                    if (active[static_cast<std::size_t>(k)]) active_change = std::max(active_change, update(k));
                ++sweeps;
                trace();
                if (active_change < thr) break;
                if (inner % kPolishEvery == 0 && polish(lambda, b, r, weights)) {
                    trace();
                    break;
                }
                if (sweeps >= kFeatureSignAfter && sweeps % kFeatureSignAfter == 0 &&
                    feature_sign(lambda, b, r, weights)) {
                    trace();
                    break;
                }
                if (sweeps >= opt.max_sweeps)
                    throw NonConvergenceError("coordinate descent exceeded the sweep limit");
            }
        }
        return sweeps;
    }

private:
    static constexpr long kPolishEvery = 16;
    static constexpr long kFeatureSignAfter = 500;  ///< sweeps before (and between) feature-sign attempts

    /// Slow coordinate-descent convergence happens on strongly correlated
    /// active sets.  Once the active set and signs have settled, the solution
    /// solves G_AA b_A = (X'Y)_A - lambda w_A s_A exactly; accept it only if
    /// the signs agree and the residual satisfies the KKT bound off A.  The
    /// caller's next full sweep still certifies convergence.
    bool polish(double lambda, Vector& b, Vector& r, const Vector* weights) const {
        std::vector<Eigen::Index> A;
        for (Eigen::Index k = 0; k < b.size(); ++k)
            if (b[k] != 0.0) A.push_back(k);
        if (A.empty()) return false;
        const auto m = static_cast<Eigen::Index>(A.size());
        Matrix G(m, m);
        Vector rhs(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index ki = A[static_cast<std::size_t>(i)];
            const double w = weights ? (*weights)[ki] : 1.0;
            rhs[i] = xty_[ki] - lambda * w * (b[ki] > 0.0 ? 1.0 : -1.0);
            for (Eigen::Index j = 0; j < m; ++j) G(i, j) = gram_(ki, A[static_cast<std::size_t>(j)]);
        }
        const Eigen::LLT<Matrix> llt(G);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-10) return false;
        const Vector bA = llt.solve(rhs);
        for (Eigen::Index i = 0; i < m; ++i)
            if (!(bA[i] * b[A[static_cast<std::size_t>(i)]] > 0.0)) return false;
        Vector cand = Vector::Zero(b.size());
        for (Eigen::Index i = 0; i < m; ++i) cand[A[static_cast<std::size_t>(i)]] = bA[i];
        const Vector rc = xty_ - gram_ * cand;
        for (Eigen::Index k = 0; k < b.size(); ++k) {
            if (cand[k] != 0.0) continue;
            const double w = weights ? (*weights)[k] : 1.0;
            if (std::abs(rc[k]) > lambda * w * (1.0 + 1e-12)) return false;
        }
        b = std::move(cand);
        r = rc;
        return true;
    }

    /// Feature-sign search (Lee, Battle, Raina & Ng 2007) from the current
    /// iterate: solve on the active set with fixed signs, line-search across
    /// sign changes, add the worst KKT violator, repeat.  Finite, and
    /// insensitive to the conditioning that stalls coordinate descent.
    /// Returns false, leaving b and r untouched, if it cannot make progress.
    bool feature_sign(double lambda, Vector& b, Vector& r, const Vector* weights) const {
        const Eigen::Index P = b.size();
        auto wt = [&](Eigen::Index k) { return weights ? (*weights)[k] : 1.0; };
        const double slack = 1e-12 * (xty_.lpNorm<Eigen::Infinity>() + 1.0);
        Vector x = b;
        Vector res = xty_ - gram_ * x;
        double f = objective(x, lambda, weights);
        std::vector<char> in(static_cast<std::size_t>(P), 0);
        Vector theta = Vector::Zero(P);
        for (Eigen::Index k = 0; k < P; ++k)
            if (x[k] != 0.0) {
                in[static_cast<std::size_t>(k)] = 1;
                theta[k] = x[k] > 0.0 ? 1.0 : -1.0;
            }

        auto refresh = [&] {
            for (Eigen::Index k = 0; k < P; ++k) {
                if (x[k] == 0.0) {
                    in[static_cast<std::size_t>(k)] = 0;
                    theta[k] = 0.0;
                } else {
                    theta[k] = x[k] > 0.0 ? 1.0 : -1.0;
                }
            }
        };

        for (Eigen::Index outer = 0; outer < 4 * P + 50; ++outer) {
            // active-set optimality by repeated feature-sign steps
            for (Eigen::Index step = 0; step < 4 * P + 50; ++step) {
                std::vector<Eigen::Index> A;
                for (Eigen::Index k = 0; k < P; ++k)
                    if (in[static_cast<std::size_t>(k)]) A.push_back(k);
                if (A.empty()) break;
                const auto m = static_cast<Eigen::Index>(A.size());
                Matrix G(m, m);
                Vector rhs(m);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const Eigen::Index ki = A[static_cast<std::size_t>(i)];
                    rhs[i] = xty_[ki] - lambda * wt(ki) * theta[ki];
                    for (Eigen::Index j = 0; j < m; ++j) G(i, j) = gram_(ki, A[static_cast<std::size_t>(j)]);
                }
                Vector sol;
                const Eigen::LLT<Matrix> llt(G);
                if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
                    sol = llt.solve(rhs);
                } else {
                    // singular face (more active columns than rows): least-change
                    // step, or a ray of zero curvature when rhs has a null-space part
                    Vector xA(m);
                    for (Eigen::Index i = 0; i < m; ++i) xA[i] = x[A[static_cast<std::size_t>(i)]];
                    const Eigen::SelfAdjointEigenSolver<Matrix> es(G);
                    const Vector& ev = es.eigenvalues();
                    const Matrix& U = es.eigenvectors();
                    const double cut = 1e-10 * std::max(ev.maxCoeff(), 0.0);
                    const Vector g = rhs - G * xA;
                    const Vector proj = U.transpose() * g;
                    Vector step = Vector::Zero(m), ray = Vector::Zero(m);
                    for (Eigen::Index j = 0; j < m; ++j) {
                        if (ev[j] > cut) step += U.col(j) * (proj[j] / ev[j]);
                        else ray += U.col(j) * proj[j];
                    }
                    if (ray.norm() > 1e-9 * g.norm() && g.norm() > 0.0) {
                        // the objective falls linearly along the ray until a coefficient reaches 0
                        double tmin = std::numeric_limits<double>::infinity();
                        Eigen::Index hit = -1;
                        for (Eigen::Index i = 0; i < m; ++i) {
                            const Eigen::Index k = A[static_cast<std::size_t>(i)];
                            if (wt(k) == 0.0 || x[k] == 0.0 || !(ray[i] * theta[k] < 0.0)) continue;
                            const double t = -x[k] / ray[i];
                            if (t < tmin) {
                                tmin = t;
                                hit = i;
                            }
                        }
                        if (hit < 0 || !(tmin > 0.0)) return false;
                        Vector c = x;
                        for (Eigen::Index i = 0; i < m; ++i) c[A[static_cast<std::size_t>(i)]] += tmin * ray[i];
                        c[A[static_cast<std::size_t>(hit)]] = 0.0;
                        const double fc = objective(c, lambda, weights);
                        if (!(fc < f)) return false;
                        x = std::move(c);
                        f = fc;
                        refresh();
                        continue;
                    }
                    sol = xA + step;
                }
                if (!sol.allFinite()) return false;
                Vector target = x;
                for (Eigen::Index i = 0; i < m; ++i) target[A[static_cast<std::size_t>(i)]] = sol[i];

                // candidates: the target and every point where a penalized coordinate reaches 0
                bool consistent = true;
                Vector best = target;
                double best_f = objective(target, lambda, weights);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const Eigen::Index k = A[static_cast<std::size_t>(i)];
                    if (wt(k) == 0.0 || sol[i] * theta[k] > 0.0) continue;
                    consistent = false;
                    if (x[k] == 0.0) continue;
                    const double t = x[k] / (x[k] - sol[i]);
                    if (!(t > 0.0 && t < 1.0)) continue;
                    Vector c = x + t * (target - x);
                    c[k] = 0.0;
                    const double fc = objective(c, lambda, weights);
                    if (fc < best_f) {
                        best_f = fc;
                        best = std::move(c);
                    }
                }
                // a sign-consistent target minimizes the objective on the current orthant face
                if (consistent) {
                    best = target;
                    best_f = objective(target, lambda, weights);
                } else if (!(best_f < f)) {
                    return false;
                }
                x = std::move(best);
                f = best_f;
                refresh();
                if (consistent) break;
            }
            res = xty_ - gram_ * x;

            // zero coefficients: add the worst KKT violator
            Eigen::Index worst = -1;
            double worst_v = 0.0;
            for (Eigen::Index k = 0; k < P; ++k) {
                if (in[static_cast<std::size_t>(k)] || gram_(k, k) <= 0.0) continue;
                const double v = std::abs(res[k]) - lambda * wt(k) * (1.0 + 1e-12) - slack;
                if (v > worst_v) {
                    worst_v = v;
                    worst = k;
                }
            }
            if (worst < 0) {
                b = std::move(x);
                r = std::move(res);
                return true;
            }
            in[static_cast<std::size_t>(worst)] = 1;
            theta[worst] = res[worst] > 0.0 ? 1.0 : -1.0;
        }
        return false;
    }

    Matrix gram_;
    Vector xty_;
    double yty_;
};

/// beta_hat(lambda) for 1/2 ||Y - X beta||^2 + lambda ||beta||_1.
inline Vector lasso_solve(const Matrix& X, const Vector& Y, double lambda, const std::optional<Vector>& warm = {},
                          const LassoOptions& opt = {}) {
    if (X.rows() != Y.size()) throw DimensionError("lasso: X rows != Y length");
    if (!(lambda >= 0.0)) throw UsageError("lasso: lambda must be non-negative");
    const GramLasso gl(X, Y);
    Vector b = warm ? *warm : Vector::Zero(X.cols());
    if (b.size() != X.cols()) throw DimensionError("lasso: warm start has the wrong length");
    gl.solve(lambda, b, opt);
    return b;
}

inline Vector lasso_solve(const PseudoData& pd, double lambda, const std::optional<Vector>& warm = {},
                          const LassoOptions& opt = {}) {
    return lasso_solve(pd.X, pd.Y, lambda, warm, opt);
}

// ---------------------------------------------------------------------------
// lambda grid, path, cross-validation

/// Smallest lambda for which beta_hat = 0: max_k |(X'Y)_k|.
inline double lambda_max(const Vector& xty) { return xty.cwiseAbs().maxCoeff(); }

/// Geometric grid of n_lambda values from lambda_max down to ratio * lambda_max.
inline std::vector<double> lambda_grid(const Vector& xty, int n_lambda = 100, double ratio = 1e-2) {
    if (n_lambda < 1) throw UsageError("lambda grid needs n_lambda >= 1");
    if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("lambda grid ratio must lie in (0, 1)");
    const double top = xty.size() ? lambda_max(xty) : 0.0;
    if (!(top > 0.0)) throw DegenerateGridError("X'Y is identically zero; the lambda grid is degenerate");
    std::vector<double> grid(static_cast<std::size_t>(n_lambda));
    grid[0] = top;
    for (int i = 1; i < n_lambda; ++i)
        grid[static_cast<std::size_t>(i)] = top * std::pow(ratio, static_cast<double>(i) / (n_lambda - 1));
    return grid;
}

inline std::vector<double> lambda_grid(const Matrix& X, const Vector& Y, int n_lambda = 100, double ratio = 1e-2) {
    return lambda_grid(Vector(X.transpose() * Y), n_lambda, ratio);
}

inline std::vector<double> lambda_grid(const PseudoData& pd, int n_lambda = 100, double ratio = 1e-2) {
    return lambda_grid(pd.X, pd.Y, n_lambda, ratio);
}

struct LassoPath {
    std::vector<double> lambdas;
    Matrix betas;                       ///< one row per lambda
    std::vector<int> n_nonzero;
    std::optional<std::vector<double>> cv_mean;
    std::optional<std::vector<double>> cv_se;
    std::size_t index_cv_min = 0;       ///< argmin of cv_mean (ties -> larger lambda)

    double lambda_min() const { return lambdas.back(); }
    double lambda_cv_min() const { return lambdas.at(index_cv_min); }
};

inline int count_nonzero(const Vector& b) { return static_cast<int>((b.array() != 0.0).count()); }

/// Warm-started solutions along a decreasing grid.
inline LassoPath lasso_path(const GramLasso& gl, const std::vector<double>& grid, const LassoOptions& opt = {}) {
    LassoPath path;
    path.lambdas = grid;
    path.betas.resize(static_cast<Eigen::Index>(grid.size()), gl.dim());
    Vector b = Vector::Zero(gl.dim());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        gl.solve(grid[i], b, opt);
        path.betas.row(static_cast<Eigen::Index>(i)) = b.transpose();
        path.n_nonzero.push_back(count_nonzero(b));
    }
    return path;
}

inline LassoPath lasso_path(const Matrix& X, const Vector& Y, const std::vector<double>& grid,
                            const LassoOptions& opt = {}) {
    return lasso_path(GramLasso(X, Y), grid, opt);
}

inline LassoPath lasso_path(const PseudoData& pd, const std::vector<double>& grid, const LassoOptions& opt = {}) {
    return lasso_path(pd.X, pd.Y, grid, opt);
}

/// Random partition of `n_rows` rows into k folds whose sizes differ by at most one.
inline std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n_rows, int k_folds, std::uint64_t seed) {
    if (k_folds < 2) throw UsageError("cross-validation needs at least 2 folds");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n_rows));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    auto rng = make_stream(seed, {static_cast<std::uint64_t>(StreamTag::cv_folds)});
    shuffle(perm, rng);
    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k_folds));
    for (std::size_t i = 0; i < perm.size(); ++i) folds[i % folds.size()].push_back(perm[i]);
    for (auto& f : folds) {
        if (f.size() < 2)
            throw FoldSizeError("cross-validation fold has " + std::to_string(f.size()) + " row(s); need >= 2 (rows=" +
                                std::to_string(n_rows) + ", folds=" + std::to_string(k_folds) + ")");
        std::sort(f.begin(), f.end());
    }
    return folds;
}

/// K-fold cross-validation over the rows of (X, Y).  The held-out error of a
/// fold is 1/2 ||Y_f - X_f beta||^2 / |f|; cv_mean averages it over folds and
/// cv_se is the standard error of that average.
inline LassoPath cross_validate(const Matrix& X, const Vector& Y, const std::vector<double>& grid, int k_folds,
                                std::uint64_t seed, const LassoOptions& opt = {}) {
    const auto folds = make_folds(X.rows(), k_folds, seed);
    const GramLasso full(X, Y);
    LassoPath path = lasso_path(full, grid, opt);

    const std::size_t L = grid.size();
    std::vector<std::vector<double>> err(L, std::vector<double>(folds.size(), 0.0));
    const Matrix gram = full.gram();
    const Vector xty = full.xty();
    const double yty = Y.squaredNorm();

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& rows = folds[f];
        Matrix Xf(static_cast<Eigen::Index>(rows.size()), X.cols());
        Vector Yf(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Xf.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
            Yf[static_cast<Eigen::Index>(r)] = Y[rows[r]];
        }
        // training Gram = full Gram minus the held-out rows
        const GramLasso train(gram - Xf.transpose() * Xf, xty - Xf.transpose() * Yf, yty - Yf.squaredNorm());
        const LassoPath fp = lasso_path(train, grid, opt);
        for (std::size_t i = 0; i < L; ++i) {
            const Vector resid = Yf - Xf * fp.betas.row(static_cast<Eigen::Index>(i)).transpose();
            err[i][f] = 0.5 * resid.squaredNorm() / static_cast<double>(rows.size());
        }
    }

    std::vector<double> mean(L), se(L);
    const double K = static_cast<double>(folds.size());
    for (std::size_t i = 0; i < L; ++i) {
        double m = 0.0;
        for (double e : err[i]) m += e;
        m /= K;
        double v = 0.0;
        for (double e : err[i]) v += (e - m) * (e - m);
        v /= (K - 1.0);
        mean[i] = m;
        se[i] = std::sqrt(v / K);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < L; ++i)
        if (mean[i] < mean[best]) best = i;
    path.cv_mean = std::move(mean);
    path.cv_se = std::move(se);
    path.index_cv_min = best;
    return path;
}

inline LassoPath cross_validate(const PseudoData& pd, const std::vector<double>& grid, int k_folds,
                                std::uint64_t seed, const LassoOptions& opt = {}) {
    return cross_validate(pd.X, pd.Y, grid, k_folds, seed, opt);
}

}  // namespace sglarma
