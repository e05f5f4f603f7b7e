#pragma once

// Poisson GLM (log link) used to initialize beta, ignoring the MA feedback.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "sglarma/errors.hpp"
#include "sglarma/lasso.hpp"
#include "sglarma/model.hpp"

namespace sglarma {

struct GlmFit {
    Vector beta;
    bool converged = false;
    int iterations = 0;
    double deviance = 0.0;
    bool ridge_used = false;              ///< the weighted normal equations needed the 1e-8 ridge
    std::vector<double> deviance_trace;   ///< deviance after each accepted iteration
};

struct GlmOptions {
    int max_iter = 25;
    double tol = 1e-8;
    int max_halvings = 10;
    bool allow_ridge = true;  ///< on singular normal equations add 1e-8 I instead of throwing
};

/// Poisson deviance 2 sum [y log(y/mu) - (y - mu)], with 0 log 0 = 0.
inline double poisson_deviance(const Vector& y, const Vector& mu) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        d += (yi > 0.0 ? yi * std::log(yi / mu[i]) : 0.0) - (yi - mu[i]);
    }
    return 2.0 * d;
}

namespace detail {

inline Vector solve_weighted_normal(const Matrix& X, const Vector& w, const Vector& z, bool allow_ridge,
                                    bool& ridge_used) {
    Matrix A = X.transpose() * w.asDiagonal() * X;
    const Vector rhs = X.transpose() * w.cwiseProduct(z);
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) return llt.solve(rhs);
    if (!allow_ridge) throw SingularityError("weighted normal equations of the Poisson GLM are singular");
    ridge_used = true;
    A.diagonal().array() += 1e-8;
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SingularityError("ridge-stabilized normal equations failed");
    return ldlt.solve(rhs);
}

inline Vector safe_exp(const Vector& eta) { return eta.cwiseMax(-kWClamp).cwiseMin(kWClamp).array().exp(); }

}  // namespace detail

/// Iteratively reweighted least squares for the Poisson log-link GLM.
/// Stops when the relative deviance change falls below `tol`.
inline GlmFit fit_poisson_glm(const CountSeries& y, const Design& design, const GlmOptions& opt = {}) {
    if (y.n() != design.n()) throw DimensionError("series length != design rows");
    if (design.n() <= design.p())
        throw UnsupportedError("plain Poisson GLM needs n > p; use fit_poisson_glm_penalized");
    const Matrix& X = design.x();
    const Vector& yv = y.values();

    GlmFit fit;
    // standard start: mu = y + 0.1
    Vector mu = (yv.array() + 0.1).matrix();
    Vector eta = mu.array().log();
    Vector z = eta + (yv - mu).cwiseQuotient(mu);
    fit.beta = detail::solve_weighted_normal(X, mu, z, opt.allow_ridge, fit.ridge_used);
    mu = detail::safe_exp(X * fit.beta);
    double dev = poisson_deviance(yv, mu);
    fit.iterations = 1;
    fit.deviance_trace.push_back(dev);

    while (fit.iterations < opt.max_iter) {
        eta = X * fit.beta;
        z = eta + (yv - mu).cwiseQuotient(mu);
        Vector cand = detail::solve_weighted_normal(X, mu, z, opt.allow_ridge, fit.ridge_used);
        Vector cand_mu = detail::safe_exp(X * cand);
        double cand_dev = poisson_deviance(yv, cand_mu);
        for (int h = 0; h < opt.max_halvings && !(cand_dev <= dev); ++h) {
            cand = 0.5 * (cand + fit.beta);
            cand_mu = detail::safe_exp(X * cand);
            cand_dev = poisson_deviance(yv, cand_mu);
        }
        ++fit.iterations;
        if (!(cand_dev <= dev)) break;  // no acceptable step; keep the current iterate
        const double rel = std::abs(cand_dev - dev) / (std::abs(cand_dev) + 0.1);
        fit.beta = std::move(cand);
        mu = std::move(cand_mu);
        dev = cand_dev;
        fit.deviance_trace.push_back(dev);
        if (rel < opt.tol) {
            fit.converged = true;
            break;
        }
    }
    fit.deviance = dev;
    if (fit.converged && !fit.beta.allFinite()) throw NumericalError("GLM fit produced non-finite coefficients");
    return fit;
}

/// l1-penalized Poisson regression, minimizing
///   sum_t (mu_t - y_t eta_t) + lambda * sum_{k>=1} |beta_k|
/// with the intercept left unpenalized.  Each outer IRLS step solves the
/// weighted quadratic by coordinate descent.
inline GlmFit fit_poisson_glm_penalized(const CountSeries& y, const Design& design, double lambda,
                                        const GlmOptions& opt = {.max_iter = 100}) {
    if (y.n() != design.n()) throw DimensionError("series length != design rows");
    if (!(lambda >= 0.0)) throw UsageError("penalized GLM needs lambda >= 0");
    const Matrix& X = design.x();
    const Vector& yv = y.values();
    const Eigen::Index P = design.p() + 1;
    const double ybar = yv.mean();
    if (!(ybar > 0.0)) throw UsageError("penalized GLM needs at least one positive count");

    Vector weights = Vector::Ones(P);
    weights[0] = 0.0;
    auto objective = [&](const Vector& b, const Vector& mu) {
        return (mu - yv.cwiseProduct(X * b)).sum() + lambda * b.tail(P - 1).lpNorm<1>();
    };

    GlmFit fit;
    fit.beta = Vector::Zero(P);
    fit.beta[0] = std::log(ybar);
    Vector mu = detail::safe_exp(X * fit.beta);
    double obj = objective(fit.beta, mu);

    while (fit.iterations < opt.max_iter) {
        const Vector eta = X * fit.beta;
        const Vector z = eta + (yv - mu).cwiseQuotient(mu);
        const Matrix Xw = mu.cwiseSqrt().asDiagonal() * X;
        const Vector zw = mu.cwiseSqrt().cwiseProduct(z);
        const GramLasso gl(Xw, zw);
        Vector cand = fit.beta;
        gl.solve(lambda, cand, {}, &weights);

        Vector cand_mu = detail::safe_exp(X * cand);
        double cand_obj = objective(cand, cand_mu);
        for (int h = 0; h < opt.max_halvings && !(cand_obj <= obj); ++h) {
            cand = 0.5 * (cand + fit.beta);
            cand_mu = detail::safe_exp(X * cand);
            cand_obj = objective(cand, cand_mu);
        }
        ++fit.iterations;
        if (!(cand_obj <= obj)) break;
        const double rel = std::abs(cand_obj - obj) / (std::abs(cand_obj) + 0.1);
        const double step = (cand - fit.beta).lpNorm<Eigen::Infinity>();
        fit.beta = std::move(cand);
        mu = std::move(cand_mu);
        obj = cand_obj;
        fit.deviance_trace.push_back(poisson_deviance(yv, mu));
        if (rel < opt.tol && step < 1e-6) {
            fit.converged = true;
            break;
        }
    }
    fit.deviance = poisson_deviance(yv, mu);
    return fit;
}

/// Penalty for the penalized initializer when p >= n: the cross-validated
/// lambda of the pseudo-data lasso at beta = (log mean y, 0, ..., 0), gamma = 0.
inline double default_initializer_lambda(const CountSeries& y, const Design& design, std::uint64_t seed,
                                         int k_folds = 10, int n_lambda = 100, double ratio = 1e-2) {
    const Eigen::Index P = design.p() + 1;
    Vector beta = Vector::Zero(P);
    const double ybar = y.values().mean();
    if (!(ybar > 0.0)) throw UsageError("penalized GLM needs at least one positive count");
    beta[0] = std::log(ybar);
    const Vector mu = detail::safe_exp(design.x() * beta);
    const Vector grad = design.x().transpose() * (y.values() - mu);
    const Matrix neg_hess = design.x().transpose() * mu.asDiagonal() * design.x();
    const PseudoData pd = pseudo_data_from(grad, neg_hess, beta);
    const auto grid = lambda_grid(pd, n_lambda, ratio);
    const int folds = static_cast<int>(std::min<Eigen::Index>(k_folds, std::max<Eigen::Index>(2, P / 2)));
    return cross_validate(pd, grid, folds, seed).lambda_cv_min();
}

/// beta^(0): plain GLM when n > p and it converges, penalized GLM
/// (cross-validated lambda) otherwise.  The plain GLM diverges when some
/// coefficients have no finite MLE (many zero counts relative to n / p).
inline GlmFit glm_initializer(const CountSeries& y, const Design& design, std::uint64_t seed) {
    if (design.n() > design.p()) {
        GlmFit plain = fit_poisson_glm(y, design);
        if (plain.converged) return plain;
    }
    return fit_poisson_glm_penalized(y, design, default_initializer_lambda(y, design, seed));
}

}  // namespace sglarma
