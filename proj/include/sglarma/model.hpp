#pragma once

// Poisson GLARMA model: forward recursion and conditional log-likelihood.
//
//   Y_t | F_{t-1} ~ Poisson(mu_t),   mu_t = exp(W_t),
//   W_t = beta' x_t + Z_t,           Z_t  = sum_{j=1..q} gamma_j E_{t-j},
//   E_t = Y_t exp(-W_t) - 1  (t >= 1),   E_t = 0 (t <= 0).
//
// Time is 1-based in the formulas above.  Storage is 0-based: element i of
// every per-time vector holds time t = i + 1, so E_{t-j} lives at index
// i - j and is treated as 0 whenever i - j < 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "sglarma/errors.hpp"

namespace sglarma {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// exp(W_t) is evaluated at W_t clamped to [-kWClamp, kWClamp].
inline constexpr double kWClamp = 50.0;

/// Observed counts Y_1..Y_n (stored as doubles holding non-negative integers).
class CountSeries {
public:
    CountSeries() = default;

    explicit CountSeries(Vector y) : y_(std::move(y)) {
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            const double v = y_[i];
            if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
                throw UsageError("count series entry " + std::to_string(i) + " is not a non-negative integer");
        }
    }

    Eigen::Index n() const noexcept { return y_.size(); }
    const Vector& values() const noexcept { return y_; }
    double operator[](Eigen::Index i) const noexcept { return y_[i]; }

private:
    Vector y_;
};

/// Covariate matrix with the intercept in column 0.
class Design {
public:
    Design() = default;

    /// `x` must already contain the all-ones intercept column at index 0.
    explicit Design(Matrix x) : x_(std::move(x)) {
        if (x_.rows() < 1 || x_.cols() < 1) throw DimensionError("design needs n >= 1 rows and an intercept column");
        if (!x_.allFinite()) throw NumericalError("design contains non-finite entries");
        for (Eigen::Index t = 0; t < x_.rows(); ++t)
            if (x_(t, 0) != 1.0) throw UsageError("design column 0 must be identically 1");
    }

    /// Prepends the intercept column to an n x p covariate block.
    static Design with_intercept(const Matrix& covariates) {
        Matrix x(covariates.rows(), covariates.cols() + 1);
        x.col(0).setOnes();
        x.rightCols(covariates.cols()) = covariates;
        return Design(std::move(x));
    }

    Eigen::Index n() const noexcept { return x_.rows(); }
    Eigen::Index p() const noexcept { return x_.cols() - 1; }
    const Matrix& x() const noexcept { return x_; }

    /// Design restricted to the given columns (indices into 0..p, must start with 0).
    template <class Indices>
    Design select_columns(const Indices& cols) const {
        Matrix sub(x_.rows(), static_cast<Eigen::Index>(cols.size()));
        Eigen::Index c = 0;
        for (auto k : cols) sub.col(c++) = x_.col(static_cast<Eigen::Index>(k));
        return Design(std::move(sub));
    }

private:
    Matrix x_;
};

/// delta = (beta', gamma').  beta has p+1 entries (intercept first), gamma has q >= 1.
struct Params {
    Vector beta;
    Vector gamma;

    Eigen::Index q() const noexcept { return gamma.size(); }
    Eigen::Index size() const noexcept { return beta.size() + gamma.size(); }

    /// Stacked (beta, gamma) vector.
    Vector stacked() const {
        Vector d(size());
        d << beta, gamma;
        return d;
    }

    static Params from_stacked(const Vector& d, Eigen::Index n_beta) {
        return Params{d.head(n_beta), d.tail(d.size() - n_beta)};
    }
};

struct GlarmaState {
    Vector W;
    Vector Z;
    Vector E;
    Vector mu;
    bool clamped = false;
};

inline void check_dimensions(const CountSeries& y, const Design& design, const Params& params) {
    if (y.n() != design.n())
        throw DimensionError("series length " + std::to_string(y.n()) + " != design rows " +
                             std::to_string(design.n()));
    if (params.beta.size() != design.p() + 1)
        throw DimensionError("beta has " + std::to_string(params.beta.size()) + " entries, design has " +
                             std::to_string(design.p() + 1) + " columns");
    if (params.q() < 1) throw DimensionError("gamma must have at least one entry (q >= 1)");
    if (!params.beta.allFinite() || !params.gamma.allFinite()) throw NumericalError("non-finite parameters");
}

/// Forward recursion producing W, Z, E and mu for every t.
inline GlarmaState compute_state(const CountSeries& y, const Design& design, const Params& params) {
    check_dimensions(y, design, params);
    const Eigen::Index n = y.n();
    const Eigen::Index q = params.q();

    GlarmaState s;
    s.W.resize(n);
    s.Z.resize(n);
    s.E.resize(n);
    s.mu.resize(n);
    const Vector linear = design.x() * params.beta;

    for (Eigen::Index i = 0; i < n; ++i) {
        double z = 0.0;
        const Eigen::Index lags = std::min<Eigen::Index>(q, i);
        for (Eigen::Index j = 1; j <= lags; ++j) z += params.gamma[j - 1] * s.E[i - j];
        const double w = linear[i] + z;
        const double wc = std::clamp(w, -kWClamp, kWClamp);
        if (wc != w) s.clamped = true;
        const double mu = std::exp(wc);
        const double e = y[i] * std::exp(-wc) - 1.0;
        if (!std::isfinite(w) || !std::isfinite(e))
            throw NumericalError("non-finite GLARMA state at t = " + std::to_string(i + 1));
        s.Z[i] = z;
        s.W[i] = w;
        s.mu[i] = mu;
        s.E[i] = e;
    }
    return s;
}

/// L(delta) = sum_t (Y_t W_t - exp(W_t)) evaluated on a computed state.
inline double log_likelihood(const CountSeries& y, const GlarmaState& state) {
    return (y.values().array() * state.W.array() - state.mu.array()).sum();
}

inline double log_likelihood(const CountSeries& y, const Design& design, const Params& params) {
    return log_likelihood(y, compute_state(y, design, params));
}

}  // namespace sglarma
