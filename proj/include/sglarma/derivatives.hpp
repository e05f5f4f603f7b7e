#pragma once

// First and second derivatives of W_t with respect to delta = (beta, gamma),
// and the score / Hessian of the conditional log-likelihood built from them.
//
// With c_s = 1 + E_s = Y_s exp(-W_s), D_t = dW_t/d delta and
// S_t = d2W_t / d delta d delta', the recursions are (j = 1..min(q, t-1)):
//
//   D_t = (x_t, E_{t-1}, ..., E_{t-q}) - sum_j gamma_j c_{t-j} D_{t-j}
//   S_t = sum_j gamma_j c_{t-j} (D_{t-j} D_{t-j}' - S_{t-j})
//         - sum_j c_{t-j} (e_j D_{t-j}' + D_{t-j} e_j')
//
// where e_j is the unit vector of gamma_j.  Restricted to the beta entries
// this is the textbook beta/beta recursion; the e_j terms produce the
// beta/gamma and gamma/gamma cross terms.  Any subset of beta columns plus
// (optionally) all gamma entries is closed under the recursion, which lets
// callers pay only for the blocks they need.

#include <Eigen/Dense>

#include <numeric>
#include <vector>

#include "sglarma/model.hpp"

namespace sglarma {

/// Which coordinates of delta the derivative recursion tracks.
struct DerivScope {
    std::vector<Eigen::Index> beta_cols;  ///< columns of the design (0 = intercept)
    bool gamma = true;

    static DerivScope all(const Design& design) {
        DerivScope s;
        s.beta_cols.resize(static_cast<std::size_t>(design.p() + 1));
        std::iota(s.beta_cols.begin(), s.beta_cols.end(), Eigen::Index{0});
        return s;
    }
    static DerivScope beta_only(const Design& design) {
        auto s = all(design);
        s.gamma = false;
        return s;
    }
    static DerivScope gamma_only() { return DerivScope{{}, true}; }

    Eigen::Index n_beta() const noexcept { return static_cast<Eigen::Index>(beta_cols.size()); }
    Eigen::Index size(Eigen::Index q) const noexcept { return n_beta() + (gamma ? q : 0); }
};

namespace detail {

/// Runs the recursion forward in time, calling visit(i, D_i, S_i) for every
/// 0-based time index.  Only the last q+1 slices are kept in memory.
template <class Visit>
void w_derivative_recursion(const Design& design, const Params& params, const GlarmaState& state,
                            const DerivScope& scope, bool second_order, Visit&& visit) {
    const Eigen::Index n = design.n();
    const Eigen::Index q = params.q();
    const Eigen::Index nb = scope.n_beta();
    const Eigen::Index m = scope.size(q);
    const Eigen::Index slots = q + 1;

    std::vector<Vector> d_hist(static_cast<std::size_t>(slots), Vector::Zero(m));
    std::vector<Matrix> s_hist;
    if (second_order) s_hist.assign(static_cast<std::size_t>(slots), Matrix::Zero(m, m));

    // c_s = Y_s exp(-W_s), consistent with the (possibly clamped) state
    const Vector c = state.E.array() + 1.0;

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto slot = static_cast<std::size_t>(i % slots);
        Vector& D = d_hist[slot];
        for (Eigen::Index k = 0; k < nb; ++k) D[k] = design.x()(i, scope.beta_cols[static_cast<std::size_t>(k)]);
        if (scope.gamma)
            for (Eigen::Index l = 1; l <= q; ++l) D[nb + l - 1] = (i - l >= 0) ? state.E[i - l] : 0.0;

        const Eigen::Index lags = std::min(q, i);
        for (Eigen::Index j = 1; j <= lags; ++j) {
            const auto prev = static_cast<std::size_t>((i - j) % slots);
            D.noalias() -= (params.gamma[j - 1] * c[i - j]) * d_hist[prev];
        }

        if (second_order) {
            Matrix& S = s_hist[slot];
            S.setZero();
            for (Eigen::Index j = 1; j <= lags; ++j) {
                const auto prev = static_cast<std::size_t>((i - j) % slots);
                const Vector& Dp = d_hist[prev];
                const double gc = params.gamma[j - 1] * c[i - j];
                if (gc != 0.0) {
                    S.noalias() += gc * (Dp * Dp.transpose());
                    S.noalias() -= gc * s_hist[prev];
                }
                if (scope.gamma) {
                    const Eigen::Index g = nb + j - 1;
                    S.row(g) -= c[i - j] * Dp.transpose();
                    S.col(g) -= c[i - j] * Dp;
                }
            }
            visit(i, static_cast<const Vector&>(D), static_cast<const Matrix&>(S));
        } else {
            static const Matrix empty;
            visit(i, static_cast<const Vector&>(D), empty);
        }
    }
}

}  // namespace detail

/// Full per-time derivatives of W_t.  Row/slice i holds time t = i + 1.
struct DerivState {
    Matrix dW_dbeta;                ///< n x (p+1)
    Matrix dW_dgamma;               ///< n x q
    std::vector<Matrix> d2W_bb;     ///< n slices of (p+1) x (p+1)
    std::vector<Matrix> d2W_bg;     ///< n slices of (p+1) x q
    std::vector<Matrix> d2W_gg;     ///< n slices of q x q
};

struct ScoreHessian {
    Vector grad;   ///< ordered (beta of the scope, then gamma)
    Matrix hess;
    bool clamped = false;  ///< the state hit the exp() clamp somewhere
    double loglik = 0.0;   ///< L at the evaluation point
};

inline DerivState compute_w_derivatives(const CountSeries& y, const Design& design, const Params& params,
                                        const GlarmaState& state) {
    check_dimensions(y, design, params);
    if (state.W.size() != y.n() || state.E.size() != y.n())
        throw DimensionError("state length does not match the series");
    const Eigen::Index n = y.n();
    const Eigen::Index nb = design.p() + 1;
    const Eigen::Index q = params.q();

    DerivState out;
    out.dW_dbeta.resize(n, nb);
    out.dW_dgamma.resize(n, q);
    out.d2W_bb.reserve(static_cast<std::size_t>(n));
    out.d2W_bg.reserve(static_cast<std::size_t>(n));
    out.d2W_gg.reserve(static_cast<std::size_t>(n));

    detail::w_derivative_recursion(design, params, state, DerivScope::all(design), true,
                                   [&](Eigen::Index i, const Vector& D, const Matrix& S) {
                                       out.dW_dbeta.row(i) = D.head(nb).transpose();
                                       out.dW_dgamma.row(i) = D.tail(q).transpose();
                                       out.d2W_bb.push_back(S.topLeftCorner(nb, nb));
                                       out.d2W_bg.push_back(S.topRightCorner(nb, q));
                                       out.d2W_gg.push_back(S.bottomRightCorner(q, q));
                                   });
    return out;
}

/// Score and Hessian of L over the coordinates in `scope`:
///   grad = sum_t (Y_t - mu_t) D_t
///   hess = sum_t (Y_t - mu_t) S_t - sum_t mu_t D_t D_t'
inline ScoreHessian score_and_hessian(const CountSeries& y, const Design& design, const Params& params,
                                      const GlarmaState& state, const DerivScope& scope) {
    const Eigen::Index m = scope.size(params.q());
    ScoreHessian out;
    out.grad = Vector::Zero(m);
    out.hess = Matrix::Zero(m, m);
    out.clamped = state.clamped;
    out.loglik = log_likelihood(y, state);

    detail::w_derivative_recursion(design, params, state, scope, true,
                                   [&](Eigen::Index i, const Vector& D, const Matrix& S) {
                                       const double resid = y[i] - state.mu[i];
                                       out.grad.noalias() += resid * D;
                                       out.hess.noalias() += resid * S;
                                       out.hess.noalias() -= state.mu[i] * (D * D.transpose());
                                   });
    if (!out.grad.allFinite() || !out.hess.allFinite())
        throw NumericalError("non-finite score or Hessian");
    return out;
}

inline ScoreHessian score_and_hessian(const CountSeries& y, const Design& design, const Params& params,
                                      const DerivScope& scope) {
    return score_and_hessian(y, design, params, compute_state(y, design, params), scope);
}

/// Score and Hessian over all of delta, ordered (beta_0..beta_p, gamma_1..gamma_q).
inline ScoreHessian score_and_hessian(const CountSeries& y, const Design& design, const Params& params) {
    return score_and_hessian(y, design, params, DerivScope::all(design));
}

/// Gradient of L only (first-order recursion, no Hessian work).
inline Vector score(const CountSeries& y, const Design& design, const Params& params, const DerivScope& scope) {
    const GlarmaState state = compute_state(y, design, params);
    Vector g = Vector::Zero(scope.size(params.q()));
    detail::w_derivative_recursion(design, params, state, scope, false,
                                   [&](Eigen::Index i, const Vector& D, const Matrix&) {
                                       g.noalias() += (y[i] - state.mu[i]) * D;
                                   });
    return g;
}

struct Block {
    Vector grad;
    Matrix hess;
};

/// dL/dbeta and d2L/dbeta dbeta' from a full-scope ScoreHessian.
inline Block beta_block(const ScoreHessian& sh, Eigen::Index n_beta) {
    return {sh.grad.head(n_beta), sh.hess.topLeftCorner(n_beta, n_beta)};
}

/// dL/dgamma and d2L/dgamma dgamma' from a full-scope ScoreHessian.
inline Block gamma_block(const ScoreHessian& sh, Eigen::Index q) {
    return {sh.grad.tail(q), sh.hess.bottomRightCorner(q, q)};
}

}  // namespace sglarma
