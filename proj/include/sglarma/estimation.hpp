#pragma once

// Newton-Raphson maximization of L over any closed block of delta:
// the classical joint estimator (all of beta and gamma), the gamma-only
// estimator with beta held fixed, and the beta-only refit used after selection.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sglarma/derivatives.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/model.hpp"

namespace sglarma {

struct NewtonOptions {
    double tol = 1e-6;            ///< stop once the max-norm of a full Newton update is below this
    int max_iter = 100;
    int max_halvings = 40;
    double max_condition = 1e12;  ///< larger condition estimates of -H raise SingularHessianError
};

struct NewtonReport {
    Params params;
    int iterations = 0;
    double final_step_norm = 0.0;
    std::vector<double> loglik_trace;  ///< L at the start and after every accepted step
    bool converged = false;
    int damped_steps = 0;              ///< iterations that fell back to a short gradient step
};

namespace detail {

inline Params apply_step(const Params& p, const DerivScope& scope, const Vector& step) {
    Params out = p;
    const Eigen::Index nb = scope.n_beta();
    for (Eigen::Index k = 0; k < nb; ++k) out.beta[scope.beta_cols[static_cast<std::size_t>(k)]] += step[k];
    if (scope.gamma) out.gamma += step.tail(p.q());
    return out;
}

inline NewtonReport newton_maximize(const CountSeries& y, const Design& design, const Params& init,
                                    const DerivScope& scope, const NewtonOptions& opt) {
    if (!(opt.tol > 0.0)) throw UsageError("Newton tolerance must be positive");
    NewtonReport rep;
    rep.params = init;
    GlarmaState state = compute_state(y, design, init);
    double L = log_likelihood(y, state);
    rep.loglik_trace.push_back(L);
    ScoreHessian sh = score_and_hessian(y, design, rep.params, state, scope);

    while (rep.iterations < opt.max_iter) {
        ++rep.iterations;
        const Eigen::LDLT<Matrix> ldlt(-sh.hess);
        if (ldlt.info() != Eigen::Success || !(ldlt.rcond() * opt.max_condition > 1.0))
            throw SingularHessianError("Hessian is numerically singular (condition estimate > " +
                                       std::to_string(opt.max_condition) + ")");
        Vector d = ldlt.solve(sh.grad);
        const bool pd = ldlt.isPositive() && d.allFinite();
        if (pd && d.lpNorm<Eigen::Infinity>() < opt.tol) {
            // converged; g'd may have lost its sign to roundoff here, so take the step only if L does not drop
            rep.final_step_norm = d.lpNorm<Eigen::Infinity>();
            rep.converged = true;
            Params cand = apply_step(rep.params, scope, d);
            try {
                GlarmaState cstate = compute_state(y, design, cand);
                const double Lc = log_likelihood(y, cstate);
                if ((!cstate.clamped || state.clamped) && Lc >= L) {
                    rep.params = std::move(cand);
                    rep.loglik_trace.push_back(Lc);
                }
            } catch (const NumericalError&) {
            }
            break;
        }
        const bool ascent = pd && sh.grad.dot(d) > 0.0;
        if (!ascent) {
            const double gn = sh.grad.norm();
            if (!(gn > 0.0)) {
                rep.final_step_norm = 0.0;
                rep.converged = true;
                break;
            }
            d = (0.1 / gn) * sh.grad;
            ++rep.damped_steps;
        }
        const double full = d.lpNorm<Eigen::Infinity>();

        // step-halving until L does not decrease, the step does not newly hit the
        // clamp, and the derivatives at the new point are finite
        double t = 1.0;
        bool accepted = false;
        Params cand;
        GlarmaState cstate;
        ScoreHessian csh;
        double Lc = 0.0;
        for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
            cand = apply_step(rep.params, scope, t * d);
            try {
                cstate = compute_state(y, design, cand);
            } catch (const NumericalError&) {
                continue;
            }
            Lc = log_likelihood(y, cstate);
            if ((!cstate.clamped || state.clamped) && Lc >= L) {
                try {
                    csh = score_and_hessian(y, design, cand, cstate, scope);
                } catch (const NumericalError&) {
                    continue;
                }
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            rep.final_step_norm = full;
            break;
        }
        rep.params = std::move(cand);
        state = std::move(cstate);
        sh = std::move(csh);
        L = Lc;
        rep.loglik_trace.push_back(L);
        rep.final_step_norm = t * full;
    }
    return rep;
}

}  // namespace detail

/// Joint Newton-Raphson over delta = (beta, gamma).
inline NewtonReport fit_joint_newton(const CountSeries& y, const Design& design, const Params& init,
                                     const NewtonOptions& opt = {}) {
    check_dimensions(y, design, init);
    return detail::newton_maximize(y, design, init, DerivScope::all(design), opt);
}

/// Newton-Raphson over gamma with beta fixed at `beta0`.  The returned beta is
/// `beta0` unchanged.
inline NewtonReport fit_gamma_newton(const CountSeries& y, const Design& design, const Vector& beta0,
                                     const Vector& gamma_init, const NewtonOptions& opt = {}) {
    const Params init{beta0, gamma_init};
    check_dimensions(y, design, init);
    return detail::newton_maximize(y, design, init, DerivScope::gamma_only(), opt);
}

/// gamma_init = 0 (the default starting point).
inline NewtonReport fit_gamma_newton(const CountSeries& y, const Design& design, const Vector& beta0,
                                     Eigen::Index q, const NewtonOptions& opt = {}) {
    return fit_gamma_newton(y, design, beta0, Vector::Zero(q), opt);
}

/// Coarse grid over gamma used to seed the gamma Newton iterations.  L is
/// often multimodal in gamma when intensities are small: a spurious local
/// maximum sits next to gamma = 0, so Newton started only from 0 can stall there.
struct GammaSearch {
    bool enabled = true;
    double lo = -0.5;
    double hi = 1.0;
    double step = 0.1;
    long max_points = 20000;  ///< above this the grid is searched one axis at a time
};

/// Grid point with the largest L among the states that stay inside the clamp.
/// Returns nullopt when every point clamps or fails.
inline std::optional<Vector> gamma_grid_start(const CountSeries& y, const Design& design, const Vector& beta,
                                              Eigen::Index q, const GammaSearch& gs = {}) {
    std::vector<double> axis;
    if (!(gs.step > 0.0)) throw UsageError("gamma search step must be positive");
    for (long i = 0; gs.lo + static_cast<double>(i) * gs.step <= gs.hi + 1e-12; ++i) {
        const double g = gs.lo + static_cast<double>(i) * gs.step;
        axis.push_back(std::abs(g) < 1e-12 ? 0.0 : g);
    }
    if (axis.empty()) throw UsageError("empty gamma search grid");

    // when beta alone already drives W into the clamp, clamped points are not held against gamma
    const bool base_clamped = compute_state(y, design, Params{beta, Vector::Zero(q)}).clamped;
    std::optional<Vector> best;
    double best_L = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Vector& g) {
        try {
            const GlarmaState s = compute_state(y, design, Params{beta, g});
            if (s.clamped && !base_clamped) return;
            const double L = log_likelihood(y, s);
            if (L > best_L) {
                best_L = L;
                best = g;
            }
        } catch (const NumericalError&) {
        }
    };

    const auto m = static_cast<long>(axis.size());
    double total = 1.0;
    for (Eigen::Index j = 0; j < q; ++j) total *= static_cast<double>(m);
    if (total <= static_cast<double>(gs.max_points)) {
        std::vector<long> idx(static_cast<std::size_t>(q), 0);
        Vector g(q);
        for (;;) {
            for (Eigen::Index j = 0; j < q; ++j) g[j] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            consider(g);
            Eigen::Index j = 0;
            while (j < q && ++idx[static_cast<std::size_t>(j)] == m) idx[static_cast<std::size_t>(j++)] = 0;
            if (j == q) break;
        }
    } else {
        for (Eigen::Index j = 0; j < q; ++j)
            for (double a : axis) {
                Vector g = Vector::Zero(q);
                g[j] = a;
                consider(g);
            }
    }
    return best;
}

/// Gamma Newton from `gamma_init` and from the best grid point; keeps the run
/// ending at the larger L (the `gamma_init` run on ties).
inline NewtonReport fit_gamma_multistart(const CountSeries& y, const Design& design, const Vector& beta0,
                                         const Vector& gamma_init, const NewtonOptions& opt = {},
                                         const GammaSearch& gs = {}) {
    std::optional<NewtonReport> best;
    try {
        best = fit_gamma_newton(y, design, beta0, gamma_init, opt);
    } catch (const NumericalError&) {
        if (!gs.enabled) throw;
    }
    if (!gs.enabled) return *best;
    if (const auto start = gamma_grid_start(y, design, beta0, gamma_init.size(), gs)) {
        try {
            NewtonReport alt = fit_gamma_newton(y, design, beta0, *start, opt);
            if (!best || alt.loglik_trace.back() > best->loglik_trace.back()) best = std::move(alt);
        } catch (const NumericalError&) {
            if (!best) throw;
        }
    }
    if (!best) throw NumericalError("gamma Newton failed from every starting point");
    return *best;
}

/// Full (beta, gamma) fit from scratch: Poisson GLM for beta, the gamma
/// multistart at that beta, then joint Newton-Raphson.  `glm_beta` is the
/// initial beta (usually from fit_poisson_glm).
inline NewtonReport fit_glarma_from(const CountSeries& y, const Design& design, const Vector& glm_beta,
                                    Eigen::Index q, const NewtonOptions& opt = {}, const GammaSearch& gs = {}) {
    Vector gamma0 = Vector::Zero(q);
    if (gs.enabled) gamma0 = fit_gamma_multistart(y, design, glm_beta, gamma0, opt, gs).params.gamma;
    return fit_joint_newton(y, design, Params{glm_beta, gamma0}, opt);
}

/// Newton-Raphson over beta with gamma fixed.
inline NewtonReport fit_beta_newton(const CountSeries& y, const Design& design, const Vector& beta_init,
                                    const Vector& gamma, const NewtonOptions& opt = {}) {
    const Params init{beta_init, gamma};
    check_dimensions(y, design, init);
    return detail::newton_maximize(y, design, init, DerivScope::beta_only(design), opt);
}

/// { i >= 1 : |beta_hat_i| >= threshold }.
inline std::vector<Eigen::Index> select_by_thresholding_mle(const NewtonReport& report, double threshold) {
    std::vector<Eigen::Index> support;
    const Vector& b = report.params.beta;
    for (Eigen::Index i = 1; i < b.size(); ++i)
        if (std::abs(b[i]) >= threshold) support.push_back(i);
    return support;
}

}  // namespace sglarma
