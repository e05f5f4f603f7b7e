#pragma once

// Variable selection on the pseudo-data and the iterated two-stage pipeline:
//
//   beta^(0) <- Poisson GLM,  gamma^(0) <- 0
//   repeat k = 1, 2, ...
//     gamma_k <- Newton over gamma with beta fixed
//     (Y, X)  <- pseudo-data at (beta, gamma_k)
//     S_k     <- support chosen by the selection method
//     beta    <- refit of beta on {0} ∪ S_k with gamma_k fixed
//   until ||gamma_k - gamma_{k-1}||_inf < gamma_stab_tol

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sglarma/errors.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/glm.hpp"
#include "sglarma/lasso.hpp"
#include "sglarma/metrics.hpp"
#include "sglarma/rng.hpp"

namespace sglarma {

enum class Method { ss_cv, ss_min, fast_ss, lasso_cv, lasso_best, mle_threshold };

inline const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::ss_cv: return "ss_cv";
        case Method::ss_min: return "ss_min";
        case Method::fast_ss: return "fast_ss";
        case Method::lasso_cv: return "lasso_cv";
        case Method::lasso_best: return "lasso_best";
        case Method::mle_threshold: return "mle_threshold";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    for (Method m : {Method::ss_cv, Method::ss_min, Method::fast_ss, Method::lasso_cv, Method::lasso_best,
                     Method::mle_threshold})
        if (s == to_string(m)) return m;
    throw UsageError("unknown method '" + s + "'");
}

/// Methods whose support is a thresholded selection frequency.
inline bool is_stability(Method m) noexcept {
    return m == Method::ss_cv || m == Method::ss_min || m == Method::fast_ss;
}

/// Methods that take a threshold at all.
inline bool uses_threshold(Method m) noexcept { return is_stability(m) || m == Method::mle_threshold; }

/// ss_cv: choose lambda by CV inside each subsample, or once on the full pseudo-data.
enum class CvScope { per_subsample, full_data };

/// Values of beta fed back into the next pipeline iteration.
enum class RefitKind {
    glarma,  ///< maximize L(beta_S, gamma_k) over the selected columns, gamma fixed
    glm,     ///< plain Poisson GLM on the selected columns
};

struct SelectionConfig {
    Method method = Method::ss_cv;
    double threshold = 0.7;
    int n_subsamples = 100;
    int n_lambda = 100;
    double lambda_ratio = 1e-2;
    int k_folds = 10;
    std::uint64_t rng_seed = 0;
    int max_pipeline_iters = 10;
    double gamma_stab_tol = 1e-3;
    CvScope cv_scope = CvScope::per_subsample;
    RefitKind refit = RefitKind::glarma;
    NewtonOptions newton{};
    GammaSearch gamma_search{};  ///< multistart for the gamma Newton step

    void validate() const {
        if (is_stability(method) && !(threshold >= 0.0 && threshold <= 1.0))
            throw UsageError("stability threshold must lie in [0, 1]");
        if (method == Method::mle_threshold && !(threshold >= 0.0))
            throw UsageError("mle_threshold needs a non-negative threshold");
        if (n_subsamples < 2) throw UsageError("n_subsamples must be >= 2");
        if (n_lambda < 1) throw UsageError("n_lambda must be >= 1");
        if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0)) throw UsageError("lambda_ratio must lie in (0, 1)");
        if (k_folds < 2) throw UsageError("k_folds must be >= 2");
        if (max_pipeline_iters < 1) throw UsageError("max_pipeline_iters must be >= 1");
        if (!(gamma_stab_tol > 0.0)) throw UsageError("gamma_stab_tol must be positive");
    }
};

/// Per-iteration pipeline record.
struct IterationRecord {
    int iteration = 0;                    ///< 1-based
    Vector gamma;                         ///< gamma_k
    Vector beta;                          ///< beta after the refit
    std::vector<Eigen::Index> support;    ///< includes 0 when the intercept was selected
    Vector frequencies;
    double seconds = 0.0;                 ///< gamma Newton + pseudo-data + selection + refit
    int failed_subsamples = 0;
};

struct SelectionResult {
    Method method = Method::ss_cv;
    double threshold = 0.0;
    std::vector<Eigen::Index> support;
    Vector frequencies;
    Vector beta_hat;
    Vector gamma_hat;
    int pipeline_iters = 0;
    Matrix gamma_trace;  ///< iters x q
    bool converged = false;
    std::vector<IterationRecord> trace;
};

// ---------------------------------------------------------------------------
// selection on fixed pseudo-data

/// { k : frequencies_k >= threshold }.
inline std::vector<Eigen::Index> support_from_frequencies(const Vector& freq, double threshold) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index k = 0; k < freq.size(); ++k)
        if (freq[k] >= threshold) s.push_back(k);
    return s;
}

inline std::vector<Eigen::Index> nonzero_indices(const Vector& b) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index k = 0; k < b.size(); ++k)
        if (b[k] != 0.0) s.push_back(k);
    return s;
}

/// Number of folds usable on `rows` rows with at least 2 rows per fold.
inline int effective_folds(Eigen::Index rows, int k_folds) {
    const auto k = static_cast<int>(std::min<Eigen::Index>(k_folds, rows / 2));
    if (k < 2) throw FoldSizeError("cross-validation needs at least 4 rows, got " + std::to_string(rows));
    return k;
}

/// lambda chosen by K-fold CV on the full pseudo-data.
inline double cv_lambda(const PseudoData& pd, const SelectionConfig& cfg, std::uint64_t seed) {
    const auto grid = lambda_grid(pd, cfg.n_lambda, cfg.lambda_ratio);
    return cross_validate(pd, grid, effective_folds(pd.Y.size(), cfg.k_folds), seed).lambda_cv_min();
}

struct Frequencies {
    Vector freq;
    int failed = 0;
};

/// Subsample stability selection.  Each of the n_subsamples draws
/// floor((p+1)/2) rows of (Y, X) without replacement and fits the lasso at
/// the CV lambda (ss_cv) or the smallest lambda of the subsample grid (ss_min).
inline Frequencies standard_stability_selection(const PseudoData& pd, const SelectionConfig& cfg,
                                                std::uint64_t seed) {
    if (cfg.method != Method::ss_cv && cfg.method != Method::ss_min)
        throw UsageError("standard stability selection needs method ss_cv or ss_min");
    const Eigen::Index P = pd.Y.size();
    const auto m = static_cast<std::size_t>(P / 2);
    if (m < 1) throw DimensionError("pseudo-data too short to subsample");

    std::optional<double> fixed_lambda;
    if (cfg.method == Method::ss_cv && cfg.cv_scope == CvScope::full_data)
        fixed_lambda = cv_lambda(pd, cfg, derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::cv_folds)}));

    Vector counts = Vector::Zero(P);
    int ok = 0, failed = 0;
    Matrix Xs(static_cast<Eigen::Index>(m), P);
    Vector Ys(static_cast<Eigen::Index>(m));
    for (int s = 0; s < cfg.n_subsamples; ++s) {
        const auto su = static_cast<std::uint64_t>(s);
        auto rng = make_stream(seed, {static_cast<std::uint64_t>(StreamTag::subsample), su});
        const auto rows = sample_without_replacement(static_cast<std::size_t>(P), m, rng);
        for (std::size_t r = 0; r < m; ++r) {
            Xs.row(static_cast<Eigen::Index>(r)) = pd.X.row(static_cast<Eigen::Index>(rows[r]));
            Ys[static_cast<Eigen::Index>(r)] = pd.Y[static_cast<Eigen::Index>(rows[r])];
        }
        try {
            Vector b;
            if (fixed_lambda) {
                b = lasso_solve(Xs, Ys, *fixed_lambda);
            } else {
                const auto grid = lambda_grid(Xs, Ys, cfg.n_lambda, cfg.lambda_ratio);
                if (cfg.method == Method::ss_cv) {
                    const auto cv = cross_validate(
                        Xs, Ys, grid, effective_folds(Xs.rows(), cfg.k_folds),
                        derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::cv_folds), su}));
                    b = cv.betas.row(static_cast<Eigen::Index>(cv.index_cv_min)).transpose();
                } else {
                    b = lasso_solve(Xs, Ys, grid.back());
                }
            }
            counts += (b.array() != 0.0).cast<double>().matrix();
            ++ok;
        } catch (const NumericalError&) {
            ++failed;
        }
    }
    if (ok == 0 || failed * 5 > cfg.n_subsamples)
        throw NumericalError(std::to_string(failed) + " of " + std::to_string(cfg.n_subsamples) +
                             " stability subsamples failed (at most 20% allowed)");
    return {counts / static_cast<double>(ok), failed};
}

/// Fast stability selection: fraction of the lambda grid on which each
/// coefficient of the full-data lasso path is nonzero.
inline Vector fast_stability_selection(const PseudoData& pd, const SelectionConfig& cfg) {
    const auto grid = lambda_grid(pd, cfg.n_lambda, cfg.lambda_ratio);
    const LassoPath path = lasso_path(pd, grid);
    Vector freq(pd.Y.size());
    for (Eigen::Index k = 0; k < freq.size(); ++k)
        freq[k] = static_cast<double>((path.betas.col(k).array() != 0.0).count()) / static_cast<double>(grid.size());
    return freq;
}

/// Plain lasso support: lambda by CV (lasso_cv) or the lambda maximizing
/// TPR - FPR against the known truth (lasso_best, ties toward larger lambda).
inline std::vector<Eigen::Index> plain_lasso_select(const PseudoData& pd, const SelectionConfig& cfg,
                                                    std::uint64_t seed, const std::optional<Vector>& truth = {}) {
    const auto grid = lambda_grid(pd, cfg.n_lambda, cfg.lambda_ratio);
    if (cfg.method == Method::lasso_cv) {
        const auto cv = cross_validate(pd, grid, effective_folds(pd.Y.size(), cfg.k_folds),
                                       derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::cv_folds)}));
        return nonzero_indices(cv.betas.row(static_cast<Eigen::Index>(cv.index_cv_min)).transpose());
    }
    if (cfg.method == Method::lasso_best) {
        if (!truth) throw UsageError("lasso_best needs the true coefficients (benchmark only)");
        if (truth->size() != pd.Y.size()) throw DimensionError("truth length does not match the pseudo-data");
        const LassoPath path = lasso_path(pd, grid);
        std::size_t best = 0;
        double best_gap = -2.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Vector b = path.betas.row(static_cast<Eigen::Index>(i)).transpose();
            const double gap = rate_gap(compute_tpr_fpr(nonzero_indices(b), *truth));
            if (gap > best_gap) {  // strict: earlier (larger) lambda wins ties
                best_gap = gap;
                best = i;
            }
        }
        return nonzero_indices(path.betas.row(static_cast<Eigen::Index>(best)).transpose());
    }
    throw UsageError(std::string("plain_lasso_select does not handle method ") + to_string(cfg.method));
}

// ---------------------------------------------------------------------------
// pipeline

/// Re-estimates beta on {0} ∪ support (other entries set to 0).  The
/// glarma refit falls back to the subset GLM when the fit at gamma overflows.
inline Vector refit_beta(const CountSeries& y, const Design& design, const std::vector<Eigen::Index>& support,
                         const Vector& gamma, const Vector& beta_start, RefitKind kind,
                         const NewtonOptions& opt = {}) {
    std::vector<Eigen::Index> cols{0};
    for (auto k : support)
        if (k >= 1) cols.push_back(k);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    const Design sub = design.select_columns(cols);

    Vector b_sub;
    if (kind == RefitKind::glm) {
        b_sub = fit_poisson_glm(y, sub).beta;
    } else {
        Vector init(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) init[static_cast<Eigen::Index>(c)] = beta_start[cols[c]];
        try {
            b_sub = fit_beta_newton(y, sub, init, gamma, opt).params.beta;
        } catch (const NumericalError&) {
            // At a strongly negative gamma the feedback can overflow for every beta
            // near the start.  Retry from the GLM on the subset, and keep that GLM
            // fit if the retry fails too.
            b_sub = fit_poisson_glm(y, sub).beta;
            try {
                b_sub = fit_beta_newton(y, sub, b_sub, gamma, opt).params.beta;
            } catch (const NumericalError&) {
            }
        }
    }
    Vector full = Vector::Zero(design.p() + 1);
    for (std::size_t c = 0; c < cols.size(); ++c) full[cols[c]] = b_sub[static_cast<Eigen::Index>(c)];
    return full;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void finish(SelectionResult& r) {
    const auto& last = r.trace.back();
    r.support = last.support;
    r.frequencies = last.frequencies;
    r.beta_hat = last.beta;
    r.gamma_hat = last.gamma;
    r.pipeline_iters = static_cast<int>(r.trace.size());
    r.gamma_trace.resize(r.pipeline_iters, last.gamma.size());
    for (int k = 0; k < r.pipeline_iters; ++k)
        r.gamma_trace.row(k) = r.trace[static_cast<std::size_t>(k)].gamma.transpose();
}

inline Vector indicator(const std::vector<Eigen::Index>& support, Eigen::Index P) {
    Vector f = Vector::Zero(P);
    for (auto k : support) f[k] = 1.0;
    return f;
}

}  // namespace detail

/// Thresholded joint MLE: one joint Newton fit started at the GLM beta and the
/// gamma step's estimate at that beta (gamma = 0 without the search), then
/// { i >= 1 : |beta_i| >= t } for each threshold.
inline std::vector<SelectionResult> mle_threshold_select(const CountSeries& y, const Design& design, Eigen::Index q,
                                                         const SelectionConfig& cfg,
                                                         const std::vector<double>& thresholds) {
    const auto t0 = std::chrono::steady_clock::now();
    const GlmFit init = glm_initializer(y, design, derive_seed(cfg.rng_seed, {uint64_t(StreamTag::pipeline), 0}));
    const NewtonReport joint = fit_glarma_from(y, design, init.beta, q, cfg.newton, cfg.gamma_search);
    const double secs = detail::seconds_since(t0);
    std::vector<SelectionResult> out;
    for (double t : thresholds) {
        SelectionResult r;
        r.method = Method::mle_threshold;
        r.threshold = t;
        IterationRecord rec;
        rec.iteration = 1;
        rec.gamma = joint.params.gamma;
        rec.beta = joint.params.beta;
        rec.support = select_by_thresholding_mle(joint, t);
        rec.frequencies = detail::indicator(rec.support, design.p() + 1);
        rec.seconds = secs;
        r.trace.push_back(std::move(rec));
        r.converged = joint.converged;
        detail::finish(r);
        out.push_back(std::move(r));
    }
    return out;
}

/// Runs the pipeline once per threshold.  Branches that are still in the same
/// state share the gamma step, the pseudo-data and the selection frequencies,
/// so the first iteration is computed once for all thresholds.  Methods
/// without a threshold produce a single result and ignore `thresholds`.
inline std::vector<SelectionResult> run_pipeline_thresholds(const CountSeries& y, const Design& design,
                                                            Eigen::Index q, const SelectionConfig& cfg,
                                                            std::vector<double> thresholds,
                                                            const std::optional<Vector>& truth = {}) {
    cfg.validate();
    if (q < 1) throw UsageError("q must be >= 1");
    if (y.n() != design.n()) throw DimensionError("series length != design rows");
    if (!uses_threshold(cfg.method)) thresholds = {0.0};
    if (thresholds.empty()) throw UsageError("no thresholds given");
    for (double t : thresholds) {
        SelectionConfig c = cfg;
        c.threshold = t;
        c.validate();
    }
    if (cfg.method == Method::mle_threshold) return mle_threshold_select(y, design, q, cfg, thresholds);
    if (cfg.method == Method::lasso_best && !truth) throw UsageError("lasso_best needs the true coefficients");

    const Eigen::Index P = design.p() + 1;
    const auto init_t0 = std::chrono::steady_clock::now();
    const GlmFit init = glm_initializer(y, design, derive_seed(cfg.rng_seed, {uint64_t(StreamTag::pipeline), 0}));
    const double init_secs = detail::seconds_since(init_t0);

    struct Branch {
        SelectionResult res;
        Vector beta;
        Vector gamma;
        bool done = false;
    };
    std::vector<Branch> branches(thresholds.size());
    for (std::size_t b = 0; b < thresholds.size(); ++b) {
        branches[b].res.method = cfg.method;
        branches[b].res.threshold = thresholds[b];
        branches[b].beta = init.beta;
        branches[b].gamma = Vector::Zero(q);
    }

    for (int k = 1; k <= cfg.max_pipeline_iters; ++k) {
        const std::uint64_t iter_seed = derive_seed(cfg.rng_seed, {uint64_t(StreamTag::pipeline), uint64_t(k)});
        std::vector<char> handled(branches.size(), 0);
        for (std::size_t lead = 0; lead < branches.size(); ++lead) {
            if (branches[lead].done || handled[lead]) continue;
            // branches sharing the lead's state
            std::vector<std::size_t> group;
            for (std::size_t b = lead; b < branches.size(); ++b)
                if (!branches[b].done && !handled[b] && branches[b].beta == branches[lead].beta &&
                    branches[b].gamma == branches[lead].gamma)
                    group.push_back(b);

            const auto t0 = std::chrono::steady_clock::now();
            const Vector beta_k = branches[lead].beta;
            const Vector gamma_prev = branches[lead].gamma;
            const NewtonReport gn = fit_gamma_multistart(y, design, beta_k, gamma_prev, cfg.newton, cfg.gamma_search);
            const Vector gamma_k = gn.params.gamma;
            const PseudoData pd = build_pseudo_data(y, design, beta_k, gamma_k);

            Vector freq;
            int failed = 0;
            std::vector<Eigen::Index> plain_support;
            switch (cfg.method) {
                case Method::ss_cv:
                case Method::ss_min: {
                    auto f = standard_stability_selection(pd, cfg, iter_seed);
                    freq = std::move(f.freq);
                    failed = f.failed;
                    break;
                }
                case Method::fast_ss: freq = fast_stability_selection(pd, cfg); break;
                default:
                    plain_support = plain_lasso_select(pd, cfg, iter_seed, truth);
                    freq = detail::indicator(plain_support, P);
                    break;
            }
            const double shared_secs = detail::seconds_since(t0) + (k == 1 ? init_secs : 0.0);

            for (std::size_t b : group) {
                handled[b] = 1;
                Branch& br = branches[b];
                const auto t1 = std::chrono::steady_clock::now();
                IterationRecord rec;
                rec.iteration = k;
                rec.gamma = gamma_k;
                rec.support = is_stability(cfg.method) ? support_from_frequencies(freq, br.res.threshold)
                                                       : plain_support;
                rec.frequencies = freq;
                rec.failed_subsamples = failed;
                rec.beta = refit_beta(y, design, rec.support, gamma_k, beta_k, cfg.refit, cfg.newton);
                rec.seconds = shared_secs + detail::seconds_since(t1);
                br.res.trace.push_back(std::move(rec));
                br.beta = br.res.trace.back().beta;
                br.gamma = gamma_k;
                if ((gamma_k - gamma_prev).lpNorm<Eigen::Infinity>() < cfg.gamma_stab_tol) {
                    br.res.converged = true;
                    br.done = true;
                }
            }
        }
        if (std::all_of(branches.begin(), branches.end(), [](const Branch& b) { return b.done; })) break;
    }

    std::vector<SelectionResult> out;
    for (auto& br : branches) {
        detail::finish(br.res);
        out.push_back(std::move(br.res));
    }
    return out;
}

/// Pipeline for a single threshold (config.threshold).
inline SelectionResult run_pipeline(const CountSeries& y, const Design& design, Eigen::Index q,
                                    const SelectionConfig& cfg, const std::optional<Vector>& truth = {}) {
    return run_pipeline_thresholds(y, design, q, cfg, {cfg.threshold}, truth).front();
}

}  // namespace sglarma
