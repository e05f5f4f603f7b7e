#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sglarma/derivatives.hpp"

using namespace sglarma;

namespace {

struct Eval {
    oracle::Instance in;
    ScoreHessian sh;
};

Eval evaluate(std::mt19937_64& gen, long n, long p, long q) {
    Eval e{oracle::random_instance(gen, n, p, q), {}};
    e.sh = score_and_hessian(CountSeries(e.in.y), Design(e.in.X), Params{e.in.beta, e.in.gamma});
    return e;
}

Vector stacked(const oracle::Instance& in) {
    Vector d(in.beta.size() + in.gamma.size());
    d << in.beta, in.gamma;
    return d;
}

}  // namespace

TEST(Derivatives, GradientMatchesFiniteDifferences) {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 30; ++rep) {
        const long n = 10 + rep, p = rep % 6, q = 1 + rep % 3;
        const auto e = evaluate(gen, n, p, q);
        const Vector fd = oracle::fd_gradient(e.in.y, e.in.X, stacked(e.in), q);
        EXPECT_LE(oracle::worst_ratio(e.sh.grad, fd, 1e-6, 1e-7), 1.0) << "rep " << rep;
    }
}

TEST(Derivatives, HessianMatchesFiniteDifferences) {
    std::mt19937_64 gen(12);
    for (int rep = 0; rep < 20; ++rep) {
        const long n = 10 + rep, p = rep % 5, q = 1 + rep % 3;
        const auto e = evaluate(gen, n, p, q);
        const Matrix fd = oracle::fd_hessian(e.in.y, e.in.X, stacked(e.in), q);
        EXPECT_LE(oracle::worst_ratio(e.sh.hess, fd, 1e-5, 1e-7), 1.0) << "rep " << rep;
    }
}

TEST(Derivatives, HessianIsSymmetric) {
    std::mt19937_64 gen(13);
    const auto e = evaluate(gen, 40, 4, 3);
    EXPECT_LE((e.sh.hess - e.sh.hess.transpose()).cwiseAbs().maxCoeff(), 1e-10 * e.sh.hess.cwiseAbs().maxCoeff());
}

TEST(Derivatives, ReducesToPoissonGlmAtZeroGamma) {
    std::mt19937_64 gen(14);
    for (int rep = 0; rep < 20; ++rep) {
        auto in = oracle::random_instance(gen, 30, 1 + rep % 5, 1 + rep % 3);
        in.gamma.setZero();
        const ScoreHessian sh = score_and_hessian(CountSeries(in.y), Design(in.X), Params{in.beta, in.gamma});
        const auto glm = oracle::poisson_glm(in.y, in.X, in.beta);
        const Block b = beta_block(sh, in.X.cols());
        EXPECT_NEAR(sh.loglik, glm.L, 1e-10 * std::abs(glm.L));
        EXPECT_LE((b.grad - glm.score).lpNorm<Eigen::Infinity>(), 1e-10 * glm.score.lpNorm<Eigen::Infinity>());
        EXPECT_LE((b.hess - glm.hess).cwiseAbs().maxCoeff(), 1e-10 * glm.hess.cwiseAbs().maxCoeff());
    }
}

TEST(Derivatives, ScopesAreSubBlocksOfTheFullScope) {
    std::mt19937_64 gen(15);
    const auto in = oracle::random_instance(gen, 35, 4, 2);
    const CountSeries y(in.y);
    const Design d(in.X);
    const Params p{in.beta, in.gamma};
    const ScoreHessian full = score_and_hessian(y, d, p);
    const ScoreHessian bo = score_and_hessian(y, d, p, DerivScope::beta_only(d));
    const ScoreHessian go = score_and_hessian(y, d, p, DerivScope::gamma_only());
    EXPECT_LE((bo.grad - full.grad.head(5)).norm(), 1e-12 * full.grad.norm());
    EXPECT_LE((bo.hess - full.hess.topLeftCorner(5, 5)).norm(), 1e-12 * full.hess.norm());
    EXPECT_LE((go.grad - full.grad.tail(2)).norm(), 1e-12 * full.grad.norm());
    EXPECT_LE((go.hess - full.hess.bottomRightCorner(2, 2)).norm(), 1e-12 * full.hess.norm());

    DerivScope sub{{0, 2, 3}, true};
    const ScoreHessian s = score_and_hessian(y, d, p, sub);
    const std::vector<Eigen::Index> idx{0, 2, 3, 5, 6};
    for (std::size_t i = 0; i < idx.size(); ++i) {
        EXPECT_NEAR(s.grad[i], full.grad[idx[i]], 1e-10 * full.grad.norm());
        for (std::size_t j = 0; j < idx.size(); ++j)
            EXPECT_NEAR(s.hess(i, j), full.hess(idx[i], idx[j]), 1e-10 * full.hess.norm());
    }
}

TEST(Derivatives, ScoreOnlyMatchesFullComputation) {
    std::mt19937_64 gen(16);
    const auto in = oracle::random_instance(gen, 25, 3, 3);
    const CountSeries y(in.y);
    const Design d(in.X);
    const Params p{in.beta, in.gamma};
    const Vector g = score(y, d, p, DerivScope::all(d));
    EXPECT_LE((g - score_and_hessian(y, d, p).grad).norm(), 1e-12 * g.norm());
}

TEST(Derivatives, StoredDerivativesMatchFiniteDifferencesOfW) {
    std::mt19937_64 gen(17);
    const auto in = oracle::random_instance(gen, 15, 2, 2);
    const CountSeries y(in.y);
    const Design d(in.X);
    const Params p{in.beta, in.gamma};
    const DerivState ds = compute_w_derivatives(y, d, p, compute_state(y, d, p));
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < 3; ++k) {
        Vector bp = in.beta, bm = in.beta;
        bp[k] += h;
        bm[k] -= h;
        const auto up = oracle::unrolled(in.y, in.X, bp, in.gamma), um = oracle::unrolled(in.y, in.X, bm, in.gamma);
        for (int t = 0; t < 15; ++t)
            EXPECT_NEAR(ds.dW_dbeta(t, k), static_cast<double>((up.W[t] - um.W[t]) / (2 * h)), 1e-6);
    }
    for (Eigen::Index j = 0; j < 2; ++j) {
        Vector gp = in.gamma, gm = in.gamma;
        gp[j] += h;
        gm[j] -= h;
        const auto up = oracle::unrolled(in.y, in.X, in.beta, gp), um = oracle::unrolled(in.y, in.X, in.beta, gm);
        for (int t = 0; t < 15; ++t)
            EXPECT_NEAR(ds.dW_dgamma(t, j), static_cast<double>((up.W[t] - um.W[t]) / (2 * h)), 1e-6);
    }
}
