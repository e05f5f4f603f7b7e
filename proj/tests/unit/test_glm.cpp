#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sglarma/glm.hpp"
#include "sglarma/simulate.hpp"

using namespace sglarma;

namespace {

struct Data {
    CountSeries y;
    Design d;
    Vector beta;
};

Data poisson_data(std::uint64_t seed, long n, long p) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Matrix x(n, p);
    for (long t = 0; t < n; ++t)
        for (long c = 0; c < p; ++c) x(t, c) = 0.5 * N(gen);
    const Design d = Design::with_intercept(x);
    Vector beta(p + 1);
    beta[0] = 1.0;
    for (long c = 1; c <= p; ++c) beta[c] = 0.4 * N(gen);
    Vector y(n);
    for (long t = 0; t < n; ++t) y[t] = std::poisson_distribution<int>(std::exp(d.x().row(t).dot(beta)))(gen);
    return {CountSeries(y), d, beta};
}

}  // namespace

TEST(Glm, ScoreVanishesAtTheFit) {
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const auto data = poisson_data(s, 200, 4);
        const GlmFit fit = fit_poisson_glm(data.y, data.d);
        ASSERT_TRUE(fit.converged);
        const auto o = oracle::poisson_glm(data.y.values(), data.d.x(), fit.beta);
        EXPECT_LT(o.score.lpNorm<Eigen::Infinity>(), 1e-5 * data.y.values().sum());
        EXPECT_NEAR(fit.deviance,
                    poisson_deviance(data.y.values(), (data.d.x() * fit.beta).array().exp().matrix()), 1e-9);
    }
}

TEST(Glm, DevianceTraceNeverIncreases) {
    const auto data = poisson_data(3, 150, 6);
    const GlmFit fit = fit_poisson_glm(data.y, data.d);
    for (std::size_t i = 1; i < fit.deviance_trace.size(); ++i)
        EXPECT_LE(fit.deviance_trace[i], fit.deviance_trace[i - 1]);
}

TEST(Glm, RecoversCoefficientsOnLargeSamples) {
    const auto data = poisson_data(4, 20000, 3);
    const GlmFit fit = fit_poisson_glm(data.y, data.d);
    EXPECT_LT((fit.beta - data.beta).lpNorm<Eigen::Infinity>(), 0.05);
}

TEST(Glm, InterceptOnlyIsLogMean) {
    const CountSeries y((Vector(6) << 0, 1, 2, 3, 4, 2).finished());
    const Design d = Design::with_intercept(Matrix::Zero(6, 0));
    EXPECT_NEAR(fit_poisson_glm(y, d).beta[0], std::log(2.0), 1e-8);
}

TEST(Glm, NeedsMoreRowsThanCovariates) {
    const auto data = poisson_data(5, 5, 6);
    EXPECT_THROW(fit_poisson_glm(data.y, data.d), UnsupportedError);
}

TEST(Glm, SingularDesignUsesRidgeOrThrows) {
    auto data = poisson_data(6, 50, 2);
    Matrix x = data.d.x();
    x.col(2) = x.col(1);
    const Design dup(x);
    const GlmFit fit = fit_poisson_glm(data.y, dup);
    EXPECT_TRUE(fit.ridge_used);
    GlmOptions strict;
    strict.allow_ridge = false;
    EXPECT_THROW(fit_poisson_glm(data.y, dup, strict), SingularityError);
}

TEST(PenalizedGlm, SatisfiesPenalizedScoreConditions) {
    const auto data = poisson_data(7, 60, 30);
    const double lambda = 5.0;
    const GlmFit fit = fit_poisson_glm_penalized(data.y, data.d, lambda);
    ASSERT_TRUE(fit.converged);
    const auto o = oracle::poisson_glm(data.y.values(), data.d.x(), fit.beta);
    // unpenalized intercept: score 0; others: |score| <= lambda, = lambda sign(b) on the support
    EXPECT_NEAR(o.score[0], 0.0, 1e-3);
    for (Eigen::Index k = 1; k < fit.beta.size(); ++k) {
        if (fit.beta[k] == 0.0)
            EXPECT_LE(std::abs(o.score[k]), lambda * (1 + 1e-3));
        else
            EXPECT_NEAR(o.score[k], lambda * (fit.beta[k] > 0 ? 1 : -1), 1e-2 * lambda);
    }
}

TEST(PenalizedGlm, HugePenaltyGivesInterceptOnly) {
    const auto data = poisson_data(8, 40, 50);
    const GlmFit fit = fit_poisson_glm_penalized(data.y, data.d, 1e6);
    EXPECT_NEAR(fit.beta[0], std::log(data.y.values().mean()), 1e-8);
    EXPECT_EQ(fit.beta.tail(50).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Initializer, UsesPenalizedFitWhenPExceedsN) {
    const auto data = poisson_data(9, 30, 40);
    const GlmFit fit = glm_initializer(data.y, data.d, 1);
    EXPECT_EQ(fit.beta.size(), 41);
    EXPECT_TRUE(fit.beta.allFinite());
    EXPECT_LT((fit.beta.tail(40).array() != 0.0).count(), 30);
}

TEST(Initializer, FallsBackWhenThePlainFitDiverges) {
    // n = 300, p = 100 with many zero counts: the plain MLE does not exist
    const Design d = fourier_design(300, 100);
    Vector b = sparse_beta("5pct");
    auto rng = make_stream(5, {0});
    const CountSeries y = simulate_glarma(d, b, default_gamma_star(1), rng);
    ASSERT_FALSE(fit_poisson_glm(y, d).converged);
    const GlmFit fit = glm_initializer(y, d, 1);
    EXPECT_LT((d.x() * fit.beta).cwiseAbs().maxCoeff(), kWClamp);
}
