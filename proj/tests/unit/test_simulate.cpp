#include <gtest/gtest.h>

#include "sglarma/simulate.hpp"

using namespace sglarma;

TEST(Fourier, ShapeAndOrthogonality) {
    const Design d = fourier_design(200, 10);
    EXPECT_EQ(d.n(), 200);
    EXPECT_EQ(d.p(), 10);
    const Matrix G = d.x().transpose() * d.x();
    // intercept: n; harmonics: n/2 on the diagonal, 0 off it
    EXPECT_NEAR(G(0, 0), 200.0, 1e-9);
    for (int i = 1; i <= 10; ++i) EXPECT_NEAR(G(i, i), 100.0, 1e-9);
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j)
            if (i != j) {
                EXPECT_NEAR(G(i, j), 0.0, 1e-9);
            }
    EXPECT_NEAR(d.x()(0, 1), std::cos(2.0 * std::numbers::pi / 200.0), 1e-15);
    EXPECT_NEAR(d.x()(0, 2), std::sin(2.0 * std::numbers::pi / 200.0), 1e-15);
    EXPECT_NEAR(d.x()(199, 2), 0.0, 1e-12);
}

TEST(Scenario, SparseBetaPatterns) {
    const Vector b5 = sparse_beta("5pct"), b10 = sparse_beta("10pct");
    EXPECT_EQ(b5.size(), 101);
    EXPECT_EQ((b5.array() != 0.0).count(), 5);
    EXPECT_EQ((b10.array() != 0.0).count(), 10);
    EXPECT_EQ(b5[0], 0.0);
    EXPECT_EQ(b5[1], 1.73);
    EXPECT_EQ(b10[44], -0.07);
    EXPECT_THROW(sparse_beta("20pct"), UsageError);
    EXPECT_EQ(default_gamma_star(2), (Vector(2) << 0.5, 0.25).finished());
    EXPECT_THROW(default_gamma_star(4), UsageError);
}

TEST(Poisson, MomentsMatchAcrossRegimes) {
    auto rng = make_stream(1, {0});
    for (double mu : {0.3, 4.0, 25.0, 400.0}) {
        const int N = 40000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const auto k = static_cast<double>(sample_poisson(mu, rng));
            s += k;
            s2 += k * k;
        }
        const double m = s / N, v = s2 / N - m * m;
        EXPECT_NEAR(m, mu, 4.0 * std::sqrt(mu / N)) << "mu " << mu;
        // var of the sample variance ~ (mu + 2 mu^2) / N
        EXPECT_NEAR(v, mu, 4.0 * std::sqrt((mu + 2 * mu * mu) / N)) << "mu " << mu;
    }
    EXPECT_EQ(sample_poisson(0.0, rng), 0u);
}

TEST(Poisson, SmallMeanProbabilities) {
    auto rng = make_stream(2, {0});
    const double mu = 1.5;
    const int N = 60000;
    std::array<int, 4> c{};
    for (int i = 0; i < N; ++i) {
        const auto k = sample_poisson(mu, rng);
        if (k < 4) ++c[k];
    }
    double pk = std::exp(-mu);
    for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(c[static_cast<std::size_t>(k)], N * pk, 4.0 * std::sqrt(N * pk * (1 - pk))) << "k " << k;
        pk *= mu / (k + 1);
    }
}

TEST(Simulate, ZeroGammaHasTheGlmMean) {
    const Design d = fourier_design(1, 0);
    const Vector b = Vector::Constant(1, 1.0);
    double s = 0.0;
    const int R = 20000;
    for (int r = 0; r < R; ++r) {
        auto rng = make_stream(3, {static_cast<std::uint64_t>(r)});
        s += simulate_glarma(d, b, Vector::Zero(1), rng)[0];
    }
    EXPECT_NEAR(s / R, std::exp(1.0), 3.0 * std::sqrt(std::exp(1.0) / R));
}

TEST(Simulate, ResidualsHaveMeanZeroAndConditionalMeanIsExpW) {
    // E[E_t] = 0 and E[Y_t | past] = exp(W_t) checked at a fixed t over replications
    const Design d = fourier_design(30, 2);
    const Vector b = (Vector(3) << 1.0, 0.4, -0.3).finished();
    const Vector g = (Vector(2) << 0.5, 0.25).finished();
    const int R = 20000;
    double sum_e = 0.0, sum_e2 = 0.0, sum_diff = 0.0, sum_diff2 = 0.0;
    for (int r = 0; r < R; ++r) {
        auto rng = make_stream(4, {static_cast<std::uint64_t>(r)});
        GlarmaSimulator sim(d, b, g);
        for (int t = 0; t < 20; ++t) sim.step(rng);
        const double mu = std::exp(sim.next_w());
        const double y = sim.step(rng);
        const double e = sim.residuals().back();
        sum_e += e;
        sum_e2 += e * e;
        sum_diff += y - mu;
        sum_diff2 += (y - mu) * (y - mu);
    }
    const double me = sum_e / R, se_e = std::sqrt((sum_e2 / R - me * me) / R);
    const double md = sum_diff / R, se_d = std::sqrt((sum_diff2 / R - md * md) / R);
    EXPECT_LT(std::abs(me), 4.0 * se_e);
    EXPECT_LT(std::abs(md), 4.0 * se_d);
}

TEST(Simulate, SameSeedSameSeries) {
    ScenarioSpec spec;
    spec.n = 100;
    spec.p = 4;
    spec.beta_star = (Vector(5) << 1, 0.5, 0, 0, 0.2).finished();
    spec.gamma_star = Vector::Constant(1, 0.5);
    spec.rng_seed = 77;
    const Design d = fourier_design(100, 4);
    EXPECT_EQ(simulate_glarma(spec, d).values(), simulate_glarma(spec, d).values());
    spec.rng_seed = 78;
    const CountSeries other = simulate_glarma(spec, d);
    spec.rng_seed = 77;
    EXPECT_NE(simulate_glarma(spec, d).values(), other.values());
}

TEST(Simulate, DivergenceIsDetected) {
    const Design d = fourier_design(200, 0);
    auto rng = make_stream(5, {0});
    EXPECT_THROW(simulate_glarma(d, Vector::Constant(1, 19.0), Vector::Zero(1), rng), SimulationDivergenceError);

    ScenarioSpec spec;
    spec.n = 200;
    spec.p = 0;
    spec.beta_star = Vector::Constant(1, 19.0);
    spec.gamma_star = Vector::Zero(1);
    EXPECT_THROW(simulate_with_retries(spec, d, 3), SimulationDivergenceError);
    spec.beta_star[0] = 1.0;
    EXPECT_EQ(simulate_with_retries(spec, d).rejections, 0);
}

TEST(Simulate, DimensionChecks) {
    const Design d = fourier_design(10, 2);
    auto rng = make_stream(1, {0});
    EXPECT_THROW(simulate_glarma(d, Vector::Zero(2), Vector::Zero(1), rng), DimensionError);
    EXPECT_THROW(simulate_glarma(d, Vector::Zero(3), Vector::Zero(0), rng), DimensionError);
}
