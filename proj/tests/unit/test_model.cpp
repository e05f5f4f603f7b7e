#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sglarma/model.hpp"

using namespace sglarma;

namespace {

struct Case {
    CountSeries y;
    Design design;
    Params params;
};

Case from_instance(const oracle::Instance& in) {
    return {CountSeries(in.y), Design(in.X), Params{in.beta, in.gamma}};
}

}  // namespace

TEST(State, MatchesHandUnrolledRecursion) {
    std::mt19937_64 gen(1);
    for (int rep = 0; rep < 40; ++rep) {
        const long n = 5 + rep, p = rep % 4, q = 1 + rep % 3;
        const auto in = oracle::random_instance(gen, n, p, q);
        const auto c = from_instance(in);
        const GlarmaState s = compute_state(c.y, c.design, c.params);
        const auto u = oracle::unrolled(in.y, in.X, in.beta, in.gamma);
        for (long t = 0; t < n; ++t) {
            EXPECT_NEAR(s.W[t], static_cast<double>(u.W[t]), 1e-12 * (1 + std::abs(s.W[t])));
            EXPECT_NEAR(s.E[t], static_cast<double>(u.E[t]), 1e-12 * (1 + std::abs(s.E[t])));
            EXPECT_NEAR(s.mu[t], std::exp(s.W[t]), 1e-12 * s.mu[t]);
            EXPECT_NEAR(s.W[t] - s.Z[t], in.X.row(t).dot(in.beta), 1e-12 * (1 + std::abs(s.W[t])));
        }
        EXPECT_NEAR(log_likelihood(c.y, s), static_cast<double>(u.L), 1e-10 * std::abs(static_cast<double>(u.L)));
        EXPECT_FALSE(s.clamped);
    }
}

TEST(State, FirstObservationHasNoFeedback) {
    const Design d = Design::with_intercept(Matrix::Zero(4, 0));
    const CountSeries y(Vector::Constant(4, 2.0));
    const GlarmaState s = compute_state(y, d, Params{Vector::Constant(1, 0.5), Vector::Constant(3, 0.4)});
    EXPECT_DOUBLE_EQ(s.Z[0], 0.0);
    EXPECT_DOUBLE_EQ(s.W[0], 0.5);
    // Z_2 uses E_1 only
    EXPECT_DOUBLE_EQ(s.Z[1], 0.4 * s.E[0]);
}

TEST(State, OrderLongerThanSeriesUsesAvailableLags) {
    std::mt19937_64 gen(2);
    const auto in = oracle::random_instance(gen, 3, 1, 5);
    const auto c = from_instance(in);
    const GlarmaState s = compute_state(c.y, c.design, c.params);
    const auto u = oracle::unrolled(in.y, in.X, in.beta, in.gamma);
    for (int t = 0; t < 3; ++t) EXPECT_NEAR(s.W[t], static_cast<double>(u.W[t]), 1e-12);
}

TEST(State, ZeroGammaIsIndependentPoisson) {
    std::mt19937_64 gen(3);
    const auto in = oracle::random_instance(gen, 30, 3, 2);
    const auto c = from_instance(in);
    const Params p0{in.beta, Vector::Zero(2)};
    const GlarmaState s = compute_state(c.y, c.design, p0);
    const Vector eta = in.X * in.beta;
    for (int t = 0; t < 30; ++t) EXPECT_DOUBLE_EQ(s.W[t], eta[t]);
    EXPECT_NEAR(log_likelihood(c.y, s), oracle::poisson_glm(in.y, in.X, in.beta).L, 1e-10);
}

TEST(State, ClampIsFlaggedAndKeepsValuesFinite) {
    const Design d = Design::with_intercept(Matrix::Zero(3, 0));
    const CountSeries y(Vector::Constant(3, 1.0));
    const GlarmaState s = compute_state(y, d, Params{Vector::Constant(1, 60.0), Vector::Zero(1)});
    EXPECT_TRUE(s.clamped);
    EXPECT_DOUBLE_EQ(s.mu[0], std::exp(kWClamp));
    EXPECT_TRUE(std::isfinite(log_likelihood(y, s)));
}

TEST(State, DimensionErrors) {
    const Design d = Design::with_intercept(Matrix::Zero(5, 2));
    const CountSeries y(Vector::Zero(5));
    EXPECT_THROW(compute_state(CountSeries(Vector::Zero(4)), d, Params{Vector::Zero(3), Vector::Zero(1)}),
                 DimensionError);
    EXPECT_THROW(compute_state(y, d, Params{Vector::Zero(2), Vector::Zero(1)}), DimensionError);
    EXPECT_THROW(compute_state(y, d, Params{Vector::Zero(3), Vector::Zero(0)}), DimensionError);
}

TEST(Inputs, CountsMustBeNonNegativeIntegers) {
    EXPECT_THROW(CountSeries(Vector::Constant(2, -1.0)), UsageError);
    EXPECT_THROW(CountSeries(Vector::Constant(2, 1.5)), UsageError);
    Matrix x = Matrix::Ones(3, 2);
    x(1, 0) = 2.0;
    EXPECT_THROW(Design{x}, UsageError);
}

TEST(Params, StackRoundTrip) {
    const Params p{(Vector(3) << 1, 2, 3).finished(), (Vector(2) << 4, 5).finished()};
    const Vector d = p.stacked();
    const Params back = Params::from_stacked(d, 3);
    EXPECT_EQ(back.beta, p.beta);
    EXPECT_EQ(back.gamma, p.gamma);
}
